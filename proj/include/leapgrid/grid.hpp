#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace leapgrid {

enum class BusKind { slack, pv, pq };
enum class InjectionKind { generator, load };

struct Bus {
    int id = 0;  // 1-based external id
    BusKind kind = BusKind::pq;
    double base_kv = 0.0;
    double voltage_setpoint = 1.0;  // per-unit; meaningful for PV/slack buses
    int substation_id = 0;

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;          // per-unit series resistance
    double x = 0.0;          // per-unit series reactance, must be nonzero
    double b_charging = 0.0; // per-unit total line charging susceptance
    int status = 1;          // 1 in service, 0 out of service
    std::optional<double> thermal_limit_mw;

    bool operator==(const Branch&) const = default;
};

struct Injection {
    int bus = 0;
    double p_mw = 0.0;   // signed: production positive, consumption negative
    double q_mvar = 0.0; // signed reactive, loads only (generators solve their own Q)
    InjectionKind kind = InjectionKind::load;

    bool operator==(const Injection&) const = default;
};

struct GridCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Injection> injections;

    bool operator==(const GridCase&) const = default;

    // Index into buses for an external id, or -1.
    int bus_index(int bus_id) const;
    int slack_index() const;
    std::size_t in_service_branches() const;
};

// Throws ValidationError on any broken invariant (ids, slack count,
// branch endpoints, zero reactance, connectivity over in-service branches).
void validate_grid(const GridCase& grid);

// Connectivity over in-service branches only.
bool is_connected(const GridCase& grid);

// True if the grid stays connected with branch `skip_branch` removed.
bool connected_without_branch(const GridCase& grid, std::size_t skip_branch);

// Canonical JSON: stable key order, integer ids, shortest round-trip floats.
nlohmann::ordered_json grid_to_json(const GridCase& grid);
GridCase grid_from_json(const nlohmann::ordered_json& j);

std::string to_string(BusKind kind);
std::string to_string(InjectionKind kind);

// FNV-1a 64-bit over a byte string; used for stable artifact hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace leapgrid
