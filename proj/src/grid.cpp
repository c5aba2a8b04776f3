#include "leapgrid/grid.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include "leapgrid/errors.hpp"

namespace leapgrid {

int GridCase::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == bus_id) return static_cast<int>(i);
    }
    return -1;
}

int GridCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind == BusKind::slack) return static_cast<int>(i);
    }
    return -1;
}

std::size_t GridCase::in_service_branches() const {
    return static_cast<std::size_t>(
        std::count_if(branches.begin(), branches.end(), [](const Branch& b) { return b.status != 0; }));
}

namespace {

std::vector<char> reachable_from(const GridCase& grid, int start,
                                 std::size_t skip_branch = static_cast<std::size_t>(-1)) {
    const std::size_t n = grid.buses.size();
    std::vector<std::vector<int>> adj(n);
    for (std::size_t bi = 0; bi < grid.branches.size(); ++bi) {
        if (bi == skip_branch || grid.branches[bi].status == 0) continue;
        const int f = grid.bus_index(grid.branches[bi].from_bus);
        const int t = grid.bus_index(grid.branches[bi].to_bus);
        if (f < 0 || t < 0) continue;
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_connected(const GridCase& grid) {
    if (grid.buses.empty()) return false;
    const auto seen = reachable_from(grid, 0);
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

bool connected_without_branch(const GridCase& grid, std::size_t skip_branch) {
    if (grid.buses.empty()) return false;
    const auto seen = reachable_from(grid, 0, skip_branch);
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

void validate_grid(const GridCase& grid) {
    if (grid.base_mva <= 0) throw ValidationError("base_MVA must be positive");
    if (grid.buses.empty()) throw ValidationError("grid has no buses");

    std::set<int> ids;
    int slack_count = 0;
    for (const Bus& b : grid.buses) {
        if (!ids.insert(b.id).second) {
            throw ValidationError("duplicate bus id " + std::to_string(b.id));
        }
        if (b.base_kv <= 0) {
            throw ValidationError("bus " + std::to_string(b.id) + " has non-positive base_kV");
        }
        if (b.kind == BusKind::slack) ++slack_count;
    }
    if (slack_count != 1) {
        throw ValidationError("grid must have exactly one slack bus, found " +
                              std::to_string(slack_count));
    }

    for (std::size_t i = 0; i < grid.branches.size(); ++i) {
        const Branch& br = grid.branches[i];
        if (br.from_bus == br.to_bus) {
            throw ValidationError("branch " + std::to_string(i) + " is a self-loop");
        }
        if (br.x == 0.0) {
            throw ValidationError("branch " + std::to_string(i) + " has zero reactance");
        }
        if (grid.bus_index(br.from_bus) < 0 || grid.bus_index(br.to_bus) < 0) {
            throw ValidationError("branch " + std::to_string(i) + " references unknown bus");
        }
    }
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        if (grid.bus_index(grid.injections[i].bus) < 0) {
            throw ValidationError("injection " + std::to_string(i) + " references unknown bus");
        }
    }
    if (!is_connected(grid)) {
        throw ValidationError("grid is not connected over in-service branches");
    }
}

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::slack: return "slack";
        case BusKind::pv: return "pv";
        case BusKind::pq: return "pq";
    }
    return "pq";
}

std::string to_string(InjectionKind kind) {
    return kind == InjectionKind::generator ? "generator" : "load";
}

namespace {

BusKind bus_kind_from_string(const std::string& s) {
    if (s == "slack") return BusKind::slack;
    if (s == "pv") return BusKind::pv;
    if (s == "pq") return BusKind::pq;
    throw ValidationError("unknown bus kind '" + s + "'");
}

InjectionKind injection_kind_from_string(const std::string& s) {
    if (s == "generator") return InjectionKind::generator;
    if (s == "load") return InjectionKind::load;
    throw ValidationError("unknown injection kind '" + s + "'");
}

}  // namespace

nlohmann::ordered_json grid_to_json(const GridCase& grid) {
    nlohmann::ordered_json j;
    j["name"] = grid.name;
    j["base_mva"] = grid.base_mva;
    auto& buses = j["buses"] = nlohmann::ordered_json::array();
    for (const Bus& b : grid.buses) {
        nlohmann::ordered_json bj;
        bj["id"] = b.id;
        bj["kind"] = to_string(b.kind);
        bj["base_kv"] = b.base_kv;
        bj["voltage_setpoint"] = b.voltage_setpoint;
        bj["substation_id"] = b.substation_id;
        buses.push_back(std::move(bj));
    }
    auto& branches = j["branches"] = nlohmann::ordered_json::array();
    for (const Branch& br : grid.branches) {
        nlohmann::ordered_json bj;
        bj["from"] = br.from_bus;
        bj["to"] = br.to_bus;
        bj["r"] = br.r;
        bj["x"] = br.x;
        bj["b"] = br.b_charging;
        bj["status"] = br.status;
        if (br.thermal_limit_mw) {
            bj["thermal_limit_mw"] = *br.thermal_limit_mw;
        } else {
            bj["thermal_limit_mw"] = nullptr;
        }
        branches.push_back(std::move(bj));
    }
    auto& injections = j["injections"] = nlohmann::ordered_json::array();
    for (const Injection& inj : grid.injections) {
        nlohmann::ordered_json ij;
        ij["bus"] = inj.bus;
        ij["p_mw"] = inj.p_mw;
        ij["q_mvar"] = inj.q_mvar;
        ij["kind"] = to_string(inj.kind);
        injections.push_back(std::move(ij));
    }
    return j;
}

GridCase grid_from_json(const nlohmann::ordered_json& j) {
    GridCase grid;
    try {
        grid.name = j.at("name").get<std::string>();
        grid.base_mva = j.at("base_mva").get<double>();
        for (const auto& bj : j.at("buses")) {
            Bus b;
            b.id = bj.at("id").get<int>();
            b.kind = bus_kind_from_string(bj.at("kind").get<std::string>());
            b.base_kv = bj.at("base_kv").get<double>();
            b.voltage_setpoint = bj.at("voltage_setpoint").get<double>();
            b.substation_id = bj.at("substation_id").get<int>();
            grid.buses.push_back(b);
        }
        for (const auto& bj : j.at("branches")) {
            Branch br;
            br.from_bus = bj.at("from").get<int>();
            br.to_bus = bj.at("to").get<int>();
            br.r = bj.at("r").get<double>();
            br.x = bj.at("x").get<double>();
            br.b_charging = bj.at("b").get<double>();
            br.status = bj.at("status").get<int>();
            if (!bj.at("thermal_limit_mw").is_null()) {
                br.thermal_limit_mw = bj.at("thermal_limit_mw").get<double>();
            }
            grid.branches.push_back(br);
        }
        for (const auto& ij : j.at("injections")) {
            Injection inj;
            inj.bus = ij.at("bus").get<int>();
            inj.p_mw = ij.at("p_mw").get<double>();
            inj.q_mvar = ij.at("q_mvar").get<double>();
            inj.kind = injection_kind_from_string(ij.at("kind").get<std::string>());
            grid.injections.push_back(inj);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid JSON: ") + e.what());
    }
    validate_grid(grid);
    return grid;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << fnv1a64(bytes);
    return os.str();
}

}  // namespace leapgrid
