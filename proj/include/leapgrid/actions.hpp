#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "leapgrid/grid.hpp"

namespace leapgrid {

// One endpoint of a branch, or an injection, attached to a substation.
struct AttachedElement {
    enum class Kind { branch_from, branch_to, injection };
    Kind kind = Kind::injection;
    int index = 0;  // index into GridCase::branches or ::injections

    bool operator==(const AttachedElement&) const = default;
};

struct LineDisconnect {
    int branch_index = 0;
    bool operator==(const LineDisconnect&) const = default;
};

// Splits a substation's bus in two: `keep` stays on the original bus,
// `move` is reassigned to a freshly appended bus. The two sets are
// disjoint and together cover every element attached to the substation.
struct BusSplit {
    int substation_id = 0;
    std::vector<AttachedElement> keep;
    std::vector<AttachedElement> move;
    bool operator==(const BusSplit&) const = default;
};

using UnaryAction = std::variant<LineDisconnect, BusSplit>;

struct ActionConfig {
    bool line_disconnects = true;
    bool bus_splits = true;
    int min_split_elements = 4;
};

// Fixed, ordered dictionary of unary actions; its order defines the
// index space of TopologyVector.
struct ActionDictionary {
    std::vector<UnaryAction> actions;

    std::size_t size() const { return actions.size(); }
    bool operator==(const ActionDictionary&) const = default;
};

// Binary perturbation vector over an ActionDictionary.
struct TopologyVector {
    std::vector<std::uint8_t> bits;

    static TopologyVector zeros(std::size_t n) { return TopologyVector{std::vector<std::uint8_t>(n, 0)}; }
    static TopologyVector unary(std::size_t n, std::size_t i);
    static TopologyVector pair(std::size_t n, std::size_t i, std::size_t j);

    std::size_t size() const { return bits.size(); }
    int hamming_weight() const;
    bool is_reference() const { return hamming_weight() == 0; }
    bool operator==(const TopologyVector&) const = default;
};

// Deterministic enumeration: one LineDisconnect per in-service branch whose
// removal keeps the grid connected (in branch order), then one BusSplit per
// substation with at least `min_split_elements` attached elements, with the
// odd positions of the attachment list (branches first, then injections)
// moved to the new bus.
ActionDictionary enumerate_actions(const GridCase& grid, const ActionConfig& config = {});

// Applies the actions flagged in tau to a copy of the grid. Line
// disconnections flip branch status to 0; bus splits append a new bus and
// reassign the `move` set to it. Throws TopologyError if two actions target
// the same substation or the result is disconnected.
GridCase apply_topology(const GridCase& grid, const TopologyVector& tau, const ActionDictionary& dict);

nlohmann::ordered_json dictionary_to_json(const ActionDictionary& dict);
ActionDictionary dictionary_from_json(const nlohmann::ordered_json& j);

// FNV-1a of the canonical JSON; ties datasets to the dictionary they used.
std::string dictionary_hash(const ActionDictionary& dict);

}  // namespace leapgrid
