#include "leapgrid/actions.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "leapgrid/errors.hpp"

namespace leapgrid {

TopologyVector TopologyVector::unary(std::size_t n, std::size_t i) {
    TopologyVector tau = zeros(n);
    tau.bits.at(i) = 1;
    return tau;
}

TopologyVector TopologyVector::pair(std::size_t n, std::size_t i, std::size_t j) {
    TopologyVector tau = zeros(n);
    tau.bits.at(i) = 1;
    tau.bits.at(j) = 1;
    return tau;
}

int TopologyVector::hamming_weight() const {
    int w = 0;
    for (auto b : bits) w += b != 0;
    return w;
}

namespace {

// Elements attached to a bus: branch endpoints in branch order (status
// ignored; equipment stays attached while switched off), then injections.
std::vector<AttachedElement> attachments(const GridCase& grid, int bus_id) {
    std::vector<AttachedElement> out;
    for (std::size_t i = 0; i < grid.branches.size(); ++i) {
        if (grid.branches[i].from_bus == bus_id) {
            out.push_back({AttachedElement::Kind::branch_from, static_cast<int>(i)});
        }
        if (grid.branches[i].to_bus == bus_id) {
            out.push_back({AttachedElement::Kind::branch_to, static_cast<int>(i)});
        }
    }
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        if (grid.injections[i].bus == bus_id) {
            out.push_back({AttachedElement::Kind::injection, static_cast<int>(i)});
        }
    }
    return out;
}

}  // namespace

ActionDictionary enumerate_actions(const GridCase& grid, const ActionConfig& config) {
    ActionDictionary dict;
    if (config.line_disconnects) {
        for (std::size_t bi = 0; bi < grid.branches.size(); ++bi) {
            if (grid.branches[bi].status == 0) continue;
            if (connected_without_branch(grid, bi)) {
                dict.actions.emplace_back(LineDisconnect{static_cast<int>(bi)});
            }
        }
    }
    if (config.bus_splits) {
        for (const Bus& bus : grid.buses) {
            auto elems = attachments(grid, bus.id);
            if (static_cast<int>(elems.size()) < config.min_split_elements) continue;
            BusSplit split;
            split.substation_id = bus.substation_id;
            for (std::size_t k = 0; k < elems.size(); ++k) {
                (k % 2 == 0 ? split.keep : split.move).push_back(elems[k]);
            }
            dict.actions.emplace_back(std::move(split));
        }
    }
    return dict;
}

GridCase apply_topology(const GridCase& grid, const TopologyVector& tau,
                        const ActionDictionary& dict) {
    if (tau.size() != dict.size()) {
        throw TopologyError("topology vector length " + std::to_string(tau.size()) +
                            " does not match dictionary size " + std::to_string(dict.size()));
    }
    GridCase out = grid;
    int next_id = 0;
    for (const Bus& b : out.buses) next_id = std::max(next_id, b.id);
    ++next_id;

    std::set<int> split_substations;
    for (std::size_t ai = 0; ai < dict.actions.size(); ++ai) {
        if (!tau.bits[ai]) continue;
        const UnaryAction& action = dict.actions[ai];
        if (const auto* line = std::get_if<LineDisconnect>(&action)) {
            const auto bi = static_cast<std::size_t>(line->branch_index);
            if (bi >= out.branches.size()) throw TopologyError("line action out of range");
            out.branches[bi].status = 0;
        } else {
            const auto& split = std::get<BusSplit>(action);
            if (!split_substations.insert(split.substation_id).second) {
                throw TopologyError("conflicting actions on substation " +
                                    std::to_string(split.substation_id));
            }
            // The original bus of this substation in the reference grid.
            int orig_index = -1;
            for (std::size_t i = 0; i < grid.buses.size(); ++i) {
                if (grid.buses[i].substation_id == split.substation_id) {
                    orig_index = static_cast<int>(i);
                    break;
                }
            }
            if (orig_index < 0) throw TopologyError("split references unknown substation");
            Bus& orig = out.buses[orig_index];

            Bus fresh;
            fresh.id = next_id++;
            fresh.kind = BusKind::pq;
            fresh.base_kv = orig.base_kv;
            fresh.voltage_setpoint = orig.voltage_setpoint;
            fresh.substation_id = orig.substation_id;

            bool moved_generator = false;
            for (const AttachedElement& el : split.move) {
                switch (el.kind) {
                    case AttachedElement::Kind::branch_from:
                        out.branches.at(el.index).from_bus = fresh.id;
                        break;
                    case AttachedElement::Kind::branch_to:
                        out.branches.at(el.index).to_bus = fresh.id;
                        break;
                    case AttachedElement::Kind::injection:
                        out.injections.at(el.index).bus = fresh.id;
                        if (out.injections[el.index].kind == InjectionKind::generator) {
                            moved_generator = true;
                        }
                        break;
                }
            }
            if (moved_generator) fresh.kind = BusKind::pv;
            // A PV bus that lost every generator reverts to PQ; the slack
            // marker never moves.
            if (orig.kind == BusKind::pv) {
                bool has_gen = false;
                for (const Injection& inj : out.injections) {
                    if (inj.bus == orig.id && inj.kind == InjectionKind::generator) has_gen = true;
                }
                if (!has_gen) orig.kind = BusKind::pq;
            }
            out.buses.push_back(fresh);
        }
    }

    if (!is_connected(out)) {
        throw TopologyError("applied topology disconnects the grid");
    }
    return out;
}

namespace {

nlohmann::ordered_json element_to_json(const AttachedElement& el) {
    nlohmann::ordered_json j;
    switch (el.kind) {
        case AttachedElement::Kind::branch_from: j["kind"] = "branch_from"; break;
        case AttachedElement::Kind::branch_to: j["kind"] = "branch_to"; break;
        case AttachedElement::Kind::injection: j["kind"] = "injection"; break;
    }
    j["index"] = el.index;
    return j;
}

AttachedElement element_from_json(const nlohmann::ordered_json& j) {
    AttachedElement el;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "branch_from") {
        el.kind = AttachedElement::Kind::branch_from;
    } else if (kind == "branch_to") {
        el.kind = AttachedElement::Kind::branch_to;
    } else if (kind == "injection") {
        el.kind = AttachedElement::Kind::injection;
    } else {
        throw ParseError("unknown attached-element kind '" + kind + "'");
    }
    el.index = j.at("index").get<int>();
    return el;
}

}  // namespace

nlohmann::ordered_json dictionary_to_json(const ActionDictionary& dict) {
    nlohmann::ordered_json j;
    auto& actions = j["actions"] = nlohmann::ordered_json::array();
    for (const UnaryAction& action : dict.actions) {
        nlohmann::ordered_json aj;
        if (const auto* line = std::get_if<LineDisconnect>(&action)) {
            aj["type"] = "line_disconnect";
            aj["branch"] = line->branch_index;
        } else {
            const auto& split = std::get<BusSplit>(action);
            aj["type"] = "bus_split";
            aj["substation"] = split.substation_id;
            auto& keep = aj["keep"] = nlohmann::ordered_json::array();
            for (const auto& el : split.keep) keep.push_back(element_to_json(el));
            auto& move = aj["move"] = nlohmann::ordered_json::array();
            for (const auto& el : split.move) move.push_back(element_to_json(el));
        }
        actions.push_back(std::move(aj));
    }
    return j;
}

ActionDictionary dictionary_from_json(const nlohmann::ordered_json& j) {
    ActionDictionary dict;
    try {
        for (const auto& aj : j.at("actions")) {
            const std::string type = aj.at("type").get<std::string>();
            if (type == "line_disconnect") {
                dict.actions.emplace_back(LineDisconnect{aj.at("branch").get<int>()});
            } else if (type == "bus_split") {
                BusSplit split;
                split.substation_id = aj.at("substation").get<int>();
                for (const auto& el : aj.at("keep")) split.keep.push_back(element_from_json(el));
                for (const auto& el : aj.at("move")) split.move.push_back(element_from_json(el));
                dict.actions.emplace_back(std::move(split));
            } else {
                throw ParseError("unknown action type '" + type + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad dictionary JSON: ") + e.what());
    }
    return dict;
}

std::string dictionary_hash(const ActionDictionary& dict) {
    return fnv1a64_hex(dictionary_to_json(dict).dump());
}

}  // namespace leapgrid
