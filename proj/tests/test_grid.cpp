#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "leapgrid/actions.hpp"
#include "leapgrid/errors.hpp"
#include "leapgrid/grid.hpp"
#include "leapgrid/matpower.hpp"
#include "test_util.hpp"

using namespace leapgrid;

namespace {

std::string read_case(const std::string& name) {
    std::ifstream in(case_path(name));
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Independent bridge finder (Tarjan lowlink over the in-service multigraph),
// used as the oracle for the line-disconnect enumeration.
struct BridgeOracle {
    const GridCase& grid;
    std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, branch id)
    std::vector<int> disc, low;
    std::vector<char> is_bridge;
    int timer = 0;

    explicit BridgeOracle(const GridCase& g) : grid(g) {
        const int n = static_cast<int>(g.buses.size());
        adj.resize(n);
        disc.assign(n, -1);
        low.assign(n, 0);
        is_bridge.assign(g.branches.size(), 0);
        for (std::size_t bi = 0; bi < g.branches.size(); ++bi) {
            if (g.branches[bi].status == 0) continue;
            const int f = g.bus_index(g.branches[bi].from_bus);
            const int t = g.bus_index(g.branches[bi].to_bus);
            adj[f].push_back({t, static_cast<int>(bi)});
            adj[t].push_back({f, static_cast<int>(bi)});
        }
        for (int i = 0; i < n; ++i) {
            if (disc[i] < 0) dfs(i, -1);
        }
    }

    void dfs(int u, int via_edge) {
        disc[u] = low[u] = timer++;
        for (const auto& [v, edge] : adj[u]) {
            if (edge == via_edge) continue;
            if (disc[v] < 0) {
                dfs(v, edge);
                low[u] = std::min(low[u], low[v]);
                if (low[v] > disc[u]) is_bridge[edge] = 1;
            } else {
                low[u] = std::min(low[u], disc[v]);
            }
        }
    }
};

}  // namespace

TEST_CASE("case14 parses with the expected structure") {
    const GridCase g = parse_matpower_case(read_case("case14.m"));
    CHECK(g.name == "case14");
    CHECK(g.base_mva == 100.0);
    CHECK(g.buses.size() == 14);
    CHECK(g.branches.size() == 20);
    int gens = 0, loads = 0;
    for (const auto& inj : g.injections) {
        (inj.kind == InjectionKind::generator ? gens : loads)++;
    }
    CHECK(gens == 5);
    CHECK(loads == 11);
    CHECK(g.injections.size() == 16);

    CHECK(g.buses[0].kind == BusKind::slack);
    CHECK(g.buses[0].voltage_setpoint == doctest::Approx(1.06));
    CHECK(g.branches[0].r == doctest::Approx(0.01938));
    CHECK(g.branches[0].x == doctest::Approx(0.05917));
    // Loads are stored as signed injections (consumption negative).
    const Injection& bus2_load = g.injections[0];
    CHECK(bus2_load.kind == InjectionKind::load);
    CHECK(bus2_load.bus == 2);
    CHECK(bus2_load.p_mw == doctest::Approx(-21.7));
    CHECK(bus2_load.q_mvar == doctest::Approx(-12.7));
}

TEST_CASE("case118 has the published dimensions") {
    const GridCase g = parse_matpower_case(read_case("case118.m"));
    CHECK(g.buses.size() == 118);
    CHECK(g.branches.size() == 186);
    CHECK(g.injections.size() == 153);
    int gens = 0;
    for (const auto& inj : g.injections) gens += inj.kind == InjectionKind::generator;
    CHECK(gens == 54);
    CHECK(g.injections.size() - gens == 99);
}

TEST_CASE("case30 parses and validates") {
    const GridCase g = parse_matpower_case(read_case("case30.m"));
    CHECK(g.buses.size() == 30);
    CHECK(g.branches.size() == 41);
    CHECK(g.injections.size() == 26);
    CHECK_NOTHROW(validate_grid(g));
}

TEST_CASE("parser rejects degenerate input") {
    CHECK_THROWS_AS(parse_matpower_case(""), ParseError);
    CHECK_THROWS_AS(parse_matpower_case("mpc.baseMVA = 100;"), ParseError);

    // Unknown bus in gen matrix.
    const std::string bad_gen = R"(
mpc.baseMVA = 100;
mpc.bus = [
 1 3 0 0 0 0 1 1 0 100 1 1.1 0.9;
 2 1 10 2 0 0 1 1 0 100 1 1.1 0.9;
];
mpc.gen = [ 7 10 0 10 -10 1.0 100 1 20 0; ];
mpc.branch = [ 1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360; ];
)";
    CHECK_THROWS_AS(parse_matpower_case(bad_gen), ValidationError);

    const std::string zero_x = R"(
mpc.baseMVA = 100;
mpc.bus = [
 1 3 0 0 0 0 1 1 0 100 1 1.1 0.9;
 2 1 10 2 0 0 1 1 0 100 1 1.1 0.9;
];
mpc.gen = [ 1 10 0 10 -10 1.0 100 1 20 0; ];
mpc.branch = [ 1 2 0.01 0.0 0 0 0 0 0 0 1 -360 360; ];
)";
    CHECK_THROWS_AS(parse_matpower_case(zero_x), ValidationError);
}

TEST_CASE("out-of-service branch rows are preserved") {
    const std::string text = R"(
function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
 1 3 0 0 0 0 1 1 0 100 1 1.1 0.9;
 2 1 10 2 0 0 1 1 0 100 1 1.1 0.9;
];
mpc.gen = [ 1 10 0 10 -10 1.0 100 1 20 0; ];
mpc.branch = [
 1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360;
 1 2 0.02 0.2 0 0 0 0 0 0 0 -360 360;
];
)";
    const GridCase g = parse_matpower_case(text);
    CHECK(g.branches.size() == 2);
    CHECK(g.branches[1].status == 0);
    CHECK(g.in_service_branches() == 1);
}

TEST_CASE("grid JSON round-trip is exact") {
    for (const char* name : {"case14.m", "case118.m"}) {
        const GridCase g = parse_matpower_case(read_case(name));
        const GridCase back = grid_from_json(grid_to_json(g));
        CHECK(back == g);
        // Canonical serialization is stable.
        CHECK(grid_to_json(back).dump() == grid_to_json(g).dump());
    }
}

TEST_CASE("fnv1a64 is the reference function") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64_hex("abc") == "e71fa2190541574b");
}

TEST_CASE("two-bus grid enumerates no actions") {
    const ActionDictionary dict = enumerate_actions(two_bus_grid());
    CHECK(dict.size() == 0);
}

TEST_CASE("case14 enumeration matches the independent bridge/degree oracle") {
    const GridCase g = parse_matpower_case(read_case("case14.m"));
    const ActionDictionary dict = enumerate_actions(g);

    const BridgeOracle oracle(g);
    int non_bridge = 0;
    for (std::size_t bi = 0; bi < g.branches.size(); ++bi) {
        if (g.branches[bi].status != 0 && !oracle.is_bridge[bi]) ++non_bridge;
    }
    std::map<int, int> degree;
    for (const Branch& br : g.branches) {
        degree[br.from_bus]++;
        degree[br.to_bus]++;
    }
    for (const Injection& inj : g.injections) degree[inj.bus]++;
    int splittable = 0;
    for (const auto& [bus, d] : degree) {
        if (d >= 4) ++splittable;
    }

    CHECK(dict.size() == static_cast<std::size_t>(non_bridge + splittable));

    int line_actions = 0, split_actions = 0;
    for (const auto& action : dict.actions) {
        if (std::holds_alternative<LineDisconnect>(action)) {
            ++line_actions;
            CHECK_FALSE(oracle.is_bridge[std::get<LineDisconnect>(action).branch_index]);
        } else {
            ++split_actions;
            const auto& split = std::get<BusSplit>(action);
            CHECK_FALSE(split.keep.empty());
            CHECK_FALSE(split.move.empty());
            CHECK(split.keep.size() + split.move.size() >= 4);
        }
    }
    CHECK(line_actions == non_bridge);
    CHECK(split_actions == splittable);

    // Determinism: identical dictionaries on repeated runs.
    CHECK(enumerate_actions(g) == dict);
    CHECK(dictionary_hash(enumerate_actions(g)) == dictionary_hash(dict));
}

TEST_CASE("dictionary JSON round-trip") {
    const GridCase g = parse_matpower_case(read_case("case14.m"));
    const ActionDictionary dict = enumerate_actions(g);
    const ActionDictionary back = dictionary_from_json(dictionary_to_json(dict));
    CHECK(back == dict);
}

TEST_CASE("apply_topology identity, purity and action effects") {
    const GridCase g = parse_matpower_case(read_case("case14.m"));
    const ActionDictionary dict = enumerate_actions(g);
    REQUIRE(dict.size() > 0);

    const TopologyVector tau0 = TopologyVector::zeros(dict.size());
    CHECK(apply_topology(g, tau0, dict) == g);

    for (std::size_t i = 0; i < dict.size(); ++i) {
        const TopologyVector tau = TopologyVector::unary(dict.size(), i);
        const GridCase a = apply_topology(g, tau, dict);
        const GridCase b = apply_topology(g, tau, dict);
        CHECK(a == b);  // purity
        CHECK_NOTHROW(validate_grid(a));
        if (std::holds_alternative<LineDisconnect>(dict.actions[i])) {
            CHECK(a.buses.size() == g.buses.size());
            CHECK(a.in_service_branches() == g.in_service_branches() - 1);
            int flipped = 0;
            for (std::size_t bi = 0; bi < g.branches.size(); ++bi) {
                if (a.branches[bi].status != g.branches[bi].status) ++flipped;
            }
            CHECK(flipped == 1);
        } else {
            CHECK(a.buses.size() == g.buses.size() + 1);
            CHECK(a.branches.size() == g.branches.size());
        }
    }
    // Input grid untouched throughout.
    CHECK(g == parse_matpower_case(read_case("case14.m")));
}

TEST_CASE("apply_topology failure modes") {
    const GridCase g = two_bus_grid();
    ActionDictionary dict;
    dict.actions.emplace_back(LineDisconnect{0});  // the only line: a bridge
    CHECK_THROWS_AS(apply_topology(g, TopologyVector::unary(1, 0), dict), TopologyError);

    // Mismatched tau length.
    CHECK_THROWS_AS(apply_topology(g, TopologyVector::zeros(3), dict), TopologyError);

    // Two splits against one substation conflict.
    const GridCase g14 = parse_matpower_case(read_case("case14.m"));
    const ActionDictionary d14 = enumerate_actions(g14);
    int split_index = -1;
    for (std::size_t i = 0; i < d14.size(); ++i) {
        if (std::holds_alternative<BusSplit>(d14.actions[i])) {
            split_index = static_cast<int>(i);
            break;
        }
    }
    REQUIRE(split_index >= 0);
    ActionDictionary dup;
    dup.actions.push_back(d14.actions[split_index]);
    dup.actions.push_back(d14.actions[split_index]);
    CHECK_THROWS_AS(apply_topology(g14, TopologyVector::pair(2, 0, 1), dup), TopologyError);
}

TEST_CASE("grid validation rejects broken invariants") {
    GridCase g = two_bus_grid();
    g.buses[1].id = 1;  // duplicate id
    CHECK_THROWS_AS(validate_grid(g), ValidationError);

    g = two_bus_grid();
    g.buses[1].kind = BusKind::slack;  // two slacks
    CHECK_THROWS_AS(validate_grid(g), ValidationError);

    g = two_bus_grid();
    g.buses[0].base_kv = 0.0;
    CHECK_THROWS_AS(validate_grid(g), ValidationError);

    g = two_bus_grid();
    g.branches[0].status = 0;  // disconnected
    CHECK_THROWS_AS(validate_grid(g), ValidationError);
}
