#include "leapgrid/matpower.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "leapgrid/errors.hpp"

namespace leapgrid {

namespace {

// Strips a '%' comment, returns the remaining trimmed text.
std::string strip_comment(std::string line) {
    const auto pos = line.find('%');
    if (pos != std::string::npos) line.erase(pos);
    return line;
}

std::vector<std::vector<double>> parse_matrix(std::string_view text, const std::string& name) {
    const std::string key = "mpc." + name;
    std::size_t pos = text.find(key);
    while (pos != std::string::npos) {
        std::size_t eq = text.find('=', pos + key.size());
        // Guard against e.g. "mpc.bus" matching "mpc.busnames".
        std::size_t after = pos + key.size();
        if (after < text.size() && (std::isalnum(text[after]) || text[after] == '_')) {
            pos = text.find(key, pos + 1);
            continue;
        }
        if (eq == std::string::npos) throw ParseError("malformed assignment for " + key);
        std::size_t open = text.find('[', eq);
        if (open == std::string::npos) throw ParseError("missing '[' for " + key);
        std::size_t close = text.find("];", open);
        if (close == std::string::npos) throw ParseError("missing '];' for " + key);
        std::string body(text.substr(open + 1, close - open - 1));

        std::vector<std::vector<double>> rows;
        std::istringstream lines(body);
        std::string line;
        while (std::getline(lines, line)) {
            line = strip_comment(line);
            // Rows can also be ';'-separated on one line.
            std::istringstream row_stream(line);
            std::string row_text;
            while (std::getline(row_stream, row_text, ';')) {
                std::istringstream nums(row_text);
                std::vector<double> row;
                double v;
                while (nums >> v) row.push_back(v);
                if (!nums.eof()) {
                    throw ParseError("non-numeric token in " + key);
                }
                if (!row.empty()) rows.push_back(std::move(row));
            }
        }
        return rows;
    }
    throw ParseError("missing matrix " + key);
}

double parse_scalar(std::string_view text, const std::string& name) {
    const std::string key = "mpc." + name;
    const std::size_t pos = text.find(key);
    if (pos == std::string::npos) throw ParseError("missing scalar " + key);
    const std::size_t eq = text.find('=', pos);
    if (eq == std::string::npos) throw ParseError("malformed assignment for " + key);
    std::istringstream is(std::string(text.substr(eq + 1, 64)));
    double v;
    if (!(is >> v)) throw ParseError("non-numeric value for " + key);
    return v;
}

std::string parse_name(std::string_view text) {
    const std::size_t pos = text.find("function mpc =");
    if (pos == std::string::npos) return "case";
    std::istringstream is(std::string(text.substr(pos + 14, 128)));
    std::string name;
    is >> name;
    return name.empty() ? "case" : name;
}

}  // namespace

GridCase parse_matpower_case(std::string_view text) {
    GridCase grid;
    grid.name = parse_name(text);
    grid.base_mva = parse_scalar(text, "baseMVA");

    const auto bus_rows = parse_matrix(text, "bus");
    const auto gen_rows = parse_matrix(text, "gen");
    const auto branch_rows = parse_matrix(text, "branch");

    // Vg per bus (from the first generator there) for PV/slack setpoints.
    std::map<int, double> vg;
    for (const auto& row : gen_rows) {
        if (row.size() < 6) throw ParseError("gen row with fewer than 6 columns");
        const int bus = static_cast<int>(row[0]);
        if (!vg.count(bus)) vg[bus] = row[5];
    }

    for (const auto& row : bus_rows) {
        if (row.size() < 10) throw ParseError("bus row with fewer than 10 columns");
        Bus b;
        b.id = static_cast<int>(row[0]);
        const int type = static_cast<int>(row[1]);
        switch (type) {
            case 1: b.kind = BusKind::pq; break;
            case 2: b.kind = BusKind::pv; break;
            case 3: b.kind = BusKind::slack; break;
            default:
                throw ValidationError("bus " + std::to_string(b.id) + " has unsupported type " +
                                      std::to_string(type));
        }
        b.base_kv = row[9];
        b.substation_id = b.id;
        const auto it = vg.find(b.id);
        b.voltage_setpoint = it != vg.end() ? it->second : 1.0;
        grid.buses.push_back(b);

        const double pd = row[2], qd = row[3];
        if (pd != 0.0 || qd != 0.0) {
            Injection load;
            load.bus = b.id;
            load.p_mw = -pd;
            load.q_mvar = -qd;
            load.kind = InjectionKind::load;
            grid.injections.push_back(load);
        }
    }

    for (const auto& row : gen_rows) {
        const int bus = static_cast<int>(row[0]);
        if (grid.bus_index(bus) < 0) {
            throw ValidationError("gen row references unknown bus " + std::to_string(bus));
        }
        Injection gen;
        gen.bus = bus;
        gen.p_mw = row[1];
        gen.q_mvar = 0.0;
        gen.kind = InjectionKind::generator;
        grid.injections.push_back(gen);
    }

    for (const auto& row : branch_rows) {
        if (row.size() < 11) throw ParseError("branch row with fewer than 11 columns");
        Branch br;
        br.from_bus = static_cast<int>(row[0]);
        br.to_bus = static_cast<int>(row[1]);
        if (grid.bus_index(br.from_bus) < 0 || grid.bus_index(br.to_bus) < 0) {
            throw ValidationError("branch references unknown bus");
        }
        br.r = row[2];
        br.x = row[3];
        if (br.x == 0.0) {
            throw ValidationError("branch " + std::to_string(br.from_bus) + "-" +
                                  std::to_string(br.to_bus) + " has zero reactance");
        }
        br.b_charging = row[4];
        if (row[5] > 0.0) br.thermal_limit_mw = row[5];
        br.status = static_cast<int>(row[10]);
        grid.branches.push_back(br);
    }

    validate_grid(grid);
    return grid;
}

GridCase load_matpower_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open case file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matpower_case(buf.str());
}

}  // namespace leapgrid
