#include "leapgrid/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "leapgrid/errors.hpp"

namespace leapgrid {

const char* const kMetricsCsvHeader = "model,seed,epoch,split,mse_std,mse_mw2,mape";

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows, bool append) {
    const bool add_header = [&] {
        if (!append) return true;
        std::ifstream probe(path);
        return !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    }();
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw ArtifactError("cannot write metrics CSV '" + path + "'");
    if (add_header) out << kMetricsCsvHeader << "\n";
    for (const MetricsRow& r : rows) {
        out << r.model << "," << r.seed << "," << r.epoch << "," << r.split << ","
            << format_double(r.mse_std) << "," << format_double(r.mse_mw2) << ","
            << format_double(r.mape) << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

double parse_num(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ArtifactError("trailing characters in number '" + s + "'");
        return v;
    } catch (const std::exception&) {
        throw ArtifactError("bad numeric field '" + s + "' in metrics CSV");
    }
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open metrics CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ArtifactError("metrics CSV '" + path + "' is empty");
    if (line != kMetricsCsvHeader) {
        throw ArtifactError("metrics CSV header mismatch in '" + path + "'");
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 7) {
            throw ArtifactError("metrics CSV row with " + std::to_string(fields.size()) +
                                " fields (want 7)");
        }
        MetricsRow r;
        r.model = fields[0];
        r.seed = static_cast<std::uint64_t>(parse_num(fields[1]));
        r.epoch = static_cast<int>(parse_num(fields[2]));
        r.split = fields[3];
        r.mse_std = parse_num(fields[4]);
        r.mse_mw2 = parse_num(fields[5]);
        r.mape = parse_num(fields[6]);
        if (!std::isfinite(r.mse_std) || !std::isfinite(r.mse_mw2) || !std::isfinite(r.mape)) {
            throw ArtifactError("non-finite metric value in '" + path + "'");
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ArtifactError("metrics CSV '" + path + "' has no data rows");
    return rows;
}

double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw ArtifactError("quantile of empty set");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<ReportRow> summarize_metrics(const std::vector<MetricsRow>& rows) {
    // Keyed by (model, split, epoch), values across seeds.
    std::map<std::tuple<std::string, std::string, int>, std::vector<MetricsRow>> groups;
    for (const MetricsRow& r : rows) {
        groups[{r.model, r.split, r.epoch}].push_back(r);
    }
    std::vector<ReportRow> out;
    for (const auto& [key, members] : groups) {
        ReportRow rr;
        rr.model = std::get<0>(key);
        rr.split = std::get<1>(key);
        rr.epoch = std::get<2>(key);
        std::vector<double> a, b, c;
        for (const auto& m : members) {
            a.push_back(m.mse_std);
            b.push_back(m.mse_mw2);
            c.push_back(m.mape);
        }
        rr.mse_std_median = quantile_linear(a, 0.5);
        rr.mse_std_q20 = quantile_linear(a, 0.2);
        rr.mse_std_q80 = quantile_linear(a, 0.8);
        rr.mse_mw2_median = quantile_linear(b, 0.5);
        rr.mse_mw2_q20 = quantile_linear(b, 0.2);
        rr.mse_mw2_q80 = quantile_linear(b, 0.8);
        rr.mape_median = quantile_linear(c, 0.5);
        rr.mape_q20 = quantile_linear(c, 0.2);
        rr.mape_q80 = quantile_linear(c, 0.8);
        out.push_back(std::move(rr));
    }
    return out;
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write report CSV '" + path + "'");
    out << "# quantiles: linear interpolation between order statistics (q20/median/q80 across seeds)\n";
    out << "model,split,epoch,mse_std_median,mse_std_q20,mse_std_q80,"
           "mse_mw2_median,mse_mw2_q20,mse_mw2_q80,mape_median,mape_q20,mape_q80\n";
    for (const ReportRow& r : rows) {
        out << r.model << "," << r.split << "," << r.epoch << "," << format_double(r.mse_std_median)
            << "," << format_double(r.mse_std_q20) << "," << format_double(r.mse_std_q80) << ","
            << format_double(r.mse_mw2_median) << "," << format_double(r.mse_mw2_q20) << ","
            << format_double(r.mse_mw2_q80) << "," << format_double(r.mape_median) << ","
            << format_double(r.mape_q20) << "," << format_double(r.mape_q80) << "\n";
    }
}

}  // namespace leapgrid
