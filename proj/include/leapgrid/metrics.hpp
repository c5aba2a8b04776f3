#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace leapgrid {

// One evaluation point; CSV columns exactly
// model,seed,epoch,split,mse_std,mse_mw2,mape
struct MetricsRow {
    std::string model;
    std::uint64_t seed = 0;
    int epoch = 0;
    std::string split;  // train | regular_test | super_test
    double mse_std = 0.0;
    double mse_mw2 = 0.0;
    double mape = 0.0;
};

extern const char* const kMetricsCsvHeader;

std::string format_double(double v);  // shortest round-trip decimal

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows,
                       bool append = false);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);  // throws ArtifactError

// Linear interpolation between order statistics (quantile type 7).
double quantile_linear(std::vector<double> values, double q);

struct ReportRow {
    std::string model;
    std::string split;
    int epoch = 0;
    double mse_std_median = 0, mse_std_q20 = 0, mse_std_q80 = 0;
    double mse_mw2_median = 0, mse_mw2_q20 = 0, mse_mw2_q80 = 0;
    double mape_median = 0, mape_q20 = 0, mape_q80 = 0;
};

// Median and [20%, 80%] band across seeds, one row per (model, split, epoch).
std::vector<ReportRow> summarize_metrics(const std::vector<MetricsRow>& rows);
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace leapgrid
