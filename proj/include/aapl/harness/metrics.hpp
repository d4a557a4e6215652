#pragma once

#include <filesystem>
#include <string>

#include "aapl/harness/config.hpp"
#include "aapl/harness/experiment.hpp"

namespace aapl::harness {

inline constexpr std::string_view kMetricsVersionLine = "# aapl-metrics v1";

// Column order: epoch, episodes, total_loss, ce_loss, adtriplet_loss,
// silhouette_overall, base_acc, new_acc, hm, sil_<type> x14, w_<type> x14.
// Doubles use 17 significant digits; absent values are empty fields. Contains
// nothing time-dependent, so identical runs produce identical bytes.
std::string metrics_csv_header();
std::string metrics_csv(const RunMetrics& metrics);
void write_metrics_csv(const RunMetrics& metrics, const std::filesystem::path& path);

// Summary with final accuracies, wall-clock time, counters and the augmentation
// ranking (top half "good", bottom half "bad") from the last profiling pass.
std::string summary_json(const RunMetrics& metrics, const ExperimentConfig& cfg);
void write_summary_json(const RunMetrics& metrics, const ExperimentConfig& cfg,
                        const std::filesystem::path& path);

std::string silhouette_report_json(const profiling::SilhouetteReport& report);

std::string format_double(double v);

}  // namespace aapl::harness
