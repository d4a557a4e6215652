#include "aapl/harness/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aapl/error.hpp"

namespace aapl::harness {

using toyworld::augmentation_name;
using toyworld::kAllAugmentations;
using toyworld::kNumAugmentations;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw ConfigError("write failed for " + path.string());
}

}  // namespace

std::string metrics_csv_header() {
  std::string h = "epoch,episodes,total_loss,ce_loss,adtriplet_loss,silhouette_overall,base_acc,new_acc,hm";
  for (auto a : kAllAugmentations) h += ",sil_" + std::string(augmentation_name(a));
  for (auto a : kAllAugmentations) h += ",w_" + std::string(augmentation_name(a));
  return h;
}

std::string metrics_csv(const RunMetrics& metrics) {
  std::ostringstream os;
  os << kMetricsVersionLine << '\n' << metrics_csv_header() << '\n';
  for (const auto& e : metrics.epochs) {
    os << e.epoch << ',' << e.episodes << ',' << opt(e.total_loss) << ',' << opt(e.ce_loss) << ','
       << opt(e.adtriplet_loss) << ',' << format_double(e.silhouette.overall) << ','
       << format_double(e.base_acc) << ',' << format_double(e.new_acc) << ',' << format_double(e.hm);
    for (const auto& s : e.silhouette.per_type) os << ',' << opt(s);
    for (double w : e.sampler_probs) os << ',' << format_double(w);
    os << '\n';
  }
  return os.str();
}

void write_metrics_csv(const RunMetrics& metrics, const std::filesystem::path& path) {
  write_text(metrics_csv(metrics), path);
}

std::string silhouette_report_json(const profiling::SilhouetteReport& report) {
  nlohmann::ordered_json j;
  j["overall"] = report.overall;
  nlohmann::ordered_json types = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    nlohmann::ordered_json row;
    row["samples"] = report.sample_count[t];
    if (report.per_type[t]) row["silhouette"] = *report.per_type[t];
    else row["silhouette"] = nullptr;
    types[std::string(augmentation_name(kAllAugmentations[t]))] = row;
  }
  j["per_type"] = types;
  nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
  for (auto a : profiling::rank_augmentations(report)) ranking.push_back(augmentation_name(a));
  j["ranking"] = ranking;
  return j.dump(2) + "\n";
}

std::string summary_json(const RunMetrics& metrics, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "aapl-summary v1";
  j["seed"] = metrics.seed;
  j["epochs"] = cfg.train.epochs;
  j["alpha"] = cfg.train.alpha;
  j["beta"] = cfg.train.beta;
  j["constraint_mode"] = constraint_mode_name(cfg.train.constraint_mode);
  j["wrs"] = cfg.train.wrs;
  j["base_acc"] = metrics.base_acc;
  j["new_acc"] = metrics.new_acc;
  j["hm"] = metrics.hm;
  j["wall_seconds"] = metrics.wall_seconds;
  j["new_class_train_accesses"] = metrics.new_class_train_accesses;
  j["ce_clamp_warnings"] = metrics.ce_clamp_warnings;
  if (!metrics.epochs.empty()) {
    const auto& last = metrics.epochs.back();
    j["final_silhouette"] = last.silhouette.overall;
    const auto ranked = profiling::rank_augmentations(last.silhouette);
    const std::size_t half = ranked.size() / 2;
    nlohmann::ordered_json good = nlohmann::ordered_json::array();
    nlohmann::ordered_json bad = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      (i < half ? good : bad).push_back(augmentation_name(ranked[i]));
    }
    j["good_augmentations"] = good;
    j["bad_augmentations"] = bad;
  }
  return j.dump(2) + "\n";
}

void write_summary_json(const RunMetrics& metrics, const ExperimentConfig& cfg,
                        const std::filesystem::path& path) {
  write_text(summary_json(metrics, cfg), path);
}

}  // namespace aapl::harness
