#include "aapl/profiling/profile.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "aapl/error.hpp"
#include "aapl/numcore/tape.hpp"
#include "aapl/seed.hpp"

namespace aapl::profiling {

using toyworld::kAllAugmentations;
using toyworld::Partition;

std::vector<DeltaRecord> collect_delta_tokens(const promptcore::PromptModel& model,
                                              const toyworld::ToyDataset& ds,
                                              const ProfileConfig& cfg) {
  if (cfg.samples < 1) throw ConfigError("profile: sample count must be positive");
  const auto base = ds.base_classes();
  for (int c : base) {
    if (ds.images(c, Partition::kVal).empty()) {
      throw ConfigError("profile: class " + std::to_string(c) + " has no validation images");
    }
  }
  const auto n = static_cast<std::size_t>(cfg.samples);
  const std::size_t nb = base.size();
  std::vector<DeltaRecord> records(n * kNumAugmentations);
  const auto& enc = model.encoders();

  // Class-mean variant: reference features per base class, computed once.
  std::vector<std::vector<numcore::Tensor>> class_refs(nb);
  if (cfg.variant == promptcore::DeltaVariant::kClassMean) {
    numcore::NoGradGuard no_grad;
    for (std::size_t k = 0; k < nb; ++k) {
      for (const auto& img : ds.images(base[k], Partition::kVal)) {
        class_refs[k].push_back(enc.encode_image(img));
      }
    }
  }

  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    numcore::NoGradGuard no_grad;
    const auto us = static_cast<std::size_t>(s);
    const std::size_t k = us % nb;
    const auto val = ds.images(base[k], Partition::kVal);
    const auto& img = val[(us / nb) % val.size()];
    const numcore::Tensor original = enc.encode_image(img);
    std::span<const numcore::Tensor> refs =
        cfg.variant == promptcore::DeltaVariant::kClassMean
            ? std::span<const numcore::Tensor>(class_refs[k])
            : std::span<const numcore::Tensor>(&original, 1);
    for (std::size_t t = 0; t < kNumAugmentations; ++t) {
      const auto aug = kAllAugmentations[t];
      const auto seed = derive_seed(cfg.seed, us * kNumAugmentations + t);
      auto augmented = enc.encode_image(toyworld::apply_augmentation(img, aug, seed));
      auto delta = promptcore::delta_from_features(model, augmented, refs, img.class_id, aug);
      auto& rec = records[us * kNumAugmentations + t];
      rec.class_id = img.class_id;
      rec.augmentation = aug;
      rec.epoch = cfg.epoch;
      rec.values.assign(delta.value.data().begin(), delta.value.data().end());
    }
  }
  return records;
}

SilhouetteReport profile_report(std::span<const DeltaRecord> records) {
  if (records.empty()) throw ConfigError("profile_report: no records");
  const std::size_t dim = records.front().values.size();
  std::vector<double> points;
  std::vector<int> labels;
  points.reserve(records.size() * dim);
  for (const auto& r : records) {
    if (r.values.size() != dim) throw ShapeError("profile_report: records differ in dimension");
    points.insert(points.end(), r.values.begin(), r.values.end());
    labels.push_back(static_cast<int>(toyworld::index_of(r.augmentation)));
  }
  const auto sil = silhouette_scores(points, dim, labels);
  SilhouetteReport report;
  report.overall = sil.overall;
  for (std::size_t k = 0; k < sil.cluster_labels.size(); ++k) {
    const auto t = static_cast<std::size_t>(sil.cluster_labels[k]);
    report.sample_count[t] = sil.cluster_size[k];
    if (sil.cluster_size[k] >= 2) report.per_type[t] = sil.cluster_mean[k];
  }
  return report;
}

void write_embedding_dump(std::span<const DeltaRecord> records, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("embedding dump: cannot open " + path.string());
  const std::size_t dim = records.empty() ? 0 : records.front().values.size();
  os << "class_id,augmentation,epoch";
  for (std::size_t j = 0; j < dim; ++j) os << ",d" << j;
  os << '\n';
  char buf[32];
  for (const auto& r : records) {
    os << r.class_id << ',' << toyworld::augmentation_name(r.augmentation) << ',' << r.epoch;
    for (double v : r.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
  if (!os) throw ConfigError("embedding dump: write failed for " + path.string());
}

std::vector<DeltaRecord> read_embedding_dump(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("embedding dump: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("class_id,augmentation,epoch", 0) != 0) {
    throw ConfigError("embedding dump: missing header in " + path.string());
  }
  std::vector<DeltaRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    DeltaRecord r;
    std::getline(ss, field, ',');
    r.class_id = std::stoi(field);
    std::getline(ss, field, ',');
    auto aug = toyworld::parse_augmentation(field);
    if (!aug) throw ConfigError("embedding dump: unknown augmentation '" + field + "'");
    r.augmentation = *aug;
    std::getline(ss, field, ',');
    r.epoch = std::stoi(field);
    while (std::getline(ss, field, ',')) r.values.push_back(std::stod(field));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace aapl::profiling
