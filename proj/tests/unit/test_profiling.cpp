#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>

#include <doctest.h>

#include "aapl/error.hpp"
#include "aapl/profiling/pca.hpp"
#include "aapl/profiling/profile.hpp"
#include "aapl/profiling/sampler.hpp"
#include "aapl/profiling/silhouette.hpp"
#include "aapl/toyworld/dataset.hpp"

using namespace aapl;
using namespace aapl::profiling;

namespace {

// Direct double loop, written independently of the library.
std::vector<double> brute_silhouette(const std::vector<double>& x, std::size_t dim, const std::vector<int>& lab) {
  const std::size_t n = lab.size();
  auto d = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += (x[i * dim + k] - x[j * dim + k]) * (x[i * dim + k] - x[j * dim + k]);
    return std::sqrt(s);
  };
  std::set<int> labels(lab.begin(), lab.end());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0;
    std::size_t na = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && lab[j] == lab[i]) {
        a += d(i, j);
        ++na;
      }
    }
    if (na == 0) continue;
    a /= static_cast<double>(na);
    double b = std::numeric_limits<double>::infinity();
    for (int l : labels) {
      if (l == lab[i]) continue;
      double s = 0;
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (lab[j] == l) {
          s += d(i, j);
          ++m;
        }
      }
      b = std::min(b, s / static_cast<double>(m));
    }
    const double den = std::max(a, b);
    out[i] = den == 0 ? 0.0 : (b - a) / den;
  }
  return out;
}

struct PointSet {
  std::vector<double> x;
  std::vector<int> labels;
  std::size_t dim;
};

PointSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> npts(4, 60), ncl(2, 5), ndim(1, 6);
  std::normal_distribution<double> g(0.0, 1.0);
  PointSet p;
  p.dim = static_cast<std::size_t>(ndim(rng));
  const int k = ncl(rng);
  const int n = std::max(npts(rng), k);
  std::uniform_int_distribution<int> pick(0, k - 1);
  for (int i = 0; i < n; ++i) p.labels.push_back(i < k ? i : pick(rng));
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p.dim; ++j) p.x.push_back(g(rng) + 1.5 * p.labels[i]);
  }
  return p;
}

SilhouetteReport report_with(const std::array<double, kNumAugmentations>& s) {
  SilhouetteReport r;
  double sum = 0;
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    r.per_type[t] = s[t];
    r.sample_count[t] = 10;
    sum += s[t];
  }
  r.overall = sum / kNumAugmentations;
  return r;
}

std::size_t idx(Augmentation a) { return static_cast<std::size_t>(a); }

}  // namespace

TEST_CASE("silhouette trivial configurations") {
  // two zero-radius clusters
  std::vector<double> pts{0, 0, 0, 0, 3, 4, 3, 4};
  std::vector<int> lab{0, 0, 1, 1};
  auto r = silhouette_scores(pts, 2, lab);
  for (double s : r.per_point) CHECK(s == 1.0);
  CHECK(r.overall == 1.0);

  std::vector<double> same(8, 0.5);
  auto z = silhouette_scores(same, 2, lab);
  for (double s : z.per_point) CHECK(s == 0.0);

  CHECK_THROWS_AS(silhouette_scores(pts, 2, std::vector<int>{1, 1, 1, 1}), ConfigError);
  CHECK_THROWS_AS(silhouette_scores(pts, 3, lab), ShapeError);
  std::vector<double> bad{0, 0, NAN, 0, 3, 4, 3, 4};
  CHECK_THROWS_AS(silhouette_scores(bad, 2, lab), NumericError);
}

TEST_CASE("silhouette singleton clusters score zero and are flagged") {
  std::vector<double> pts{0, 0, 0.1, 0, 5, 5};
  std::vector<int> lab{2, 2, 7};
  auto r = silhouette_scores(pts, 2, lab);
  CHECK(r.per_point[2] == 0.0);
  CHECK(r.singleton_labels == std::vector<int>{7});
  CHECK(r.cluster_labels == std::vector<int>{2, 7});
  CHECK(r.cluster_size == std::vector<std::size_t>{2, 1});
}

TEST_CASE("silhouette matches brute force oracle on random sets") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    auto p = random_set(rng);
    auto ref = brute_silhouette(p.x, p.dim, p.labels);
    auto par = silhouette_scores(p.x, p.dim, p.labels);
    auto ser = silhouette_scores_serial(p.x, p.dim, p.labels);
    REQUIRE(par.per_point.size() == ref.size());
    double mean = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(par.per_point[i] - ref[i]) < 1e-12);
      CHECK(std::abs(ser.per_point[i] - ref[i]) < 1e-12);
      CHECK(par.per_point[i] >= -1.0);
      CHECK(par.per_point[i] <= 1.0);
      mean += ref[i];
    }
    mean /= static_cast<double>(ref.size());
    CHECK(std::abs(par.overall - mean) < 1e-12);
    // cluster means weighted by size reproduce the overall mean
    double w = 0;
    for (std::size_t c = 0; c < par.cluster_mean.size(); ++c) w += par.cluster_mean[c] * static_cast<double>(par.cluster_size[c]);
    CHECK(std::abs(w / static_cast<double>(ref.size()) - par.overall) < 1e-12);
  }
}

TEST_CASE("silhouette is invariant under isometries") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    PointSet p;
    p.dim = 2;
    for (int i = 0; i < 30; ++i) {
      p.labels.push_back(i % 3);
      p.x.push_back(g(rng) + 2.0 * (i % 3));
      p.x.push_back(g(rng));
    }
    const double th = g(rng), tx = 10 * g(rng), ty = 10 * g(rng);
    std::vector<double> moved(p.x.size());
    for (std::size_t i = 0; i < 30; ++i) {
      const double x = p.x[2 * i], y = p.x[2 * i + 1];
      moved[2 * i] = std::cos(th) * x - std::sin(th) * y + tx;
      moved[2 * i + 1] = std::sin(th) * x + std::cos(th) * y + ty;
    }
    auto a = silhouette_scores(p.x, 2, p.labels);
    auto b = silhouette_scores(moved, 2, p.labels);
    for (std::size_t i = 0; i < 30; ++i) CHECK(std::abs(a.per_point[i] - b.per_point[i]) < 1e-9);
  }
}

TEST_CASE("wrs weights") {
  std::array<double, kNumAugmentations> s{};
  s.fill(0.3);
  auto u = wrs_weights(report_with(s));
  for (double p : u.probs) CHECK(p == doctest::Approx(1.0 / 14).epsilon(1e-14));

  s.fill(0.1);
  s[4] = 0.9;
  auto w = wrs_weights(report_with(s));
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    if (t != 4) CHECK(w.probs[4] < w.probs[t]);
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    for (auto& v : s) v = unif(rng);
    for (double temp : {0.25, 1.0, 3.0}) {
      auto r = wrs_weights(report_with(s), temp);
      double sum = 0;
      for (std::size_t i = 0; i < kNumAugmentations; ++i) {
        CHECK(r.probs[i] > 0.0);
        sum += r.probs[i];
        for (std::size_t j = 0; j < kNumAugmentations; ++j) {
          if (s[i] < s[j]) {
            CHECK(r.probs[i] > r.probs[j]);
            CHECK(r.probs[i] / r.probs[j] == doctest::Approx(std::exp((s[j] - s[i]) / temp)).epsilon(1e-12));
          }
        }
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      CHECK(r.temperature == temp);
    }
  }
}

TEST_CASE("wrs weights impute missing types and validate input") {
  std::array<double, kNumAugmentations> s{};
  s.fill(0.2);
  auto r = report_with(s);
  r.per_type[3].reset();
  r.overall = 0.2;
  auto w = wrs_weights(r);
  CHECK(w.imputed == std::vector<Augmentation>{toyworld::kAllAugmentations[3]});
  CHECK(w.probs[3] == doctest::Approx(1.0 / 14));

  auto bad = report_with(s);
  bad.per_type[0] = NAN;
  CHECK_THROWS_AS(wrs_weights(bad), NumericError);
  CHECK_THROWS_AS(wrs_weights(report_with(s), 0.0), ConfigError);
}

TEST_CASE("standardized wrs weights ignore affine score changes") {
  std::array<double, kNumAugmentations> s{}, t{};
  for (std::size_t i = 0; i < kNumAugmentations; ++i) {
    s[i] = 0.05 * static_cast<double>(i);
    t[i] = 3.0 * s[i] - 1.0;
  }
  auto a = wrs_weights(report_with(s), 1.0, true);
  auto b = wrs_weights(report_with(t), 1.0, true);
  for (std::size_t i = 0; i < kNumAugmentations; ++i) CHECK(a.probs[i] == doctest::Approx(b.probs[i]).epsilon(1e-12));
}

TEST_CASE("wrs sample draws distinct pairs deterministically") {
  auto w = uniform_sampler();
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    auto [x, y] = wrs_sample(w, seed);
    CHECK(x != y);
    CHECK(wrs_sample(w, seed) == std::make_pair(x, y));
  }
}

TEST_CASE("concentrated weights dominate drawn pairs") {
  SamplerWeights w;
  w.probs.fill(0.01 / 13);
  w.probs[idx(Augmentation::kCutout)] = 0.99;
  auto incl = pair_inclusion_probabilities(w.probs);
  CHECK(incl[idx(Augmentation::kCutout)] > 0.98);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto [x, y] = wrs_sample(w, static_cast<std::uint64_t>(i));
    hits += (x == Augmentation::kCutout || y == Augmentation::kCutout);
  }
  CHECK(static_cast<double>(hits) / n > 0.98);
}

TEST_CASE("pair inclusion closed form") {
  auto incl = pair_inclusion_probabilities(toyworld::uniform_augmentation_probs());
  double sum = 0;
  for (double p : incl) {
    CHECK(p == doctest::Approx(2.0 / 14).epsilon(1e-13));
    sum += p;
  }
  CHECK(sum == doctest::Approx(2.0));

  // three-type hand computation embedded in the 14-slot array
  toyworld::AugmentationProbs p{};
  p[0] = 0.5;
  p[1] = 0.3;
  p[2] = 0.2;
  auto q = pair_inclusion_probabilities(p);
  CHECK(q[0] == doctest::Approx(0.5 + 0.3 * 0.5 / 0.7 + 0.2 * 0.5 / 0.8).epsilon(1e-14));
  CHECK(q[2] == doctest::Approx(0.2 + 0.5 * 0.2 / 0.5 + 0.3 * 0.2 / 0.7).epsilon(1e-14));
  CHECK(q[5] == 0.0);
}

TEST_CASE("rank augmentations puts missing scores last") {
  std::array<double, kNumAugmentations> s{};
  for (std::size_t i = 0; i < kNumAugmentations; ++i) s[i] = static_cast<double>(i);
  auto r = report_with(s);
  r.per_type[13].reset();
  auto order = rank_augmentations(r);
  CHECK(order.front() == toyworld::kAllAugmentations[12]);
  CHECK(order.back() == toyworld::kAllAugmentations[13]);
  CHECK(order[12] == toyworld::kAllAugmentations[0]);
}

TEST_CASE("pca on simple geometries") {
  std::vector<double> line;
  for (int i = 0; i < 10; ++i) {
    const double t = i - 3.5;
    line.insert(line.end(), {1 + t, 2 - 2 * t, 0.5 * t});
  }
  auto l = pca_project(line, 3);
  CHECK(l.explained_ratio.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l.rank_deficient);
  CHECK(l.components == 1);

  std::vector<double> square{0, 0, 1, 0, 0, 1, 1, 1};
  auto q = pca_project(square, 2);
  REQUIRE(q.components == 2);
  CHECK(q.explained_ratio[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q.explained_ratio[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(q.rank_deficient);

  CHECK_THROWS_AS(pca_project(std::vector<double>{1, 2}, 2, 2), ConfigError);
}

TEST_CASE("pca reconstruction error equals trailing eigenvalues") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(50 * 8);
  for (auto& v : x) v = g(rng);
  auto fit = pca_project(x, 8, 2);
  REQUIRE(fit.components == 2);
  double trailing = 0;
  for (std::size_t i = 2; i < fit.eigenvalues.size(); ++i) trailing += fit.eigenvalues[i];
  CHECK(std::abs(reconstruction_error(x, 8, fit) - trailing) < 1e-8);
  CHECK(fit.explained_ratio[0] >= fit.explained_ratio[1]);
  for (std::size_t a = 0; a < 2; ++a) {
    double norm = 0;
    for (std::size_t k = 0; k < 8; ++k) norm += fit.axes[a * 8 + k] * fit.axes[a * 8 + k];
    CHECK(norm == doctest::Approx(1.0));
  }
}

TEST_CASE("delta token collection and embedding dump") {
  const auto ds = toyworld::generate_dataset({8, 40, 16, 16, 12});
  toyworld::EncoderConfig ec;
  ec.seed = 4;
  const toyworld::FrozenEncoders enc(ec);
  promptcore::PromptConfig pc;
  pc.seed = 6;
  const promptcore::PromptModel model(enc, pc);

  ProfileConfig cfg;
  cfg.samples = 20;
  cfg.seed = 12;
  cfg.epoch = 3;
  auto recs = collect_delta_tokens(model, ds, cfg);
  REQUIRE(recs.size() == 20 * kNumAugmentations);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].augmentation == toyworld::kAllAugmentations[i % kNumAugmentations]);
    CHECK(recs[i].epoch == 3);
    CHECK(recs[i].values.size() == 32);
  }
  const auto base = ds.base_classes();
  for (const auto& r : recs) CHECK(std::find(base.begin(), base.end(), r.class_id) != base.end());

  cfg.parallel = false;
  CHECK(collect_delta_tokens(model, ds, cfg) == recs);
  cfg.variant = promptcore::DeltaVariant::kClassMean;
  CHECK(collect_delta_tokens(model, ds, cfg) != recs);

  auto rep = profile_report(recs);
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    CHECK(rep.sample_count[t] == 20);
    REQUIRE(rep.per_type[t].has_value());
  }
  double mean = 0;
  for (const auto& s : rep.per_type) mean += *s;
  CHECK(rep.overall == doctest::Approx(mean / kNumAugmentations).epsilon(1e-12));

  const auto path = std::filesystem::temp_directory_path() / "aapl_test_embeddings.csv";
  write_embedding_dump(recs, path);
  CHECK(read_embedding_dump(path) == recs);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_embedding_dump(path), ConfigError);

  cfg.samples = 0;
  CHECK_THROWS_AS(collect_delta_tokens(model, ds, cfg), ConfigError);
}
