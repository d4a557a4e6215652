// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aapl/harness/cli.hpp"
#include "aapl/harness/config.hpp"
#include "aapl/harness/experiment.hpp"
#include "aapl/losses/losses.hpp"
#include "aapl/numcore/gradcheck.hpp"
#include "aapl/numcore/ops.hpp"
#include "aapl/numcore/tape.hpp"
#include "aapl/profiling/sampler.hpp"
#include "aapl/profiling/silhouette.hpp"
#include "aapl/promptcore/prompt_model.hpp"
#include "aapl/seed.hpp"
#include "aapl/toyworld/dataset.hpp"
#include "aapl/toyworld/encoders.hpp"

namespace fs = std::filesystem;
using namespace aapl;
using numcore::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- [1]

void gradient_suite() {
  const auto t0 = Clock::now();
  const auto ds = toyworld::generate_dataset({8, 40, 16, 16, 77});
  toyworld::EncoderConfig ec;
  ec.seed = 78;
  const toyworld::FrozenEncoders enc(ec);
  const auto base = ds.base_classes();

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0, skipped = 0;
  double worst = 0.0;
  while (checked < 100 && checked + skipped < 1000) {
    promptcore::PromptConfig pc;
    pc.seed = rng();
    pc.context_init_sigma = 0.02 + 0.5 * unit(rng);
    const promptcore::PromptModel model(enc, pc);

    const auto k1 = static_cast<std::size_t>(rng() % base.size());
    auto k2 = static_cast<std::size_t>(rng() % (base.size() - 1));
    if (k2 >= k1) ++k2;
    const auto& x1 = ds.images(base[k1], toyworld::Partition::kTrain)[rng() % 16];
    const auto& x2 = ds.images(base[k2], toyworld::Partition::kTrain)[rng() % 16];
    const auto aug_a = toyworld::kAllAugmentations[rng() % 14];
    auto aug_b = toyworld::kAllAugmentations[rng() % 14];
    while (aug_b == aug_a) aug_b = toyworld::kAllAugmentations[rng() % 14];
    const std::uint64_t s = rng();
    const Tensor f1 = enc.encode_image(x1), f2 = enc.encode_image(x2);
    const Tensor f1a = enc.encode_image(toyworld::apply_augmentation(x1, aug_a, derive_seed(s, 0)));
    const Tensor f1b = enc.encode_image(toyworld::apply_augmentation(x1, aug_b, derive_seed(s, 1)));
    const Tensor f2a = enc.encode_image(toyworld::apply_augmentation(x2, aug_a, derive_seed(s, 2)));
    const Tensor f2b = enc.encode_image(toyworld::apply_augmentation(x2, aug_b, derive_seed(s, 3)));

    const losses::LossWeights w{0.05 + 2.0 * unit(rng), 0.05 + 2.0 * unit(rng)};
    const losses::TripletConfig tc{0.05 + 0.5 * unit(rng),
                                   rng() % 2 ? losses::ConstraintMode::kConstraints4
                                             : losses::ConstraintMode::kConstraints2};
    std::vector<Tensor> ref1{f1}, ref2{f2};
    auto loss = [&] {
      losses::DeltaGrid g{promptcore::delta_from_features(model, f1a, ref1, base[k1], aug_a),
                          promptcore::delta_from_features(model, f1b, ref1, base[k1], aug_b),
                          promptcore::delta_from_features(model, f2a, ref2, base[k2], aug_a),
                          promptcore::delta_from_features(model, f2b, ref2, base[k2], aug_b)};
      const auto pi = promptcore::meta_token_from_feature(model, f1a);
      const auto probs = numcore::ops::softmax(promptcore::class_logits(model, f1a, base, pi));
      return losses::total_loss(losses::cross_entropy(probs, static_cast<int>(k1)),
                                losses::adtriplet(g, tc), w);
    };
    const auto r = numcore::finite_difference_check(loss, model.parameters());
    if (r.near_kink) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, r.max_relative_error);
    ++checked;
  }
  const double secs = seconds_since(t0);
  report(1, "gradient suite", checked == 100 && worst < 1e-4 && secs < 60.0,
         fmt("%d configs, %d near-kink skipped, max rel err %.2e, %.1f s", checked, skipped, worst, secs));
}

// ---------------------------------------------------------------- [2]

std::vector<double> oracle_silhouette(const std::vector<double>& x, std::size_t dim, const std::vector<int>& lab) {
  const std::size_t n = lab.size();
  auto d = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += std::pow(x[i * dim + k] - x[j * dim + k], 2);
    return std::sqrt(s);
  };
  std::set<int> labels(lab.begin(), lab.end());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0;
    int na = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && lab[j] == lab[i]) a += d(i, j), ++na;
    }
    if (na == 0) continue;
    a /= na;
    double b = std::numeric_limits<double>::infinity();
    for (int l : labels) {
      if (l == lab[i]) continue;
      double s = 0;
      int m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (lab[j] == l) s += d(i, j), ++m;
      }
      b = std::min(b, s / m);
    }
    out[i] = std::max(a, b) == 0 ? 0.0 : (b - a) / std::max(a, b);
  }
  return out;
}

void silhouette_oracle() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + static_cast<int>(rng() % 4);
    const int n = k + static_cast<int>(rng() % static_cast<unsigned>(61 - k));
    const std::size_t dim = 1 + rng() % 8;
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lab[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(rng() % static_cast<unsigned>(k));
    std::shuffle(lab.begin(), lab.end(), rng);
    std::vector<double> x(static_cast<std::size_t>(n) * dim);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = g(rng) + lab[i / dim];
    const auto ref = oracle_silhouette(x, dim, lab);
    const auto got = profiling::silhouette_scores(x, dim, lab);
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - got.per_point[i]));
  }
  report(2, "silhouette oracle", worst <= 1e-12, fmt("200 sets, max abs diff %.2e", worst));
}

// ---------------------------------------------------------------- [3]

void loss_edge_cases() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  auto rand_vec = [&] {
    std::vector<double> v(32);
    for (auto& x : v) x = g(rng);
    return Tensor::vector(v);
  };
  const auto a = rand_vec();
  const bool same = losses::triplet(a, a, a, 0.2).item() == 0.2;
  const auto d = rand_vec();
  const losses::DeltaGrid eq{{d, 0, toyworld::Augmentation::kHue},
                             {d, 0, toyworld::Augmentation::kCutout},
                             {d, 1, toyworld::Augmentation::kHue},
                             {d, 1, toyworld::Augmentation::kCutout}};
  const double c4 = losses::adtriplet(eq, {0.2, losses::ConstraintMode::kConstraints4}).item();
  double drift = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto shift = rand_vec();
    std::vector<Tensor> v{rand_vec(), rand_vec(), rand_vec(), rand_vec()};
    auto grid = [&](bool moved) {
      auto at = [&](std::size_t i, int cls, toyworld::Augmentation aug) {
        return promptcore::DeltaMetaToken{moved ? numcore::ops::add(v[i], shift) : v[i], cls, aug};
      };
      return losses::DeltaGrid{at(0, 0, toyworld::Augmentation::kHue), at(1, 0, toyworld::Augmentation::kCutout),
                               at(2, 1, toyworld::Augmentation::kHue), at(3, 1, toyworld::Augmentation::kCutout)};
    };
    for (auto mode : {losses::ConstraintMode::kConstraints2, losses::ConstraintMode::kConstraints4}) {
      drift = std::max(drift, std::abs(losses::adtriplet(grid(true), {0.2, mode}).item() -
                                       losses::adtriplet(grid(false), {0.2, mode}).item()));
    }
  }
  report(3, "loss edge cases", same && std::abs(c4 - 0.4) < 1e-15 && drift <= 1e-12,
         fmt("triplet(a,a,a)=m %s, equal-delta c4 %.17g, translation drift %.2e", same ? "exact" : "WRONG", c4,
             drift));
}

// ---------------------------------------------------------------- [4]

void sampler_correctness() {
  profiling::SilhouetteReport rep;
  for (std::size_t t = 0; t < toyworld::kNumAugmentations; ++t) {
    rep.per_type[t] = t < 7 ? 0.0 : 0.5;
    rep.sample_count[t] = 100;
  }
  rep.overall = 0.25;
  const auto w = profiling::wrs_weights(rep, 1.0);

  bool anti = true;
  for (std::size_t i = 0; i < 14; ++i) {
    for (std::size_t j = 0; j < 14; ++j) {
      if (*rep.per_type[i] < *rep.per_type[j] && !(w.probs[i] > w.probs[j])) anti = false;
    }
  }
  // random scores too
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    profiling::SilhouetteReport r;
    for (std::size_t i = 0; i < 14; ++i) r.per_type[i] = u(rng);
    const auto ww = profiling::wrs_weights(r, 0.5 + u(rng) * 0.4);
    for (std::size_t i = 0; i < 14; ++i) {
      for (std::size_t j = 0; j < 14; ++j) {
        if (*r.per_type[i] < *r.per_type[j] && !(ww.probs[i] > ww.probs[j])) anti = false;
      }
    }
  }

  // Closed form for two score levels: low types carry e^{0.5} / Z each.
  const double hi = 1.0 / (7.0 * std::exp(0.5) + 7.0), lo = std::exp(0.5) * hi;
  std::vector<double> p(14);
  for (std::size_t t = 0; t < 14; ++t) p[t] = t < 7 ? lo : hi;
  std::vector<double> expected(14);
  for (std::size_t t = 0; t < 14; ++t) {
    double second = 0.0;
    for (std::size_t v = 0; v < 14; ++v) {
      if (v != t) second += p[v] * p[t] / (1.0 - p[v]);
    }
    expected[t] = p[t] + second;
  }

  const std::size_t draws = 1000000;
  std::vector<double> count(14, 0.0);
  bool distinct = true;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto [x, y] = profiling::wrs_sample(w, derive_seed(99, i));
    distinct = distinct && x != y;
    count[static_cast<std::size_t>(x)] += 1;
    count[static_cast<std::size_t>(y)] += 1;
  }
  double l1 = 0.0;
  for (std::size_t t = 0; t < 14; ++t) l1 += std::abs(count[t] / static_cast<double>(draws) - expected[t]);
  report(4, "sampler correctness", l1 < 0.01 && anti && distinct,
         fmt("L1 %.4f over 1e6 pairs, anti-monotone %s, duplicates %s", l1, anti ? "yes" : "NO",
             distinct ? "none" : "FOUND"));
}

// ---------------------------------------------------------------- [5]

void mechanism() {
  const auto t0 = Clock::now();
  int pass = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    harness::ExperimentConfig c;
    c.seed = seed;
    c.train.alpha = 1.0;
    c.train.beta = 1.0;
    harness::TrainOptions quiet;
    quiet.eval_every_epoch = false;
    const auto world = harness::build_world(c);
    const auto run = harness::train(c, world, quiet);
    c.train.alpha = 0.0;
    const auto control = harness::train(c, world, quiet);
    const double s0 = run.metrics.epochs.front().silhouette.overall;
    const double sf = run.metrics.epochs.back().silhouette.overall;
    const double sc = control.metrics.epochs.back().silhouette.overall;
    const bool ok = sf - s0 >= 0.05 && sf - sc >= 0.05;
    pass += ok;
    detail += fmt(" s%llu %+.3f/%+.3f", static_cast<unsigned long long>(seed), sf - s0, sf - sc);
  }
  const double secs = seconds_since(t0);
  report(5, "mechanism check", pass >= 4 && secs < 300.0,
         fmt("%d/5 seeds; gain vs epoch0/vs control:%s; %.1f s", pass, detail.c_str(), secs));
}

// ---------------------------------------------------------------- [6]

void generalization() {
  const auto t0 = Clock::now();
  double base = 0.0, nw = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    harness::ExperimentConfig c;
    c.seed = seed;
    harness::TrainOptions quiet;
    quiet.eval_every_epoch = false;
    const auto r = harness::train(c, harness::build_world(c), quiet);
    base += r.metrics.base_acc / 3.0;
    nw += r.metrics.new_acc / 3.0;
  }
  const double chance = 100.0 / 4.0;
  const double secs = seconds_since(t0);
  report(6, "generalization", base >= 3 * chance && nw >= 2 * chance && secs < 300.0,
         fmt("mean base %.2f%% (need %.0f), new %.2f%% (need %.0f), %.1f s", base, 3 * chance, nw, 2 * chance, secs));
}

// ---------------------------------------------------------------- [7]

void hm_reproduction() {
  const double a = harness::harmonic_mean(80.47, 71.69).value;
  const double b = harness::harmonic_mean(95.20, 97.69).value;
  report(7, "harmonic mean", std::abs(a - 75.83) <= 0.005 && std::abs(b - 96.43) <= 0.005,
         fmt("HM(80.47,71.69)=%.4f HM(95.20,97.69)=%.4f", a, b));
}

// ---------------------------------------------------------------- [8]

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

int invoke_train(const fs::path& cfg, const fs::path& out) {
  if (const char* bin = std::getenv("AAPL_BIN")) {
    const std::string cmd = std::string(bin) + " train " + cfg.string() + " --out " + out.string() + " >/dev/null";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }
  const std::string c = cfg.string(), o = out.string();
  const char* argv[] = {"aapl", "train", c.c_str(), "--out", o.c_str()};
  return harness::run_cli(5, argv);
}

void determinism() {
  const auto dir = fs::temp_directory_path() / ("aapl_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  harness::ExperimentConfig c;
  c.seed = 11;
  c.train.alpha = 1.0;
  c.train.wrs = true;
  harness::save_config(c, dir / "cfg.ini");
  const int e1 = invoke_train(dir / "cfg.ini", dir / "a");
  const int e2 = invoke_train(dir / "cfg.ini", dir / "b");
  const auto ma = slurp(dir / "a" / "metrics.csv"), mb = slurp(dir / "b" / "metrics.csv");
  const auto ca = slurp(dir / "a" / "checkpoint.bin"), cb = slurp(dir / "b" / "checkpoint.bin");
  const bool ok = e1 == 0 && e2 == 0 && !ma.empty() && !ca.empty() && ma == mb && ca == cb;
  fs::remove_all(dir);
  report(8, "determinism", ok,
         fmt("metrics %zu bytes %s, checkpoint %zu bytes %s", ma.size(), ma == mb ? "identical" : "DIFFER", ca.size(),
             ca == cb ? "identical" : "DIFFER"));
}

// ---------------------------------------------------------------- [9]

void isolation() {
  harness::ExperimentConfig c;
  c.seed = 2;
  c.train.alpha = 1.0;
  c.train.wrs = true;
  const auto world = harness::build_world(c);
  const auto before = world.encoders->weight_snapshot();
  harness::TrainOptions quiet;
  quiet.eval_every_epoch = false;
  const auto r = harness::train(c, world, quiet);
  const bool frozen = world.encoders->weight_snapshot() == before;
  report(9, "frozen encoders and split isolation", frozen && r.metrics.new_class_train_accesses == 0,
         fmt("%zu encoder values %s, new-class train accesses %zu", before.size(),
             frozen ? "unchanged" : "CHANGED", r.metrics.new_class_train_accesses));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks{gradient_suite, silhouette_oracle, loss_edge_cases,
                                                  sampler_correctness, mechanism, generalization,
                                                  hm_reproduction, determinism, isolation};
  int id = 1;
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(id, "exception", false, e.what());
    }
    ++id;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
  return failures == 0 ? 0 : 1;
}
