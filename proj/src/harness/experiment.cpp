#include "aapl/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "aapl/error.hpp"
#include "aapl/losses/losses.hpp"
#include "aapl/numcore/ops.hpp"
#include "aapl/numcore/optim.hpp"
#include "aapl/numcore/tape.hpp"
#include "aapl/seed.hpp"
#include "aapl/toyworld/episode.hpp"

namespace aapl::harness {

namespace ops = numcore::ops;
using numcore::Tensor;
using promptcore::PromptModel;
using toyworld::Partition;

World build_world(const ExperimentConfig& cfg) {
  validate(cfg);
  World w;
  toyworld::DatasetConfig dc;
  dc.num_classes = cfg.dataset.classes;
  dc.per_class_count = cfg.dataset.per_class_count;
  dc.image_size = cfg.dataset.image_size;
  dc.shots = cfg.dataset.shots;
  dc.seed = derive_seed(cfg.seed, SeedStream::kDataset);
  w.dataset = toyworld::generate_dataset(dc);

  toyworld::EncoderConfig ec;
  ec.feature_dim = cfg.model.feature_dim;
  ec.context_length = cfg.model.context_length;
  ec.text_hidden = cfg.model.text_hidden;
  ec.image_size = cfg.dataset.image_size;
  ec.num_classes = cfg.dataset.classes;
  ec.temperature = cfg.model.temperature;
  ec.alignment = cfg.model.alignment;
  ec.seed = derive_seed(cfg.seed, SeedStream::kEncoders);
  w.encoders = std::make_unique<toyworld::FrozenEncoders>(ec);
  return w;
}

PromptModel init_model(const ExperimentConfig& cfg, const World& world) {
  promptcore::PromptConfig pc;
  pc.bottleneck_ratio = cfg.model.bottleneck_ratio;
  pc.context_init_sigma = cfg.model.context_init_sigma;
  pc.seed = derive_seed(cfg.seed, SeedStream::kInit);
  return PromptModel(*world.encoders, pc);
}

std::string_view split_name(Split s) { return s == Split::kBase ? "base" : "new"; }

double accuracy(const PromptModel& model, std::span<const toyworld::ToyImage> images,
                std::span<const int> candidates) {
  if (images.empty()) throw ConfigError("accuracy: no images");
  if (candidates.empty()) throw ConfigError("accuracy: empty candidate set");
  const auto n = static_cast<std::ptrdiff_t>(images.size());
  std::size_t correct = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    numcore::NoGradGuard no_grad;
    const auto& img = images[static_cast<std::size_t>(i)];
    const auto feature = model.encoders().encode_image(img);
    const auto pi = promptcore::meta_token_from_feature(model, feature);
    const auto logits = promptcore::class_logits(model, feature, candidates, pi);
    auto v = logits.data();
    const auto best = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    if (candidates[best] == img.class_id) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

double evaluate(const PromptModel& model, const toyworld::ToyDataset& ds, Split split) {
  const auto classes = split == Split::kBase ? ds.base_classes() : ds.new_classes();
  if (classes.empty()) throw ConfigError("evaluate: split has no classes");
  std::vector<toyworld::ToyImage> images;
  for (int c : classes) {
    auto imgs = ds.images(c, Partition::kTest);
    images.insert(images.end(), imgs.begin(), imgs.end());
  }
  if (images.empty()) throw ConfigError("evaluate: split has no test images");
  return accuracy(model, images, classes);
}

HarmonicMean harmonic_mean(double base_acc, double new_acc) {
  if (!(base_acc >= 0.0 && base_acc <= 100.0 && new_acc >= 0.0 && new_acc <= 100.0)) {
    throw ConfigError("harmonic_mean: accuracies must lie in [0,100]");
  }
  if (base_acc + new_acc == 0.0) return {0.0, true};
  return {2.0 * base_acc * new_acc / (base_acc + new_acc), false};
}

profiling::ProfileConfig profile_config(const ExperimentConfig& cfg, int epoch) {
  profiling::ProfileConfig pc;
  pc.samples = cfg.profiling.samples;
  // Same stochastic views every epoch, so epochs are compared on identical inputs.
  pc.seed = derive_seed(cfg.seed, SeedStream::kProfiling);
  pc.epoch = epoch;
  pc.variant = cfg.train.delta_variant;
  return pc;
}

namespace {

toyworld::AugmentationProbs restrict_to(const toyworld::AugmentationProbs& probs,
                                        const std::vector<toyworld::Augmentation>& allowed) {
  if (allowed.empty()) return probs;
  toyworld::AugmentationProbs out{};
  double total = 0.0;
  for (auto a : allowed) {
    out[toyworld::index_of(a)] = probs[toyworld::index_of(a)];
    total += out[toyworld::index_of(a)];
  }
  for (auto& p : out) p /= total;
  return out;
}

void evaluate_into(EpochMetrics& m, const PromptModel& model, const toyworld::ToyDataset& ds) {
  m.base_acc = 100.0 * evaluate(model, ds, Split::kBase);
  m.new_acc = 100.0 * evaluate(model, ds, Split::kNew);
  m.hm = harmonic_mean(m.base_acc, m.new_acc).value;
}

}  // namespace

TrainResult train(const ExperimentConfig& cfg, const World& world, const TrainOptions& opts) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto& ds = world.dataset;
  const auto& enc = *world.encoders;
  PromptModel model = init_model(cfg, world);
  losses::reset_clamp_warnings();

  const losses::TripletConfig triplet_cfg{cfg.train.margin, cfg.train.constraint_mode};
  const losses::LossWeights weights{cfg.train.alpha, cfg.train.beta};
  const auto base = ds.base_classes();

  // Frozen features of every base train image, used as anchors' originals and
  // for the class-mean delta variant.
  std::vector<std::vector<Tensor>> train_features(base.size());
  std::vector<std::pair<int, std::size_t>> anchors;
  {
    numcore::NoGradGuard no_grad;
    for (std::size_t k = 0; k < base.size(); ++k) {
      auto imgs = ds.images(base[k], Partition::kTrain);
      for (std::size_t i = 0; i < imgs.size(); ++i) {
        train_features[k].push_back(enc.encode_image(imgs[i]));
        anchors.emplace_back(base[k], i);
      }
    }
  }
  const std::size_t episodes_per_epoch = anchors.size();
  numcore::SgdMomentum optimizer(model.parameters(), cfg.train.lr, cfg.train.momentum,
                                 cfg.train.schedule,
                                 episodes_per_epoch * static_cast<std::size_t>(cfg.train.epochs));

  RunMetrics metrics;
  metrics.seed = cfg.seed;
  profiling::SamplerWeights sampler = profiling::uniform_sampler(0);

  auto profile = [&](int epoch) {
    auto records = profiling::collect_delta_tokens(model, ds, profile_config(cfg, epoch));
    return profiling::profile_report(records);
  };

  {
    EpochMetrics m0;
    m0.epoch = 0;
    m0.silhouette = profile(0);
    m0.sampler_probs = restrict_to(sampler.probs, cfg.train.augmentations);
    evaluate_into(m0, model, ds);
    metrics.epochs.push_back(std::move(m0));
  }

  auto base_pos = [&](int class_id) {
    return static_cast<std::size_t>(std::find(base.begin(), base.end(), class_id) - base.begin());
  };

  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    m.sampler_probs = restrict_to(sampler.probs, cfg.train.augmentations);

    std::vector<std::size_t> order(anchors.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, SeedStream::kShuffle, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double sum_total = 0.0, sum_ce = 0.0, sum_adt = 0.0;
    for (std::size_t j = 0; j < order.size(); ++j) {
      const std::uint64_t counter = static_cast<std::uint64_t>(epoch - 1) * episodes_per_epoch + j;
      const auto [anchor_class, anchor_index] = anchors[order[j]];
      auto ep = toyworld::sample_episode(ds, m.sampler_probs,
                                         derive_seed(cfg.seed, SeedStream::kEpisode, counter),
                                         toyworld::AnchorRef{anchor_class, anchor_index});
      if (!ds.is_base(ep.class1) || !ds.is_base(ep.class2) || !ds.is_base(ep.x1->class_id) ||
          !ds.is_base(ep.x2->class_id)) {
        ++metrics.new_class_train_accesses;
        continue;
      }

      const std::size_t k1 = base_pos(ep.class1), k2 = base_pos(ep.class2);
      const Tensor f1 = train_features[k1][anchor_index];
      const Tensor f2 = enc.encode_image(*ep.x2);
      auto aug_feature = [&](const toyworld::ToyImage& img, toyworld::Augmentation a, std::uint64_t slot) {
        return enc.encode_image(toyworld::apply_augmentation(img, a, derive_seed(ep.aug_seed, slot)));
      };
      const Tensor f1a = aug_feature(*ep.x1, ep.aug_a, 0);
      const Tensor f1b = aug_feature(*ep.x1, ep.aug_b, 1);
      const Tensor f2a = aug_feature(*ep.x2, ep.aug_a, 2);
      const Tensor f2b = aug_feature(*ep.x2, ep.aug_b, 3);

      const bool class_mean = cfg.train.delta_variant == promptcore::DeltaVariant::kClassMean;
      std::span<const Tensor> ref1 = class_mean ? std::span<const Tensor>(train_features[k1])
                                                : std::span<const Tensor>(&f1, 1);
      std::span<const Tensor> ref2 = class_mean ? std::span<const Tensor>(train_features[k2])
                                                : std::span<const Tensor>(&f2, 1);

      numcore::Tape tape;
      Tensor adt = Tensor::scalar(0.0);
      if (weights.alpha > 0.0) {
        losses::DeltaGrid grid{
            promptcore::delta_from_features(model, f1a, ref1, ep.class1, ep.aug_a),
            promptcore::delta_from_features(model, f1b, ref1, ep.class1, ep.aug_b),
            promptcore::delta_from_features(model, f2a, ref2, ep.class2, ep.aug_a),
            promptcore::delta_from_features(model, f2b, ref2, ep.class2, ep.aug_b),
        };
        adt = losses::adtriplet(grid, triplet_cfg);
      }
      // Cross-entropy on the Aug_A view of x1, conditioned on its own meta token.
      const auto pi = promptcore::meta_token_from_feature(model, f1a);
      const auto probs = ops::softmax(promptcore::class_logits(model, f1a, base, pi));
      const Tensor ce = losses::cross_entropy(probs, static_cast<int>(k1));

      Tensor total;
      try {
        total = losses::total_loss(ce, adt, weights);
      } catch (const NumericError& e) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", episode " + std::to_string(j) + ": " + e.what());
      }
      if (total.requires_grad()) {
        tape.backward(total);
        // Params untouched by this loss still step with their momentum.
        for (auto& p : model.parameters()) p.mutable_grad();
        optimizer.step();
        for (const auto& p : model.parameters()) {
          for (double w : p.data()) {
            if (!std::isfinite(w)) {
              throw NumericError("train: non-finite parameter at epoch " + std::to_string(epoch) +
                                 ", episode " + std::to_string(j));
            }
          }
        }
      }

      sum_total += total.item();
      sum_ce += ce.item();
      sum_adt += adt.item();
      ++m.episodes;
      if (opts.on_episode) {
        opts.on_episode({epoch, j, ep.class1, ep.class2, ep.aug_a, ep.aug_b, total.item(), ce.item(),
                         adt.item()});
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(m.episodes, 1));
    m.total_loss = sum_total / n;
    m.ce_loss = sum_ce / n;
    m.adtriplet_loss = sum_adt / n;

    m.silhouette = profile(epoch);
    if (cfg.train.wrs) {
      sampler = profiling::wrs_weights(m.silhouette, cfg.profiling.temperature,
                                       cfg.profiling.standardize, epoch);
    }
    if (opts.eval_every_epoch || epoch == cfg.train.epochs) evaluate_into(m, model, ds);
    metrics.epochs.push_back(std::move(m));
  }

  const auto& last = metrics.epochs.back();
  metrics.base_acc = last.base_acc;
  metrics.new_acc = last.new_acc;
  metrics.hm = last.hm;
  metrics.ce_clamp_warnings = losses::clamp_warnings();
  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(metrics)};
}

}  // namespace aapl::harness
