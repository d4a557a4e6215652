#include "aapl/harness/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aapl/error.hpp"
#include "aapl/harness/config.hpp"
#include "aapl/harness/experiment.hpp"
#include "aapl/harness/metrics.hpp"
#include "aapl/profiling/profile.hpp"
#include "aapl/promptcore/checkpoint.hpp"

namespace aapl::harness {

namespace fs = std::filesystem;

namespace {

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

GridAxis parse_axis(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw ConfigError("grid axis '" + arg + "' must look like key=v1,v2");
  }
  GridAxis axis{arg.substr(0, eq), {}};
  std::stringstream ss(arg.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty()) throw ConfigError("grid axis '" + arg + "' has an empty value");
    axis.values.push_back(v);
  }
  return axis;
}

ExperimentConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  auto cfg = load_config(path);
  for (const auto& s : sets) apply_override(cfg, s);
  validate(cfg);
  return cfg;
}

promptcore::PromptModel load_model(const ExperimentConfig& cfg, const World& world,
                                   const std::string& checkpoint) {
  auto model = init_model(cfg, world);
  promptcore::load_checkpoint(model, checkpoint);
  return model;
}

int cmd_train(const std::string& config, const std::string& out, const std::vector<std::string>& sets) {
  auto cfg = load_with_overrides(config, sets);
  if (!out.empty()) cfg.output.dir = out;
  const fs::path dir = cfg.output.dir;
  fs::create_directories(dir);
  auto world = build_world(cfg);
  auto result = train(cfg, world);
  promptcore::save_checkpoint(result.model, dir / "checkpoint.bin");
  write_metrics_csv(result.metrics, dir / "metrics.csv");
  write_summary_json(result.metrics, cfg, dir / "summary.json");
  save_config(cfg, dir / "config.ini");
  std::cout << "base_acc " << format_double(result.metrics.base_acc) << "\nnew_acc "
            << format_double(result.metrics.new_acc) << "\nhm " << format_double(result.metrics.hm)
            << "\nwrote " << dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config, const std::string& split,
             const std::vector<std::string>& sets) {
  auto cfg = load_with_overrides(config, sets);
  auto world = build_world(cfg);
  auto model = load_model(cfg, world, checkpoint);
  const Split s = split == "base" ? Split::kBase : Split::kNew;
  std::cout << format_double(100.0 * evaluate(model, world.dataset, s)) << '\n';
  return 0;
}

int cmd_profile(const std::string& checkpoint, const std::string& config, const std::string& out,
                const std::vector<std::string>& sets) {
  auto cfg = load_with_overrides(config, sets);
  auto world = build_world(cfg);
  auto model = load_model(cfg, world, checkpoint);
  const fs::path dir = out.empty() ? fs::path(cfg.output.dir) : fs::path(out);
  fs::create_directories(dir);
  const auto records = profiling::collect_delta_tokens(model, world.dataset, profile_config(cfg, cfg.train.epochs));
  const auto report = profiling::profile_report(records);
  std::ofstream(dir / "silhouette_report.json") << silhouette_report_json(report);
  profiling::write_embedding_dump(records, dir / "embeddings.csv");
  std::cout << "overall " << format_double(report.overall) << "\nrecords " << records.size() << '\n';
  return 0;
}

int cmd_export(const std::string& checkpoint, const std::string& config, const std::string& out,
               const std::vector<std::string>& sets) {
  auto cfg = load_with_overrides(config, sets);
  auto world = build_world(cfg);
  auto model = load_model(cfg, world, checkpoint);
  const auto records = profiling::collect_delta_tokens(model, world.dataset, profile_config(cfg, cfg.train.epochs));
  profiling::write_embedding_dump(records, out);
  return 0;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& grid, const std::string& out,
              const std::vector<std::string>& sets) {
  const auto base_cfg = load_with_overrides(config, sets);
  std::vector<GridAxis> axes;
  for (const auto& g : grid) axes.push_back(parse_axis(g));

  bool seed_axis = false;
  std::ostringstream csv;
  for (const auto& a : axes) {
    csv << a.key << ',';
    seed_axis = seed_axis || a.key == "seed" || a.key == "run.seed";
  }
  if (!seed_axis) csv << "seed,";
  csv << "base_acc,new_acc,hm,silhouette_overall\n";

  // Validate every grid point before running any of them.
  std::vector<std::vector<std::string>> points{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<std::string>> next;
    for (const auto& p : points) {
      for (const auto& v : a.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  std::vector<ExperimentConfig> cfgs;
  for (const auto& p : points) {
    auto cfg = base_cfg;
    for (std::size_t i = 0; i < axes.size(); ++i) apply_override(cfg, axes[i].key + "=" + p[i]);
    validate(cfg);
    cfgs.push_back(cfg);
  }

  // With a seed axis, one extra row per combination of the other axes holds
  // the mean over seeds; its hm is taken from the mean accuracies.
  struct Group {
    std::vector<std::string> key;
    double base = 0, nw = 0, sil = 0;
    int n = 0;
  };
  std::vector<Group> groups;
  for (std::size_t r = 0; r < cfgs.size(); ++r) {
    auto world = build_world(cfgs[r]);
    const auto result = train(cfgs[r], world, {.on_episode = {}, .eval_every_epoch = false});
    const double sil = result.metrics.epochs.back().silhouette.overall;
    for (const auto& v : points[r]) csv << v << ',';
    if (!seed_axis) csv << cfgs[r].seed << ',';
    csv << format_double(result.metrics.base_acc) << ','
        << format_double(result.metrics.new_acc) << ',' << format_double(result.metrics.hm) << ','
        << format_double(sil) << '\n';
    if (seed_axis) {
      auto key = points[r];
      for (std::size_t i = 0; i < axes.size(); ++i) {
        if (axes[i].key == "seed" || axes[i].key == "run.seed") key[i] = "mean";
      }
      auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.key == key; });
      if (it == groups.end()) it = groups.insert(groups.end(), Group{key});
      it->base += result.metrics.base_acc;
      it->nw += result.metrics.new_acc;
      it->sil += sil;
      ++it->n;
    }
  }
  for (const auto& g : groups) {
    for (const auto& v : g.key) csv << v << ',';
    const double base = g.base / g.n, nw = g.nw / g.n;
    csv << format_double(base) << ',' << format_double(nw) << ','
        << format_double(harmonic_mean(base, nw).value) << ',' << format_double(g.sil / g.n) << '\n';
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + out);
    os << csv.str();
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Augmentation-adaptive prompt learning on a synthetic toy world", "aapl"};
  app.require_subcommand(1);
  app.fallthrough();  // global --set may follow the subcommand
  std::vector<std::string> sets;
  app.add_option("--set", sets, "Config override key=value (repeatable)");

  std::string config, checkpoint, out, split = "new";
  std::vector<std::string> grid;

  auto* tr = app.add_subcommand("train", "Train a model; writes checkpoint, metrics and summary");
  tr->add_option("config", config, "Config file")->required();
  tr->add_option("--out", out, "Output directory (overrides output.dir)");

  auto* ev = app.add_subcommand("eval", "Print test accuracy (percent) on a split");
  ev->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  ev->add_option("config", config, "Config file")->required();
  ev->add_option("--split", split, "base or new")->check(CLI::IsMember({"base", "new"}));

  auto* pr = app.add_subcommand("profile", "Silhouette report and embedding dump");
  pr->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  pr->add_option("config", config, "Config file")->required();
  pr->add_option("--out", out, "Output directory (default output.dir)");

  auto* ex = app.add_subcommand("export-embeddings", "Write delta-token embeddings as CSV");
  ex->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  ex->add_option("config", config, "Config file")->required();
  ex->add_option("out", out, "Output CSV")->required();

  auto* sw = app.add_subcommand("sweep", "Serial grid of training runs");
  sw->add_option("config", config, "Config file")->required();
  sw->add_option("--grid", grid, "Axis key=v1,v2 (repeatable)")->required();
  sw->add_option("--out", out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*tr) return cmd_train(config, out, sets);
    if (*ev) return cmd_eval(checkpoint, config, split, sets);
    if (*pr) return cmd_profile(checkpoint, config, out, sets);
    if (*ex) return cmd_export(checkpoint, config, out, sets);
    if (*sw) return cmd_sweep(config, grid, out, sets);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace aapl::harness
