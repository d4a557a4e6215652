#include "aapl/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "aapl/error.hpp"

namespace aapl::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  // Shortest representation that parses back to the same double.
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

int parse_small_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError("config: '" + key + "' out of range");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::string augmentation_list(const std::vector<toyworld::Augmentation>& augs) {
  if (augs.empty()) return "all";
  std::string out;
  for (std::size_t i = 0; i < augs.size(); ++i) {
    if (i) out += ',';
    out += toyworld::augmentation_name(augs[i]);
  }
  return out;
}

std::vector<toyworld::Augmentation> parse_augmentation_list(const std::string& key,
                                                            const std::string& v) {
  if (v == "all") return {};
  std::vector<toyworld::Augmentation> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto name = trim(item);
    auto aug = toyworld::parse_augmentation(name);
    if (!aug) throw ConfigError("config: '" + key + "' has unknown augmentation '" + name + "'");
    for (auto a : out) {
      if (a == *aug) throw ConfigError("config: '" + key + "' lists '" + name + "' twice");
    }
    out.push_back(*aug);
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define AAPL_INT(SEC, KEY, MEMBER)                                                   \
  Field {                                                                            \
    SEC, KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); },    \
        [](ExperimentConfig& c, const std::string& v) {                              \
          c.MEMBER = parse_small_int(std::string(SEC) + "." + KEY, v);               \
        }                                                                            \
  }
#define AAPL_DOUBLE(SEC, KEY, MEMBER)                                                \
  Field {                                                                            \
    SEC, KEY, [](const ExperimentConfig& c) { return fmt_double(c.MEMBER); },        \
        [](ExperimentConfig& c, const std::string& v) {                              \
          c.MEMBER = parse_double(std::string(SEC) + "." + KEY, v);                  \
        }                                                                            \
  }
#define AAPL_BOOL(SEC, KEY, MEMBER)                                                  \
  Field {                                                                            \
    SEC, KEY, [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& v) {                              \
          c.MEMBER = parse_bool(std::string(SEC) + "." + KEY, v);                    \
        }                                                                            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"run", "seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
            [](ExperimentConfig& c, const std::string& v) {
              std::uint64_t out = 0;
              auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
              if (ec != std::errc() || p != v.data() + v.size()) {
                throw ConfigError("config: 'run.seed' expects an unsigned integer, got '" + v + "'");
              }
              c.seed = out;
            }},
      AAPL_INT("dataset", "classes", dataset.classes),
      AAPL_INT("dataset", "per_class_count", dataset.per_class_count),
      AAPL_INT("dataset", "image_size", dataset.image_size),
      AAPL_INT("dataset", "shots", dataset.shots),
      AAPL_INT("model", "feature_dim", model.feature_dim),
      AAPL_INT("model", "context_length", model.context_length),
      AAPL_INT("model", "bottleneck_ratio", model.bottleneck_ratio),
      AAPL_DOUBLE("model", "temperature", model.temperature),
      AAPL_INT("model", "text_hidden", model.text_hidden),
      AAPL_DOUBLE("model", "alignment", model.alignment),
      AAPL_DOUBLE("model", "context_init_sigma", model.context_init_sigma),
      AAPL_INT("train", "epochs", train.epochs),
      AAPL_DOUBLE("train", "lr", train.lr),
      AAPL_DOUBLE("train", "momentum", train.momentum),
      Field{"train", "schedule",
            [](const ExperimentConfig& c) { return std::string(schedule_name(c.train.schedule)); },
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "cosine") {
                c.train.schedule = numcore::LrSchedule::kCosine;
              } else if (v == "constant") {
                c.train.schedule = numcore::LrSchedule::kConstant;
              } else {
                throw ConfigError("config: 'train.schedule' must be cosine or constant, got '" + v + "'");
              }
            }},
      AAPL_DOUBLE("train", "alpha", train.alpha),
      AAPL_DOUBLE("train", "beta", train.beta),
      AAPL_DOUBLE("train", "margin", train.margin),
      Field{"train", "constraint_mode",
            [](const ExperimentConfig& c) {
              return std::string(losses::constraint_mode_name(c.train.constraint_mode));
            },
            [](ExperimentConfig& c, const std::string& v) {
              auto m = losses::parse_constraint_mode(v);
              if (!m) throw ConfigError("config: 'train.constraint_mode' must be c2 or c4, got '" + v + "'");
              c.train.constraint_mode = *m;
            }},
      AAPL_BOOL("train", "wrs", train.wrs),
      Field{"train", "delta_variant",
            [](const ExperimentConfig& c) { return std::string(delta_variant_name(c.train.delta_variant)); },
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "same_image") {
                c.train.delta_variant = promptcore::DeltaVariant::kSameImage;
              } else if (v == "class_mean") {
                c.train.delta_variant = promptcore::DeltaVariant::kClassMean;
              } else {
                throw ConfigError("config: 'train.delta_variant' must be same_image or class_mean, got '" + v + "'");
              }
            }},
      Field{"train", "augmentations",
            [](const ExperimentConfig& c) { return augmentation_list(c.train.augmentations); },
            [](ExperimentConfig& c, const std::string& v) {
              c.train.augmentations = parse_augmentation_list("train.augmentations", v);
            }},
      AAPL_INT("profiling", "samples", profiling.samples),
      AAPL_DOUBLE("profiling", "temperature", profiling.temperature),
      AAPL_BOOL("profiling", "standardize", profiling.standardize),
      Field{"output", "dir", [](const ExperimentConfig& c) { return c.output.dir; },
            [](ExperimentConfig& c, const std::string& v) { c.output.dir = v; }},
  };
  return table;
}

#undef AAPL_INT
#undef AAPL_DOUBLE
#undef AAPL_BOOL

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view schedule_name(numcore::LrSchedule s) {
  return s == numcore::LrSchedule::kCosine ? "cosine" : "constant";
}

std::string_view delta_variant_name(promptcore::DeltaVariant v) {
  return v == promptcore::DeltaVariant::kSameImage ? "same_image" : "class_mean";
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return to_config_text(*this) == to_config_text(other);
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (c.dataset.classes < 4 || c.dataset.classes % 2 != 0) fail("dataset.classes must be even and >= 4");
  if (c.dataset.per_class_count < 24) fail("dataset.per_class_count must be >= 24");
  if (c.dataset.image_size < 8) fail("dataset.image_size must be >= 8");
  if (c.dataset.shots < 1 || c.dataset.shots > c.dataset.per_class_count - 2) {
    fail("dataset.shots must leave at least one val and one test image per class");
  }
  if (c.model.feature_dim < 2) fail("model.feature_dim must be >= 2");
  if (c.model.context_length < 1) fail("model.context_length must be >= 1");
  if (c.model.bottleneck_ratio < 0) fail("model.bottleneck_ratio must be >= 0");
  if (!(c.model.temperature > 0.0) || !std::isfinite(c.model.temperature)) fail("model.temperature must be > 0");
  if (c.model.text_hidden < 1) fail("model.text_hidden must be >= 1");
  if (!(c.model.alignment >= 0.0)) fail("model.alignment must be >= 0");
  if (!(c.model.context_init_sigma >= 0.0)) fail("model.context_init_sigma must be >= 0");
  if (c.train.epochs < 1) fail("train.epochs must be >= 1");
  if (!(c.train.lr >= 0.0) || !std::isfinite(c.train.lr)) fail("train.lr must be finite and >= 0");
  if (!(c.train.momentum >= 0.0 && c.train.momentum < 1.0)) fail("train.momentum must be in [0,1)");
  losses::validate(losses::LossWeights{c.train.alpha, c.train.beta});
  losses::validate(losses::TripletConfig{c.train.margin, c.train.constraint_mode});
  if (c.train.augmentations.size() == 1) fail("train.augmentations needs at least two types");
  if (c.profiling.samples < 1) fail("profiling.samples must be >= 1");
  if (!(c.profiling.temperature > 0.0)) fail("profiling.temperature must be > 0");
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    auto hash = line.find('#');
    auto body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    auto key = trim(body.substr(0, eq));
    auto value = trim(body.substr(eq + 1));
    const Field* f = find_field(section, key);
    if (!f) throw ConfigError(where + "unknown key '" + section + "." + key + "'");
    if (!seen.insert(section + "." + key).second) {
      throw ConfigError(where + "duplicate key '" + section + "." + key + "'");
    }
    try {
      f->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  auto cfg = parse_config_text(ss.str());
  validate(cfg);
  return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("config: cannot open " + path.string() + " for writing");
  os << to_config_text(cfg);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  auto name = trim(assignment.substr(0, eq));
  auto value = trim(assignment.substr(eq + 1));
  const Field* match = nullptr;
  auto dot = name.find('.');
  if (dot != std::string::npos) {
    match = find_field(name.substr(0, dot), name.substr(dot + 1));
  } else {
    for (const auto& f : fields()) {
      if (name == f.key) {
        if (match) throw ConfigError("override key '" + name + "' is ambiguous; use section.key");
        match = &f;
      }
    }
  }
  if (!match) throw ConfigError("override: unknown key '" + name + "'");
  match->set(cfg, value);
}

}  // namespace aapl::harness
