// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "domcl/error.hpp"

namespace domcl {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train.epochs must be >= 1");
  if (batch_pairs < 1) throw ValidationError("train.batch_pairs must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ValidationError("train.warmup_fraction must lie in [0, 1)");
  }
  if (!(learning_rate >= 0.0)) throw ValidationError("train.learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ValidationError("train.weight_decay must be >= 0");
  static_cast<void>(Temperature{tau});
  weights.validate();
  strategy.validate();
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, end);
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    values[key] = trim(stripped.substr(eq + 1));
  }
  return values;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

namespace {

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("config key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

template <typename T = long long>
T to_integer(const std::string& key, const std::string& text) {
  T v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("config key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ValidationError("config key '" + key + "': '" + text + "' is not a boolean");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

/// One row per key: how to read it and how to print it.
struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> write;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto text = [&](std::string key, std::string RunConfig::*member) {
      f.push_back({key, [member](RunConfig& c, const std::string& v) { c.*member = v; },
                   [member](const RunConfig& c) { return c.*member; }});
    };
    text("data.source", &RunConfig::source_path);
    text("data.source_domain", &RunConfig::source_domain);
    text("data.target", &RunConfig::target_path);
    text("data.target_domain", &RunConfig::target_domain);
    f.push_back({"data.source_labeled_per_class",
                 [](RunConfig& c, const std::string& v) {
                   const auto n = to_integer("data.source_labeled_per_class", v);
                   if (n < 0) throw ValidationError("data.source_labeled_per_class must be >= 0");
                   c.source_labeled_per_class = static_cast<std::size_t>(n);
                 },
                 [](const RunConfig& c) { return std::to_string(c.source_labeled_per_class); }});
    f.push_back({"data.target_ratio",
                 [](RunConfig& c, const std::string& v) { c.target_ratio = to_double("data.target_ratio", v); },
                 [](const RunConfig& c) { return format_double(c.target_ratio); }});

    f.push_back({"train.epochs",
                 [](RunConfig& c, const std::string& v) { c.train.epochs = static_cast<int>(to_integer("train.epochs", v)); },
                 [](const RunConfig& c) { return std::to_string(c.train.epochs); }});
    f.push_back({"train.batch_pairs",
                 [](RunConfig& c, const std::string& v) { c.train.batch_pairs = static_cast<int>(to_integer("train.batch_pairs", v)); },
                 [](const RunConfig& c) { return std::to_string(c.train.batch_pairs); }});
    auto real = [&](std::string key, double TrainConfig::*member) {
      f.push_back({key, [key, member](RunConfig& c, const std::string& v) { c.train.*member = to_double(key, v); },
                   [member](const RunConfig& c) { return format_double(c.train.*member); }});
    };
    real("train.learning_rate", &TrainConfig::learning_rate);
    real("train.weight_decay", &TrainConfig::weight_decay);
    real("train.warmup_fraction", &TrainConfig::warmup_fraction);
    real("train.tau", &TrainConfig::tau);
    real("train.grad_clip", &TrainConfig::grad_clip);
    f.push_back({"train.seed",
                 [](RunConfig& c, const std::string& v) { c.train.seed = to_integer<std::uint64_t>("train.seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.train.seed); }});
    f.push_back({"train.ce_include_positives",
                 [](RunConfig& c, const std::string& v) { c.train.ce_include_positives = to_bool("train.ce_include_positives", v); },
                 [](const RunConfig& c) { return bool_text(c.train.ce_include_positives); }});

    auto weight = [&](std::string key, double LossWeights::*member) {
      f.push_back({key, [key, member](RunConfig& c, const std::string& v) { c.train.weights.*member = to_double(key, v); },
                   [member](const RunConfig& c) { return format_double(c.train.weights.*member); }});
    };
    weight("loss.w_ce", &LossWeights::ce);
    weight("loss.w_con", &LossWeights::con);
    weight("loss.w_ent", &LossWeights::ent);

    f.push_back({"strategy.choice",
                 [](RunConfig& c, const std::string& v) {
                   auto choice = parse_strategy_choice(v);
                   if (!choice) throw ValidationError("strategy.choice: unknown value '" + v + "'");
                   c.strategy_choice = *choice;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.strategy_choice)); }});
    f.push_back({"strategy.threshold",
                 [](RunConfig& c, const std::string& v) { c.strategy_threshold = to_double("strategy.threshold", v); },
                 [](const RunConfig& c) { return format_double(c.strategy_threshold); }});
    f.push_back({"strategy.allow_ablation",
                 [](RunConfig& c, const std::string& v) { c.allow_ablation = to_bool("strategy.allow_ablation", v); },
                 [](const RunConfig& c) { return bool_text(c.allow_ablation); }});
    f.push_back({"strategy.entropy_start_epoch",
                 [](RunConfig& c, const std::string& v) {
                   c.train.strategy.entropy_start_epoch = static_cast<int>(to_integer("strategy.entropy_start_epoch", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.train.strategy.entropy_start_epoch); }});

    f.push_back({"augment.method",
                 [](RunConfig& c, const std::string& v) {
                   auto m = parse_augment_method(v);
                   if (!m) throw ValidationError("augment.method: unknown value '" + v + "'");
                   c.augment.method = *m;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.augment.method)); }});
    f.push_back({"augment.rate",
                 [](RunConfig& c, const std::string& v) { c.augment.substitution_rate = to_double("augment.rate", v); },
                 [](const RunConfig& c) { return format_double(c.augment.substitution_rate); }});
    f.push_back({"augment.pivot",
                 [](RunConfig& c, const std::string& v) { c.augment.pivot_language = v; },
                 [](const RunConfig& c) { return c.augment.pivot_language; }});
    f.push_back({"augment.beam",
                 [](RunConfig& c, const std::string& v) { c.augment.beam = static_cast<int>(to_integer("augment.beam", v)); },
                 [](const RunConfig& c) { return std::to_string(c.augment.beam); }});
    text("augment.synonyms", &RunConfig::synonyms_path);
    text("augment.cache_dir", &RunConfig::cache_dir);

    text("model.encoder", &RunConfig::encoder);
    f.push_back({"model.buckets",
                 [](RunConfig& c, const std::string& v) { c.model.buckets = static_cast<std::uint32_t>(to_integer("model.buckets", v)); },
                 [](const RunConfig& c) { return std::to_string(c.model.buckets); }});
    f.push_back({"model.hidden_dim",
                 [](RunConfig& c, const std::string& v) { c.model.hidden_dim = to_integer("model.hidden_dim", v); },
                 [](const RunConfig& c) { return std::to_string(c.model.hidden_dim); }});
    f.push_back({"model.projection_dim",
                 [](RunConfig& c, const std::string& v) { c.model.projection_dim = to_integer("model.projection_dim", v); },
                 [](const RunConfig& c) { return std::to_string(c.model.projection_dim); }});

    text("run.out", &RunConfig::out_dir);
    return f;
  }();
  return table;
}

std::string snapshot_text(const RunConfig& config, bool include_run) {
  std::ostringstream out;
  for (const auto& field : fields()) {
    if (!include_run && field.key.rfind("run.", 0) == 0) continue;
    out << field.key << " = " << field.write(config) << '\n';
  }
  const auto& s = config.train.strategy;
  out << "strategy.resolved.mode = " << to_string(s.contrastive_mode) << '\n';
  out << "strategy.resolved.entropy = " << bool_text(s.entropy_enabled) << '\n';
  out << "strategy.resolved.threshold = " << format_double(s.threshold_used) << '\n';
  out << "strategy.resolved.ablation = " << bool_text(s.ablation) << '\n';
  return out.str();
}

}  // namespace

void apply_key_values(RunConfig& config, const KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (key.rfind("strategy.resolved.", 0) == 0) continue;  // derived, re-resolved on load
    bool known = false;
    for (const auto& field : fields()) {
      if (field.key == key) {
        field.read(config, value);
        known = true;
        break;
      }
    }
    if (!known) throw ValidationError("unknown config key '" + key + "'");
  }
}

std::string config_snapshot(const RunConfig& config) { return snapshot_text(config, true); }

std::string config_hash(const RunConfig& config) {
  const std::string text = snapshot_text(config, false);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace domcl
