#include "dpdlab/config.hpp"

#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "dpdlab/errors.hpp"
#include "dpdlab/structured_text.hpp"

namespace dpdlab {

namespace {

[[noreturn]] void fail_at(const TextEntry& e, const std::string& what) {
  throw FormatError("line " + std::to_string(e.line) + ": key '" + e.key + "' " + what);
}

std::uint32_t parse_seed(const TextEntry& e) {
  const long long v = parse_int(e);
  if (v < 0 || v > static_cast<long long>(std::numeric_limits<std::uint32_t>::max())) {
    fail_at(e, "expects a seed in [0, 2^32), got '" + e.value + "'");
  }
  return static_cast<std::uint32_t>(v);
}

std::optional<double> parse_optional_double(const TextEntry& e) {
  if (e.value == "none") return std::nullopt;
  return parse_double(e);
}

template <typename T, typename F>
std::vector<T> parse_items(const TextEntry& e, F&& convert) {
  std::vector<T> out;
  for (const std::string& item : parse_list(e)) out.push_back(convert(TextEntry{e.key, item, e.line}));
  return out;
}

void apply_pa(const TextSection& s, RunConfig& cfg) {
  PaConfig& pa = cfg.pa;
  if (const auto* e = s.find("preset")) {
    try {
      pa = preset(parse_distortion_level(e->value));
    } catch (const ArgumentError&) {
      fail_at(*e, "expects low or high, got '" + e->value + "'");
    }
  }
  bool regenerate = false;
  for (const TextEntry& e : s.entries) {
    if (e.key == "preset") continue;
    if (e.key == "rho") pa.rho = parse_double(e), regenerate = true;
    else if (e.key == "sigma") pa.sigma = parse_double(e), regenerate = true;
    else if (e.key == "l_pa") pa.l_pa = parse_size(e), regenerate = true;
    else if (e.key == "k_pa") pa.k_pa = parse_size(e), regenerate = true;
    else if (e.key == "drive_db") pa.drive_db = parse_double(e);
    else if (e.key == "a_sat") pa.smooth_limit = parse_optional_double(e);
    else if (e.key == "feedback_snr_db") pa.feedback_snr_db = parse_optional_double(e);
    else if (e.key == "name") pa.name = e.value;
    else fail_at(e, "is not a [pa] key");
  }
  if (regenerate) {
    const PaConfig rebuilt =
        make_pa_config(pa.rho, pa.sigma, pa.l_pa, pa.k_pa, pa.drive_db, pa.smooth_limit, pa.feedback_snr_db);
    pa.coeffs = rebuilt.coeffs;
    if (!s.find("name")) pa.name = "custom";
  }
  try {
    pa.validate();
  } catch (const ArgumentError& err) {
    throw FormatError("line " + std::to_string(s.line) + ": [pa] " + err.what());
  }
}

void apply_signal(const TextSection& s, SignalConfig& sig) {
  for (const TextEntry& e : s.entries) {
    if (e.key == "seed") sig.seed = parse_seed(e);
    else if (e.key == "n_samples") sig.n_samples = parse_size(e);
    else if (e.key == "bandwidth_fraction") sig.bandwidth_fraction = parse_double(e);
    else fail_at(e, "is not a [signal] key");
  }
}

TapWindow window_from_taps(const TextEntry& e) {
  const std::size_t taps = parse_size(e);
  if (taps == 0) fail_at(e, "must be at least 1");
  return TapWindow{taps - 1, 0};
}

void apply_model(const TextSection& s, ModelSpec& m) {
  for (const TextEntry& e : s.entries) {
    if (e.key == "kind") {
      try {
        m.family = parse_family(e.value);
      } catch (const ArgumentError&) {
        fail_at(e, "expects mpm, agmpnn or rvftdnn, got '" + e.value + "'");
      }
    } else if (e.key == "taps") m.window = window_from_taps(e);
    else if (e.key == "k_orders") m.k_orders = parse_size(e);
    else if (e.key == "m_experts") m.m_experts = parse_size(e);
    else if (e.key == "n1") m.n1 = parse_size(e);
    else if (e.key == "n2") m.n2 = parse_size(e);
    else if (e.key == "warm_start") m.warm_start = parse_bool(e);
    else if (e.key == "ridge") m.ridge = parse_optional_double(e);
    else if (e.key == "seed") m.model_seed = parse_seed(e);
    else fail_at(e, "is not a [model] key");
  }
}

void apply_train(const TextSection& s, TrainConfig& t) {
  for (const TextEntry& e : s.entries) {
    if (e.key == "learning_rate") t.learning_rate = parse_double(e);
    else if (e.key == "beta1") t.beta1 = parse_double(e);
    else if (e.key == "beta2") t.beta2 = parse_double(e);
    else if (e.key == "epsilon") t.epsilon = parse_double(e);
    else if (e.key == "batch_size") t.batch_size = parse_size(e);
    else if (e.key == "segment_len") t.segment_len = parse_size(e);
    else if (e.key == "max_epochs") t.max_epochs = parse_size(e);
    else if (e.key == "patience") t.patience = parse_size(e);
    else if (e.key == "val_fraction") t.val_fraction = parse_double(e);
    else if (e.key == "seed") t.seed = parse_seed(e);
    else fail_at(e, "is not a [train] key");
  }
  try {
    t.validate();
  } catch (const ArgumentError& err) {
    throw FormatError("line " + std::to_string(s.line) + ": [train] " + err.what());
  }
}

void apply_ila(const TextSection& s, IlaOptions& o) {
  for (const TextEntry& e : s.entries) {
    if (e.key == "max_lag") o.max_lag = parse_size(e);
    else if (e.key == "noise_seed") o.noise_seed = parse_seed(e);
    else if (e.key == "feedback_noise") o.feedback_noise = parse_bool(e);
    else if (e.key == "iterations") o.iterations = parse_size(e);
    else if (e.key == "deploy_select") o.deploy_select = parse_bool(e);
    else fail_at(e, "is not an [ila] key");
  }
}

void apply_sweep(const TextSection& s, RunConfig& cfg) {
  SweepSettings& w = cfg.sweep;
  auto sizes = [](const TextEntry& e) { return parse_items<std::size_t>(e, parse_size); };
  for (const TextEntry& e : s.entries) {
    if (e.key == "families") {
      w.families = parse_items<ModelFamily>(e, [](const TextEntry& item) {
        try {
          return parse_family(item.value);
        } catch (const ArgumentError&) {
          fail_at(item, "has unknown family '" + item.value + "'");
        }
      });
    } else if (e.key == "presets") {
      cfg.sweep_presets = parse_items<PaConfig>(e, [](const TextEntry& item) {
        try {
          return preset(parse_distortion_level(item.value));
        } catch (const ArgumentError&) {
          fail_at(item, "has unknown preset '" + item.value + "'");
        }
      });
    } else if (e.key == "taps") w.taps_list = sizes(e);
    else if (e.key == "seeds") w.seeds = parse_items<std::uint32_t>(e, parse_seed);
    else if (e.key == "param_targets") w.param_targets = sizes(e);
    else if (e.key == "budget_lo") w.budget_lo = parse_size(e);
    else if (e.key == "budget_hi") w.budget_hi = parse_size(e);
    else if (e.key == "complexity_taps") w.complexity_taps = parse_size(e);
    else if (e.key == "agmpnn_k") w.agmpnn_k = parse_size(e);
    else if (e.key == "agmpnn_m") w.agmpnn_m = parse_size(e);
    else if (e.key == "agmpnn_max_k") w.agmpnn_max_k = parse_size(e);
    else if (e.key == "agmpnn_max_m") w.agmpnn_max_m = parse_size(e);
    else if (e.key == "agmpnn_warm_start") w.agmpnn_warm_start = parse_bool(e);
    else if (e.key == "mpm_max_k") w.mpm_max_k = parse_size(e);
    else if (e.key == "rvftdnn_n1" || e.key == "rvftdnn_n2") continue;
    else fail_at(e, "is not a [sweep] key");
  }
  const TextEntry* n1 = s.find("rvftdnn_n1");
  const TextEntry* n2 = s.find("rvftdnn_n2");
  if (n1 || n2) {
    // Cartesian product; a missing axis keeps the default axis values.
    std::set<std::size_t> xs, ys;
    for (const auto& [a, b] : default_search_grid()) xs.insert(a), ys.insert(b);
    if (n1) {
      const auto v = sizes(*n1);
      xs = std::set<std::size_t>(v.begin(), v.end());
    }
    if (n2) {
      const auto v = sizes(*n2);
      ys = std::set<std::size_t>(v.begin(), v.end());
    }
    w.rvftdnn_grid.clear();
    for (std::size_t x : xs) {
      for (std::size_t y : ys) w.rvftdnn_grid.emplace_back(x, y);
    }
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  const TextDocument doc = parse_structured(text);
  RunConfig cfg;
  for (const TextSection& s : doc.sections) {
    if (!s.rows.empty()) {
      throw FormatError("line " + std::to_string(s.rows.front().line) + ": expected 'key = value'");
    }
    if (s.name.empty()) {
      if (!s.entries.empty()) fail_at(s.entries.front(), "appears before any section header");
    } else if (s.name == "pa") apply_pa(s, cfg);
    else if (s.name == "signal") apply_signal(s, cfg.signal);
    else if (s.name == "model") apply_model(s, cfg.model);
    else if (s.name == "train") apply_train(s, cfg.train);
    else if (s.name == "ila") apply_ila(s, cfg.ila);
    else if (s.name == "sweep") apply_sweep(s, cfg);
    else throw FormatError("line " + std::to_string(s.line) + ": unknown section [" + s.name + "]");
  }
  return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_config(text);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string pa_to_text(const PaConfig& pa) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); };
  std::string out = "[pa]\n";
  out += "name = " + pa.name + "\n";
  out += "rho = " + format_double(pa.rho) + "\n";
  out += "sigma = " + format_double(pa.sigma) + "\n";
  out += "l_pa = " + std::to_string(pa.l_pa) + "\n";
  out += "k_pa = " + std::to_string(pa.k_pa) + "\n";
  out += "drive_db = " + format_double(pa.drive_db) + "\n";
  out += "a_sat = " + opt(pa.smooth_limit) + "\n";
  out += "feedback_snr_db = " + opt(pa.feedback_snr_db) + "\n";
  return out;
}

SweepSettings effective_sweep(const RunConfig& cfg) {
  SweepSettings s = cfg.sweep;
  s.n_samples = cfg.signal.n_samples;
  s.bandwidth_fraction = cfg.signal.bandwidth_fraction;
  s.train = cfg.train;
  s.ila = cfg.ila;
  return s;
}

}  // namespace dpdlab
