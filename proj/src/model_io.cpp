#include "dpdlab/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "dpdlab/config.hpp"
#include "dpdlab/errors.hpp"
#include "dpdlab/structured_text.hpp"

namespace dpdlab {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

std::string header(std::string_view kind, TapWindow w) {
  std::string out = "kind = " + std::string(kind) + "\n";
  out += "schema_version = " + std::to_string(kModelSchemaVersion) + "\n\n[spec]\n";
  out += "pre_taps = " + std::to_string(w.pre_taps) + "\n";
  out += "post_taps = " + std::to_string(w.post_taps) + "\n";
  return out;
}

std::string mpm_text(const MpmCoefficients& c) {
  std::string out = header("mpm", c.spec.window);
  out += "k_orders = " + std::to_string(c.spec.k_orders) + "\n";
  out += "offset_b = " + num(c.spec.offset_b) + "\n\n[coefficients]\n# l k re im\n";
  for (std::size_t l = 0; l < c.spec.taps(); ++l) {
    for (std::size_t k = 0; k < c.spec.k_orders; ++k) {
      const cplx v = c.at(l, k);
      out += std::to_string(l) + " " + std::to_string(k) + " " + num(v.real()) + " " + num(v.imag()) + "\n";
    }
  }
  return out;
}

std::string agmpnn_text(const AgmpnnModel& m) {
  std::string out = header("agmpnn", m.window);
  out += "k_orders = " + std::to_string(m.k_orders) + "\n";
  out += "n_experts = " + std::to_string(m.n_experts) + "\n\n[coefficients]\n# m l k re im\n";
  for (std::size_t e = 0; e < m.n_experts; ++e) {
    for (std::size_t l = 0; l < m.taps(); ++l) {
      for (std::size_t k = 0; k < m.k_orders; ++k) {
        const cplx v = m.lambda[m.lambda_index(e, l, k)];
        out += std::to_string(e) + " " + std::to_string(l) + " " + std::to_string(k) + " " + num(v.real()) + " " +
               num(v.imag()) + "\n";
      }
    }
  }
  out += "\n[offsets]\n# m b\n";
  for (std::size_t e = 0; e < m.n_experts; ++e) out += std::to_string(e) + " " + num(m.offsets[e]) + "\n";
  out += "\n[gate]\n# m l mu nu\n";
  for (std::size_t e = 0; e < m.n_experts; ++e) {
    for (std::size_t l = 0; l < m.taps(); ++l) {
      const std::size_t i = m.gate_index(e, l);
      out += std::to_string(e) + " " + std::to_string(l) + " " + num(m.mu[i]) + " " + num(m.nu[i]) + "\n";
    }
  }
  return out;
}

std::string rvftdnn_text(const RvftdnnModel& m) {
  std::string out = header("rvftdnn", m.window);
  out += "n1 = " + std::to_string(m.n1) + "\n";
  out += "n2 = " + std::to_string(m.n2) + "\n\n[weights]\n# tensor index value\n";
  auto dump = [&](const char* name, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out += std::string(name) + " " + std::to_string(i) + " " + num(v[i]) + "\n";
  };
  dump("w1", m.w1);
  dump("b1", m.b1);
  dump("w2", m.w2);
  dump("b2", m.b2);
  dump("w3", m.w3);
  dump("b3", m.b3);
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

const TextSection& need_section(const TextDocument& doc, std::string_view name) {
  const TextSection* s = doc.find(name);
  if (!s) throw FormatError("missing section [" + std::string(name) + "]");
  return *s;
}

const TextEntry& need_key(const TextSection& s, std::string_view key) {
  const TextEntry* e = s.find(key);
  if (!e) throw FormatError("missing key '" + std::string(key) + "' in [" + s.name + "]");
  return *e;
}

void only_keys(const TextSection& s, std::initializer_list<std::string_view> keys) {
  for (const TextEntry& e : s.entries) {
    bool ok = false;
    for (auto k : keys) ok = ok || e.key == k;
    if (!ok) fail(e.line, "unknown key '" + e.key + "' in [" + s.name + "]");
  }
}

std::size_t field_index(const TextRow& r, std::size_t i, std::size_t limit) {
  const std::string& f = r.fields[i];
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) fail(r.line, "expected an index, got '" + f + "'");
  if (v >= limit) fail(r.line, "index " + f + " out of range");
  return v;
}

double field_value(const TextRow& r, std::size_t i) {
  return parse_double(TextEntry{"value", r.fields[i], r.line});
}

void check_width(const TextRow& r, std::size_t n) {
  if (r.fields.size() != n) fail(r.line, "expected " + std::to_string(n) + " fields");
}

// Each slot must be written exactly once.
class Coverage {
 public:
  explicit Coverage(std::size_t n) : seen_(n, false) {}
  void mark(const TextRow& r, std::size_t i) {
    if (seen_[i]) fail(r.line, "duplicate coefficient row");
    seen_[i] = true;
  }
  void require_complete(std::string_view section) const {
    for (bool b : seen_) {
      if (!b) throw FormatError("section [" + std::string(section) + "] is missing rows");
    }
  }

 private:
  std::vector<bool> seen_;
};

TapWindow read_window(const TextSection& spec) {
  return TapWindow{parse_size(need_key(spec, "pre_taps")), parse_size(need_key(spec, "post_taps"))};
}

MpmCoefficients read_mpm(const TextDocument& doc) {
  const TextSection& spec = need_section(doc, "spec");
  only_keys(spec, {"pre_taps", "post_taps", "k_orders", "offset_b"});
  MpmCoefficients c;
  c.spec.window = read_window(spec);
  c.spec.k_orders = parse_size(need_key(spec, "k_orders"));
  c.spec.offset_b = parse_double(need_key(spec, "offset_b"));
  c.spec.validate();
  c.lambda.assign(c.spec.columns(), cplx{});
  const TextSection& rows = need_section(doc, "coefficients");
  Coverage cov(c.lambda.size());
  for (const TextRow& r : rows.rows) {
    check_width(r, 4);
    const std::size_t i = c.spec.column_index(field_index(r, 0, c.spec.taps()), field_index(r, 1, c.spec.k_orders));
    cov.mark(r, i);
    c.lambda[i] = {field_value(r, 2), field_value(r, 3)};
  }
  cov.require_complete("coefficients");
  return c;
}

AgmpnnModel read_agmpnn(const TextDocument& doc) {
  const TextSection& spec = need_section(doc, "spec");
  only_keys(spec, {"pre_taps", "post_taps", "k_orders", "n_experts"});
  AgmpnnModel m;
  m.window = read_window(spec);
  m.k_orders = parse_size(need_key(spec, "k_orders"));
  m.n_experts = parse_size(need_key(spec, "n_experts"));
  if (m.k_orders == 0 || m.n_experts == 0) throw FormatError("[spec] k_orders and n_experts must be positive");
  const std::size_t T = m.taps(), K = m.k_orders, M = m.n_experts;
  m.lambda.assign(M * T * K, cplx{});
  m.offsets.assign(M, 0.0);
  m.mu.assign(M * T, 0.0);
  m.nu.assign(M * T, 0.0);

  Coverage lam(m.lambda.size());
  for (const TextRow& r : need_section(doc, "coefficients").rows) {
    check_width(r, 5);
    const std::size_t i = m.lambda_index(field_index(r, 0, M), field_index(r, 1, T), field_index(r, 2, K));
    lam.mark(r, i);
    m.lambda[i] = {field_value(r, 3), field_value(r, 4)};
  }
  lam.require_complete("coefficients");

  Coverage off(M);
  for (const TextRow& r : need_section(doc, "offsets").rows) {
    check_width(r, 2);
    const std::size_t e = field_index(r, 0, M);
    off.mark(r, e);
    m.offsets[e] = field_value(r, 1);
  }
  off.require_complete("offsets");

  Coverage gate(M * T);
  for (const TextRow& r : need_section(doc, "gate").rows) {
    check_width(r, 4);
    const std::size_t i = m.gate_index(field_index(r, 0, M), field_index(r, 1, T));
    gate.mark(r, i);
    m.mu[i] = field_value(r, 2);
    m.nu[i] = field_value(r, 3);
  }
  gate.require_complete("gate");
  m.validate();
  return m;
}

RvftdnnModel read_rvftdnn(const TextDocument& doc) {
  const TextSection& spec = need_section(doc, "spec");
  only_keys(spec, {"pre_taps", "post_taps", "n1", "n2"});
  RvftdnnModel m;
  m.window = read_window(spec);
  m.n1 = parse_size(need_key(spec, "n1"));
  m.n2 = parse_size(need_key(spec, "n2"));
  if (m.n1 == 0 || m.n2 == 0) throw FormatError("[spec] n1 and n2 must be positive");
  m.w1.assign(m.n1 * m.inputs(), 0.0);
  m.b1.assign(m.n1, 0.0);
  m.w2.assign(m.n2 * m.n1, 0.0);
  m.b2.assign(m.n2, 0.0);
  m.w3.assign(2 * m.n2, 0.0);
  m.b3.assign(2, 0.0);
  struct Tensor {
    const char* name;
    std::vector<double>* data;
    Coverage cov;
  };
  std::vector<Tensor> tensors;
  for (auto [name, data] : {std::pair{"w1", &m.w1}, {"b1", &m.b1}, {"w2", &m.w2}, {"b2", &m.b2}, {"w3", &m.w3},
                            {"b3", &m.b3}}) {
    tensors.push_back({name, data, Coverage(data->size())});
  }
  for (const TextRow& r : need_section(doc, "weights").rows) {
    check_width(r, 3);
    Tensor* t = nullptr;
    for (auto& cand : tensors) {
      if (r.fields[0] == cand.name) t = &cand;
    }
    if (!t) fail(r.line, "unknown tensor '" + r.fields[0] + "'");
    const std::size_t i = field_index(r, 1, t->data->size());
    t->cov.mark(r, i);
    (*t->data)[i] = field_value(r, 2);
  }
  for (const auto& t : tensors) t.cov.require_complete("weights");
  m.validate();
  return m;
}

}  // namespace

std::string model_to_text(const DpdModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MpmCoefficients>) return mpm_text(m);
        else if constexpr (std::is_same_v<T, AgmpnnModel>) return agmpnn_text(m);
        else return rvftdnn_text(m);
      },
      model);
}

DpdModel model_from_text(std::string_view text) {
  const TextDocument doc = parse_structured(text);
  const TextSection& top = doc.sections.front();
  only_keys(top, {"kind", "schema_version"});
  const TextEntry& version = need_key(top, "schema_version");
  if (parse_int(version) != kModelSchemaVersion) {
    fail(version.line, "unsupported schema_version " + version.value);
  }
  const TextEntry& kind = need_key(top, "kind");
  ModelFamily family = ModelFamily::mpm;
  try {
    family = parse_family(kind.value);
  } catch (const ArgumentError& e) {
    fail(kind.line, e.what());
  }
  std::vector<std::string_view> sections{"", "spec"};
  switch (family) {
    case ModelFamily::mpm: sections.push_back("coefficients"); break;
    case ModelFamily::agmpnn: sections.insert(sections.end(), {"coefficients", "offsets", "gate"}); break;
    case ModelFamily::rvftdnn: sections.push_back("weights"); break;
  }
  for (const TextSection& s : doc.sections) {
    if (std::find(sections.begin(), sections.end(), s.name) == sections.end()) {
      fail(s.line, "unexpected section [" + s.name + "] for kind " + kind.value);
    }
    if (s.name != "spec" && !s.name.empty() && !s.entries.empty()) {
      fail(s.entries.front().line, "unexpected key in data section [" + s.name + "]");
    }
  }
  try {
    switch (family) {
      case ModelFamily::mpm: return read_mpm(doc);
      case ModelFamily::agmpnn: return read_agmpnn(doc);
      case ModelFamily::rvftdnn: return read_rvftdnn(doc);
    }
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
  fail(kind.line, "unknown kind");
}

void save_model(const std::filesystem::path& path, const DpdModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_text(model);
  if (!out) throw IoError("write failed: " + path.string());
}

DpdModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return model_from_text(text);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace dpdlab
