#include "pwsynth/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pwsynth/errors.hpp"

namespace pwsynth {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& leaf) {
  return base.empty() ? leaf : base + "." + leaf;
}

const json& req(const json& j, const std::string& path, const std::string& k) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(k);
  if (it == j.end()) throw ConfigError(join(path, k), "missing required key");
  return *it;
}

double req_num(const json& j, const std::string& path, const std::string& k) {
  const json& v = req(j, path, k);
  if (!v.is_number()) throw ConfigError(join(path, k), "expected a number");
  return v.get<double>();
}

std::int64_t req_int(const json& j, const std::string& path, const std::string& k) {
  const json& v = req(j, path, k);
  if (!v.is_number_integer()) throw ConfigError(join(path, k), "expected an integer");
  return v.get<std::int64_t>();
}

std::string req_str(const json& j, const std::string& path, const std::string& k) {
  const json& v = req(j, path, k);
  if (!v.is_string()) throw ConfigError(join(path, k), "expected a string");
  return v.get<std::string>();
}

double opt_num(const json& j, const std::string& path, const std::string& k, double dflt) {
  if (!j.is_object() || !j.contains(k)) return dflt;
  const json& v = j.at(k);
  if (!v.is_number()) throw ConfigError(join(path, k), "expected a number");
  return v.get<double>();
}

std::int64_t opt_int(const json& j, const std::string& path, const std::string& k,
                     std::int64_t dflt) {
  if (!j.is_object() || !j.contains(k)) return dflt;
  const json& v = j.at(k);
  if (!v.is_number_integer()) throw ConfigError(join(path, k), "expected an integer");
  return v.get<std::int64_t>();
}

std::string opt_str(const json& j, const std::string& path, const std::string& k,
                    const std::string& dflt) {
  if (!j.is_object() || !j.contains(k)) return dflt;
  const json& v = j.at(k);
  if (!v.is_string()) throw ConfigError(join(path, k), "expected a string");
  return v.get<std::string>();
}

SpectrumConfig parse_spectrum(const json& j, const std::string& path) {
  SpectrumConfig s;
  s.kind = req_str(j, path, "kind");
  if (s.kind == "integers" || s.kind == "integers_excluding_zero") {
    // no parameters
  } else if (s.kind == "shifted") {
    s.shift = req_num(j, path, "shift");
  } else if (s.kind == "symmetric_shifted") {
    s.delta0 = req_num(j, path, "delta0");
  } else if (s.kind == "explicit") {
    const json& pts = req(j, path, "points");
    if (!pts.is_array()) throw ConfigError(join(path, "points"), "expected an array");
    for (const auto& p : pts) {
      if (!p.is_number()) throw ConfigError(join(path, "points"), "expected numbers");
      s.points.push_back(p.get<double>());
    }
  } else {
    throw ConfigError(join(path, "kind"), "unknown spectrum kind '" + s.kind + "'");
  }
  return s;
}

FamilyRule parse_rule(const json& j, const std::string& path) {
  FamilyRule rule;
  rule.k_min = static_cast<int>(req_int(j, path, "k_min"));
  rule.k_max = static_cast<int>(req_int(j, path, "k_max"));
  rule.center_shift = opt_num(j, path, "center_shift", 0.0);
  const json& dr = req(j, path, "d_rule");
  std::string dpath = join(path, "d_rule");
  std::string dk = req_str(dr, dpath, "kind");
  if (dk == "power") {
    rule.d_kind = FamilyRule::DKind::power;
    rule.d_value = req_num(dr, dpath, "exponent");
  } else if (dk == "ratio") {
    rule.d_kind = FamilyRule::DKind::ratio;
    rule.d_value = req_num(dr, dpath, "value");
  } else {
    throw ConfigError(join(dpath, "kind"), "unknown d_rule kind '" + dk + "'");
  }
  if (!rule.valid()) throw ConfigError(path, "k_max must be >= k_min");
  return rule;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "top level must be an object");

  RunConfig cfg;

  {
    const json& m = req(j, "", "model");
    cfg.model.kind = req_str(m, "model", "kind");
    if (cfg.model.kind == "simple_example") {
      cfg.model.k_cap = static_cast<int>(opt_int(m, "model", "k_cap", 60));
      if (cfg.model.k_cap < 10) throw ConfigError("model.k_cap", "must be at least 10");
    } else if (cfg.model.kind == "kadets") {
      cfg.model.delta0 = req_num(m, "model", "delta0");
      cfg.model.delta = req_num(m, "model", "delta");
      const json& rho = req(m, "model", "rho");
      cfg.model.k_min = static_cast<int>(req_int(rho, "model.rho", "k_min"));
      cfg.model.k_max = static_cast<int>(req_int(rho, "model.rho", "k_max"));
      if (cfg.model.k_max < cfg.model.k_min)
        throw ConfigError("model.rho.k_max", "must be >= k_min");
    } else if (cfg.model.kind == "pv") {
      cfg.model.spectrum = parse_spectrum(req(m, "model", "spectrum"), "model.spectrum");
      cfg.model.pv.tol = opt_num(m, "model", "tol", 1e-10);
      cfg.model.pv.max_doublings =
          static_cast<int>(opt_int(m, "model", "max_doublings", 40));
      if (cfg.model.pv.tol <= 0.0) throw ConfigError("model.tol", "must be positive");
      if (cfg.model.pv.max_doublings < 1)
        throw ConfigError("model.max_doublings", "must be at least 1");
    } else {
      throw ConfigError("model.kind", "unknown model kind '" + cfg.model.kind + "'");
    }
  }

  if (j.contains("family")) {
    const json& f = j.at("family");
    cfg.family.kind = req_str(f, "family", "kind");
    if (cfg.family.kind == "powers_of_two") {
      cfg.family.rule = parse_rule(f, "family");
    } else if (cfg.family.kind == "explicit") {
      const json& ivs = req(f, "family", "intervals");
      if (!ivs.is_array() || ivs.empty())
        throw ConfigError("family.intervals", "expected a nonempty array");
      for (const auto& iv : ivs) {
        Interval e;
        e.rho = req_num(iv, "family.intervals[]", "rho");
        e.d = req_num(iv, "family.intervals[]", "d");
        cfg.family.intervals.push_back(e);
      }
      cfg.family.k_offset = static_cast<int>(opt_int(f, "family", "k_offset", 0));
    } else {
      throw ConfigError("family.kind", "unknown family kind '" + cfg.family.kind + "'");
    }
  }

  {
    const json t = j.contains("truncation") ? j.at("truncation") : json::object();
    cfg.truncation.window = opt_int(t, "truncation", "window", cfg.truncation.window);
    cfg.truncation.tol = opt_num(t, "truncation", "tol", cfg.truncation.tol);
    cfg.truncation.max_doublings = static_cast<int>(
        opt_int(t, "truncation", "max_doublings", cfg.truncation.max_doublings));
    std::int64_t N = cfg.truncation.window;
    if (N < 1024 || (N & (N - 1)) != 0)
      throw ConfigError("truncation.window", "must be a power of two, at least 1024");
    if (cfg.truncation.tol <= 0.0) throw ConfigError("truncation.tol", "must be positive");
    if (cfg.truncation.max_doublings < 1)
      throw ConfigError("truncation.max_doublings", "must be at least 1");
  }

  {
    const json b = j.contains("breaker") ? j.at("breaker") : json::object();
    cfg.breaker.eta = opt_num(b, "breaker", "eta", cfg.breaker.eta);
    cfg.breaker.fp_rel_tol = opt_num(b, "breaker", "fp_tol", cfg.breaker.fp_rel_tol);
    cfg.breaker.fp_max_iters =
        static_cast<int>(opt_int(b, "breaker", "fp_max_iters", cfg.breaker.fp_max_iters));
    cfg.breaker.cell_length = opt_num(b, "breaker", "cell_length", cfg.breaker.cell_length);
    cfg.breaker.density_C = opt_num(b, "breaker", "density_C", cfg.breaker.density_C);
    cfg.breaker.s_rescale = opt_num(b, "breaker", "s_rescale", cfg.breaker.s_rescale);
    if (!(cfg.breaker.eta > 0.0 && cfg.breaker.eta < 1.0))
      throw ConfigError("breaker.eta", "must lie in (0, 1)");
    if (cfg.breaker.fp_rel_tol <= 0.0) throw ConfigError("breaker.fp_tol", "must be positive");
    if (cfg.breaker.fp_max_iters < 1)
      throw ConfigError("breaker.fp_max_iters", "must be at least 1");
    if (cfg.breaker.cell_length <= 0.0)
      throw ConfigError("breaker.cell_length", "must be positive");
    if (cfg.breaker.density_C <= 0.0) throw ConfigError("breaker.density_C", "must be positive");
    if (cfg.breaker.s_rescale <= 0.0) throw ConfigError("breaker.s_rescale", "must be positive");
    cfg.breaker.window = cfg.truncation.window;
  }

  {
    const json c = j.contains("certifier") ? j.at("certifier") : json::object();
    cfg.certifier.grid_cap = opt_num(c, "certifier", "grid_cap", cfg.certifier.grid_cap);
    cfg.certifier.ratio_cap = opt_num(c, "certifier", "ratio_cap", cfg.certifier.ratio_cap);
    cfg.certifier.c1_cap = opt_int(c, "certifier", "c1_cap", cfg.certifier.c1_cap);
    if (cfg.certifier.grid_cap <= 0.0) throw ConfigError("certifier.grid_cap", "must be positive");
    if (cfg.certifier.ratio_cap <= 0.0)
      throw ConfigError("certifier.ratio_cap", "must be positive");
    if (cfg.certifier.c1_cap < 4) throw ConfigError("certifier.c1_cap", "must be at least 4");
  }

  {
    const json o = j.contains("output") ? j.at("output") : json::object();
    cfg.output.json = opt_str(o, "output", "json", "");
    cfg.output.csv = opt_str(o, "output", "csv", "");
  }

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::shared_ptr<const Spectrum> make_spectrum(const SpectrumConfig& cfg) {
  if (cfg.kind == "integers") return std::make_shared<IntegerLatticeSpectrum>(false);
  if (cfg.kind == "integers_excluding_zero")
    return std::make_shared<IntegerLatticeSpectrum>(true);
  if (cfg.kind == "shifted") return std::make_shared<ShiftedLatticeSpectrum>(cfg.shift);
  if (cfg.kind == "symmetric_shifted")
    return std::make_shared<SymmetricShiftedSpectrum>(cfg.delta0);
  if (cfg.kind == "explicit") return std::make_shared<ExplicitSpectrum>(cfg.points);
  throw ConfigError("spectrum.kind", "unknown spectrum kind '" + cfg.kind + "'");
}

std::shared_ptr<const GenFnModel> make_model(const ModelConfig& cfg) {
  if (cfg.kind == "simple_example") return std::make_shared<SimpleExampleModel>(cfg.k_cap);
  if (cfg.kind == "kadets") {
    if (!(cfg.delta0 < cfg.delta))
      throw ConfigError("model.delta", "must exceed delta0");
    double e = 2.0 * cfg.delta0 / (cfg.delta0 + cfg.delta);
    FamilyRule rule;
    rule.k_min = cfg.k_min;
    rule.k_max = cfg.k_max;
    rule.center_shift = 0.0;
    rule.d_kind = FamilyRule::DKind::power;
    rule.d_value = e;
    return std::make_shared<KadetsModel>(cfg.delta0, cfg.delta,
                                         IntervalFamily::from_rule(rule));
  }
  if (cfg.kind == "pv")
    return std::make_shared<PvProductModel>(make_spectrum(cfg.spectrum), cfg.pv);
  throw ConfigError("model.kind", "unknown model kind '" + cfg.kind + "'");
}

IntervalFamily make_family(const FamilyConfig& cfg) {
  if (cfg.kind == "powers_of_two") return IntervalFamily::from_rule(cfg.rule);
  if (cfg.kind == "explicit") return IntervalFamily(cfg.intervals, cfg.k_offset);
  if (cfg.kind.empty())
    throw ConfigError("family", "this command requires a family block");
  throw ConfigError("family.kind", "unknown family kind '" + cfg.kind + "'");
}

}  // namespace pwsynth
