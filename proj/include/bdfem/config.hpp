#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/spaces.hpp"

namespace bdfem {

enum class DirichletPreset { zero, t_shape_inflow };

/// One adaptive experiment: domain, element pair, weight exponent, point
/// sources, boundary preset, and the iteration budget.
struct ExperimentConfig {
  std::string preset = "custom";
  DomainSpec domain = DomainSpec::unit_square();
  PairKind pair = PairKind::taylor_hood;
  double alpha = 1.0;
  std::vector<std::pair<Vec2, Vec2>> sources;  // (z, F)
  DirichletPreset dirichlet = DirichletPreset::zero;
  int iterations = 20;
  int max_ndof = 0;  // 0 = no cap; otherwise stop before a larger solve
  bool nonlinear = true;
  double tol = 1e-8;
  std::string out_dir = "out";

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

/// alpha in (0,2), at least one iteration; throws UsageError naming the field.
inline void validate(const ExperimentConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 2.0))
    throw UsageError("alpha must lie in (0,2), got " +
                     std::to_string(cfg.alpha));
  if (cfg.iterations < 1) throw UsageError("iterations must be at least 1");
  if (!(cfg.tol > 0.0)) throw UsageError("tol must be positive");
}

inline ExperimentConfig example1_config() {
  ExperimentConfig c;
  c.preset = "example1";
  c.domain = DomainSpec::unit_square();
  c.sources = {{{0.5, 0.5}, {1.0, 1.0}}};
  c.iterations = 20;
  return c;
}

inline ExperimentConfig example2_config() {
  ExperimentConfig c;
  c.preset = "example2";
  c.domain = DomainSpec::l_shape();
  c.sources = {{{0.5, 0.5}, {1.0, 1.0}}};
  c.iterations = 40;
  return c;
}

inline ExperimentConfig example3_config() {
  ExperimentConfig c;
  c.preset = "example3";
  c.domain = DomainSpec::t_shape();
  c.sources = {{{0.0, 0.5}, {1.0, 1.0}}, {{0.0, -1.0}, {1.0, 1.0}}};
  c.dirichlet = DirichletPreset::t_shape_inflow;
  c.alpha = 1.0;
  c.iterations = 60;
  return c;
}

inline ExperimentConfig config_for_preset(const std::string& name) {
  if (name == "example1") return example1_config();
  if (name == "example2") return example2_config();
  if (name == "example3") return example3_config();
  if (name == "manufactured")
    throw UsageError(
        "preset 'manufactured' is the verification study; run the 'verify' "
        "subcommand instead");
  throw UsageError("unknown preset '" + name + "'");
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string domain_name(DomainSpec::Kind k) {
  switch (k) {
    case DomainSpec::Kind::unit_square: return "unit_square";
    case DomainSpec::Kind::l_shape: return "l_shape";
    case DomainSpec::Kind::t_shape: return "t_shape";
    case DomainSpec::Kind::polygon: return "polygon";
  }
  return "unit_square";
}

}  // namespace detail

/// Line-oriented "key = value" text form of a config.
inline std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "preset = " << cfg.preset << "\n";
  os << "domain = " << detail::domain_name(cfg.domain.kind) << "\n";
  if (cfg.domain.kind == DomainSpec::Kind::polygon) {
    os << "polygon =";
    for (const Vec2 p : cfg.domain.polygon)
      os << " (" << detail::fmt_double(p.x) << "," << detail::fmt_double(p.y)
         << ")";
    os << "\n";
  }
  os << "pair = "
     << (cfg.pair == PairKind::taylor_hood ? "taylor_hood" : "mini") << "\n";
  os << "alpha = " << detail::fmt_double(cfg.alpha) << "\n";
  os << "sources =";
  for (const auto& [z, F] : cfg.sources)
    os << " (" << detail::fmt_double(z.x) << "," << detail::fmt_double(z.y)
       << ";" << detail::fmt_double(F.x) << "," << detail::fmt_double(F.y)
       << ")";
  os << "\n";
  os << "dirichlet = "
     << (cfg.dirichlet == DirichletPreset::zero ? "zero" : "t_shape_inflow")
     << "\n";
  os << "iterations = " << cfg.iterations << "\n";
  if (cfg.max_ndof > 0) os << "max_ndof = " << cfg.max_ndof << "\n";
  os << "nonlinear = " << (cfg.nonlinear ? "on" : "off") << "\n";
  os << "tol = " << detail::fmt_double(cfg.tol) << "\n";
  os << "out = " << cfg.out_dir << "\n";
  return os.str();
}

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.sources.clear();
  std::istringstream is(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  auto parse_pairs = [&](const std::string& v) {
    std::vector<std::array<double, 4>> out;
    std::size_t pos = 0;
    while ((pos = v.find('(', pos)) != std::string::npos) {
      const auto end = v.find(')', pos);
      if (end == std::string::npos) throw UsageError("sources: unbalanced '('");
      std::string body = v.substr(pos + 1, end - pos - 1);
      for (char& ch : body)
        if (ch == ',' || ch == ';') ch = ' ';
      std::istringstream bs(body);
      std::array<double, 4> vals{};
      int got = 0;
      while (got < 4 && (bs >> vals[got])) ++got;
      out.push_back(vals);
      if (got != 4 && got != 2) throw UsageError("sources: bad tuple");
      pos = end + 1;
    }
    return out;
  };

  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "preset") {
      cfg.preset = val;
    } else if (key == "domain") {
      if (val == "unit_square") cfg.domain = DomainSpec::unit_square();
      else if (val == "l_shape") cfg.domain = DomainSpec::l_shape();
      else if (val == "t_shape") cfg.domain = DomainSpec::t_shape();
      else if (val == "polygon") cfg.domain.kind = DomainSpec::Kind::polygon;
      else throw UsageError("domain: unknown value '" + val + "'");
    } else if (key == "polygon") {
      cfg.domain.kind = DomainSpec::Kind::polygon;
      cfg.domain.polygon.clear();
      for (const auto& t : parse_pairs(val))
        cfg.domain.polygon.push_back({t[0], t[1]});
    } else if (key == "pair") {
      if (val == "taylor_hood" || val == "th") cfg.pair = PairKind::taylor_hood;
      else if (val == "mini") cfg.pair = PairKind::mini;
      else throw UsageError("pair: unknown value '" + val + "'");
    } else if (key == "alpha") {
      cfg.alpha = std::stod(val);
    } else if (key == "sources") {
      cfg.sources.clear();
      for (const auto& t : parse_pairs(val))
        cfg.sources.push_back({{t[0], t[1]}, {t[2], t[3]}});
    } else if (key == "dirichlet") {
      if (val == "zero") cfg.dirichlet = DirichletPreset::zero;
      else if (val == "t_shape_inflow")
        cfg.dirichlet = DirichletPreset::t_shape_inflow;
      else throw UsageError("dirichlet: unknown value '" + val + "'");
    } else if (key == "iterations") {
      cfg.iterations = std::stoi(val);
    } else if (key == "max_ndof") {
      cfg.max_ndof = std::stoi(val);
    } else if (key == "nonlinear") {
      if (val == "on") cfg.nonlinear = true;
      else if (val == "off") cfg.nonlinear = false;
      else throw UsageError("nonlinear: expected on|off");
    } else if (key == "tol") {
      cfg.tol = std::stod(val);
    } else if (key == "out") {
      cfg.out_dir = val;
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace bdfem
