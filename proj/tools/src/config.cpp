#include "jdrisk_app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace jdrisk::app {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(where + ": '" + raw + "' is not a number");
  return v;
}

std::uint64_t to_uint(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(where + ": '" + raw + "' is not a nonnegative integer");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> to_list(const std::string& raw, const std::string& where) {
  std::vector<double> out;
  for (const auto& item : split(raw, ',')) out.push_back(to_double(item, where));
  return out;
}

bool to_bool(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + raw + "'");
}

// Visits every key of a section, rejecting keys outside `allowed`.
template <class F>
void for_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed, F&& f) {
  for (const auto& [key, node] : section) {
    if (!allowed.count(key)) throw ConfigError("[" + name + "]: unknown key '" + key + "'");
    // The INI reader only knows whole-line comments; drop trailing ones here.
    const std::string& raw = node.data();
    f(key, raw.substr(0, raw.find_first_of(";#")), "[" + name + "] " + key);
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

}  // namespace

NegJumpMode parse_negjump_mode(const std::string& s) {
  if (s == "off") return NegJumpMode::Off;
  if (s == "paper") return NegJumpMode::PaperFormula;
  if (s == "thinning") return NegJumpMode::ExactThinning;
  throw ConfigError("negjump method must be off, paper or thinning, got '" + s + "'");
}

const char* to_string(NegJumpMode mode) {
  switch (mode) {
    case NegJumpMode::Off: return "off";
    case NegJumpMode::PaperFormula: return "paper";
    case NegJumpMode::ExactThinning: return "thinning";
  }
  return "thinning";
}

RunConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  c.mu.clear();
  bool have_mu = false, have_sigma = false;
  std::vector<std::pair<std::size_t, JumpConfig>> jump_sections;

  for (const auto& [name, section] : tree) {
    if (!section.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    if (name == "grid") {
      for_keys(section, name, {"horizon", "nodes"}, [&](const std::string& k, const std::string& v, const std::string& w) {
        if (k == "horizon") c.horizon = to_double(v, w);
        else c.nodes = to_uint(v, w);
      });
    } else if (name == "market") {
      for_keys(section, name, {"dimension", "r", "mu", "sigma"},
               [&](const std::string& k, const std::string& v, const std::string& w) {
                 if (k == "dimension") c.dimension = static_cast<int>(to_uint(v, w));
                 else if (k == "r") c.r = to_list(v, w);
                 else if (k == "mu") c.mu = to_list(v, w), have_mu = true;
                 else c.sigma = to_list(v, w), have_sigma = true;
               });
    } else if (name.rfind("jumps", 0) == 0) {
      const std::string idx = trim(name.substr(5));
      const std::size_t j = to_uint(idx, "section [" + name + "]");
      JumpConfig jc;
      bool have_points = false, have_density = false;
      for_keys(section, name, {"lambda", "points", "density", "lower", "upper", "quadrature_nodes"},
               [&](const std::string& k, const std::string& v, const std::string& w) {
                 if (k == "lambda") {
                   jc.lambda = to_double(v, w);
                 } else if (k == "points") {
                   have_points = true;
                   for (const auto& item : split(v, ',')) {
                     const auto zp = split(item, ':');
                     if (zp.size() != 2) throw ConfigError(w + ": expected size:probability pairs");
                     jc.points.emplace_back(to_double(zp[0], w), to_double(zp[1], w));
                   }
                 } else if (k == "density") {
                   have_density = true;
                   jc.density = to_list(v, w);
                 } else if (k == "lower") {
                   jc.density_lower = to_double(v, w);
                 } else if (k == "upper") {
                   jc.density_upper = to_double(v, w);
                 } else {
                   jc.quadrature_nodes = static_cast<int>(to_uint(v, w));
                 }
               });
      if (have_points == have_density)
        throw ConfigError("[" + name + "]: give exactly one of points or density");
      jump_sections.emplace_back(j, std::move(jc));
    } else if (name == "utility") {
      for_keys(section, name, {"gamma", "gamma1", "gamma2", "consumption"},
               [&](const std::string& k, const std::string& v, const std::string& w) {
                 if (k == "gamma") c.gamma1 = c.gamma2 = to_double(v, w);
                 else if (k == "gamma1") c.gamma1 = to_double(v, w);
                 else if (k == "gamma2") c.gamma2 = to_double(v, w);
                 else c.consumption = to_bool(v, w);
               });
    } else if (name == "risk") {
      c.risk.present = true;
      for_keys(section, name, {"kind", "beta", "kappa", "negjump_method"},
               [&](const std::string& k, const std::string& v, const std::string& w) {
                 if (k == "kind") {
                   const std::string s = trim(v);
                   if (s == "VaR" || s == "var") c.risk.kind = RiskKind::VaR;
                   else if (s == "ES" || s == "es") c.risk.kind = RiskKind::ES;
                   else throw ConfigError(w + ": kind must be VaR or ES");
                 } else if (k == "beta") {
                   c.risk.beta = to_double(v, w);
                 } else if (k == "kappa") {
                   c.risk.kappa = to_double(v, w);
                 } else {
                   c.risk.negjump_mode = parse_negjump_mode(trim(v));
                 }
               });
    } else if (name == "run") {
      for_keys(section, name, {"x", "paths", "seed"}, [&](const std::string& k, const std::string& v, const std::string& w) {
        if (k == "x") c.x = to_double(v, w);
        else if (k == "paths") c.paths = to_uint(v, w);
        else c.seed = to_uint(v, w);
      });
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  if (!have_mu || !have_sigma) throw ConfigError("[market] needs mu and sigma");
  if (c.dimension < 1) throw ConfigError("[market] dimension must be positive");
  if (c.nodes < 2) throw ConfigError("[grid] nodes must be at least 2");
  if (!jump_sections.empty()) {
    JumpConfig none;
    none.points = {{0.0, 1.0}};
    c.jumps.assign(static_cast<std::size_t>(c.dimension), none);
    std::set<std::size_t> seen;
    for (auto& [j, jc] : jump_sections) {
      if (j < 1 || j > static_cast<std::size_t>(c.dimension))
        throw ConfigError("[jumps " + std::to_string(j) + "]: asset index outside 1.." + std::to_string(c.dimension));
      if (!seen.insert(j).second) throw ConfigError("[jumps " + std::to_string(j) + "] given twice");
      c.jumps[j - 1] = std::move(jc);
    }
  }
  if (c.paths == 0) throw ConfigError("[run] paths must be positive");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is);
}

void write_config(std::ostream& os, const RunConfig& c) {
  os << "[grid]\nhorizon = " << fmt(c.horizon) << "\nnodes = " << c.nodes << "\n\n";
  os << "[market]\ndimension = " << c.dimension << "\nr = " << join(c.r) << "\nmu = " << join(c.mu)
     << "\nsigma = " << join(c.sigma) << "\n";
  for (std::size_t j = 0; j < c.jumps.size(); ++j) {
    const auto& jc = c.jumps[j];
    os << "\n[jumps " << j + 1 << "]\nlambda = " << fmt(jc.lambda) << "\n";
    if (jc.density.empty()) {
      os << "points = ";
      for (std::size_t i = 0; i < jc.points.size(); ++i)
        os << (i ? ", " : "") << fmt(jc.points[i].first) << ":" << fmt(jc.points[i].second);
      os << "\n";
    } else {
      os << "lower = " << fmt(jc.density_lower) << "\nupper = " << fmt(jc.density_upper)
         << "\ndensity = " << join(jc.density) << "\nquadrature_nodes = " << jc.quadrature_nodes << "\n";
    }
  }
  os << "\n[utility]\ngamma1 = " << fmt(c.gamma1) << "\ngamma2 = " << fmt(c.gamma2)
     << "\nconsumption = " << (c.consumption ? "true" : "false") << "\n";
  if (c.risk.present) {
    os << "\n[risk]\nkind = " << (c.risk.kind == RiskKind::VaR ? "VaR" : "ES") << "\nbeta = " << fmt(c.risk.beta)
       << "\nkappa = " << fmt(c.risk.kappa) << "\nnegjump_method = " << to_string(c.risk.negjump_mode) << "\n";
  }
  os << "\n[run]\nx = " << fmt(c.x) << "\npaths = " << c.paths << "\nseed = " << c.seed << "\n";
}

MarketModel RunConfig::model() const {
  const std::size_t d = static_cast<std::size_t>(dimension);
  const std::size_t n = nodes;
  CoefficientPath coeffs;
  if (r.size() == 1) coeffs.r.assign(n, r[0]);
  else if (r.size() == n) coeffs.r = r;
  else throw ConfigError("[market] r needs 1 or " + std::to_string(n) + " values");

  if (mu.size() != d && mu.size() != n * d)
    throw ConfigError("[market] mu needs " + std::to_string(d) + " or " + std::to_string(n * d) + " values");
  if (sigma.size() != d * d && sigma.size() != n * d * d)
    throw ConfigError("[market] sigma needs " + std::to_string(d * d) + " or " + std::to_string(n * d * d) + " values");
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t mo = mu.size() == d ? 0 : k * d;
    const std::size_t so = sigma.size() == d * d ? 0 : k * d * d;
    Eigen::VectorXd m(dimension);
    Eigen::MatrixXd s(dimension, dimension);
    for (std::size_t i = 0; i < d; ++i) {
      m[static_cast<Eigen::Index>(i)] = mu[mo + i];
      for (std::size_t j = 0; j < d; ++j)
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sigma[so + i * d + j];
    }
    coeffs.mu.push_back(std::move(m));
    coeffs.sigma.push_back(std::move(s));
  }

  JumpSpec js = JumpSpec::none(dimension);
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const auto& jc = jumps[j];
    js.assets[j].lambda = jc.lambda;
    js.assets[j].law = jc.density.empty()
                           ? JumpLaw::point_masses(jc.points)
                           : JumpLaw::tabulated_density(jc.density_lower, jc.density_upper, jc.density,
                                                        jc.quadrature_nodes);
  }
  return MarketModel(TimeGrid::uniform(horizon, n), std::move(coeffs), std::move(js));
}

}  // namespace jdrisk::app
