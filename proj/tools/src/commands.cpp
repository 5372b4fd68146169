#include "jdrisk_app/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "jdrisk/negjumps.hpp"
#include "jdrisk/simulate.hpp"
#include "jdrisk/unconstrained.hpp"

namespace jdrisk::app {

namespace fs = std::filesystem;

void OutputSet::commit(const fs::path& dir) const {
  fs::create_directories(dir);
  std::vector<std::pair<fs::path, fs::path>> staged;
  for (const auto& [name, body] : files_) {
    const fs::path final_path = dir / name;
    fs::path tmp = final_path;
    tmp += ".tmp";
    std::ofstream os(tmp, std::ios::binary);
    os << body.str();
    os.close();
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    staged.emplace_back(tmp, final_path);
  }
  for (const auto& [tmp, final_path] : staged) fs::rename(tmp, final_path);
}

std::vector<std::string> OutputSet::names() const {
  std::vector<std::string> out;
  for (const auto& kv : files_) out.push_back(kv.first);
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConditionViolated:
    case ErrorCode::AssumptionJViolated:
    case ErrorCode::ThetaHatNegative:
    case ErrorCode::KappaOutOfRange:
    case ErrorCode::EpsilonTooLarge:
    case ErrorCode::NegativeJumpsPresent:
    case ErrorCode::DriftBelowRate:
    case ErrorCode::MomentDiverges:
    case ErrorCode::EmptyFeasibleSet:
      return kExitCondition;
    default:
      return kExitInput;
  }
}

namespace {

std::ostream& csv(OutputSet& out, const std::string& name) {
  auto& os = out.open(name);
  os << std::setprecision(17);
  return os;
}

std::string joined(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (const auto& item : v) s += (s.empty() ? "" : sep) + item;
  return s;
}

SolveResult from_report(std::string method, SolveReport rep) {
  SolveResult r;
  r.method = std::move(method);
  r.strategy = std::move(rep.strategy);
  r.J = rep.J_star;
  r.rho_star = rep.rho_star;
  r.chi = rep.chi;
  r.foc_residual = rep.foc_residual;
  r.root_residual = rep.root_residual;
  r.flags = std::move(rep.flags);
  return r;
}

bool is_linear(const UtilitySpec& u) { return u.gamma1 == 1.0 && u.gamma2 == 1.0; }

void write_certificate(std::ostream& os, const ConstraintCertificate& c) {
  os << "kind,active,precondition_ok,condition_lhs,condition_rhs,rho_star,kappa_low,kappa_high,chi,l_star,"
        "m_hat_theta,reason\n";
  std::string reason = c.reason;
  std::replace(reason.begin(), reason.end(), ',', ';');
  os << (c.kind == RiskKind::VaR ? "VaR" : "ES") << ',' << (c.active ? 1 : 0) << ',' << (c.precondition_ok ? 1 : 0)
     << ',' << c.condition_lhs << ',' << c.condition_rhs << ',' << c.rho_star << ',' << c.kappa_range.first << ','
     << c.kappa_range.second << ',' << c.chi << ',' << c.l_star << ',' << c.m_hat_theta << ',' << reason << '\n';
}

void write_report(std::ostream& os, const SolveResult& r) {
  os << "key,value\n";
  os << "method," << r.method << '\n';
  os << "J_star," << r.J << '\n';
  os << "rho_star," << r.rho_star << '\n';
  os << "chi," << r.chi << '\n';
  os << "foc_residual," << r.foc_residual << '\n';
  os << "root_residual," << r.root_residual << '\n';
  if (r.level) {
    os << "beta_eff," << r.level->beta_eff << '\n';
    os << "es_scale," << r.level->es_scale << '\n';
  }
  for (const auto& [k, v] : r.extra) os << k << ',' << v << '\n';
  if (r.certificate) {
    const auto& c = *r.certificate;
    os << "constraint_active," << (c.active ? 1 : 0) << '\n';
    os << "condition_lhs," << c.condition_lhs << '\n';
    os << "condition_rhs," << c.condition_rhs << '\n';
  }
  os << "flags," << joined(r.flags, ";") << '\n';
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    double v = 0.0;
    const char* b = line.data() + pos;
    const char* e = line.data() + end;
    while (b < e && *b == ' ') ++b;
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw Error(ErrorCode::InvalidInput, "bad number in strategy row: " + line);
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

Strategy solved_or_loaded(const CommandOptions& opt, const MarketModel& model, std::optional<SolveResult>& solved) {
  if (opt.strategy_file) {
    std::ifstream is(*opt.strategy_file);
    if (!is) throw Error(ErrorCode::InvalidInput, "cannot open strategy file " + opt.strategy_file->string());
    return read_strategy_csv(is, model);
  }
  solved = run_solver(opt.config, model, opt.force);
  return solved->strategy;
}

struct Check {
  std::string name;
  double lhs;
  double rhs;
  double tolerance;
  bool pass;
};

Check at_most(std::string name, double lhs, double rhs, double tol) {
  return {std::move(name), lhs, rhs, tol, lhs <= rhs + tol};
}
Check at_least(std::string name, double lhs, double rhs, double tol) {
  return {std::move(name), lhs, rhs, tol, lhs >= rhs - tol};
}
Check within(std::string name, double lhs, double rhs, double tol) {
  return {std::move(name), lhs, rhs, tol, std::abs(lhs - rhs) <= tol};
}

}  // namespace

SolveResult run_solver(const RunConfig& cfg, const MarketModel& model, bool force) {
  const UtilitySpec u = cfg.utility();
  const double x = cfg.x;
  const bool linear = is_linear(u);
  if (!cfg.consumption && (linear || !u.is_equal()))
    throw Error(ErrorCode::InvalidInput, "consumption = false needs gamma1 = gamma2 < 1");
  auto power = [&] { return cfg.consumption ? solve_power_equal(model, u, x) : solve_no_consumption(model, u, x); };
  const char* power_name = cfg.consumption ? "power" : "power_terminal";

  if (!cfg.risk.present) {
    if (linear) return from_report("linear", solve_linear(model, x));
    if (!u.is_equal()) throw Error(ErrorCode::InvalidInput, "distinct gamma1 and gamma2 need a [risk] section");
    return from_report(power_name, power());
  }

  const RiskSpec risk = cfg.risk.spec();
  risk.validate();
  const RiskLevel level = risk_level(model, risk);
  SolveResult res;
  if (linear) {
    res = from_report(risk.kind == RiskKind::VaR ? "var_gamma1" : "es_gamma1",
                      risk.kind == RiskKind::VaR ? solve_var_gamma1(model, level, risk.kappa, x, force)
                                                 : solve_es_gamma1(model, level, risk.kappa, x, force));
  } else if (u.is_equal()) {
    auto cert = risk.kind == RiskKind::VaR ? certify_var(model, u, level, risk.kappa, power())
                                           : certify_es(model, u, level, risk.kappa, power());
    if (cert.active && !force)
      throw Error(ErrorCode::ConditionViolated, "constraint not certified inactive: " + cert.reason);
    res = from_report(power_name, std::move(*cert.solution));
    cert.solution.reset();
    if (cert.active) res.flags.push_back("ConstraintNotCertified");
    res.certificate = std::move(cert);
  } else {
    auto rep = solve_diff_gamma(model, u, risk.kind, level, risk.kappa, x, force);
    res.method = "consume_all";
    res.strategy = std::move(rep.strategy);
    res.J = rep.J_attained;
    res.rho_star = 0.0;
    res.flags = std::move(rep.flags);
    res.extra = {{"J_upper", rep.J_upper},
                 {"consumed_fraction", rep.consumed_fraction},
                 {"M_hat_argmax", rep.M_hat_argmax},
                 {"dlogM_inf", rep.dlogM_inf},
                 {"condition_lhs", rep.condition_lhs},
                 {"condition_rhs", rep.condition_rhs}};
  }
  res.level = level;
  if (!model.jumps().nonnegative()) {
    const auto adj = negjump_adjustment(model, risk);
    res.extra.emplace_back("epsilon_T", adj.epsilon_T);
    res.extra.emplace_back("beta_hat", adj.beta_hat);
  }
  return res;
}

void write_strategy_csv(std::ostream& os, const MarketModel& model, const Strategy& s) {
  const int d = model.dimension();
  os << "t";
  for (int j = 1; j <= d; ++j) os << ",y" << j;
  for (int j = 1; j <= d; ++j) os << ",pi" << j;
  os << ",v,V\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << model.grid()[k];
    for (int j = 0; j < d; ++j) os << ',' << s.y[k][j];
    for (int j = 0; j < d; ++j) os << ',' << s.pi[k][j];
    os << ',' << s.v[k] << ',' << s.V[k] << '\n';
  }
}

Strategy read_strategy_csv(std::istream& is, const MarketModel& model) {
  const int d = model.dimension();
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::InvalidStrategy, "empty strategy file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) {
      col.erase(std::remove_if(col.begin(), col.end(), [](char c) { return c == ' ' || c == '\r'; }), col.end());
      header.push_back(col);
    }
  }
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::InvalidStrategy, "strategy file lacks column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t t_col = column("t");
  const std::size_t v_col = column("v");
  std::vector<std::size_t> pi_cols;
  for (int j = 1; j <= d; ++j) pi_cols.push_back(column("pi" + std::to_string(j)));

  std::vector<Eigen::VectorXd> pi;
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto row = parse_row(line);
    if (row.size() != header.size()) throw Error(ErrorCode::InvalidStrategy, "ragged strategy row: " + line);
    const std::size_t k = v.size();
    if (k >= model.nodes() || std::abs(row[t_col] - model.grid()[k]) > 1e-9 * std::max(1.0, model.grid().horizon()))
      throw Error(ErrorCode::InvalidStrategy, "strategy times do not match the grid at row " + std::to_string(k + 1));
    Eigen::VectorXd p(d);
    for (int j = 0; j < d; ++j) p[j] = row[pi_cols[static_cast<std::size_t>(j)]];
    pi.push_back(std::move(p));
    v.push_back(row[v_col]);
  }
  return Strategy::from_pi(model, std::move(pi), std::move(v));
}

int cmd_solve(const CommandOptions& opt, std::ostream&) {
  const MarketModel model = opt.config.model();
  const SolveResult res = run_solver(opt.config, model, opt.force);
  OutputSet out;
  write_strategy_csv(csv(out, "strategy.csv"), model, res.strategy);
  write_report(csv(out, "report.csv"), res);
  if (res.certificate) write_certificate(csv(out, "certificate.csv"), *res.certificate);
  if (opt.dump_config) write_config(out.open("config.ini"), opt.config);
  out.commit(opt.out);
  return kExitOk;
}

int cmd_certify(const CommandOptions& opt, std::ostream&) {
  const RunConfig& cfg = opt.config;
  if (!cfg.risk.present) throw Error(ErrorCode::InvalidInput, "certify needs a [risk] section");
  const MarketModel model = cfg.model();
  const UtilitySpec u = cfg.utility();
  const RiskSpec risk = cfg.risk.spec();
  risk.validate();
  const RiskLevel level = risk_level(model, risk);

  ConstraintCertificate cert;
  cert.kind = risk.kind;
  if (!is_linear(u) && u.is_equal()) {
    auto rep = cfg.consumption ? solve_power_equal(model, u, cfg.x) : solve_no_consumption(model, u, cfg.x);
    cert = risk.kind == RiskKind::VaR ? certify_var(model, u, level, risk.kappa, std::move(rep))
                                      : certify_es(model, u, level, risk.kappa, std::move(rep));
  } else if (!is_linear(u)) {
    const auto rep = solve_diff_gamma(model, u, risk.kind, level, risk.kappa, cfg.x, true);
    cert.precondition_ok = rep.condition_ok;
    cert.condition_lhs = rep.condition_lhs;
    cert.condition_rhs = rep.condition_rhs;
    cert.kappa_range = {0.0, rep.M_hat_argmax};
    cert.reason = joined(rep.flags, ";");
  } else {
    // Linear utility: the constraint always binds; report whether the
    // closed-form radius exists without forcing.
    if (risk.kind == RiskKind::VaR) cert.kappa_range = kappa_range_var_gamma1(model, level);
    try {
      const auto rep = risk.kind == RiskKind::VaR ? solve_var_gamma1(model, level, risk.kappa, cfg.x)
                                                  : solve_es_gamma1(model, level, risk.kappa, cfg.x);
      cert.rho_star = rep.rho_star;
    } catch (const Error& e) {
      if (exit_code_for(e.code()) != kExitCondition) throw;
      cert.precondition_ok = false;
      cert.reason = e.what();
    }
  }
  OutputSet out;
  write_certificate(csv(out, "certificate.csv"), cert);
  out.commit(opt.out);
  return kExitOk;
}

int cmd_simulate(const CommandOptions& opt, std::ostream&) {
  const RunConfig& cfg = opt.config;
  const MarketModel model = cfg.model();
  const SolveResult res = run_solver(cfg, model, opt.force);
  const double beta = cfg.risk.present ? cfg.risk.beta : 0.05;

  OutputSet out;
  auto& os = csv(out, "ensemble.csv");
  os << "node,t,mean,q_beta,es_beta\n";
  std::vector<double> w(cfg.paths);
  simulate_stream(model, res.strategy, cfg.x, cfg.paths, cfg.seed, [&](std::size_t node, std::span<const double> lw) {
    std::transform(lw.begin(), lw.end(), w.begin(), [](double l) { return std::exp(l); });
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    os << node << ',' << model.grid()[node] << ',' << mean << ',' << empirical_quantile(w, beta) << ','
       << empirical_es(w, beta) << '\n';
  });
  write_strategy_csv(csv(out, "strategy.csv"), model, res.strategy);
  out.commit(opt.out);
  return kExitOk;
}

int cmd_verify(const CommandOptions& opt, std::ostream& err) {
  const RunConfig& cfg = opt.config;
  const MarketModel model = cfg.model();
  const UtilitySpec u = cfg.utility();
  std::optional<SolveResult> solved;
  const Strategy s = solved_or_loaded(opt, model, solved);
  constexpr double kBoxTol = 1e-10;

  std::vector<Check> checks;
  double pi_min = 0.0, pi_max = 0.0, v_min = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    pi_min = std::min(pi_min, s.pi[k].minCoeff());
    pi_max = std::max(pi_max, s.pi[k].maxCoeff());
    v_min = std::min(v_min, s.v[k]);
  }
  checks.push_back(at_least("pi_lower_bound", pi_min, 0.0, kBoxTol));
  checks.push_back(at_most("pi_upper_bound", pi_max, 1.0, kBoxTol));
  checks.push_back(at_least("consumption_nonnegative", v_min, 0.0, 0.0));
  const bool admissible = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });

  // Everything below simulates or integrates the strategy, which needs it admissible.
  if (admissible) {
    if (cfg.risk.present) {
      const RiskSpec risk = cfg.risk.spec();
      const RiskLevel level = risk_level(model, risk);
      const auto slack = risk.kind == RiskKind::VaR ? var_constraint_slack(s, model, level, risk.kappa)
                                                    : es_constraint_slack(s, model, level, risk.kappa);
      checks.push_back(at_least("constraint_slack_min", *std::min_element(slack.begin(), slack.end()), 0.0, 1e-9));
      if (model.jumps().nonnegative()) {
        const auto prof = constraint_profile(model, s, risk.kind, risk.beta, risk.kappa);
        checks.push_back(at_most("profile_closed_form_sup", *std::max_element(prof.begin(), prof.end()), 1.0, 1e-9));
      }
      const auto mc = constraint_profile_mc(model, s, risk.kind, risk.beta, risk.kappa, cfg.x, cfg.paths, cfg.seed);
      checks.push_back(at_most("profile_mc_sup", *std::max_element(mc.ratio_low.begin(), mc.ratio_low.end()), 1.0, 0.0));
    }

    // E[X_T] = x exp(R_T - V_T + (y, theta)_T): the jump compensator in theta_hat
    // cancels against the mean jump.
    const std::size_t last = model.nodes() - 1;
    const double mean_cf = cfg.x * std::exp(model.R()[last] - s.V[last] + y_theta_path(model, s)[last]);
    double sum = 0.0, sum2 = 0.0;
    simulate_stream(model, s, cfg.x, cfg.paths, cfg.seed, [&](std::size_t node, std::span<const double> lw) {
      if (node != last) return;
      for (double l : lw) {
        const double w = std::exp(l);
        sum += w;
        sum2 += w * w;
      }
    });
    const double n = static_cast<double>(cfg.paths);
    const double mean_mc = sum / n;
    const double se = std::sqrt(std::max(0.0, sum2 / n - mean_mc * mean_mc) / n);
    checks.push_back(within("mean_terminal_wealth", mean_mc, mean_cf, 3.0 * se + 1e-12 * std::abs(mean_cf)));

    const double cost_cf = cost_function(model, u, s, cfg.x);
    const auto cost_mc = estimate_cost(model, s, u, cfg.x, cfg.paths, cfg.seed + 1);
    checks.push_back(within("cost_mc", cost_mc.mean, cost_cf, 3.0 * cost_mc.std_error + 1e-12 * std::abs(cost_cf)));

    if (solved) {
      checks.push_back(within("cost_equals_J", cost_cf, solved->J, 1e-8 * std::max(1.0, std::abs(solved->J))));
      checks.push_back(at_most("foc_residual", solved->foc_residual, 0.0, 1e-8));
      checks.push_back(at_most("root_residual", solved->root_residual, 0.0, 1e-10));
      if (model.dimension() == 1 && u.is_equal() && !is_linear(u) && !cfg.risk.present && cfg.consumption) {
        std::vector<double> pi_grid, scale_grid;
        for (int i = 0; i <= 50; ++i) pi_grid.push_back(i / 50.0);
        for (int i = 0; i <= 40; ++i) scale_grid.push_back(i / 20.0);
        const auto best = grid_oracle(model, u, std::nullopt, cfg.x, pi_grid, scale_grid, {s.v, s.V});
        checks.push_back(at_least("grid_dominance", cost_cf, best.J, 1e-9 * std::abs(best.J)));
      }
    }
  }

  OutputSet out;
  auto& os = csv(out, "verify.csv");
  os << "name,lhs,rhs,tolerance,pass\n";
  bool all = true;
  for (const auto& c : checks) {
    os << c.name << ',' << c.lhs << ',' << c.rhs << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
    if (!c.pass) {
      all = false;
      err << "check failed: " << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs << '\n';
    }
  }
  out.commit(opt.out);
  return all ? kExitOk : kExitVerification;
}

int cmd_compare(const CommandOptions& opt, std::ostream&) {
  const RunConfig& cfg = opt.config;
  if (cfg.dimension != 1) throw Error(ErrorCode::InvalidInput, "compare needs a one-asset market");
  const UtilitySpec u = cfg.utility();
  if (!u.is_equal()) throw Error(ErrorCode::InvalidInput, "compare needs gamma1 = gamma2");
  const MarketModel model = cfg.model();
  const auto cmp = compare_merton(model, u, cfg.x);
  OutputSet out;
  write_comparison_csv(out.open("compare.csv"), cmp);
  out.commit(opt.out);
  return kExitOk;
}

int dispatch(const std::string& command, const CommandOptions& opt, std::ostream& err) {
  try {
    if (command == "solve") return cmd_solve(opt, err);
    if (command == "certify") return cmd_certify(opt, err);
    if (command == "simulate") return cmd_simulate(opt, err);
    if (command == "verify") return cmd_verify(opt, err);
    if (command == "compare") return cmd_compare(opt, err);
    err << "unknown command " << command << '\n';
    return kExitInput;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    if (code == kExitCondition) err << "reason=" << to_string(e.code()) << '\n';
    err << e.what() << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace jdrisk::app
