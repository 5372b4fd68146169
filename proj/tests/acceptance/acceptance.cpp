// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "jdrisk/constrained.hpp"
#include "jdrisk/negjumps.hpp"
#include "jdrisk/simulate.hpp"
#include "jdrisk/unconstrained.hpp"

using namespace jdrisk;
using jdrisk::testing::market_1d;

namespace {

constexpr std::size_t kMillion = 1000000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { info += (info.empty() ? "" : "; ") + s; }
  std::string info;
};

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

Estimate mean_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = s / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

Strategy constant_pi(const MarketModel& m, double pi, double v = 0.0) {
  return Strategy::from_pi(m, std::vector<Eigen::VectorXd>(m.nodes(), Eigen::VectorXd::Constant(1, pi)),
                           std::vector<double>(m.nodes(), v));
}

// Terminal E_T(y) for constant y = s on [0,1]: r = mu = 0, sigma = s, pi = 1.
std::vector<double> stochastic_exponential_sample(double s, std::size_t n, std::uint64_t seed) {
  const auto m = market_1d(0.0, 0.0, s, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, 9);
  std::vector<double> out;
  simulate_stream(m, constant_pi(m, 1.0), 1.0, n, seed, [&](std::size_t node, std::span<const double> lw) {
    if (node + 1 == m.nodes()) {
      out.resize(lw.size());
      for (std::size_t i = 0; i < lw.size(); ++i) out[i] = std::exp(lw[i]);
    }
  });
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome a1_quantile_lemma() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seed = 101;
  for (double s : {0.1, 0.3, 0.6}) {
    auto x = stochastic_exponential_sample(s, kMillion, seed++);
    for (double beta : {0.01, 0.05}) {
      const auto [l, u] = order_statistic_ci(kMillion, beta, 0.99);
      std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(l - 1), x.end());
      const double xl = x[l - 1];
      std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(u - 1), x.end());
      const double xu = x[u - 1];
      const double q = quantile_stoch_exp(s, beta);
      o.check(xl <= q && q <= xu, "s=" + num(s) + " beta=" + num(beta) + " q=" + num(q, 10) + " CI=[" +
                                      num(xl, 10) + ", " + num(xu, 10) + "]");
    }
  }
  const double secs = seconds_since(t0);
  o.check(secs < 30.0, "runtime " + num(secs) + " s");
  o.note("6 cases, " + num(secs, 3) + " s");
  return o;
}

Outcome a2_es_lemma() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seed = 201;
  double worst = 0.0;
  for (double s : {0.1, 0.3, 0.6}) {
    auto x = stochastic_exponential_sample(s, kMillion, seed++);
    for (double beta : {0.01, 0.05}) {
      const std::size_t k = order_statistic_index(beta, kMillion);
      std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k - 1), x.end());
      const double q = x[k - 1];
      double sum = 0.0;
      std::vector<double> tail(kMillion);
      for (std::size_t i = 0; i < kMillion; ++i) tail[i] = x[i] <= q ? x[i] - q : 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += x[i];
      const double es = sum / static_cast<double>(k);
      const double se = mean_se(tail).std_error / beta;  // influence function of the tail mean
      const double closed = es_stoch_exp(s, beta);
      worst = std::max(worst, std::abs(es - closed) / se);
      o.check(std::abs(es - closed) <= 3.0 * se,
              "s=" + num(s) + " beta=" + num(beta) + " ES=" + num(es, 10) + " closed=" + num(closed, 10));
    }
  }
  const double secs = seconds_since(t0);
  o.check(secs < 30.0, "runtime " + num(secs) + " s");
  o.note("max |z| = " + num(worst, 3) + ", " + num(secs, 3) + " s");
  return o;
}

Outcome a3_levy_identity() {
  Outcome o;
  const auto law = JumpLaw::point_masses({{-0.3, 0.4}, {0.5, 0.6}});
  const auto m = market_1d(0.02, 0.06, 0.2, 2.0, law, 1.0, 65);
  auto a = [](double, int, double z) { return 0.5 * std::log1p(0.6 * z); };
  const double closed = expected_jump_exponential(m, a);
  const auto ev = draw_jumps(m, kMillion, 301);
  std::vector<double> logp(kMillion, 0.0);
  for (const auto& e : ev.events) logp[e.path] += a(0.0, 0, e.size);
  for (double& v : logp) v = std::exp(v);
  const auto est = mean_se(logp);
  o.check(std::abs(est.mean - closed) <= 3.0 * est.std_error,
          "MC " + num(est.mean, 10) + " vs " + num(closed, 10) + " (SE " + num(est.std_error, 3) + ")");
  o.note("MC " + num(est.mean, 8) + " closed " + num(closed, 8) + " z=" +
         num((est.mean - closed) / est.std_error, 3));
  return o;
}

Outcome a4_diffusion_reduction() {
  Outcome o;
  struct Inst {
    double r;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    double gamma;
    double x;
  };
  Eigen::MatrixXd s2(2, 2);
  s2 << 0.2, 0.05, 0.0, 0.3;
  Eigen::VectorXd mu2(2);
  mu2 << 0.04, 0.05;
  const std::vector<Inst> insts{{0.02, Eigen::VectorXd::Constant(1, 0.05), Eigen::MatrixXd::Constant(1, 1, 0.3), 0.5, 1.0},
                                {0.04, Eigen::VectorXd::Constant(1, 0.07), Eigen::MatrixXd::Constant(1, 1, 0.25), 0.3, 2.5},
                                {0.02, mu2, s2, 0.5, 1.0}};
  double worst = 0.0;
  for (const auto& in : insts) {
    const std::size_t n = 1025;
    const int d = static_cast<int>(in.mu.size());
    const MarketModel m(TimeGrid::uniform(1.0, n), CoefficientPath::constant(n, in.r, in.mu, in.sigma),
                        JumpSpec::none(d));
    const auto rep = solve_power_equal(m, UtilitySpec::equal(in.gamma), in.x);
    const double q = 1.0 / (1.0 - in.gamma);
    const Eigen::VectorXd th = m.theta(0);
    const double h = in.gamma * in.r + 0.5 * (q - 1.0) * th.squaredNorm();
    auto ratio = [&](double tau) { return std::exp(q * h * tau) + std::expm1(q * h * tau) / (q * h); };
    double err = std::abs(rep.J_star - std::pow(in.x, in.gamma) * std::pow(ratio(1.0), 1.0 - in.gamma));
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, (rep.strategy.y[k] - q * th).cwiseAbs().maxCoeff());
      err = std::max(err, std::abs(rep.strategy.v[k] - 1.0 / ratio(1.0 - m.grid()[k])));
    }
    o.check((rep.strategy.pi[0].array() > 0.0).all() && (rep.strategy.pi[0].array() < 1.0).all(),
            "instance leaves the interior");
    worst = std::max(worst, err);
  }
  o.check(worst <= 1e-8, "max error " + num(worst, 3));
  o.note("max |error| over y*, v*, J* = " + num(worst, 3));
  return o;
}

Outcome a5_grid_dominance() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  struct Inst {
    double gamma;
    MarketModel m;
  };
  const std::size_t n = 257;
  const std::vector<Inst> insts{
      {0.3, market_1d(0.02, 0.05, 0.3, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, n)},
      {0.5, market_1d(0.02, 0.08, 0.25, 1.0, JumpLaw::point_masses({{0.05, 0.5}, {0.15, 0.5}}), 1.0, n)},
      {0.8, market_1d(0.01, 0.04, 0.3, 1.5, JumpLaw::point_masses({{-0.1, 0.4}, {0.15, 0.6}}), 1.0, n)},
      {0.5, market_1d(0.03, 0.06, 0.2, 0.8, JumpLaw::tabulated_density(-0.2, 0.3, std::vector<double>(11, 2.0)), 1.0, n)},
      {0.3, market_1d(0.0, 0.1, 0.35, 3.0, JumpLaw::point_masses({{0.02, 0.5}, {0.1, 0.5}}), 1.0, n)}};
  std::vector<double> pis(101), scales(51);
  for (int i = 0; i <= 100; ++i) pis[i] = i / 100.0;
  for (int i = 0; i <= 50; ++i) scales[i] = i * 0.04;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& in : insts) {
    const UtilitySpec u = UtilitySpec::equal(in.gamma);
    const auto rep = solve_power_equal(in.m, u, 1.0);
    const auto best = grid_oracle(in.m, u, std::nullopt, 1.0, pis, scales, {rep.strategy.v, rep.strategy.V});
    const double margin = rep.J_star - best.J;
    worst = std::min(worst, margin);
    o.check(margin >= -1e-6, "gamma=" + num(in.gamma) + " J*=" + num(rep.J_star, 12) + " grid=" + num(best.J, 12));
  }
  const double secs = seconds_since(t0);
  o.check(secs < 120.0, "runtime " + num(secs) + " s");
  o.note("min margin " + num(worst, 3) + ", " + num(secs, 3) + " s");
  return o;
}

Outcome a6_gamma1_feasibility() {
  Outcome o;
  const auto m = market_1d(0.02, 0.07, 0.2, 1.0, JumpLaw::point_masses({{0.02, 0.5}, {0.06, 0.5}}), 1.0, 513);
  for (auto kind : {RiskKind::VaR, RiskKind::ES}) {
    const RiskSpec risk{kind, 0.05, 0.1};
    const auto rep = kind == RiskKind::VaR ? solve_var_gamma1(m, risk, 1.0) : solve_es_gamma1(m, risk, 1.0);
    const std::string tag = kind == RiskKind::VaR ? "VaR" : "ES";
    o.check(rep.root_residual < 1e-12, tag + " root residual " + num(rep.root_residual, 3));
    const auto prof = constraint_profile_mc(m, rep.strategy, kind, 0.05, 0.1, 1.0, kMillion, 601);
    double worst_low = 0.0, worst = 0.0;
    for (std::size_t k = 1; k < m.nodes(); ++k) {
      worst_low = std::max(worst_low, prof.ratio_low[k]);
      worst = std::max(worst, prof.ratio[k]);
    }
    o.check(worst_low <= 1.0, tag + " profile band exceeds 1: " + num(worst_low, 8));
    o.note(tag + " rho*=" + num(rep.rho_star, 8) + " max ratio " + num(worst, 6) + " residual " +
           num(rep.root_residual, 2));
  }
  return o;
}

Outcome a7_certificates() {
  Outcome o;
  int inactive = 0, total = 0;
  const std::vector<MarketModel> models{market_1d(0.02, 0.06, 0.2),
                                        market_1d(0.02, 0.07, 0.2, 1.0,
                                                  JumpLaw::point_masses({{0.02, 0.5}, {0.06, 0.5}})),
                                        market_1d(0.01, 0.05, 0.3, 2.0, JumpLaw::point_masses({{0.1, 1.0}}))};
  for (const auto& m : models)
    for (double gamma : {0.3, 0.5})
      for (double kappa : {0.5, 0.7, 0.85, 0.95, 0.99})
        for (auto kind : {RiskKind::VaR, RiskKind::ES}) {
          const UtilitySpec u = UtilitySpec::equal(gamma);
          const RiskSpec risk{kind, 0.05, kappa};
          const auto c = kind == RiskKind::VaR ? certify_var_gamma(m, u, risk) : certify_es_gamma(m, u, risk);
          ++total;
          if (c.active) continue;
          ++inactive;
          const auto slack = kind == RiskKind::VaR
                                 ? var_constraint_slack(c.solution->strategy, m, RiskLevel::plain(0.05), kappa)
                                 : es_constraint_slack(c.solution->strategy, m, RiskLevel::plain(0.05), kappa);
          const double mn = *std::min_element(slack.begin(), slack.end());
          o.check(mn >= 0.0, "inactive certificate with slack " + num(mn, 6) + " (kappa " + num(kappa) + ")");
        }
  o.check(inactive > 0, "no inactive instance found");
  o.note(std::to_string(inactive) + " of " + std::to_string(total) + " instances certified inactive");
  return o;
}

Outcome a8_consume_all() {
  Outcome o;
  const auto m = market_1d(0.03, 0.05, 0.2, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, 257);
  const UtilitySpec u(0.3, 0.7);
  const RiskSpec risk{RiskKind::VaR, 0.05, 0.2};
  const double x = 1.0;
  const auto rep = solve_diff_gamma(m, u, risk, x);
  const double Mh = M_hat(m, u, x, risk.kappa);
  o.check(rep.condition_ok, "solvability condition not met");
  o.check(std::abs(rep.J_attained - Mh) <= 1e-6, "cost " + num(rep.J_attained, 12) + " vs M_hat " + num(Mh, 12));
  std::mt19937_64 rng(801);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::size_t n = m.nodes();
  std::size_t feasible = 0, tried = 0;
  double best = -1.0;
  while (feasible < 10000 && tried < 2000000) {
    ++tried;
    const double p0 = std::pow(U(rng), 3.0), p1 = (U(rng) - 0.5) * 0.2;
    const double c = 0.6 * U(rng), b = 4.0 * (U(rng) - 0.5);
    std::vector<Eigen::VectorXd> pi(n);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = m.grid()[k];
      pi[k] = Eigen::VectorXd::Constant(1, std::clamp(p0 + p1 * t, 0.0, 1.0));
      v[k] = c * std::exp(b * t);
    }
    const auto s = Strategy::from_pi(m, std::move(pi), std::move(v));
    const auto slack = var_constraint_slack(s, m, RiskLevel::plain(risk.beta), risk.kappa);
    if (*std::min_element(slack.begin(), slack.end()) < 0.0) continue;
    ++feasible;
    best = std::max(best, cost_function(m, u, s, x));
  }
  o.check(feasible == 10000, "only " + std::to_string(feasible) + " feasible samples");
  o.check(best <= rep.J_attained, "random strategy " + num(best, 12) + " beats " + num(rep.J_attained, 12));
  o.note("J=" + num(rep.J_attained, 10) + " M_hat=" + num(Mh, 10) + " best random " + num(best, 10) + " (" +
         std::to_string(tried) + " draws)");
  return o;
}

Outcome a9_comparison() {
  Outcome o;
  struct Inst {
    double gamma;
    MarketModel m;
  };
  const std::vector<Inst> insts{
      {0.5, market_1d(0.01, 0.05, 0.3, 2.0, JumpLaw::point_masses({{0.1, 1.0}}), 1.0, 129)},
      {0.3, market_1d(0.02, 0.06, 0.25, 1.0, JumpLaw::point_masses({{0.05, 0.5}, {0.2, 0.5}}), 1.0, 129)},
      {0.7, market_1d(0.03, 0.04, 0.2, 0.5, JumpLaw::tabulated_density(0.0, 0.4, std::vector<double>(9, 2.5)), 2.0, 129)}};
  const auto dir = std::filesystem::temp_directory_path() / "jdrisk_acceptance";
  std::filesystem::create_directories(dir);
  int idx = 0;
  for (const auto& in : insts) {
    const auto cmp = compare_merton(in.m, UtilitySpec::equal(in.gamma), 1.0);
    const auto path = dir / ("compare_" + std::to_string(idx++) + ".csv");
    {
      std::ofstream os(path);
      write_comparison_csv(os, cmp);
    }
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    o.check(line == "t,pi_jump,pi_diffusion,v_jump,v_diffusion", "bad header");
    std::size_t rows = 0;
    bool strict = false;
    while (std::getline(is, line)) {
      double t, pj, pd, vj, vd;
      char c;
      std::istringstream ls(line);
      ls >> t >> c >> pj >> c >> pd >> c >> vj >> c >> vd;
      o.check(static_cast<bool>(ls), "unparsable row");
      o.check(pj <= pd, "pi_jump > pi_diffusion at t=" + num(t));
      o.check(vj >= vd, "v_jump < v_diffusion at t=" + num(t));
      if (pj < pd) strict = true;
      ++rows;
    }
    o.check(rows == in.m.nodes(), "row count");
    o.check(strict, "jump policy never strictly below the diffusion policy");
  }
  std::filesystem::remove_all(dir);
  o.note("3 instances, ordering holds at every node");
  return o;
}

Outcome a10_negative_jumps() {
  Outcome o;
  const auto law = JumpLaw::point_masses({{-0.05, 0.3}, {0.08, 0.7}});
  const auto m = market_1d(0.02, 0.07, 0.2, 0.1, law, 1.0, 513);
  const RiskSpec risk{RiskKind::VaR, 0.05, 0.1, NegJumpMode::ExactThinning};
  const auto adj = negjump_adjustment(m, risk);
  o.check(adj.epsilon_T < risk.beta, "epsilon_T >= beta");
  const auto rep = adjusted_solve(m, risk, UtilitySpec(1.0, 1.0), 1.0);
  const auto prof = constraint_profile_mc(m, rep.strategy, RiskKind::VaR, risk.beta, risk.kappa, 1.0, kMillion, 1001);
  double worst_low = 0.0, worst = 0.0;
  for (std::size_t k = 1; k < m.nodes(); ++k) {
    worst_low = std::max(worst_low, prof.ratio_low[k]);
    worst = std::max(worst, prof.ratio[k]);
  }
  o.check(worst_low <= 1.0, "adjusted VaR profile band exceeds 1: " + num(worst_low, 8));

  double prev = risk.beta;
  for (double e = 0.001; e < risk.beta; e += 0.001) {
    const double b = beta_hat(risk.beta, e);
    o.check(b < prev && b > 0.0, "beta_hat not decreasing at eps=" + num(e));
    prev = b;
  }
  for (auto mode : {NegJumpMode::ExactThinning, NegJumpMode::PaperFormula}) {
    double pe = 0.0;
    for (double t = 0.0; t <= 1.0 + 1e-12; t += 1.0 / 64) {
      const double e = epsilon_t(m.jumps(), t, mode);
      o.check(e >= pe, "epsilon_t decreasing at t=" + num(t));
      pe = e;
    }
  }
  // Spec instance lambda = 2, p- = 0.3 plus the adjustment market itself.
  const auto count_model = market_1d(0.02, 0.07, 0.2, 2.0, JumpLaw::point_masses({{-0.2, 0.3}, {0.1, 0.7}}), 1.0, 65);
  for (const auto* mm : {&count_model, &m}) {
    const auto ev = draw_jumps(*mm, kMillion, 1002);
    std::vector<char> hit(kMillion, 0);
    for (const auto& e : ev.events)
      if (e.size < 0.0) hit[e.path] = 1;
    std::vector<double> ind(hit.begin(), hit.end());
    const auto est = mean_se(ind);
    const double exact = epsilon_t(mm->jumps(), 1.0, NegJumpMode::ExactThinning);
    const double paper = epsilon_t(mm->jumps(), 1.0, NegJumpMode::PaperFormula);
    o.check(std::abs(est.mean - exact) <= 3.0 * est.std_error,
            "MC count " + num(est.mean, 8) + " vs thinning " + num(exact, 8));
    o.note("eps MC " + num(est.mean, 6) + " thinning " + num(exact, 6) + " printed " + num(paper, 6));
  }
  o.note("beta_hat " + num(adj.beta_hat, 6) + " max VaR ratio " + num(worst, 6));
  return o;
}

Outcome a11_martingale() {
  Outcome o;
  const auto m = market_1d(0.02, 0.07, 0.3, 1.0, JumpLaw::point_masses({{-0.1, 0.3}, {0.15, 0.7}}), 1.0, 129);
  const double gamma = 0.5;
  const UtilitySpec u = UtilitySpec::equal(gamma);
  const auto rep = solve_power_equal(m, u, 1.0);
  const std::vector<std::size_t> checkpoints{0, 32, 64, 96, 128};
  const std::size_t n = kMillion;

  // Per-path rho(t) X_t^gamma + int_0^t c^gamma at the checkpoints.
  auto run = [&](const Strategy& s, std::uint64_t seed) {
    std::vector<std::vector<double>> M(checkpoints.size(), std::vector<double>(n));
    std::vector<double> integral(n, 0.0), prev(n, 0.0);
    const auto& t = m.grid().nodes();
    std::size_t c = 0;
    simulate_stream(m, s, 1.0, n, seed, [&](std::size_t k, std::span<const double> lw) {
      for (std::size_t i = 0; i < n; ++i) {
        const double cg = s.v[k] > 0.0 ? std::exp(gamma * (std::log(s.v[k]) + lw[i])) : 0.0;
        if (k > 0) integral[i] += 0.5 * (t[k] - t[k - 1]) * (prev[i] + cg);
        prev[i] = cg;
      }
      if (c < checkpoints.size() && checkpoints[c] == k) {
        for (std::size_t i = 0; i < n; ++i) M[c][i] = rep.rho[k] * std::exp(gamma * lw[i]) + integral[i];
        ++c;
      }
    });
    std::vector<Estimate> inc;
    for (std::size_t j = 0; j + 1 < checkpoints.size(); ++j) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = M[j + 1][i] - M[j][i];
      inc.push_back(mean_se(d));
    }
    return inc;
  };

  const auto opt = run(rep.strategy, 1101);
  double zmax = 0.0;
  for (const auto& e : opt) {
    zmax = std::max(zmax, std::abs(e.mean) / e.std_error);
    o.check(std::abs(e.mean) <= 3.0 * e.std_error, "optimum increment " + num(e.mean, 4) + " SE " + num(e.std_error, 3));
  }
  o.note("optimum max |z| " + num(zmax, 3));

  struct Perturb {
    std::string name;
    double pi_scale, pi_shift, v_scale;
  };
  const std::vector<Perturb> perturbs{{"half pi", 0.5, 0.0, 1.0}, {"triple v", 1.0, 0.0, 3.0}, {"pi+0.4, v/3", 1.0, 0.4, 1.0 / 3.0}};
  std::uint64_t seed = 1102;
  for (const auto& p : perturbs) {
    std::vector<Eigen::VectorXd> pi = rep.strategy.pi;
    for (auto& v : pi) v = ((v * p.pi_scale).array() + p.pi_shift).min(1.0).max(0.0).matrix();
    std::vector<double> v = rep.strategy.v;
    for (double& c : v) c *= p.v_scale;
    const auto inc = run(Strategy::from_pi(m, std::move(pi), std::move(v)), seed++);
    double zmin = std::numeric_limits<double>::infinity();
    for (const auto& e : inc) {
      zmin = std::min(zmin, -e.mean / e.std_error);
      o.check(e.mean + 3.0 * e.std_error < 0.0, p.name + " increment " + num(e.mean, 4) + " SE " + num(e.std_error, 3));
    }
    o.note(p.name + " min decrease z " + num(zmin, 3));
  }
  return o;
}

}  // namespace

// Optional arguments restrict the run to the named criteria, e.g. `acceptance A5 A9`.
int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"A1", "quantile lemma", a1_quantile_lemma},
      {"A2", "expected shortfall lemma", a2_es_lemma},
      {"A3", "geometric Levy identity", a3_levy_identity},
      {"A4", "pure-diffusion reduction", a4_diffusion_reduction},
      {"A5", "grid-oracle dominance", a5_grid_dominance},
      {"A6", "gamma=1 VaR/ES feasibility", a6_gamma1_feasibility},
      {"A7", "inactivity certificates", a7_certificates},
      {"A8", "consume-all regime", a8_consume_all},
      {"A9", "comparison lemma", a9_comparison},
      {"A10", "negative-jump adjustment", a10_negative_jumps},
      {"A11", "martingale optimality", a11_martingale},
  };
  int failed = 0;
  std::size_t ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    if (!o.pass) ++failed;
    std::printf("%s %-4s %s (%.1f s)", o.pass ? "PASS" : "FAIL", c.id, c.name, secs);
    if (!o.info.empty()) std::printf(" | %s", o.info.c_str());
    if (!o.detail.empty()) std::printf(" | %s", o.detail.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failed, ran);
  return failed == 0 ? 0 : 1;
}
