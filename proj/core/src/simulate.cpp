#include "jdrisk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jdrisk/error.hpp"
#include "jdrisk/philox.hpp"
#include "jdrisk/quadrature.hpp"

namespace jdrisk {

namespace {

constexpr std::uint32_t kCountStep = 0xFFFFFFFFu;
constexpr std::uint32_t kEventStep = 0xFFFFFFFEu;

std::uint32_t poisson_inverse(double mean, double u) {
  if (mean <= 0.0) return 0;
  double p = std::exp(-mean);
  double cdf = p;
  std::uint32_t k = 0;
  while (u > cdf && k < 100000) {
    ++k;
    p *= mean / k;
    cdf += p;
    if (p == 0.0 && cdf < u) break;
  }
  return k;
}

}  // namespace

JumpEvents draw_jumps(const MarketModel& model, std::size_t n_paths, std::uint64_t seed) {
  const auto& t = model.grid().nodes();
  const double T = model.grid().horizon();
  const std::size_t d = static_cast<std::size_t>(model.dimension());
  const std::size_t intervals = t.size() - 1;
  JumpEvents ev;
  ev.counts.assign(n_paths * d, 0);
  std::vector<std::uint32_t> per_interval(intervals, 0);
  struct Raw {
    std::size_t interval;
    JumpEvents::Event e;
  };
  std::vector<Raw> raw;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const PathStream rng(seed, i);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& a = model.jumps().assets[j];
      if (a.lambda == 0.0) continue;
      const std::uint32_t c = poisson_inverse(a.lambda * T, rng.uniforms(kCountStep, static_cast<std::uint32_t>(j))[0]);
      ev.counts[i * d + j] = c;
      for (std::uint32_t m = 0; m < c; ++m) {
        const auto u = rng.uniforms(kEventStep, static_cast<std::uint32_t>(j << 20) + m);
        const double tau = T * u[0];
        auto it = std::upper_bound(t.begin(), t.end(), tau);
        std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
        k = std::min(k, intervals - 1);
        raw.push_back({k, {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), a.law.sample(u[1])}});
        ++per_interval[k];
      }
    }
  }
  ev.offsets.assign(intervals + 1, 0);
  for (std::size_t k = 0; k < intervals; ++k) ev.offsets[k + 1] = ev.offsets[k] + per_interval[k];
  ev.events.resize(raw.size());
  std::vector<std::size_t> fill(ev.offsets.begin(), ev.offsets.end() - 1);
  for (const auto& r : raw) ev.events[fill[r.interval]++] = r.e;
  return ev;
}

void simulate_stream(const MarketModel& model, const Strategy& strategy, double x, std::size_t n_paths,
                     std::uint64_t seed, const NodeVisitor& visit) {
  if (n_paths == 0) throw Error(ErrorCode::InvalidInput, "n_paths must be positive");
  if (!(x > 0.0)) throw Error(ErrorCode::InvalidInput, "initial wealth must be positive");
  strategy.validate(model, 1e-9);
  const auto& t = model.grid().nodes();
  const std::size_t n = t.size();
  const auto yth = y_theta_hat_path(model, strategy);
  const auto& R = model.R();
  std::vector<double> det(n);
  for (std::size_t k = 0; k < n; ++k) det[k] = std::log(x) + R[k] - strategy.V[k] + yth[k];

  const JumpEvents jumps = draw_jumps(model, n_paths, seed);
  std::vector<double> stoch(n_paths, 0.0);
  std::vector<double> logw(n_paths, det[0]);
  visit(0, logw);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dvar = 0.5 * (t[k + 1] - t[k]) * (strategy.y[k].squaredNorm() + strategy.y[k + 1].squaredNorm());
    const double sd = std::sqrt(dvar);
    const auto step = static_cast<std::uint32_t>(k);
    if (sd > 0.0) {
      for (std::size_t i = 0; i < n_paths; ++i) stoch[i] += sd * PathStream(seed, i).normal(step, 0) - 0.5 * dvar;
    }
    for (std::size_t e = jumps.offsets[k]; e < jumps.offsets[k + 1]; ++e) {
      const auto& ev = jumps.events[e];
      stoch[ev.path] += std::log1p(strategy.pi[k][ev.asset] * ev.size);
    }
    for (std::size_t i = 0; i < n_paths; ++i) logw[i] = det[k + 1] + stoch[i];
    visit(k + 1, logw);
  }
}

std::span<const double> PathEnsemble::at_node(std::size_t node) const {
  auto it = std::find(nodes.begin(), nodes.end(), node);
  if (it == nodes.end()) throw Error(ErrorCode::OffGrid, "node not recorded in ensemble");
  return at_record(static_cast<std::size_t>(it - nodes.begin()));
}

PathEnsemble simulate(const MarketModel& model, const Strategy& strategy, double x, std::size_t n_paths,
                      std::uint64_t seed, std::vector<std::size_t> record_nodes) {
  PathEnsemble ens;
  ens.n_paths = n_paths;
  ens.seed = seed;
  if (record_nodes.empty()) {
    record_nodes.resize(model.nodes());
    for (std::size_t k = 0; k < record_nodes.size(); ++k) record_nodes[k] = k;
  }
  std::sort(record_nodes.begin(), record_nodes.end());
  record_nodes.erase(std::unique(record_nodes.begin(), record_nodes.end()), record_nodes.end());
  if (record_nodes.back() >= model.nodes()) throw Error(ErrorCode::OffGrid, "record node beyond grid");
  ens.nodes = record_nodes;
  ens.wealth.resize(record_nodes.size() * n_paths);
  std::size_t r = 0;
  simulate_stream(model, strategy, x, n_paths, seed, [&](std::size_t node, std::span<const double> lw) {
    if (r < ens.nodes.size() && ens.nodes[r] == node) {
      double* out = ens.wealth.data() + r * n_paths;
      for (std::size_t i = 0; i < n_paths; ++i) out[i] = std::exp(lw[i]);
      ++r;
    }
  });
  ens.jump_counts = draw_jumps(model, n_paths, seed).counts;
  return ens;
}

double empirical_var(const PathEnsemble& ens, const MarketModel& model, double x, double beta, std::size_t node) {
  return x * std::exp(model.R().at(node)) - empirical_quantile(ens.at_node(node), beta);
}

double empirical_es(const PathEnsemble& ens, const MarketModel& model, double x, double beta, std::size_t node) {
  return x * std::exp(model.R().at(node)) - jdrisk::empirical_es(ens.at_node(node), beta);
}

namespace {

Estimate mean_and_error(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

Estimate estimate_cost(const PathEnsemble& ens, const MarketModel& model, const Strategy& s,
                       const UtilitySpec& utility) {
  if (ens.nodes.size() != model.nodes()) throw Error(ErrorCode::InvalidInput, "cost estimate needs every node");
  const auto& t = model.grid().nodes();
  std::vector<double> acc(ens.n_paths, 0.0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const auto w0 = ens.at_record(k), w1 = ens.at_record(k + 1);
    const double h = 0.5 * (t[k + 1] - t[k]);
    for (std::size_t i = 0; i < ens.n_paths; ++i)
      acc[i] += h * (std::pow(s.v[k] * w0[i], utility.gamma1) + std::pow(s.v[k + 1] * w1[i], utility.gamma1));
  }
  const auto wT = ens.at_record(t.size() - 1);
  for (std::size_t i = 0; i < ens.n_paths; ++i) acc[i] += std::pow(wT[i], utility.gamma2);
  return mean_and_error(acc);
}

Estimate estimate_cost(const MarketModel& model, const Strategy& s, const UtilitySpec& utility, double x,
                       std::size_t n_paths, std::uint64_t seed) {
  const auto& t = model.grid().nodes();
  std::vector<double> acc(n_paths, 0.0), prev(n_paths, 0.0);
  simulate_stream(model, s, x, n_paths, seed, [&](std::size_t k, std::span<const double> lw) {
    for (std::size_t i = 0; i < n_paths; ++i) {
      const double c = s.v[k] > 0.0 ? std::exp(utility.gamma1 * (std::log(s.v[k]) + lw[i])) : 0.0;
      if (k > 0) acc[i] += 0.5 * (t[k] - t[k - 1]) * (prev[i] + c);
      prev[i] = c;
      if (k + 1 == t.size()) acc[i] += std::exp(utility.gamma2 * lw[i]);
    }
  });
  return mean_and_error(acc);
}

std::pair<std::size_t, std::size_t> order_statistic_ci(std::size_t n, double beta, double confidence) {
  if (n == 0 || !(beta > 0.0 && beta < 1.0) || !(confidence > 0.0 && confidence < 1.0))
    throw Error(ErrorCode::InvalidInput, "bad order-statistic interval request");
  // B ~ Bin(n, beta) counts sample points below q_beta; X_(l) <= q iff B >= l.
  const double nd = static_cast<double>(n);
  const double mean = nd * beta;
  const double sd = std::sqrt(nd * beta * (1.0 - beta));
  const double alpha = 0.5 * (1.0 - confidence);
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(mean - 40.0 * sd - 10.0)));
  const auto hi = static_cast<std::size_t>(std::min(nd, std::ceil(mean + 40.0 * sd + 10.0)));
  std::vector<double> cdf;  // cdf[m - lo] = P(B <= m)
  double acc = 0.0;
  const double lb = std::log(beta), l1b = std::log1p(-beta);
  const double lgn = std::lgamma(nd + 1.0);
  for (std::size_t m = lo; m <= hi; ++m) {
    const double md = static_cast<double>(m);
    acc += std::exp(lgn - std::lgamma(md + 1.0) - std::lgamma(nd - md + 1.0) + md * lb + (nd - md) * l1b);
    cdf.push_back(acc);
  }
  // l: largest index with P(B < l) <= alpha; u: smallest with P(B >= u) <= alpha.
  std::size_t l = 1, u = n;
  for (std::size_t m = lo; m <= hi; ++m) {
    if (cdf[m - lo] <= alpha) l = std::max<std::size_t>(1, m + 1);
    if (1.0 - (m > lo ? cdf[m - 1 - lo] : 0.0) <= alpha) {
      u = std::min(n, std::max<std::size_t>(1, m));
      break;
    }
  }
  return {l, u};
}

GridOracleResult grid_oracle(const MarketModel& model, const UtilitySpec& utility,
                             const std::optional<RiskConstraint>& risk, double x, const std::vector<double>& pi_grid,
                             const std::vector<double>& scale_grid, const ConsumptionShape& shape) {
  const std::size_t n = model.nodes();
  if (shape.v.size() != n || shape.V.size() != n)
    throw Error(ErrorCode::InvalidInput, "consumption shape length differs from grid");
  GridOracleResult best;
  best.J = -std::numeric_limits<double>::infinity();
  const int d = model.dimension();
  for (double p : pi_grid) {
    Strategy base = Strategy::from_pi(model, std::vector<Eigen::VectorXd>(n, Eigen::VectorXd::Constant(d, p)),
                                      std::vector<double>(n, 0.0));
    for (double s : scale_grid) {
      Strategy st = base;
      for (std::size_t k = 0; k < n; ++k) {
        st.v[k] = s * shape.v[k];
        st.V[k] = s * shape.V[k];
      }
      ++best.evaluated;
      if (risk) {
        const auto slack = risk->kind == RiskKind::VaR ? var_constraint_slack(st, model, risk->level, risk->kappa)
                                                       : es_constraint_slack(st, model, risk->level, risk->kappa);
        if (*std::min_element(slack.begin(), slack.end()) < 0.0) continue;
      }
      ++best.feasible;
      const double J = cost_function(model, utility, st, x);
      if (J > best.J) {
        best.J = J;
        best.pi = p;
        best.scale = s;
        best.strategy = std::move(st);
      }
    }
  }
  if (best.feasible == 0) throw Error(ErrorCode::EmptyFeasibleSet, "no grid strategy satisfies the constraint");
  return best;
}

std::vector<double> constraint_profile(const MarketModel& model, const Strategy& s, RiskKind kind, double beta,
                                       double kappa) {
  const auto yy = y_norm_squared_path(model, s);
  const auto yth = y_theta_hat_path(model, s);
  std::vector<double> out(yy.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double yn = std::sqrt(std::max(0.0, yy[k]));
    const double factor = kind == RiskKind::VaR ? quantile_stoch_exp(yn, beta) : es_stoch_exp(yn, beta);
    out[k] = (1.0 - std::exp(yth[k] - s.V[k]) * factor) / kappa;
  }
  return out;
}

ProfileMC constraint_profile_mc(const MarketModel& model, const Strategy& s, RiskKind kind, double beta,
                                double kappa, double x, std::size_t n_paths, std::uint64_t seed, double confidence,
                                double z) {
  ProfileMC out;
  const std::size_t n = model.nodes();
  out.ratio.resize(n);
  out.ratio_low.resize(n);
  out.ratio_high.resize(n);
  const auto [l, u] = order_statistic_ci(n_paths, beta, confidence);
  const std::size_t k_idx = order_statistic_index(beta, n_paths);
  std::vector<double> buf(n_paths);
  simulate_stream(model, s, x, n_paths, seed, [&](std::size_t node, std::span<const double> lw) {
    const double bank = x * std::exp(model.R()[node]);
    const double denom = kappa * bank;
    std::copy(lw.begin(), lw.end(), buf.begin());
    auto nth = [&](std::size_t idx) {
      std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(idx - 1), buf.end());
      return buf[idx - 1];
    };
    if (kind == RiskKind::VaR) {
      // Successive nth_element calls on increasing indices reuse the partition.
      const double ql = std::exp(nth(l));
      const double qk = std::exp(nth(k_idx));
      const double qu = std::exp(nth(u));
      out.ratio[node] = (bank - qk) / denom;
      out.ratio_low[node] = (bank - qu) / denom;
      out.ratio_high[node] = (bank - ql) / denom;
    } else {
      const double qlog = nth(k_idx);
      const double q = std::exp(qlog);
      double sum = 0.0, sum2 = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) {
        const double w = std::exp(buf[i]);
        const double tail = buf[i] <= qlog ? w - q : 0.0;
        if (i < k_idx) sum += w;
        sum2 += tail * tail;
      }
      const double es = sum / static_cast<double>(k_idx);
      // Influence-function standard error of the tail mean.
      double mt = 0.0;
      for (std::size_t i = 0; i < k_idx; ++i) mt += std::exp(buf[i]) - q;
      mt /= static_cast<double>(n_paths);
      const double var = sum2 / static_cast<double>(n_paths) - mt * mt;
      const double se = std::sqrt(std::max(0.0, var) / static_cast<double>(n_paths)) / beta;
      out.ratio[node] = (bank - es) / denom;
      out.ratio_low[node] = (bank - es - z * se) / denom;
      out.ratio_high[node] = (bank - es + z * se) / denom;
    }
  });
  return out;
}

}  // namespace jdrisk
