#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jdrisk/market.hpp"
#include "jdrisk/riskmetrics.hpp"

namespace jdrisk::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JumpConfig {
  double lambda = 0.0;
  std::vector<std::pair<double, double>> points;  // (size, probability)
  double density_lower = 0.0;
  double density_upper = 0.0;
  std::vector<double> density;
  int quadrature_nodes = 129;

  bool operator==(const JumpConfig&) const = default;
};

struct RiskConfig {
  bool present = false;
  RiskKind kind = RiskKind::VaR;
  double beta = 0.05;
  double kappa = 0.1;
  NegJumpMode negjump_mode = NegJumpMode::ExactThinning;

  // Settings of an absent section carry no meaning.
  bool operator==(const RiskConfig& o) const {
    if (!present || !o.present) return present == o.present;
    return kind == o.kind && beta == o.beta && kappa == o.kappa && negjump_mode == o.negjump_mode;
  }
  RiskSpec spec() const { return {kind, beta, kappa, negjump_mode}; }
};

//! Everything a command needs, read from the flat INI-style config.
struct RunConfig {
  double horizon = 1.0;
  std::size_t nodes = 257;
  int dimension = 1;
  std::vector<double> r{0.0};      // one value or one per node
  std::vector<double> mu;          // d values or nodes x d
  std::vector<double> sigma;       // d x d row-major, or nodes of those
  std::vector<JumpConfig> jumps;   // one per asset; empty means no jumps
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  bool consumption = true;
  RiskConfig risk;
  double x = 1.0;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;

  MarketModel model() const;
  UtilitySpec utility() const { return {gamma1, gamma2}; }
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);
// Canonical form; parse_config(write_config(c)) == c.
void write_config(std::ostream& os, const RunConfig& cfg);

NegJumpMode parse_negjump_mode(const std::string& s);
const char* to_string(NegJumpMode mode);

}  // namespace jdrisk::app
