#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jdrisk/constrained.hpp"
#include "jdrisk/error.hpp"
#include "jdrisk/strategy.hpp"
#include "jdrisk_app/config.hpp"

namespace jdrisk::app {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitCondition = 2, kExitVerification = 3 };

struct CommandOptions {
  RunConfig config;
  std::filesystem::path out = ".";
  bool force = false;
  bool dump_config = false;
  std::optional<std::filesystem::path> strategy_file;  // verify only
};

//! Files produced by a command. Nothing touches the output directory until
//! commit(), which writes temporaries and renames them into place.
class OutputSet {
 public:
  std::ostream& open(const std::string& name) { return files_[name]; }
  void commit(const std::filesystem::path& dir) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::ostringstream> files_;
};

//! Solver output normalised across the problem classes.
struct SolveResult {
  std::string method;
  Strategy strategy;
  double J = 0.0;
  double rho_star = 0.0;
  double chi = 1.0;
  double foc_residual = 0.0;
  double root_residual = 0.0;
  std::vector<std::string> flags;
  std::optional<ConstraintCertificate> certificate;
  std::optional<RiskLevel> level;
  std::vector<std::pair<std::string, double>> extra;  // method-specific report rows
};

// Dispatches on (gamma1, gamma2, risk) to the matching solver. Throws
// jdrisk::Error with ConditionViolated when a certificate fails without force.
SolveResult run_solver(const RunConfig& cfg, const MarketModel& model, bool force);

void write_strategy_csv(std::ostream& os, const MarketModel& model, const Strategy& s);
// Reads pi and v columns; y and V are rebuilt from the model.
Strategy read_strategy_csv(std::istream& is, const MarketModel& model);

int cmd_solve(const CommandOptions& opt, std::ostream& err);
int cmd_certify(const CommandOptions& opt, std::ostream& err);
int cmd_simulate(const CommandOptions& opt, std::ostream& err);
int cmd_verify(const CommandOptions& opt, std::ostream& err);
int cmd_compare(const CommandOptions& opt, std::ostream& err);

// Maps library errors onto the exit-code contract.
int exit_code_for(ErrorCode code);
// Runs a named command, turning exceptions into exit codes. Condition
// failures first print a "reason=<code>" line on err.
int dispatch(const std::string& command, const CommandOptions& opt, std::ostream& err);

}  // namespace jdrisk::app
