#ifndef USCRL_TOOLS_COMMANDS_HPP_
#define USCRL_TOOLS_COMMANDS_HPP_

#include "run_context.hpp"

namespace uscrl::cli {

void cmd_sample(const GlobalOptions& opts);
void cmd_estimate(const GlobalOptions& opts);
void cmd_bounds(const GlobalOptions& opts);
void cmd_train(const GlobalOptions& opts);
void cmd_experiment_regimes(const GlobalOptions& opts);
void cmd_experiment_complexity(const GlobalOptions& opts);

}  // namespace uscrl::cli

#endif  // USCRL_TOOLS_COMMANDS_HPP_
