#pragma once

#include <iosfwd>
#include <set>
#include <string>

#include "stride_cli/run_config.hpp"

namespace stride::cli {

/// Keys each command accepts, from flags, --set or a config file.
std::set<std::string> phantom_keys();
std::set<std::string> simulate_keys();
std::set<std::string> train_keys();
std::set<std::string> reconstruct_keys();
std::set<std::string> eval_keys();
std::set<std::string> ablate_keys();

void cmd_phantom(const RunConfig& rc);
void cmd_simulate(const RunConfig& rc);
void cmd_train(const RunConfig& rc, std::ostream& log);
void cmd_reconstruct(const RunConfig& rc, std::ostream& log);
void cmd_eval(const RunConfig& rc, std::ostream& out);
void cmd_ablate(const RunConfig& rc, std::ostream& out);

}  // namespace stride::cli
