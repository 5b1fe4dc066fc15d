#pragma once

#include <string>
#include <vector>

namespace plume::cli {

struct CheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Quick numerical verification of the build: wind closed forms, layer and
/// network gradients against finite differences, PPO and metric oracles.
std::vector<CheckItem> run_self_checks();

}  // namespace plume::cli
