#pragma once

#include "plume/nn/network.hpp"
#include "plume/rl/actions.hpp"

namespace plume::rl {

/// Everything needed to fly a trained policy: network, weights and the
/// action/region semantics it was trained with.
struct PolicySnapshot {
  nn::NetworkSpec spec;
  ActionTable actions;
  RegionPartition partition;
  nn::Parameters<float> params;
};

}  // namespace plume::rl
