#pragma once

#include "equivcheck/scenario.hpp"

#include <cstdint>
#include <string>

namespace equivcheck {

/// Kinematic template for synthetic rear-end pre-crash traces. Each trace
/// ends at impact (t = 0) with closing speed >= 1 m/s; lead and follower
/// either cruise or brake at a constant rate from a random onset. Traces
/// whose gap would turn negative before impact are redrawn.
struct SyntheticConfig {
    std::string label = "synthetic";
    std::size_t scenarios = 1000;
    std::uint64_t seed = 1;
    double closing_speed_scale = 1.0;  // planted shift: scales the impact closing speed
    double duration = 6.0;             // s of history before impact
    double dt = 0.1;                   // s between samples
    double p_parked_lead = 0.25;
    double p_lead_brakes = 0.55;
    double p_follow_brakes = 0.6;
    bool random_weights = true;        // log-normal(0, 0.5) sampling weights
};

ScenarioSet generate_synthetic(const SyntheticConfig& cfg);

}  // namespace equivcheck
