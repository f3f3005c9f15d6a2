#pragma once

// A fake agent producing rollout records with a known ground-truth outcome.

#include <json.hpp>

#include <random>
#include <string>

namespace rollouts {

struct Rollout {
    nlohmann::json record;
    bool truly_passed = false; // every test of a non-empty suite passed
};

/// `steps` action/observation pairs; observations sometimes start with
/// role-marker look-alikes to exercise escaping.
Rollout fake_rollout(std::mt19937_64& rng, int task, int rollout_index, int steps);

/// Mix of sizes and outcomes; roughly one in ten is long.
Rollout random_rollout(std::mt19937_64& rng, int i);

} // namespace rollouts
