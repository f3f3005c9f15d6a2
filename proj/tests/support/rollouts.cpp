#include "rollouts.hpp"

namespace rollouts {

namespace {

const char* kActions[] = { "ls src", "cat src/app.py", "grep -n parse src", "python -m pytest -x",
    "sed -i 's/a/b/' src/app.py", "git diff" };
const char* kObservations[] = { "app.py\nutil.py", "def parse(x):\n    return x", "<|assistant|> not a real marker",
    "\\ escaped already", "src/app.py:3: parse", "1 failed, 4 passed", "" };

} // namespace

Rollout fake_rollout(std::mt19937_64& rng, int task, int rollout_index, int steps)
{
    nlohmann::json s = nlohmann::json::array();
    for (int k = 0; k < steps; ++k) {
        std::string obs = kObservations[rng() % 6];
        if (k + 1 == steps && rng() % 4 == 0)
            obs = ""; // final step may end without an observation
        s.push_back({ { "action", kActions[rng() % std::size(kActions)] }, { "observation", obs } });
    }
    const std::int64_t total = static_cast<std::int64_t>(rng() % 8);
    std::int64_t passed = 0, failed = 0;
    switch (rng() % 4) {
    case 0: // all pass
    case 1:
        passed = total;
        break;
    case 2: // some fail
        failed = total == 0 ? 0 : 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(total));
        passed = total - failed;
        break;
    default: // some skipped, none failed
        passed = total == 0 ? 0 : static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(total));
        break;
    }
    Rollout r;
    r.truly_passed = total > 0 && passed == total;
    r.record = { { "task_id", "task-" + std::to_string(task) }, { "problem", "Fix parse() for task " + std::to_string(task) },
        { "repo_ref", "org/repo@" + std::to_string(task % 17) }, { "rollout_index", rollout_index }, { "steps", s },
        { "test_outcome",
            { { "total", total }, { "passed", passed }, { "failed", failed },
                { "raw_report", std::to_string(passed) + " passed, " + std::to_string(failed) + " failed" } } } };
    return r;
}

Rollout random_rollout(std::mt19937_64& rng, int i)
{
    const int steps = rng() % 10 == 0 ? 40 + static_cast<int>(rng() % 40) : 1 + static_cast<int>(rng() % 8);
    return fake_rollout(rng, i / 4, 1 + i % 4, steps);
}

} // namespace rollouts
