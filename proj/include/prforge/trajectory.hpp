#pragma once

#include "prforge/sample.hpp"
#include "prforge/tokenizer.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace prforge::trajectory {

inline constexpr std::size_t kMaxTrajectoryTokens = 131'072;
inline constexpr int kMaxRollouts = 4;

struct Step {
    std::string action;
    std::string observation; // may be empty only on the last step

    bool operator==(const Step&) const = default;
};

struct TestOutcome {
    std::int64_t total = 0;
    std::int64_t passed = 0;
    std::int64_t failed = 0;
    std::string raw_report;

    bool operator==(const TestOutcome&) const = default;
};

enum class Outcome { pass, fail };

const char* to_string(Outcome o);

struct Trajectory {
    std::string task_id;
    std::string problem;
    std::string repo_ref;
    std::vector<Step> steps;
    TestOutcome test_outcome;
    Outcome outcome = Outcome::fail;
    int rollout_index = 1;
    std::size_t token_count = 0;

    /// "task#r2"
    std::string id() const;

    bool operator==(const Trajectory&) const = default;
};

/// pass iff the suite is non-empty and every test passed.
Outcome classify(const TestOutcome& outcome);

/// Validates and builds a trajectory from a rollout record. Accepts either
/// "steps": [{action, observation}] or "turns": [{role, content}] with roles
/// "action"/"observation". Throws Error("malformed_record") or
/// Error("alternation_violation") naming the step index.
Trajectory parse_trajectory(const nlohmann::json& record, const Tokenizer& tok);

/// Rollout record in the canonical "steps" shape.
nlohmann::json to_json(const Trajectory& t);

/// Role-tagged serialization used as training text.
std::string serialize(const Trajectory& t);
RenderedSample to_sample(const Trajectory& t);

struct Deserialized {
    std::string task_id;
    std::string repo_ref;
    std::string problem;
    std::vector<Step> steps;
    Outcome outcome = Outcome::fail;
};

/// Inverse of to_sample; the outcome comes from the sample's subset.
/// Throws Error("malformed_record").
Deserialized from_sample(const RenderedSample& sample);

struct SplitStats {
    std::size_t count = 0;
    std::uint64_t tokens = 0;
};

struct Split {
    std::vector<Trajectory> pass;
    std::vector<Trajectory> fail;
    std::vector<std::string> dropped; // over-length ids
    SplitStats pass_stats;
    SplitStats fail_stats;
};

enum class Disposition { pass, fail, too_long };

/// Streaming form of filter_and_split.
class Splitter {
public:
    explicit Splitter(std::size_t max_tokens = kMaxTrajectoryTokens)
        : m_max_tokens(max_tokens)
    {
    }

    Disposition offer(const Trajectory& t);
    const SplitStats& pass_stats() const { return m_pass; }
    const SplitStats& fail_stats() const { return m_fail; }
    std::size_t dropped() const { return m_dropped; }

private:
    std::size_t m_max_tokens;
    SplitStats m_pass;
    SplitStats m_fail;
    std::size_t m_dropped = 0;
};

/// Drops trajectories above max_tokens, then partitions survivors by outcome.
Split filter_and_split(const std::vector<Trajectory>& input, std::size_t max_tokens = kMaxTrajectoryTokens);

} // namespace prforge::trajectory
