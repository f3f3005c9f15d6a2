#pragma once

// Hand-built pull requests with known expected outcomes.

#include "prforge/filter.hpp"
#include "prforge/model.hpp"
#include "prforge/render.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fixtures {

/// Root of the test tree (goldens, data files).
std::filesystem::path test_dir();
std::string read_file(const std::filesystem::path& path);

/// Pylons/waitress: removes `value = value.strip()` from task.py; linked issue.
prforge::PullRequestRecord waitress_pr();
/// The summary and refined message shown in the published example.
prforge::render::Enhancements waitress_enhancements();

/// parcel-bundler/parcel: one commit switching the dev-server port default to
/// process.env.PORT, with a comment, an approving review and a close.
prforge::PullRequestRecord parcel_pr();

/// Builds single- or multi-commit PRs from file states.
class PrBuilder {
public:
    PrBuilder(std::string repo, std::int64_t number);

    PrBuilder& language(std::string lang);
    PrBuilder& stars(std::int64_t n);
    PrBuilder& archived(bool a = true);
    PrBuilder& author(std::string login, bool is_bot = false);
    PrBuilder& merged(bool m);
    /// Seeds a base file.
    PrBuilder& file(const std::string& path, std::string content);
    /// One commit; nullopt deletes a path.
    PrBuilder& commit(const std::map<std::string, std::optional<std::string>>& changes);
    /// One commit renaming `from` to `to` (content unchanged).
    PrBuilder& rename(const std::string& from, const std::string& to);

    prforge::PullRequestRecord build() const;

private:
    prforge::PullRequestRecord m_pr;
    std::map<std::string, std::string> m_base;
    std::map<std::string, std::string> m_state;
    std::vector<std::string> m_read; // paths read from base
};

struct LabeledPr {
    std::string label;
    prforge::PullRequestRecord pr;
    prforge::filter::Subset expected;
    std::vector<std::string> reasons; // expected when rejected
};

/// Rank table for the labeled fixtures: 10001 names; "edge/at-cutoff" sits at
/// rank 10000 and "edge/past-cutoff" at 10001.
std::vector<std::string> rank_names();

/// 20 PRs covering every admission rule and its boundaries.
std::vector<LabeledPr> filter_fixture_20();

/// 13 PRs of which exactly 6 satisfy every Python rule.
std::vector<LabeledPr> filter_fixture_13();

} // namespace fixtures
