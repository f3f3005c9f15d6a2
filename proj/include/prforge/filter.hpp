#pragma once

#include "prforge/diff.hpp"
#include "prforge/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prforge::filter {

enum class Subset { none, ctx_gen, ctx_py, both };

const char* to_string(Subset subset);

// Reason codes recorded in decision logs.
namespace reason {
inline constexpr const char* not_merged = "not_merged";
inline constexpr const char* bot_author = "bot_author";
inline constexpr const char* not_top_starred = "not_top_starred";
inline constexpr const char* not_python_repo = "not_python_repo";
inline constexpr const char* too_few_stars = "too_few_stars";
inline constexpr const char* archived_repo = "archived_repo";
inline constexpr const char* non_python_change = "non_python_change";
inline constexpr const char* too_many_py_files = "too_many_py_files";
inline constexpr const char* no_py_files = "no_py_files";
} // namespace reason

struct FilterDecision {
    bool accepted = false;
    Subset subset = Subset::none;
    std::vector<std::string> reasons;

    bool operator==(const FilterDecision&) const = default;
};

/// Result of a single rule group: empty reasons means the fragment passes.
struct Fragment {
    std::vector<std::string> reasons;
    bool passed() const { return reasons.empty(); }
};

/// Repository → rank (1 = most starred). Names compare case-insensitively.
class StarRankTable {
public:
    StarRankTable() = default;

    /// Ranks are assigned in order: names[0] gets rank 1. Throws
    /// ConfigError on duplicates.
    explicit StarRankTable(const std::vector<std::string>& names);

    /// One full_name per line, most-starred first; blank lines and
    /// '#' comments ignored.
    static StarRankTable load(const std::filesystem::path& path);

    std::optional<std::int64_t> rank(const std::string& full_name) const;
    std::size_t size() const { return m_ranks.size(); }

private:
    std::map<std::string, std::int64_t> m_ranks;
};

struct Thresholds {
    std::int64_t star_rank_cutoff = 10'000; // inclusive
    std::int64_t min_stars = 5;
    std::size_t min_py_files = 1;
    std::size_t max_py_files = 5;
};

bool repo_filter_general(const RepositoryMeta& repo, const StarRankTable& table, const Thresholds& t = {});
bool repo_filter_python(const RepositoryMeta& repo, const Thresholds& t = {});

bool is_bot_login(const std::string& login);
bool is_python_source(const std::string& path);
bool is_documentation(const std::string& path);

Fragment pr_filter_common(const PullRequestRecord& pr);
Fragment pr_filter_python(const PullRequestRecord& pr, const std::vector<diff::FileChange>& net, const Thresholds& t = {});

/// Number of distinct `.py` paths touched by the net change set.
std::size_t count_python_files(const std::vector<diff::FileChange>& net);

enum class Mode { gen, py, both };

/// Composes the rules. Subsets not requested by `mode` are never granted.
FilterDecision classify(const PullRequestRecord& pr, const RepositoryMeta& repo, const std::vector<diff::FileChange>& net,
    const StarRankTable& table, const Thresholds& t = {}, Mode mode = Mode::both);

} // namespace prforge::filter
