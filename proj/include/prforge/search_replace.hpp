#pragma once

#include "prforge/diff.hpp"
#include "prforge/net_diff.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace prforge::diff {

struct SearchReplaceEdit {
    std::string path;
    std::string search;
    std::string replace;
    std::size_t commit_index = 0;

    bool operator==(const SearchReplaceEdit&) const = default;
};

/// Maximum number of context lines added around a hunk while looking for a
/// unique anchor.
inline constexpr std::size_t kMaxAnchorExpansion = 50;

/// Number of (possibly overlapping) occurrences of `needle` in `haystack`,
/// counting no further than `limit`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle, std::size_t limit = 2);

/// One edit per hunk. The search block (context + removed lines) grows by one
/// line above, then one below, alternately, until it occurs exactly once in
/// the file state the edit applies to. Renames become a removal edit on the
/// old path plus a creation edit on the new path.
///
/// Throws DiffError("ambiguous_anchor") when no expansion within
/// kMaxAnchorExpansion lines is unique, and DiffError("context_mismatch")
/// when `change` does not apply to `file_at_state`.
std::vector<SearchReplaceEdit> diff_to_search_replace(
    std::string_view file_at_state, const FileChange& change, std::size_t commit_index = 0);

/// Plain textual substitution of one edit. An empty search block is only
/// valid against an empty (or absent) file. Throws DiffError("search_not_unique").
std::string apply_search_replace(std::string_view content, const SearchReplaceEdit& edit);

/// Applies edits in order to a file map. Absent files read as empty and files
/// left empty are treated as deleted.
FileMap apply_search_replace(FileMap files, const std::vector<SearchReplaceEdit>& edits);

} // namespace prforge::diff
