#pragma once

#include "prforge/diff.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prforge::diff {

/// Composes per-commit changes (commits in PR order) into the base→head
/// change set without access to file contents. Each file is tracked as a
/// sparse document: lines observed in any hunk are pinned to their base
/// line number, everything else is an untouched gap. Context lines of later
/// hunks are checked against the composed state and a disagreement throws
/// DiffError("composition_conflict").
///
/// Files created and later deleted within the PR vanish from the result;
/// edits that cancel out leave no change. Output is sorted by path.
std::vector<FileChange> net_diff(const std::vector<std::vector<FileChange>>& commits);

/// A snapshot of repository files: path → content. Missing key = absent file.
using FileMap = std::map<std::string, std::string>;

/// Applies a set of changes that all refer to the same pre-state (as a net
/// diff or a single commit does). Renames and deletes read their sources
/// before anything is written. Binary changes are ignored.
FileMap apply_changes(const FileMap& files, const std::vector<FileChange>& changes);

} // namespace prforge::diff
