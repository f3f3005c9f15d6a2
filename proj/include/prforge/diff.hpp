#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prforge::diff {

enum class LineTag { context, remove, add };

// `text` keeps its line terminator: "foo\n" for an ordinary line, "foo" for
// a final line that has no newline (serialized with the
// "\ No newline at end of file" marker). This keeps line algebra byte-exact.
struct HunkLine {
    LineTag tag = LineTag::context;
    std::string text;

    bool operator==(const HunkLine&) const = default;
};

struct Hunk {
    std::size_t old_start = 0;
    std::size_t old_len = 0;
    std::size_t new_start = 0;
    std::size_t new_len = 0;
    std::string section; // text after the closing "@@", e.g. a function signature
    std::vector<HunkLine> lines;

    bool operator==(const Hunk&) const = default;
};

enum class ChangeKind { modify, create, remove, rename };

struct FileChange {
    std::string path;
    ChangeKind kind = ChangeKind::modify;
    std::optional<std::string> old_path; // set iff kind == rename
    std::vector<Hunk> hunks;
    bool binary = false;

    // The path this change reads from (old_path for renames).
    const std::string& source_path() const { return old_path ? *old_path : path; }

    bool operator==(const FileChange&) const = default;
};

const char* to_string(ChangeKind kind);

/// Splits content into lines, each keeping its '\n' terminator; a trailing
/// fragment without '\n' becomes a final unterminated line.
std::vector<std::string> split_lines(std::string_view content);

std::string join_lines(const std::vector<std::string>& lines);

/// Converts CRLF and lone CR line endings to LF.
std::string normalize_newlines(std::string_view content);

/// Parses git-style or plain unified diffs. CRLF is normalized before parsing.
/// Throws DiffError("malformed_diff") with the byte offset of the failure.
std::vector<FileChange> parse_unified_diff(std::string_view text);

/// Canonical git-style serialization ("diff --git" header, ---/+++ lines, hunks).
std::string serialize(const FileChange& change);
std::string serialize(const std::vector<FileChange>& changes);

/// Hunk text only ("@@ ... @@" headers and body lines), as GitHub reports a
/// per-file patch.
std::string serialize_hunks(const std::vector<Hunk>& hunks);

/// Exact application with no fuzz. Throws DiffError("context_mismatch") naming
/// the hunk index when a context or removed line disagrees with `content`.
std::string apply_patch(std::string_view content, const FileChange& change);

/// Swaps additions and removals and exchanges coordinates; creates become
/// removals and renames are inverted.
FileChange reverse_patch(const FileChange& change);

/// Line-level diff of two contents (Myers), producing hunks with the given
/// amount of context. Returns an empty hunk list for identical inputs.
std::vector<Hunk> diff_lines(std::string_view before, std::string_view after, std::size_t context = 3);

/// Builds a FileChange from two states of a file. `before`/`after` empty
/// optional means the file is absent on that side.
std::optional<FileChange> make_change(const std::string& path, const std::optional<std::string>& before,
    const std::optional<std::string>& after, std::size_t context = 3);

} // namespace prforge::diff
