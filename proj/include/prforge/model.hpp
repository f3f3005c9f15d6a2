#pragma once

#include "prforge/timestamp.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prforge {

struct RepositoryMeta {
    std::string full_name; // "owner/repo"
    std::string description;
    std::string primary_language;
    std::int64_t stars = 0;
    bool archived = false;
    std::optional<std::int64_t> star_rank;

    bool operator==(const RepositoryMeta&) const = default;
};

struct IssueRecord {
    std::string title;
    std::string body;

    bool operator==(const IssueRecord&) const = default;
};

struct CommitRecord {
    std::string sha;
    std::string message;
    std::string author; // display name, as in "<pr_commit> Liz P: ..."
    Timestamp timestamp;
    std::vector<std::string> parent_shas;
    std::vector<std::string> diffs; // raw unified diff text, one per file

    bool operator==(const CommitRecord&) const = default;
};

enum class EventKind { comment, review, review_comment, status_change };
enum class ReviewState { approved, changes_requested, commented };

struct InteractionEvent {
    EventKind kind = EventKind::comment;
    std::string author;
    std::string body; // for status_change: the new status, e.g. "closed"
    Timestamp timestamp;
    std::optional<ReviewState> review_state; // present iff kind == review
    std::optional<std::string> thread_id;

    bool operator==(const InteractionEvent&) const = default;
};

/// Snapshots of file contents keyed by commit sha, then path. A path mapped
/// to nullopt is known to be absent at that commit.
using FileSnapshots = std::map<std::string, std::map<std::string, std::optional<std::string>>>;

struct PullRequestRecord {
    RepositoryMeta repo;
    std::int64_t number = 0;
    std::string title;
    std::string body;
    std::string author;
    Timestamp created_at;
    bool merged = false;
    bool author_is_bot = false;
    std::optional<IssueRecord> linked_issue;
    std::vector<CommitRecord> commits;
    std::vector<InteractionEvent> events;
    std::string base_commit_meta;
    bool truncated = false;
    FileSnapshots file_snapshots;

    /// "owner/repo#123"
    std::string id() const;

    bool operator==(const PullRequestRecord&) const = default;
};

const char* to_string(EventKind kind);
const char* to_string(ReviewState state);
EventKind parse_event_kind(const std::string& text);
ReviewState parse_review_state(const std::string& text);

/// Sorts events by (timestamp, kind, author) keeping input order for ties.
void normalize_events(std::vector<InteractionEvent>& events);

/// Validates field-level invariants (sha shape, repo name, review_state
/// presence). Throws IngestError("malformed").
void validate(const PullRequestRecord& pr);

} // namespace prforge
