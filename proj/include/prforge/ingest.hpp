#pragma once

#include "prforge/model.hpp"

#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace prforge::ingest {

// JSON mapping used by the archive format. Field names mirror the structs.
nlohmann::json to_json(const PullRequestRecord& pr);
PullRequestRecord pr_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RepositoryMeta& repo);
RepositoryMeta repo_from_json(const nlohmann::json& j);

/// One archive line: compact JSON, keys sorted, terminated by '\n'.
std::string to_archive_line(const PullRequestRecord& pr);

struct Malformed {
    std::size_t line_no = 0; // 1-based
    std::string message;
};

using ArchiveItem = std::variant<PullRequestRecord, Malformed>;

/// Streams records from a line-delimited archive. Malformed lines are
/// reported individually and never end the stream.
class ArchiveReader {
public:
    explicit ArchiveReader(const std::filesystem::path& path);
    explicit ArchiveReader(std::unique_ptr<std::istream> in);

    /// Next record or per-line error; nullopt at end of file.
    std::optional<ArchiveItem> next();

private:
    std::unique_ptr<std::istream> m_in;
    std::size_t m_line_no = 0;
};

/// Convenience: read the whole archive.
std::vector<ArchiveItem> load_archive(const std::filesystem::path& path);

void write_archive(std::ostream& out, const std::vector<PullRequestRecord>& records);
void write_archive(const std::filesystem::path& path, const std::vector<PullRequestRecord>& records);

/// The repository state a PR was written against: the first parent of the
/// first PR commit. Throws IngestError("orphan_commit") when that commit has
/// no parent and IngestError("ambiguous_parent") when it is a merge commit.
std::string resolve_base_state(const PullRequestRecord& pr);

/// Shared surface of the live API client and offline archives.
class PullRequestSource {
public:
    virtual ~PullRequestSource() = default;

    virtual RepositoryMeta fetch_repository(const std::string& full_name) = 0;

    struct Page {
        std::vector<PullRequestRecord> records;
        std::optional<std::string> next_cursor;
    };
    /// An empty cursor starts the stream.
    virtual Page fetch_pull_requests(const RepositoryMeta& repo, const std::string& cursor) = 0;

    /// Exact bytes of `path` at `commit`. Throws IngestError("file_absent")
    /// when the commit exists but the file does not, IngestError("not_found")
    /// for an unknown commit.
    virtual std::string fetch_file_at_commit(
        const RepositoryMeta& repo, const std::string& path, const std::string& commit) = 0;
};

/// Serves file contents from the snapshots embedded in a record.
std::string snapshot_file(const PullRequestRecord& pr, const std::string& path, const std::string& commit);

/// Every path any commit of the PR touches (both sides of renames, created
/// files included so their absence at base is recorded), in first-touch order.
std::vector<std::string> touched_source_paths(const PullRequestRecord& pr);

/// Fills pr.file_snapshots[base] for every touched path via `fetch`, which
/// follows fetch_file_at_commit semantics.
void attach_base_files(PullRequestRecord& pr, const std::string& base,
    const std::function<std::string(const std::string& path)>& fetch);

} // namespace prforge::ingest
