#include "prforge/diff.hpp"
#include "prforge/error.hpp"
#include "prforge/ingest.hpp"

#include <fstream>
#include <set>

namespace prforge::ingest {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& value)
{
    return value ? json(*value) : json(nullptr);
}

std::string req_string(const json& j, const char* key)
{
    return j.at(key).get<std::string>();
}

std::string opt_string(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return {};
    return it->get<std::string>();
}

bool opt_bool(const json& j, const char* key)
{
    auto it = j.find(key);
    return it != j.end() && !it->is_null() && it->get<bool>();
}

} // namespace

json to_json(const RepositoryMeta& repo)
{
    return json {
        { "full_name", repo.full_name },
        { "description", repo.description },
        { "primary_language", repo.primary_language },
        { "stars", repo.stars },
        { "archived", repo.archived },
        { "star_rank", optional_json(repo.star_rank) },
    };
}

RepositoryMeta repo_from_json(const json& j)
{
    RepositoryMeta r;
    r.full_name = req_string(j, "full_name");
    r.description = opt_string(j, "description");
    r.primary_language = opt_string(j, "primary_language");
    r.stars = j.value("stars", std::int64_t { 0 });
    r.archived = opt_bool(j, "archived");
    if (auto it = j.find("star_rank"); it != j.end() && !it->is_null())
        r.star_rank = it->get<std::int64_t>();
    return r;
}

json to_json(const PullRequestRecord& pr)
{
    json commits = json::array();
    for (const auto& c : pr.commits) {
        commits.push_back(json {
            { "sha", c.sha },
            { "message", c.message },
            { "author", c.author },
            { "timestamp", format_timestamp(c.timestamp) },
            { "parent_shas", c.parent_shas },
            { "diffs", c.diffs },
        });
    }
    json events = json::array();
    for (const auto& e : pr.events) {
        events.push_back(json {
            { "kind", to_string(e.kind) },
            { "author", e.author },
            { "body", e.body },
            { "timestamp", format_timestamp(e.timestamp) },
            { "review_state", e.review_state ? json(to_string(*e.review_state)) : json(nullptr) },
            { "thread_id", optional_json(e.thread_id) },
        });
    }
    json snapshots = json::object();
    for (const auto& [sha, files] : pr.file_snapshots) {
        json entry = json::object();
        for (const auto& [path, content] : files)
            entry[path] = optional_json(content);
        snapshots[sha] = std::move(entry);
    }
    return json {
        { "repo", to_json(pr.repo) },
        { "number", pr.number },
        { "title", pr.title },
        { "body", pr.body },
        { "author", pr.author },
        { "created_at", format_timestamp(pr.created_at) },
        { "merged", pr.merged },
        { "author_is_bot", pr.author_is_bot },
        { "linked_issue",
            pr.linked_issue ? json { { "title", pr.linked_issue->title }, { "body", pr.linked_issue->body } } : json(nullptr) },
        { "commits", std::move(commits) },
        { "events", std::move(events) },
        { "base_commit_meta", pr.base_commit_meta },
        { "truncated", pr.truncated },
        { "file_snapshots", std::move(snapshots) },
    };
}

PullRequestRecord pr_from_json(const json& j)
{
    PullRequestRecord pr;
    pr.repo = repo_from_json(j.at("repo"));
    pr.number = j.at("number").get<std::int64_t>();
    pr.title = opt_string(j, "title");
    pr.body = opt_string(j, "body");
    pr.author = opt_string(j, "author");
    if (auto it = j.find("created_at"); it != j.end() && !it->is_null())
        pr.created_at = parse_timestamp(it->get<std::string>());
    pr.merged = opt_bool(j, "merged");
    pr.author_is_bot = opt_bool(j, "author_is_bot");
    if (auto it = j.find("linked_issue"); it != j.end() && !it->is_null())
        pr.linked_issue = IssueRecord { opt_string(*it, "title"), opt_string(*it, "body") };
    for (const auto& c : j.value("commits", json::array())) {
        CommitRecord rec;
        rec.sha = req_string(c, "sha");
        rec.message = opt_string(c, "message");
        rec.author = opt_string(c, "author");
        rec.timestamp = parse_timestamp(req_string(c, "timestamp"));
        rec.parent_shas = c.value("parent_shas", std::vector<std::string> {});
        rec.diffs = c.value("diffs", std::vector<std::string> {});
        pr.commits.push_back(std::move(rec));
    }
    for (const auto& e : j.value("events", json::array())) {
        InteractionEvent ev;
        ev.kind = parse_event_kind(req_string(e, "kind"));
        ev.author = opt_string(e, "author");
        ev.body = opt_string(e, "body");
        ev.timestamp = parse_timestamp(req_string(e, "timestamp"));
        if (auto it = e.find("review_state"); it != e.end() && !it->is_null())
            ev.review_state = parse_review_state(it->get<std::string>());
        if (auto it = e.find("thread_id"); it != e.end() && !it->is_null())
            ev.thread_id = it->get<std::string>();
        pr.events.push_back(std::move(ev));
    }
    normalize_events(pr.events);
    pr.base_commit_meta = opt_string(j, "base_commit_meta");
    pr.truncated = opt_bool(j, "truncated");
    if (auto it = j.find("file_snapshots"); it != j.end() && !it->is_null()) {
        for (const auto& [sha, files] : it->items()) {
            auto& dest = pr.file_snapshots[sha];
            for (const auto& [path, content] : files.items())
                dest[path] = content.is_null() ? std::nullopt : std::optional<std::string>(content.get<std::string>());
        }
    }
    validate(pr);
    return pr;
}

std::string to_archive_line(const PullRequestRecord& pr)
{
    return to_json(pr).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

ArchiveReader::ArchiveReader(const std::filesystem::path& path)
{
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in)
        throw IngestError("io", "cannot open archive " + path.string());
    m_in = std::move(in);
}

ArchiveReader::ArchiveReader(std::unique_ptr<std::istream> in)
    : m_in(std::move(in))
{
}

std::optional<ArchiveItem> ArchiveReader::next()
{
    std::string line;
    while (std::getline(*m_in, line)) {
        ++m_line_no;
        if (line.empty())
            continue;
        try {
            return ArchiveItem { pr_from_json(json::parse(line)) };
        } catch (const std::exception& e) {
            return ArchiveItem { Malformed { m_line_no, e.what() } };
        }
    }
    if (m_in->bad())
        throw IngestError("io", "read error in archive");
    return std::nullopt;
}

std::vector<ArchiveItem> load_archive(const std::filesystem::path& path)
{
    ArchiveReader reader(path);
    std::vector<ArchiveItem> items;
    while (auto item = reader.next())
        items.push_back(std::move(*item));
    return items;
}

void write_archive(std::ostream& out, const std::vector<PullRequestRecord>& records)
{
    for (const auto& r : records)
        out << to_archive_line(r);
}

void write_archive(const std::filesystem::path& path, const std::vector<PullRequestRecord>& records)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IngestError("io", "cannot write archive " + path.string());
    write_archive(out, records);
}

std::string resolve_base_state(const PullRequestRecord& pr)
{
    if (pr.commits.empty())
        throw IngestError("orphan_commit", pr.id() + ": PR has no commits");
    const auto& parents = pr.commits.front().parent_shas;
    if (parents.empty())
        throw IngestError("orphan_commit", pr.id() + ": first commit has no parent");
    if (parents.size() > 1)
        throw IngestError("ambiguous_parent", pr.id() + ": first commit is a merge commit");
    return parents.front();
}

std::string snapshot_file(const PullRequestRecord& pr, const std::string& path, const std::string& commit)
{
    auto at = pr.file_snapshots.find(commit);
    if (at == pr.file_snapshots.end())
        throw IngestError("not_found", pr.id() + ": no snapshot for commit " + commit);
    auto file = at->second.find(path);
    if (file == at->second.end())
        throw IngestError("not_found", pr.id() + ": " + path + " was not captured at " + commit);
    if (!file->second)
        throw IngestError("file_absent", pr.id() + ": " + path + " does not exist at " + commit);
    return *file->second;
}

std::vector<std::string> touched_source_paths(const PullRequestRecord& pr)
{
    std::vector<std::string> paths;
    std::set<std::string> seen;
    auto add = [&](const std::string& p) {
        if (seen.insert(p).second)
            paths.push_back(p);
    };
    for (const auto& c : pr.commits) {
        for (const auto& text : c.diffs) {
            for (const auto& change : diff::parse_unified_diff(text)) {
                add(change.source_path());
                if (change.kind == diff::ChangeKind::rename)
                    add(change.path);
            }
        }
    }
    return paths;
}

void attach_base_files(PullRequestRecord& pr, const std::string& base,
    const std::function<std::string(const std::string& path)>& fetch)
{
    auto& snapshot = pr.file_snapshots[base];
    for (const auto& path : touched_source_paths(pr)) {
        if (snapshot.count(path))
            continue;
        try {
            snapshot[path] = diff::normalize_newlines(fetch(path));
        } catch (const IngestError& e) {
            if (e.code() != "file_absent")
                throw;
            snapshot[path] = std::nullopt;
        }
    }
}

} // namespace prforge::ingest
