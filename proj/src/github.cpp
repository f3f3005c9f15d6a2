#include <httplib.h>

#include "prforge/github.hpp"

#include "prforge/diff.hpp"
#include "prforge/error.hpp"

#include <cstdlib>
#include <thread>

namespace prforge::ingest {

using nlohmann::json;

RateBudget::RateBudget()
    : RateBudget(
        [] { return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count(); },
        [](std::chrono::seconds s) { std::this_thread::sleep_for(s); })
{
}

RateBudget::RateBudget(Clock clock, Sleeper sleeper)
    : m_clock(std::move(clock))
    , m_sleeper(std::move(sleeper))
{
}

void RateBudget::acquire()
{
    std::unique_lock lock(m_mutex);
    if (m_remaining && *m_remaining <= 0) {
        const std::int64_t now = m_clock();
        const std::int64_t pause = std::max<std::int64_t>(1, m_reset_epoch - now);
        m_waited += pause;
        lock.unlock();
        m_sleeper(std::chrono::seconds(pause));
        lock.lock();
        m_remaining.reset();
    }
    if (m_remaining)
        --*m_remaining;
}

void RateBudget::update(std::optional<std::int64_t> remaining, std::optional<std::int64_t> reset_epoch)
{
    std::lock_guard lock(m_mutex);
    if (remaining)
        m_remaining = remaining;
    if (reset_epoch)
        m_reset_epoch = *reset_epoch;
}

void RateBudget::wait(std::chrono::seconds duration)
{
    {
        std::lock_guard lock(m_mutex);
        m_waited += duration.count();
    }
    m_sleeper(duration);
}

std::int64_t RateBudget::total_waited_seconds() const
{
    std::lock_guard lock(m_mutex);
    return m_waited;
}

std::pair<std::string, std::string> split_base_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("base URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return { url, "" };
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/')
        prefix.pop_back();
    return { url.substr(0, path_start), prefix };
}

std::string encode_path(const std::string& path)
{
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : path) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

std::optional<std::string> next_link(const std::string& link_header)
{
    // <https://api.github.com/...?page=2>; rel="next", <...>; rel="last"
    std::size_t pos = 0;
    while (pos < link_header.size()) {
        const auto open = link_header.find('<', pos);
        if (open == std::string::npos)
            break;
        const auto close = link_header.find('>', open);
        if (close == std::string::npos)
            break;
        const auto end = link_header.find(',', close);
        const std::string params = link_header.substr(close + 1, end == std::string::npos ? std::string::npos : end - close - 1);
        if (params.find("rel=\"next\"") != std::string::npos)
            return link_header.substr(open + 1, close - open - 1);
        if (end == std::string::npos)
            break;
        pos = end + 1;
    }
    return std::nullopt;
}

struct GitHubClient::Response {
    int status = 0;
    std::string body;
    std::string link;
};

namespace {

std::optional<std::int64_t> header_int(const httplib::Result& res, const char* name)
{
    if (!res->has_header(name))
        return std::nullopt;
    try {
        return std::stoll(res->get_header_value(name));
    } catch (...) {
        return std::nullopt;
    }
}

std::string str_or_empty(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return {};
    return it->get<std::string>();
}

std::string login_of(const json& j, const char* key = "user")
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return {};
    return str_or_empty(*it, "login");
}

// Rebuilds a git-style diff from the per-file entry of the commits API.
std::string file_diff(const json& f, bool& truncated)
{
    const std::string name = f.at("filename").get<std::string>();
    const std::string status = str_or_empty(f, "status");
    const std::string previous = str_or_empty(f, "previous_filename");
    const bool has_patch = f.contains("patch") && !f["patch"].is_null();
    const std::int64_t changes = f.value("changes", std::int64_t { 0 });
    if (!has_patch && changes > 0)
        truncated = true;

    std::string old_name = status == "renamed" && !previous.empty() ? previous : name;
    std::string out = "diff --git a/" + old_name + " b/" + name + "\n";
    if (status == "added")
        out += "new file mode 100644\n";
    else if (status == "removed")
        out += "deleted file mode 100644\n";
    else if (status == "renamed")
        out += "rename from " + old_name + "\nrename to " + name + "\n";

    const std::string minus = status == "added" ? "/dev/null" : "a/" + old_name;
    const std::string plus = status == "removed" ? "/dev/null" : "b/" + name;
    if (!has_patch) {
        if (changes == 0 && status != "renamed" && status != "added" && status != "removed")
            out += "Binary files " + minus + " and " + plus + " differ\n";
        return out;
    }
    std::string patch = f["patch"].get<std::string>();
    if (patch.empty())
        return out;
    if (patch.back() != '\n')
        patch += '\n';
    out += "--- " + minus + "\n+++ " + plus + "\n" + patch;
    return out;
}

} // namespace

GitHubClient::GitHubClient(GitHubOptions options)
    : m_options(std::move(options))
{
    if (!m_options.token) {
        if (const char* env = std::getenv("PRFORGE_GH_TOKEN"); env && *env)
            m_options.token = env;
    }
    if (!m_options.budget)
        m_options.budget = std::make_shared<RateBudget>();
    std::tie(m_origin, m_path_prefix) = split_base_url(m_options.base_url);
}

GitHubClient::~GitHubClient() = default;

GitHubClient::Response GitHubClient::request(
    const std::string& method, const std::string& target, const std::string& body, const std::string& accept)
{
    // Absolute next-page links come back from the Link header.
    std::string path = target;
    if (path.rfind(m_origin, 0) == 0)
        path = path.substr(m_origin.size());
    else if (path.rfind("http", 0) != 0)
        path = m_path_prefix + path;

    httplib::Client client(m_origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers { { "Accept", accept }, { "User-Agent", "prforge" },
        { "X-GitHub-Api-Version", "2022-11-28" } };
    if (m_options.token)
        headers.emplace("Authorization", "Bearer " + *m_options.token);

    for (int attempt = 0;; ++attempt) {
        m_options.budget->acquire();
        ++m_requests;
        auto res = method == "POST" ? client.Post(path, headers, body, "application/json") : client.Get(path, headers);
        if (!res)
            throw IngestError("transport", method + " " + path + ": " + httplib::to_string(res.error()));

        const auto remaining = header_int(res, "x-ratelimit-remaining");
        m_options.budget->update(remaining, header_int(res, "x-ratelimit-reset"));

        const bool throttled = res->status == 429
            || (res->status == 403 && (res->has_header("retry-after") || (remaining && *remaining == 0)));
        if (throttled) {
            if (attempt >= m_options.max_retries)
                throw IngestError("rate_limited", method + " " + path + ": retries exhausted");
            std::int64_t pause = header_int(res, "retry-after").value_or(0);
            if (pause <= 0)
                pause = std::int64_t { 1 } << std::min(attempt, 6);
            m_options.budget->wait(std::chrono::seconds(pause));
            continue;
        }
        if (res->status == 404)
            throw IngestError("not_found", method + " " + path + ": not found");
        if (res->status >= 400)
            throw IngestError("http_" + std::to_string(res->status), method + " " + path + ": " + res->body);
        return Response { res->status, res->body, res->get_header_value("link") };
    }
}

json GitHubClient::get_json(const std::string& target)
{
    return json::parse(request("GET", target).body);
}

json GitHubClient::get_all_pages(const std::string& target)
{
    json all = json::array();
    std::optional<std::string> next = target;
    while (next) {
        Response r = request("GET", *next);
        for (auto& item : json::parse(r.body))
            all.push_back(std::move(item));
        next = next_link(r.link);
    }
    return all;
}

RepositoryMeta GitHubClient::fetch_repository(const std::string& full_name)
{
    const json j = get_json("/repos/" + full_name);
    RepositoryMeta r;
    r.full_name = j.value("full_name", full_name);
    r.description = str_or_empty(j, "description");
    r.primary_language = str_or_empty(j, "language");
    r.stars = j.value("stargazers_count", std::int64_t { 0 });
    r.archived = j.value("archived", false);
    return r;
}

std::optional<IssueRecord> GitHubClient::linked_issue(const RepositoryMeta& repo, std::int64_t number)
{
    if (!m_options.token)
        return std::nullopt; // GraphQL requires authentication
    const auto slash = repo.full_name.find('/');
    const json query {
        { "query",
            "query($owner:String!,$name:String!,$number:Int!){repository(owner:$owner,name:$name){"
            "pullRequest(number:$number){closingIssuesReferences(first:1){nodes{title body}}}}}" },
        { "variables",
            { { "owner", repo.full_name.substr(0, slash) }, { "name", repo.full_name.substr(slash + 1) },
                { "number", number } } },
    };
    const json res = json::parse(request("POST", "/graphql", query.dump()).body);
    const json* nodes = &res;
    for (const char* key : { "data", "repository", "pullRequest", "closingIssuesReferences", "nodes" }) {
        if (!nodes->is_object() || !nodes->contains(key) || (*nodes)[key].is_null())
            return std::nullopt;
        nodes = &(*nodes)[key];
    }
    if (!nodes->is_array() || nodes->empty())
        return std::nullopt;
    return IssueRecord { str_or_empty((*nodes)[0], "title"), str_or_empty((*nodes)[0], "body") };
}

PullRequestRecord GitHubClient::hydrate(const RepositoryMeta& repo, const json& j)
{
    PullRequestRecord pr;
    pr.repo = repo;
    pr.number = j.at("number").get<std::int64_t>();
    pr.title = str_or_empty(j, "title");
    pr.body = diff::normalize_newlines(str_or_empty(j, "body"));
    pr.author = login_of(j);
    const bool bot_type = j.contains("user") && j["user"].is_object() && str_or_empty(j["user"], "type") == "Bot";
    pr.author_is_bot = bot_type || (pr.author.size() >= 5 && pr.author.compare(pr.author.size() - 5, 5, "[bot]") == 0);
    pr.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    pr.merged = j.contains("merged_at") && !j["merged_at"].is_null();
    if (j.contains("base") && j["base"].is_object())
        pr.base_commit_meta = str_or_empty(j["base"], "sha");
    pr.linked_issue = linked_issue(repo, pr.number);

    const std::string base = "/repos/" + repo.full_name;
    const std::string num = std::to_string(pr.number);
    const std::string page = "per_page=" + std::to_string(m_options.per_page);

    for (const auto& c : get_all_pages(base + "/pulls/" + num + "/commits?" + page)) {
        CommitRecord rec;
        rec.sha = c.at("sha").get<std::string>();
        const json& meta = c.at("commit");
        rec.message = diff::normalize_newlines(str_or_empty(meta, "message"));
        if (meta.contains("author") && meta["author"].is_object()) {
            rec.author = str_or_empty(meta["author"], "name");
            rec.timestamp = parse_timestamp(str_or_empty(meta["author"], "date"));
        }
        for (const auto& p : c.value("parents", json::array()))
            rec.parent_shas.push_back(p.at("sha").get<std::string>());
        const json detail = get_json(base + "/commits/" + rec.sha);
        for (const auto& f : detail.value("files", json::array()))
            rec.diffs.push_back(file_diff(f, pr.truncated));
        pr.commits.push_back(std::move(rec));
    }

    for (const auto& c : get_all_pages(base + "/issues/" + num + "/comments?" + page)) {
        pr.events.push_back({ EventKind::comment, login_of(c), diff::normalize_newlines(str_or_empty(c, "body")),
            parse_timestamp(c.at("created_at").get<std::string>()), std::nullopt, std::nullopt });
    }
    for (const auto& r : get_all_pages(base + "/pulls/" + num + "/reviews?" + page)) {
        const std::string state = str_or_empty(r, "state");
        if (state == "PENDING" || !r.contains("submitted_at") || r["submitted_at"].is_null())
            continue;
        const ReviewState rs = state == "APPROVED" ? ReviewState::approved
            : state == "CHANGES_REQUESTED"         ? ReviewState::changes_requested
                                                   : ReviewState::commented;
        pr.events.push_back({ EventKind::review, login_of(r), diff::normalize_newlines(str_or_empty(r, "body")),
            parse_timestamp(r["submitted_at"].get<std::string>()), rs, std::nullopt });
    }
    for (const auto& c : get_all_pages(base + "/pulls/" + num + "/comments?" + page)) {
        const auto root = c.contains("in_reply_to_id") && !c["in_reply_to_id"].is_null() ? c["in_reply_to_id"] : c.at("id");
        pr.events.push_back({ EventKind::review_comment, login_of(c), diff::normalize_newlines(str_or_empty(c, "body")),
            parse_timestamp(c.at("created_at").get<std::string>()), std::nullopt, root.dump() });
    }
    if (j.contains("closed_at") && !j["closed_at"].is_null()) {
        std::string closer;
        if (pr.merged) {
            const json full = get_json(base + "/pulls/" + num);
            closer = login_of(full, "merged_by");
        }
        pr.events.push_back({ EventKind::status_change, closer, "closed", parse_timestamp(j["closed_at"].get<std::string>()),
            std::nullopt, std::nullopt });
    }
    normalize_events(pr.events);
    return pr;
}

PullRequestSource::Page GitHubClient::fetch_pull_requests(const RepositoryMeta& repo, const std::string& cursor)
{
    const std::string target = cursor.empty()
        ? "/repos/" + repo.full_name + "/pulls?state=closed&per_page=" + std::to_string(m_options.per_page)
        : cursor;
    Response r = request("GET", target);
    Page page;
    for (const auto& item : json::parse(r.body))
        page.records.push_back(hydrate(repo, item));
    page.next_cursor = next_link(r.link);
    return page;
}

std::string GitHubClient::fetch_file_at_commit(const RepositoryMeta& repo, const std::string& path, const std::string& commit)
{
    try {
        return request("GET", "/repos/" + repo.full_name + "/contents/" + encode_path(path) + "?ref=" + commit, {},
            "application/vnd.github.raw")
            .body;
    } catch (const IngestError& e) {
        if (e.code() != "not_found")
            throw;
    }
    // Tell a missing file apart from a missing commit.
    try {
        request("GET", "/repos/" + repo.full_name + "/commits/" + commit);
    } catch (const IngestError& e) {
        if (e.code() == "not_found" || e.code() == "http_422")
            throw IngestError("not_found", repo.full_name + ": commit " + commit + " not found");
        throw;
    }
    throw IngestError("file_absent", repo.full_name + ": " + path + " absent at " + commit);
}

} // namespace prforge::ingest
