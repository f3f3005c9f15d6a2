#include <httplib.h>

#include "prforge/render.hpp"

#include "prforge/error.hpp"
#include "prforge/github.hpp"
#include "prforge/ingest.hpp"

#include <algorithm>
#include <set>

namespace prforge::render {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string clean(std::string_view s)
{
    return trim(diff::normalize_newlines(s));
}

bool is_continuation(unsigned char c)
{
    return (c & 0xC0) == 0x80;
}

// Drops files that ended up empty so "absent" and "empty" compare equal, the
// convention shared by search/replace application.
diff::FileMap without_empty(diff::FileMap files)
{
    std::erase_if(files, [](const auto& kv) { return kv.second.empty(); });
    return files;
}

std::string patch_text(const diff::FileChange& c)
{
    std::string out;
    if (c.kind == diff::ChangeKind::rename)
        out += "rename from " + *c.old_path + "\nrename to " + c.path + "\n";
    if (c.binary)
        out += "Binary files differ\n";
    else
        out += diff::serialize_hunks(c.hunks);
    return out;
}

} // namespace

Reconstruction reconstruct(const PullRequestRecord& pr)
{
    Reconstruction r;
    r.base_commit = ingest::resolve_base_state(pr);
    for (const auto& commit : pr.commits) {
        std::vector<diff::FileChange> changes;
        for (const auto& text : commit.diffs)
            for (auto& c : diff::parse_unified_diff(text))
                changes.push_back(std::move(c));
        r.commits.push_back(std::move(changes));
    }
    r.net = diff::net_diff(r.commits);

    const auto snap = pr.file_snapshots.find(r.base_commit);
    for (const auto& path : ingest::touched_source_paths(pr)) {
        if (snap == pr.file_snapshots.end() || !snap->second.count(path))
            throw RenderError("missing_base_file", pr.id() + ": no base snapshot for " + path);
        if (const auto& content = snap->second.at(path))
            r.base.emplace(path, *content);
    }
    r.head = diff::apply_changes(r.base, r.net);
    return r;
}

diff::FileMap replay_commits(const Reconstruction& r)
{
    diff::FileMap state = r.base;
    for (const auto& changes : r.commits)
        state = diff::apply_changes(state, changes);
    return state;
}

std::vector<std::string> relevant_files(const Reconstruction& r)
{
    std::set<std::string> paths;
    for (const auto& c : r.net) {
        if (c.binary)
            continue;
        if (r.base.count(c.source_path()))
            paths.insert(c.source_path());
    }
    return { paths.begin(), paths.end() };
}

std::vector<std::string> edited_base_files(const Reconstruction& r)
{
    std::set<std::string> paths;
    for (const auto& commit : r.commits)
        for (const auto& c : commit)
            if (!c.binary && r.base.count(c.source_path()))
                paths.insert(c.source_path());
    return { paths.begin(), paths.end() };
}

std::vector<std::vector<diff::SearchReplaceEdit>> python_edits(const Reconstruction& r)
{
    std::vector<std::vector<diff::SearchReplaceEdit>> out;
    diff::FileMap state = r.base;
    for (std::size_t ci = 0; ci < r.commits.size(); ++ci) {
        std::vector<diff::SearchReplaceEdit> edits;
        for (const auto& change : r.commits[ci]) {
            if (change.binary)
                continue;
            const auto it = state.find(change.source_path());
            const std::string_view content = it == state.end() ? std::string_view() : std::string_view(it->second);
            for (auto& e : diff::diff_to_search_replace(content, change, ci))
                edits.push_back(std::move(e));
        }
        state = diff::apply_changes(state, r.commits[ci]);
        out.push_back(std::move(edits));
    }
    return out;
}

std::vector<CommitView> commit_views(const Reconstruction& r, const PullRequestRecord& pr)
{
    std::vector<CommitView> views;
    for (std::size_t i = 0; i < r.commits.size(); ++i) {
        CommitView v;
        v.message = clean(pr.commits[i].message);
        for (const auto& c : r.commits[i]) {
            std::string patch = patch_text(c);
            if (!patch.empty() && patch.back() == '\n')
                patch.pop_back();
            v.diffs.push_back({ c.path, std::move(patch) });
        }
        views.push_back(std::move(v));
    }
    return views;
}

std::string truncate_patch(std::string_view patch, std::size_t max_chars)
{
    std::size_t chars = 0;
    for (std::size_t i = 0; i < patch.size(); ++i) {
        if (is_continuation(static_cast<unsigned char>(patch[i])))
            continue;
        if (chars == max_chars)
            return std::string(patch.substr(0, i));
        ++chars;
    }
    return std::string(patch);
}

std::string build_summary_prompt(const PullRequestRecord& pr, const std::optional<IssueRecord>& issue,
    const std::vector<std::string>& changed_files, const std::vector<CommitView>& commits)
{
    std::string p = "Summarize this pull request in 1-4 clear sentences:\n\n";
    p += "Repository: " + pr.repo.full_name + "\n";
    p += "Description: " + pr.repo.description + "\n\n";
    p += "PR Title: " + pr.title + "\n";
    p += "PR Description:\n" + pr.body + "\n\n";
    if (issue)
        p += "Related Issue: " + issue->title + "\n" + issue->body + "\n\n";
    p += "Changed Files:\n";
    for (const auto& f : changed_files)
        p += "- " + f + "\n";
    p += "\n\nCommits:\n";
    for (const auto& c : commits) {
        p += "\n## Message: " + c.message + "\n\nChanges:\n";
        for (const auto& d : c.diffs)
            p += "\nFile: " + d.path + "\n" + d.patch + "\n";
        p += "\n";
    }
    p += "\n\nPlease provide a clear and concise summary (1-4 sentences) of this Pull Request,\n"
         "focusing on:\n"
         "1. What problem does it solve or what feature does it add?\n"
         "2. What are the key changes made?\n"
         "3. Any important implementation details?\n"
         "\n"
         "Summary:";
    return p;
}

std::string build_commit_refine_prompt(const CommitView& commit, const std::string& pr_summary, std::size_t patch_chars)
{
    std::string p = "Optimize this commit message for clarity and educational value while keeping it\nconcise.\n\n";
    p += "PR Context Summary: " + pr_summary + "\n\n";
    p += "Original commit message:\n" + commit.message + "\n\n";
    p += "Diff Context:\n";
    for (const auto& d : commit.diffs)
        p += "File: " + d.path + "\n" + truncate_patch(d.patch, patch_chars) + "\n\n";
    p += "\nProvide an optimized version that:\n"
         "1. The subject is clear and descriptive\n"
         "2. If the commit is trivial and the changes are minimal, don't add the footer\n"
         "3. Otherwise, keep the footer in one sentence\n"
         "\n"
         "Refined commit message:";
    return p;
}

HttpChatEndpoint::HttpChatEndpoint(std::string url, std::string model, std::optional<std::string> api_key)
    : m_model(std::move(model))
    , m_api_key(std::move(api_key))
{
    std::tie(m_origin, m_path) = ingest::split_base_url(url);
    if (m_path.empty())
        m_path = "/";
}

std::string HttpChatEndpoint::complete(const std::string& prompt, std::size_t max_tokens)
{
    const nlohmann::json body {
        { "model", m_model },
        { "messages", nlohmann::json::array({ { { "role", "user" }, { "content", prompt } } }) },
        { "max_tokens", max_tokens },
        { "temperature", 0 },
    };
    httplib::Client client(m_origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(300);
    httplib::Headers headers;
    if (m_api_key)
        headers.emplace("Authorization", "Bearer " + *m_api_key);
    auto res = client.Post(m_path, headers, body.dump(), "application/json");
    if (!res)
        throw Error("endpoint_failure", "chat endpoint unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error("endpoint_failure", "chat endpoint returned HTTP " + std::to_string(res->status));
    try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("endpoint_failure", std::string("unexpected chat response: ") + e.what());
    }
}

std::string leading_sentences(std::string_view text, std::size_t count)
{
    std::size_t found = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?')
            continue;
        const bool at_end = i + 1 == text.size();
        if (!at_end && !std::isspace(static_cast<unsigned char>(text[i + 1])))
            continue;
        if (++found == count)
            return trim(text.substr(0, i + 1));
    }
    return trim(text);
}

Enhancements fallback_enhancements(const PullRequestRecord& pr, const Tokenizer& tok, const Budgets& budgets)
{
    Enhancements e;
    std::string summary = leading_sentences(clean(pr.body), 4);
    if (summary.empty())
        summary = clean(pr.title);
    e.pr_summary = trim(tok.truncate(summary, budgets.summary_tokens));
    for (const auto& c : pr.commits)
        e.refined_messages.push_back(clean(c.message));
    return e;
}

Enhancements enhance(const PullRequestRecord& pr, const Reconstruction& r, ChatEndpoint* endpoint,
    const Tokenizer& tok, const Budgets& budgets)
{
    if (!endpoint)
        return fallback_enhancements(pr, tok, budgets);

    const auto views = commit_views(r, pr);
    std::vector<std::string> changed;
    for (const auto& c : r.net)
        if (c.path.ends_with(".py"))
            changed.push_back(c.path);

    try {
        Enhancements e;
        e.enhanced = true;
        const auto prompt = build_summary_prompt(pr, pr.linked_issue, changed, views);
        e.pr_summary = trim(tok.truncate(clean(endpoint->complete(prompt, budgets.summary_tokens)), budgets.summary_tokens));
        if (e.pr_summary.empty())
            throw Error("endpoint_failure", "empty summary");
        for (const auto& v : views) {
            const auto refine = build_commit_refine_prompt(v, e.pr_summary, budgets.patch_chars);
            auto msg = trim(tok.truncate(clean(endpoint->complete(refine, budgets.refine_tokens)), budgets.refine_tokens));
            if (msg.empty())
                throw Error("endpoint_failure", "empty refinement");
            e.refined_messages.push_back(std::move(msg));
        }
        return e;
    } catch (const Error& err) {
        if (err.code() != "endpoint_failure")
            throw;
        return fallback_enhancements(pr, tok, budgets);
    }
}

std::string fence_for(std::string_view content)
{
    std::size_t longest = 0;
    std::size_t run = 0;
    for (char c : content) {
        run = c == '`' ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    return std::string(std::max<std::size_t>(3, longest + 1), '`');
}

namespace {

constexpr std::string_view kNoNewline = "\\ No newline at end of file";

std::string fenced(std::string_view content)
{
    const std::string fence = fence_for(content);
    std::string out = fence + "\n";
    out += content;
    if (!content.empty() && content.back() != '\n') {
        out += "\n";
        out += kNoNewline;
        out += "\n";
    }
    return out + fence;
}

std::string join_blocks(const std::vector<std::string>& blocks)
{
    std::string out;
    for (const auto& b : blocks) {
        if (!out.empty())
            out += "\n\n";
        out += b;
    }
    return out + "\n";
}

std::string heading_block(std::string_view title, std::string_view body)
{
    std::string out = "## " + clean(title);
    const std::string b = clean(body);
    if (!b.empty())
        out += "\n" + b;
    return out;
}

} // namespace

RenderedSample render_python(const PullRequestRecord& pr, const Reconstruction& r,
    const std::vector<std::vector<diff::SearchReplaceEdit>>& edits, const Enhancements& enh, const Tokenizer& tok)
{
    std::vector<std::string> blocks;
    blocks.push_back("# Repository Context");
    blocks.push_back("Name: " + pr.repo.full_name + "\nDescription: " + clean(pr.repo.description));
    if (pr.linked_issue) {
        blocks.push_back("# Issue");
        blocks.push_back(heading_block(pr.linked_issue->title, pr.linked_issue->body));
    }
    blocks.push_back("# Pull Request");
    blocks.push_back(heading_block(pr.title, pr.body));
    blocks.push_back("# Relevant Files Found");
    for (const auto& path : edited_base_files(r)) {
        blocks.push_back("## " + path);
        blocks.push_back(fenced(r.base.at(path)));
    }
    blocks.push_back("# Edits");
    if (!enh.pr_summary.empty())
        blocks.push_back(enh.pr_summary);
    for (std::size_t ci = 0; ci < edits.size(); ++ci) {
        if (edits[ci].empty())
            continue;
        const std::string msg = ci < enh.refined_messages.size() ? clean(enh.refined_messages[ci]) : std::string();
        if (!msg.empty())
            blocks.push_back(msg);
        for (const auto& e : edits[ci]) {
            blocks.push_back("Edit: " + e.path);
            blocks.push_back("Search:\n" + fenced(e.search));
            blocks.push_back("Replace:\n" + fenced(e.replace));
        }
    }

    RenderedSample s;
    s.id = pr.id();
    s.format = SampleFormat::python;
    s.subset = SampleSubset::ctx_py;
    s.source_repo = pr.repo.full_name;
    s.enhanced = enh.enhanced;
    s.text = join_blocks(blocks);
    s.token_count = tok.count(s.text);
    return s;
}

namespace {

enum class Group { opening, discussion, commit, status };

struct Item {
    Timestamp ts;
    int rank = 0; // tie order at equal timestamps
    Group group = Group::discussion;
    std::string text;
};

std::string speaker(std::string_view who, std::string_view body)
{
    const std::string b = clean(body);
    return b.empty() ? std::string(who) : std::string(who) + ": " + b;
}

} // namespace

RenderedSample render_general(const PullRequestRecord& pr, const Reconstruction& r, const Tokenizer& tok)
{
    std::string text = "# Repository Context\n\nName: " + pr.repo.full_name + "\nDescription: "
        + clean(pr.repo.description) + "\n\n# Relevant Files Context\n\n";
    for (const auto& path : relevant_files(r)) {
        const auto& content = r.base.at(path);
        text += "## " + path + "\n\n" + content;
        if (!content.empty() && content.back() != '\n')
            text += "\n";
        text += "\n";
    }
    text += "Response:\n\n";

    std::vector<Item> items;
    items.push_back({ pr.created_at, 0, Group::opening, "<pr> Title: " + clean(pr.title) + "\n" + speaker(pr.author, pr.body) });

    // API order is authoritative for commits; clamp timestamps so rebased
    // (non-monotone) author dates cannot reorder them.
    Timestamp commit_ts = pr.created_at;
    for (std::size_t i = 0; i < pr.commits.size(); ++i) {
        commit_ts = std::max(commit_ts, pr.commits[i].timestamp);
        std::string t = "<pr_commit> " + speaker(pr.commits[i].author, pr.commits[i].message);
        for (const auto& c : r.commits[i])
            t += "\n<commit_file> " + c.path + "\n<patch>\n" + patch_text(c) + "</patch>";
        items.push_back({ commit_ts, 1, Group::commit, std::move(t) });
    }

    std::vector<InteractionEvent> events = pr.events;
    normalize_events(events);
    std::vector<std::string> thread_order;
    std::map<std::string, std::pair<Timestamp, std::string>> threads;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        switch (e.kind) {
        case EventKind::comment:
            items.push_back({ e.timestamp, 2, Group::discussion, "<pr_comment> " + speaker(e.author, e.body) });
            break;
        case EventKind::review: {
            std::string t = "<pr_review> " + speaker(e.author, e.body);
            if (e.review_state)
                t += std::string("\n<pr_review_state> ") + to_string(*e.review_state);
            items.push_back({ e.timestamp, 2, Group::discussion, std::move(t) });
            break;
        }
        case EventKind::review_comment: {
            const std::string key = e.thread_id ? *e.thread_id : "#" + std::to_string(i);
            auto [it, fresh] = threads.try_emplace(key, e.timestamp, std::string());
            if (fresh)
                thread_order.push_back(key);
            else
                it->second.second += "\n";
            it->second.second += "<pr_review_comment> " + speaker(e.author, e.body);
            break;
        }
        case EventKind::status_change:
            items.push_back({ e.timestamp, 3, Group::status, "<pr> " + e.author + "\n<pr_status> " + clean(e.body) });
            break;
        }
    }
    for (const auto& key : thread_order)
        items.push_back({ threads[key].first, 2, Group::discussion, threads[key].second });

    std::stable_sort(items.begin() + 1, items.end(), [](const Item& a, const Item& b) {
        if (a.ts != b.ts)
            return a.ts < b.ts;
        return a.rank < b.rank;
    });

    std::vector<std::string> paragraphs;
    Group last = Group::opening;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0 && items[i].group == Group::discussion && last == Group::discussion)
            paragraphs.back() += "\n" + items[i].text;
        else
            paragraphs.push_back(items[i].text);
        last = items[i].group;
    }
    const std::string merged = std::string("<pr_is_merged> ") + (pr.merged ? "True" : "False");
    if (last == Group::status)
        paragraphs.back() += "\n" + merged;
    else
        paragraphs.push_back((pr.merged ? "<pr_status> closed\n" : "") + merged);

    for (std::size_t i = 0; i < paragraphs.size(); ++i)
        text += (i ? "\n\n" : "") + paragraphs[i];
    text += "\n";

    RenderedSample s;
    s.id = pr.id();
    s.format = SampleFormat::general;
    s.subset = SampleSubset::ctx_gen;
    s.source_repo = pr.repo.full_name;
    s.text = std::move(text);
    s.token_count = tok.count(s.text);
    return s;
}

namespace {

class LineCursor {
public:
    explicit LineCursor(std::string_view text)
        : m_text(text)
    {
    }

    bool done() const { return m_pos >= m_text.size(); }

    // Current line without its terminator.
    std::string_view peek() const
    {
        const auto nl = m_text.find('\n', m_pos);
        return m_text.substr(m_pos, nl == std::string_view::npos ? std::string_view::npos : nl - m_pos);
    }

    // Current line including its terminator.
    std::string_view take()
    {
        const auto nl = m_text.find('\n', m_pos);
        const auto end = nl == std::string_view::npos ? m_text.size() : nl + 1;
        const auto line = m_text.substr(m_pos, end - m_pos);
        m_pos = end;
        return line;
    }

    void skip_blank()
    {
        while (!done() && peek().empty())
            take();
    }

private:
    std::string_view m_text;
    std::size_t m_pos = 0;
};

bool is_fence(std::string_view line)
{
    return line.size() >= 3 && line.find_first_not_of('`') == std::string_view::npos;
}

[[noreturn]] void unparseable(const std::string& why)
{
    throw RenderError("unparseable_sample", why);
}

std::string read_fenced(LineCursor& cur)
{
    if (cur.done() || !is_fence(cur.peek()))
        unparseable("expected a code fence");
    const std::string fence(cur.peek());
    cur.take();
    std::vector<std::string_view> lines;
    while (true) {
        if (cur.done())
            unparseable("unterminated code fence");
        if (cur.peek() == fence)
            break;
        lines.push_back(cur.take());
    }
    cur.take();
    std::string content;
    for (auto l : lines)
        content += l;
    const std::string marker = std::string(kNoNewline) + "\n";
    if (!lines.empty() && lines.back() == marker) {
        content.resize(content.size() - marker.size());
        if (content.empty() || content.back() != '\n')
            unparseable("stray no-newline marker");
        content.pop_back();
    }
    return content;
}

} // namespace

ParsedPythonSample parse_python_sample(std::string_view text)
{
    ParsedPythonSample out;
    LineCursor cur(text);
    // Prose before the file list is skipped without interpretation.
    while (!cur.done() && cur.peek() != "# Relevant Files Found")
        cur.take();
    if (cur.done())
        unparseable("no Relevant Files section");
    cur.take();
    while (true) {
        cur.skip_blank();
        if (cur.done())
            unparseable("no Edits section");
        const auto line = cur.peek();
        if (line == "# Edits") {
            cur.take();
            break;
        }
        if (!line.starts_with("## "))
            unparseable("expected a file heading");
        const std::string path(line.substr(3));
        cur.take();
        cur.skip_blank();
        out.relevant_files[path] = read_fenced(cur);
    }
    // Edits: prose (summary, commit messages) interleaved with edit blocks.
    while (!cur.done()) {
        const auto line = cur.peek();
        if (!line.starts_with("Edit: ")) {
            cur.take();
            continue;
        }
        diff::SearchReplaceEdit e;
        e.path = std::string(line.substr(6));
        cur.take();
        cur.skip_blank();
        if (cur.done() || cur.peek() != "Search:")
            continue; // prose that merely starts with "Edit: "
        cur.take();
        e.search = read_fenced(cur);
        cur.skip_blank();
        if (cur.done() || cur.peek() != "Replace:")
            unparseable("Search block without Replace block");
        cur.take();
        e.replace = read_fenced(cur);
        out.edits.push_back(std::move(e));
    }
    return out;
}

void verify_python_sample(const RenderedSample& sample, const Reconstruction& r)
{
    const auto parsed = parse_python_sample(sample.text);
    for (const auto& [path, content] : parsed.relevant_files) {
        const auto it = r.base.find(path);
        if (it == r.base.end() || it->second != content)
            throw RenderError("search_replace_mismatch", sample.id + ": relevant file " + path + " differs from base");
    }
    diff::FileMap result;
    try {
        result = diff::apply_search_replace(parsed.relevant_files, parsed.edits);
    } catch (const Error& e) {
        throw RenderError("search_replace_mismatch", sample.id + ": " + e.what());
    }
    if (without_empty(result) != without_empty(r.head))
        throw RenderError("search_replace_mismatch", sample.id + ": substituted files differ from head");
}

} // namespace prforge::render
