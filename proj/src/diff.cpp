#include "prforge/diff.hpp"

#include "hunk_builder.hpp"
#include "prforge/error.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

namespace prforge::diff {

namespace {

constexpr std::string_view kNoNewline = "\\ No newline at end of file";

bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.substr(0, prefix.size()) == prefix;
}

std::string_view strip_eol(std::string_view line)
{
    if (!line.empty() && line.back() == '\n')
        line.remove_suffix(1);
    return line;
}

[[noreturn]] void malformed(std::size_t offset, const std::string& what)
{
    throw DiffError("malformed_diff", "malformed diff at byte " + std::to_string(offset) + ": " + what);
}

// "a/foo/bar.py" -> "foo/bar.py"; "/dev/null" stays; trailing "\t<date>" dropped.
std::string clean_header_path(std::string_view raw)
{
    if (auto tab = raw.find('\t'); tab != std::string_view::npos)
        raw = raw.substr(0, tab);
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        raw = raw.substr(1, raw.size() - 2);
    if (raw == "/dev/null")
        return std::string(raw);
    if (starts_with(raw, "a/") || starts_with(raw, "b/"))
        raw.remove_prefix(2);
    return std::string(raw);
}

bool parse_number(std::string_view& s, std::size_t& out)
{
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr == begin)
        return false;
    s.remove_prefix(static_cast<std::size_t>(ptr - begin));
    return true;
}

bool parse_range(std::string_view& s, std::size_t& start, std::size_t& len)
{
    if (!parse_number(s, start))
        return false;
    len = 1;
    if (!s.empty() && s.front() == ',') {
        s.remove_prefix(1);
        if (!parse_number(s, len))
            return false;
    }
    return true;
}

bool parse_hunk_header(std::string_view line, Hunk& hunk)
{
    if (!starts_with(line, "@@ -"))
        return false;
    line.remove_prefix(4);
    if (!parse_range(line, hunk.old_start, hunk.old_len))
        return false;
    if (!starts_with(line, " +"))
        return false;
    line.remove_prefix(2);
    if (!parse_range(line, hunk.new_start, hunk.new_len))
        return false;
    if (!starts_with(line, " @@"))
        return false;
    line.remove_prefix(3);
    if (!line.empty() && line.front() == ' ')
        line.remove_prefix(1);
    hunk.section = std::string(line);
    return true;
}

struct PendingFile {
    FileChange change;
    std::string git_old;
    std::string git_new;
    std::string minus_path;
    std::string plus_path;
    std::optional<std::string> rename_from;
    std::optional<std::string> rename_to;
    bool new_file = false;
    bool deleted_file = false;
    bool saw_git_header = false;
};

void finish(PendingFile& pf, std::vector<FileChange>& out)
{
    FileChange& c = pf.change;
    const bool minus_null = pf.minus_path == "/dev/null";
    const bool plus_null = pf.plus_path == "/dev/null";

    if (pf.rename_from && pf.rename_to) {
        c.kind = ChangeKind::rename;
        c.old_path = *pf.rename_from;
        c.path = *pf.rename_to;
    } else if (pf.new_file || minus_null) {
        c.kind = ChangeKind::create;
        c.path = !pf.plus_path.empty() && !plus_null ? pf.plus_path : pf.git_new;
    } else if (pf.deleted_file || plus_null) {
        c.kind = ChangeKind::remove;
        c.path = !pf.minus_path.empty() && !minus_null ? pf.minus_path : pf.git_old;
    } else {
        c.kind = ChangeKind::modify;
        c.path = !pf.plus_path.empty() ? pf.plus_path : pf.git_new;
    }

    // Mode-only changes carry no content and are dropped.
    if (c.kind == ChangeKind::modify && c.hunks.empty() && !c.binary)
        return;
    out.push_back(std::move(c));
}

void split_git_header(std::string_view rest, PendingFile& pf)
{
    // "a/<old> b/<new>"; paths with spaces are disambiguated by ---/+++ or
    // rename lines when present.
    auto mid = rest.find(" b/");
    if (mid == std::string_view::npos) {
        pf.git_old = pf.git_new = clean_header_path(rest);
        return;
    }
    pf.git_old = clean_header_path(rest.substr(0, mid));
    pf.git_new = clean_header_path(rest.substr(mid + 1));
}

} // namespace

const char* to_string(ChangeKind kind)
{
    switch (kind) {
    case ChangeKind::modify:
        return "modify";
    case ChangeKind::create:
        return "create";
    case ChangeKind::remove:
        return "delete";
    case ChangeKind::rename:
        return "rename";
    }
    return "modify";
}

std::vector<std::string> split_lines(std::string_view content)
{
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(content.substr(pos));
            break;
        }
        lines.emplace_back(content.substr(pos, nl - pos + 1));
        pos = nl + 1;
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    std::size_t total = 0;
    for (const auto& l : lines)
        total += l.size();
    out.reserve(total);
    for (const auto& l : lines)
        out += l;
    return out;
}

std::string normalize_newlines(std::string_view content)
{
    if (content.find('\r') == std::string_view::npos)
        return std::string(content);
    std::string out;
    out.reserve(content.size());
    for (std::size_t i = 0; i < content.size(); ++i) {
        if (content[i] == '\r') {
            out += '\n';
            if (i + 1 < content.size() && content[i + 1] == '\n')
                ++i;
        } else {
            out += content[i];
        }
    }
    return out;
}

std::vector<FileChange> parse_unified_diff(std::string_view raw)
{
    const std::string text = normalize_newlines(raw);
    std::vector<FileChange> out;
    std::optional<PendingFile> pending;

    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line, std::size_t& offset) {
        if (pos >= text.size())
            return false;
        offset = pos;
        auto nl = text.find('\n', pos);
        const std::size_t end = nl == std::string::npos ? text.size() : nl + 1;
        line = std::string_view(text).substr(pos, end - pos);
        pos = end;
        return true;
    };
    auto peek_line = [&]() -> std::string_view {
        if (pos >= text.size())
            return {};
        auto nl = text.find('\n', pos);
        const std::size_t end = nl == std::string::npos ? text.size() : nl + 1;
        return std::string_view(text).substr(pos, end - pos);
    };

    std::string_view raw_line;
    std::size_t offset = 0;
    while (next_line(raw_line, offset)) {
        const std::string_view line = strip_eol(raw_line);

        if (starts_with(line, "diff --git ")) {
            if (pending)
                finish(*pending, out);
            pending.emplace();
            pending->saw_git_header = true;
            split_git_header(line.substr(11), *pending);
            continue;
        }

        if (starts_with(line, "--- ") && starts_with(peek_line(), "+++ ")) {
            if (pending && (!pending->saw_git_header || !pending->minus_path.empty() || !pending->change.hunks.empty())) {
                finish(*pending, out);
                pending.reset();
            }
            if (!pending)
                pending.emplace();
            pending->minus_path = clean_header_path(line.substr(4));
            std::string_view plus;
            next_line(plus, offset);
            pending->plus_path = clean_header_path(strip_eol(plus).substr(4));
            continue;
        }

        if (!pending)
            continue; // preamble (commit message, mail headers, ...)

        if (starts_with(line, "@@ ")) {
            Hunk hunk;
            if (!parse_hunk_header(line, hunk))
                malformed(offset, "bad hunk header '" + std::string(line) + "'");
            std::size_t old_seen = 0;
            std::size_t new_seen = 0;
            while (old_seen < hunk.old_len || new_seen < hunk.new_len) {
                std::string_view body;
                if (!next_line(body, offset))
                    malformed(offset, "hunk ends early");
                const std::string_view content = strip_eol(body);
                HunkLine hl;
                if (content.empty()) {
                    hl.tag = LineTag::context;
                    hl.text = "\n";
                } else if (content.front() == '\\') {
                    if (hunk.lines.empty())
                        malformed(offset, "no-newline marker without a line");
                    auto& prev = hunk.lines.back().text;
                    if (!prev.empty() && prev.back() == '\n')
                        prev.pop_back();
                    continue;
                } else {
                    switch (content.front()) {
                    case ' ':
                        hl.tag = LineTag::context;
                        break;
                    case '-':
                        hl.tag = LineTag::remove;
                        break;
                    case '+':
                        hl.tag = LineTag::add;
                        break;
                    default:
                        malformed(offset, "unexpected line in hunk body");
                    }
                    hl.text = std::string(body.substr(1));
                    if (hl.text.empty() || hl.text.back() != '\n')
                        hl.text += '\n';
                }
                if (hl.tag != LineTag::add)
                    ++old_seen;
                if (hl.tag != LineTag::remove)
                    ++new_seen;
                if (old_seen > hunk.old_len || new_seen > hunk.new_len)
                    malformed(offset, "hunk body exceeds its header counts");
                hunk.lines.push_back(std::move(hl));
            }
            if (starts_with(peek_line(), "\\")) {
                std::string_view marker;
                next_line(marker, offset);
                auto& prev = hunk.lines.back().text;
                if (!prev.empty() && prev.back() == '\n')
                    prev.pop_back();
            }
            pending->change.hunks.push_back(std::move(hunk));
            continue;
        }

        if (!pending->change.hunks.empty()) {
            // Trailing noise after a file's hunks (e.g. a mail signature).
            if (line.empty() || starts_with(line, "-- "))
                continue;
            malformed(offset, "unexpected text after hunks: '" + std::string(line) + "'");
        }

        if (starts_with(line, "new file mode"))
            pending->new_file = true;
        else if (starts_with(line, "deleted file mode"))
            pending->deleted_file = true;
        else if (starts_with(line, "rename from "))
            pending->rename_from = std::string(line.substr(12));
        else if (starts_with(line, "rename to "))
            pending->rename_to = std::string(line.substr(10));
        else if (starts_with(line, "Binary files ") || starts_with(line, "GIT binary patch"))
            pending->change.binary = true;
        // index, mode, similarity and other extended headers carry no content
    }
    if (pending)
        finish(*pending, out);
    return out;
}

std::string serialize_hunks(const std::vector<Hunk>& hunks)
{
    std::string out;
    auto range = [](std::size_t start, std::size_t len) {
        std::string r = std::to_string(start);
        if (len != 1)
            r += "," + std::to_string(len);
        return r;
    };
    for (const auto& h : hunks) {
        out += "@@ -" + range(h.old_start, h.old_len) + " +" + range(h.new_start, h.new_len) + " @@";
        if (!h.section.empty())
            out += " " + h.section;
        out += '\n';
        for (const auto& l : h.lines) {
            out += l.tag == LineTag::context ? ' ' : l.tag == LineTag::remove ? '-' : '+';
            out += l.text;
            if (l.text.empty() || l.text.back() != '\n') {
                out += '\n';
                out += kNoNewline;
                out += '\n';
            }
        }
    }
    return out;
}

std::string serialize(const FileChange& c)
{
    const std::string& src = c.source_path();
    std::string out = "diff --git a/" + src + " b/" + c.path + "\n";
    if (c.kind == ChangeKind::create)
        out += "new file mode 100644\n";
    else if (c.kind == ChangeKind::remove)
        out += "deleted file mode 100644\n";
    else if (c.kind == ChangeKind::rename)
        out += "rename from " + src + "\nrename to " + c.path + "\n";

    const std::string minus = c.kind == ChangeKind::create ? "/dev/null" : "a/" + src;
    const std::string plus = c.kind == ChangeKind::remove ? "/dev/null" : "b/" + c.path;
    if (c.binary) {
        out += "Binary files " + minus + " and " + plus + " differ\n";
        return out;
    }
    if (c.hunks.empty())
        return out;
    out += "--- " + minus + "\n+++ " + plus + "\n";
    out += serialize_hunks(c.hunks);
    return out;
}

std::string serialize(const std::vector<FileChange>& changes)
{
    std::string out;
    for (const auto& c : changes)
        out += serialize(c);
    return out;
}

std::string apply_patch(std::string_view content, const FileChange& change)
{
    if (change.binary)
        throw DiffError("binary_unsupported", "cannot apply a binary change to " + change.path);
    const std::vector<std::string> lines = split_lines(content);
    if (change.kind == ChangeKind::create && !lines.empty())
        throw DiffError("context_mismatch", "create of " + change.path + " over existing content");

    std::vector<std::string> out;
    out.reserve(lines.size());
    std::size_t cursor = 0;
    for (std::size_t hi = 0; hi < change.hunks.size(); ++hi) {
        const Hunk& h = change.hunks[hi];
        auto mismatch = [&]() {
            throw DiffError("context_mismatch",
                "hunk " + std::to_string(hi) + " does not match " + change.path + " at line " + std::to_string(h.old_start));
        };
        const std::size_t start = h.old_len == 0 ? h.old_start : h.old_start - 1;
        if (h.old_len > 0 && h.old_start == 0)
            mismatch();
        if (start < cursor || start > lines.size())
            mismatch();
        for (; cursor < start; ++cursor)
            out.push_back(lines[cursor]);
        for (const auto& l : h.lines) {
            if (l.tag == LineTag::add) {
                out.push_back(l.text);
                continue;
            }
            if (cursor >= lines.size() || lines[cursor] != l.text)
                mismatch();
            if (l.tag == LineTag::context)
                out.push_back(l.text);
            ++cursor;
        }
    }
    if (change.kind == ChangeKind::remove && cursor != lines.size())
        throw DiffError("context_mismatch", "delete of " + change.path + " leaves content behind");
    for (; cursor < lines.size(); ++cursor)
        out.push_back(lines[cursor]);
    return join_lines(out);
}

FileChange reverse_patch(const FileChange& change)
{
    FileChange r = change;
    switch (change.kind) {
    case ChangeKind::create:
        r.kind = ChangeKind::remove;
        break;
    case ChangeKind::remove:
        r.kind = ChangeKind::create;
        break;
    case ChangeKind::rename:
        r.path = *change.old_path;
        r.old_path = change.path;
        break;
    case ChangeKind::modify:
        break;
    }
    for (auto& h : r.hunks) {
        std::swap(h.old_start, h.new_start);
        std::swap(h.old_len, h.new_len);
        for (auto& l : h.lines) {
            if (l.tag == LineTag::add)
                l.tag = LineTag::remove;
            else if (l.tag == LineTag::remove)
                l.tag = LineTag::add;
        }
    }
    return r;
}

namespace detail {

std::vector<Hunk> build_hunks(const std::vector<EditOp>& ops, std::size_t context)
{
    // Running coordinates (number of old/new lines before each op).
    std::vector<std::size_t> old_pos(ops.size() + 1, 0);
    std::vector<std::size_t> new_pos(ops.size() + 1, 0);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        old_pos[i + 1] = old_pos[i] + (ops[i].tag != LineTag::add ? ops[i].count : 0);
        new_pos[i + 1] = new_pos[i] + (ops[i].tag != LineTag::remove ? ops[i].count : 0);
    }

    auto is_change = [&](std::size_t i) { return ops[i].tag != LineTag::context; };
    auto usable_context = [&](std::size_t i) { return ops[i].tag == LineTag::context && ops[i].known; };

    std::vector<Hunk> hunks;
    std::size_t i = 0;
    while (i < ops.size()) {
        if (!is_change(i)) {
            ++i;
            continue;
        }
        // Leading context.
        std::size_t begin = i;
        for (std::size_t n = 0; n < context && begin > 0 && usable_context(begin - 1); ++n)
            --begin;
        // Extend across changes separated by at most 2*context known lines.
        std::size_t end = i + 1; // exclusive, last change + 1
        while (true) {
            while (end < ops.size() && is_change(end))
                ++end;
            std::size_t gap = 0;
            std::size_t j = end;
            while (j < ops.size() && usable_context(j) && gap <= 2 * context) {
                ++gap;
                ++j;
            }
            if (j < ops.size() && is_change(j) && gap <= 2 * context) {
                end = j + 1;
                continue;
            }
            break;
        }
        std::size_t stop = end;
        for (std::size_t n = 0; n < context && stop < ops.size() && usable_context(stop); ++n)
            ++stop;

        Hunk h;
        for (std::size_t k = begin; k < stop; ++k) {
            h.lines.push_back(HunkLine { ops[k].tag, ops[k].text });
            if (ops[k].tag != LineTag::add)
                ++h.old_len;
            if (ops[k].tag != LineTag::remove)
                ++h.new_len;
        }
        h.old_start = h.old_len > 0 ? old_pos[begin] + 1 : old_pos[begin];
        h.new_start = h.new_len > 0 ? new_pos[begin] + 1 : new_pos[begin];
        hunks.push_back(std::move(h));
        i = stop;
    }
    return hunks;
}

std::vector<EditOp> diff_sequences(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    std::vector<EditOp> ops;
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
        ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix
        && a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
        ++suffix;

    for (std::size_t k = 0; k < prefix; ++k)
        ops.push_back(EditOp { LineTag::context, a[k] });

    // Intern the middle section so the Myers loop compares integers.
    const auto n = static_cast<std::ptrdiff_t>(a.size() - prefix - suffix);
    const auto m = static_cast<std::ptrdiff_t>(b.size() - prefix - suffix);
    std::unordered_map<std::string_view, int> ids;
    std::vector<int> x(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(m));
    for (std::ptrdiff_t k = 0; k < n; ++k)
        x[k] = ids.emplace(a[prefix + k], static_cast<int>(ids.size())).first->second;
    for (std::ptrdiff_t k = 0; k < m; ++k)
        y[k] = ids.emplace(b[prefix + k], static_cast<int>(ids.size())).first->second;

    std::vector<EditOp> middle;
    constexpr std::ptrdiff_t kMaxD = 4000;
    const std::ptrdiff_t max_d = std::min(n + m, kMaxD);
    const std::ptrdiff_t offset = max_d + 1;
    std::vector<std::ptrdiff_t> v(static_cast<std::size_t>(2 * offset + 1), 0);
    std::vector<std::vector<std::ptrdiff_t>> trace;
    bool found = n + m == 0;
    for (std::ptrdiff_t d = 0; d <= max_d && !found; ++d) {
        trace.push_back(v);
        for (std::ptrdiff_t k = -d; k <= d; k += 2) {
            std::ptrdiff_t px;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1]))
                px = v[offset + k + 1];
            else
                px = v[offset + k - 1] + 1;
            std::ptrdiff_t py = px - k;
            while (px < n && py < m && x[px] == y[py]) {
                ++px;
                ++py;
            }
            v[offset + k] = px;
            if (px >= n && py >= m) {
                found = true;
                break;
            }
        }
    }

    if (!found) {
        // Pathologically different inputs: fall back to replace-all.
        for (std::ptrdiff_t k = 0; k < n; ++k)
            middle.push_back(EditOp { LineTag::remove, a[prefix + k] });
        for (std::ptrdiff_t k = 0; k < m; ++k)
            middle.push_back(EditOp { LineTag::add, b[prefix + k] });
    } else if (n + m > 0) {
        // Backtrack. trace[d] holds V before step d was computed.
        std::ptrdiff_t px = n;
        std::ptrdiff_t py = m;
        for (std::ptrdiff_t d = static_cast<std::ptrdiff_t>(trace.size()) - 1; d >= 0; --d) {
            const auto& vd = trace[d];
            const std::ptrdiff_t k = px - py;
            std::ptrdiff_t prev_k;
            if (k == -d || (k != d && vd[offset + k - 1] < vd[offset + k + 1]))
                prev_k = k + 1;
            else
                prev_k = k - 1;
            const std::ptrdiff_t prev_x = d == 0 ? 0 : vd[offset + prev_k];
            const std::ptrdiff_t prev_y = prev_x - prev_k;
            while (px > prev_x && py > prev_y) {
                --px;
                --py;
                middle.push_back(EditOp { LineTag::context, a[prefix + px] });
            }
            if (d > 0) {
                if (px == prev_x)
                    middle.push_back(EditOp { LineTag::add, b[prefix + prev_y] });
                else
                    middle.push_back(EditOp { LineTag::remove, a[prefix + prev_x] });
            }
            px = prev_x;
            py = prev_y;
        }
        std::reverse(middle.begin(), middle.end());
    }

    // Within each change block, emit removals before additions.
    for (std::size_t k = 0; k < middle.size();) {
        if (middle[k].tag == LineTag::context) {
            ops.push_back(std::move(middle[k++]));
            continue;
        }
        std::size_t end = k;
        while (end < middle.size() && middle[end].tag != LineTag::context)
            ++end;
        for (std::size_t j = k; j < end; ++j)
            if (middle[j].tag == LineTag::remove)
                ops.push_back(std::move(middle[j]));
        for (std::size_t j = k; j < end; ++j)
            if (middle[j].tag == LineTag::add)
                ops.push_back(std::move(middle[j]));
        k = end;
    }

    for (std::size_t k = a.size() - suffix; k < a.size(); ++k)
        ops.push_back(EditOp { LineTag::context, a[k] });
    return ops;
}

} // namespace detail

std::vector<Hunk> diff_lines(std::string_view before, std::string_view after, std::size_t context)
{
    return detail::build_hunks(detail::diff_sequences(split_lines(before), split_lines(after)), context);
}

std::optional<FileChange> make_change(const std::string& path, const std::optional<std::string>& before,
    const std::optional<std::string>& after, std::size_t context)
{
    if (!before && !after)
        return std::nullopt;
    FileChange c;
    c.path = path;
    if (!before) {
        c.kind = ChangeKind::create;
        c.hunks = diff_lines("", *after, context);
    } else if (!after) {
        c.kind = ChangeKind::remove;
        c.hunks = diff_lines(*before, "", context);
    } else {
        if (*before == *after)
            return std::nullopt;
        c.kind = ChangeKind::modify;
        c.hunks = diff_lines(*before, *after, context);
    }
    return c;
}

} // namespace prforge::diff
