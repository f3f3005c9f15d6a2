#include "prforge/net_diff.hpp"

#include "hunk_builder.hpp"
#include "prforge/error.hpp"

#include <limits>

namespace prforge::diff {

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max() / 4;

// A run of untouched base lines [base_begin, base_end) or a single observed line.
struct Segment {
    bool gap = false;
    std::size_t base_begin = 0;
    std::size_t base_end = 0;
    std::string text;
    std::optional<std::size_t> base_line; // unset for lines added by the PR

    std::size_t length() const { return gap ? base_end - base_begin : 1; }
};

struct FileState {
    std::string origin; // path at base
    bool base_exists = false;
    bool exists = false;
    bool binary = false;
    std::vector<Segment> doc;
    std::map<std::size_t, std::string> known_base;

    static FileState from_base(const std::string& path)
    {
        FileState s;
        s.origin = path;
        s.base_exists = true;
        s.exists = true;
        s.doc.push_back(Segment { true, 0, kUnbounded, {}, std::nullopt });
        return s;
    }

    static FileState absent(const std::string& path)
    {
        FileState s;
        s.origin = path;
        return s;
    }
};

[[noreturn]] void conflict(const std::string& path, const std::string& what)
{
    throw DiffError("composition_conflict", path + ": " + what);
}

// Returns the index of the segment that starts exactly at `pos`, splitting a
// gap if needed. Returns doc.size() when pos is the end of the document.
std::size_t split_at(FileState& st, std::size_t pos, const std::string& path)
{
    std::size_t running = 0;
    for (std::size_t i = 0; i < st.doc.size(); ++i) {
        if (running == pos)
            return i;
        const std::size_t len = st.doc[i].length();
        if (pos < running + len) {
            Segment& g = st.doc[i];
            const std::size_t cut = g.base_begin + (pos - running);
            Segment tail { true, cut, g.base_end, {}, std::nullopt };
            g.base_end = cut;
            st.doc.insert(st.doc.begin() + static_cast<std::ptrdiff_t>(i) + 1, tail);
            return i + 1;
        }
        running += len;
    }
    if (running == pos)
        return st.doc.size();
    conflict(path, "hunk starts past end of file");
}

void apply_hunks(FileState& st, const FileChange& change, const std::string& path)
{
    std::ptrdiff_t delta = 0;
    for (const Hunk& h : change.hunks) {
        if (h.old_len > 0 && h.old_start == 0)
            conflict(path, "invalid hunk start");
        const auto start = static_cast<std::size_t>(
            static_cast<std::ptrdiff_t>(h.old_len == 0 ? h.old_start : h.old_start - 1) + delta);

        std::vector<const std::string*> old_side;
        for (const auto& l : h.lines)
            if (l.tag != LineTag::add)
                old_side.push_back(&l.text);

        // Pin every line the hunk reads, learning base text from gaps.
        for (std::size_t k = 0; k < old_side.size(); ++k) {
            const std::size_t i = split_at(st, start + k, path);
            if (i >= st.doc.size())
                conflict(path, "hunk reads past end of file");
            if (st.doc[i].gap) {
                split_at(st, start + k + 1, path);
                Segment& s = st.doc[i];
                const std::size_t base_line = s.base_begin;
                s = Segment { false, 0, 0, *old_side[k], base_line };
                st.known_base[base_line] = *old_side[k];
            } else if (st.doc[i].text != *old_side[k]) {
                conflict(path, "context disagrees with composed state at line " + std::to_string(start + k + 1));
            }
        }

        const std::size_t first = split_at(st, start, path);
        std::vector<Segment> replacement;
        std::size_t cursor = first;
        for (const auto& l : h.lines) {
            switch (l.tag) {
            case LineTag::context:
                replacement.push_back(st.doc[cursor++]);
                break;
            case LineTag::remove:
                ++cursor;
                break;
            case LineTag::add:
                replacement.push_back(Segment { false, 0, 0, l.text, std::nullopt });
                break;
            }
        }
        st.doc.erase(st.doc.begin() + static_cast<std::ptrdiff_t>(first),
            st.doc.begin() + static_cast<std::ptrdiff_t>(cursor));
        st.doc.insert(st.doc.begin() + static_cast<std::ptrdiff_t>(first), replacement.begin(), replacement.end());
        delta += static_cast<std::ptrdiff_t>(h.new_len) - static_cast<std::ptrdiff_t>(h.old_len);
    }
}

// Drops the trailing unknown region once a delete proves the file ended there.
void truncate_after_delete(FileState& st, const std::string& path)
{
    for (const auto& s : st.doc) {
        if (!s.gap)
            conflict(path, "delete leaves lines behind");
        if (s.base_end != kUnbounded)
            conflict(path, "delete of lines never observed");
    }
    st.doc.clear();
    st.exists = false;
}

std::vector<detail::EditOp> edit_script(const FileState& st, const std::string& path)
{
    using detail::EditOp;
    std::vector<EditOp> raw;
    std::size_t base_cursor = 0;
    auto removed_until = [&](std::size_t end) {
        for (; base_cursor < end; ++base_cursor) {
            auto it = st.known_base.find(base_cursor);
            if (it == st.known_base.end())
                conflict(path, "base line " + std::to_string(base_cursor + 1) + " removed but never observed");
            raw.push_back(EditOp { LineTag::remove, it->second });
        }
    };

    if (st.base_exists || st.exists) {
        for (const auto& s : st.doc) {
            if (s.gap) {
                removed_until(s.base_begin);
                raw.push_back(EditOp { LineTag::context, {}, s.base_end - s.base_begin, false });
                base_cursor = s.base_end;
            } else if (s.base_line) {
                removed_until(*s.base_line);
                raw.push_back(EditOp { LineTag::context, s.text });
                base_cursor = *s.base_line + 1;
            } else {
                raw.push_back(EditOp { LineTag::add, s.text });
            }
        }
        if (base_cursor < kUnbounded && st.base_exists) {
            std::size_t base_len = base_cursor;
            if (!st.known_base.empty())
                base_len = std::max(base_len, st.known_base.rbegin()->first + 1);
            removed_until(base_len);
        }
    }

    // Minimize each change block: a line removed by one commit and restored
    // by another is unchanged at the net level.
    std::vector<EditOp> ops;
    for (std::size_t i = 0; i < raw.size();) {
        if (raw[i].tag == LineTag::context) {
            ops.push_back(std::move(raw[i++]));
            continue;
        }
        std::vector<std::string> before;
        std::vector<std::string> after;
        for (; i < raw.size() && raw[i].tag != LineTag::context; ++i)
            (raw[i].tag == LineTag::remove ? before : after).push_back(raw[i].text);
        for (auto& op : detail::diff_sequences(before, after))
            ops.push_back(std::move(op));
    }
    return ops;
}

} // namespace

std::vector<FileChange> net_diff(const std::vector<std::vector<FileChange>>& commits)
{
    std::map<std::string, FileState> files;

    auto state_for_existing = [&](const std::string& path) -> FileState& {
        auto it = files.find(path);
        if (it == files.end())
            it = files.emplace(path, FileState::from_base(path)).first;
        if (!it->second.exists)
            conflict(path, "change to a file that does not exist at this point");
        return it->second;
    };

    for (const auto& commit : commits) {
        for (const FileChange& c : commit) {
            switch (c.kind) {
            case ChangeKind::create: {
                auto it = files.find(c.path);
                if (it == files.end()) {
                    it = files.emplace(c.path, FileState::absent(c.path)).first;
                } else if (it->second.exists) {
                    conflict(c.path, "create over an existing file");
                }
                FileState& st = it->second;
                st.exists = true;
                if (c.binary)
                    st.binary = true;
                else
                    apply_hunks(st, c, c.path);
                break;
            }
            case ChangeKind::remove: {
                FileState& st = state_for_existing(c.path);
                if (c.binary || st.binary) {
                    st.binary = true;
                    st.doc.clear();
                    st.exists = false;
                } else {
                    apply_hunks(st, c, c.path);
                    truncate_after_delete(st, c.path);
                }
                break;
            }
            case ChangeKind::modify: {
                FileState& st = state_for_existing(c.path);
                if (c.binary)
                    st.binary = true;
                else if (!st.binary)
                    apply_hunks(st, c, c.path);
                break;
            }
            case ChangeKind::rename: {
                const std::string& from = *c.old_path;
                FileState moved = state_for_existing(from);
                auto target = files.find(c.path);
                if (target != files.end() && (target->second.exists || target->second.base_exists))
                    conflict(c.path, "rename onto a tracked path");
                files[from] = FileState::absent(from);
                if (c.binary)
                    moved.binary = true;
                else if (!moved.binary)
                    apply_hunks(moved, c, c.path);
                files[c.path] = std::move(moved);
                break;
            }
            }
        }
    }

    std::vector<FileChange> out;
    for (const auto& [path, st] : files) {
        if (!st.base_exists && !st.exists)
            continue;
        FileChange c;
        c.path = path;
        if (!st.base_exists)
            c.kind = ChangeKind::create;
        else if (!st.exists) {
            c.kind = ChangeKind::remove;
            c.path = st.origin;
        } else if (st.origin != path) {
            c.kind = ChangeKind::rename;
            c.old_path = st.origin;
        } else {
            c.kind = ChangeKind::modify;
        }
        if (st.binary) {
            c.binary = true;
        } else {
            c.hunks = detail::build_hunks(edit_script(st, path), 3);
            if (c.hunks.empty() && c.kind == ChangeKind::modify)
                continue;
        }
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const FileChange& a, const FileChange& b) { return a.path < b.path; });
    return out;
}

FileMap apply_changes(const FileMap& files, const std::vector<FileChange>& changes)
{
    FileMap result = files;
    std::vector<std::pair<std::string, std::optional<std::string>>> writes;
    for (const auto& c : changes) {
        if (c.binary)
            continue;
        std::string source;
        if (c.kind != ChangeKind::create) {
            auto it = files.find(c.source_path());
            if (it == files.end())
                throw DiffError("context_mismatch", "missing source file " + c.source_path());
            source = it->second;
        } else if (files.count(c.path)) {
            throw DiffError("context_mismatch", "create over existing file " + c.path);
        }
        std::string updated = apply_patch(source, c);
        if (c.kind == ChangeKind::remove) {
            writes.emplace_back(c.path, std::nullopt);
        } else {
            if (c.kind == ChangeKind::rename)
                writes.emplace_back(*c.old_path, std::nullopt);
            writes.emplace_back(c.path, std::move(updated));
        }
    }
    // Deletions first so a rename target written later is not clobbered.
    for (const auto& [path, content] : writes)
        if (!content)
            result.erase(path);
    for (const auto& [path, content] : writes)
        if (content)
            result[path] = *content;
    return result;
}

} // namespace prforge::diff
