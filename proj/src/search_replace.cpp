#include "prforge/search_replace.hpp"

#include "prforge/error.hpp"

namespace prforge::diff {

namespace {

std::string join_range(const std::vector<std::string>& lines, std::size_t begin, std::size_t end)
{
    std::string out;
    for (std::size_t i = begin; i < end; ++i)
        out += lines[i];
    return out;
}

bool is_unique(std::string_view state, std::string_view search)
{
    if (search.empty())
        return state.empty();
    return count_occurrences(state, search) == 1;
}

} // namespace

std::size_t count_occurrences(std::string_view haystack, std::string_view needle, std::size_t limit)
{
    if (needle.empty())
        return haystack.empty() ? 1 : limit;
    std::size_t count = 0;
    std::size_t pos = haystack.find(needle);
    while (pos != std::string_view::npos && count < limit) {
        ++count;
        pos = haystack.find(needle, pos + 1);
    }
    return count;
}

std::vector<SearchReplaceEdit> diff_to_search_replace(
    std::string_view file_at_state, const FileChange& change, std::size_t commit_index)
{
    std::vector<SearchReplaceEdit> edits;
    if (change.binary)
        return edits;

    if (change.kind == ChangeKind::rename) {
        std::string after = apply_patch(file_at_state, change);
        if (!file_at_state.empty())
            edits.push_back({ *change.old_path, std::string(file_at_state), "", commit_index });
        if (!after.empty())
            edits.push_back({ change.path, "", std::move(after), commit_index });
        return edits;
    }
    if (change.hunks.empty())
        return edits;

    std::vector<std::string> state = split_lines(file_at_state);
    std::ptrdiff_t delta = 0;
    for (std::size_t hi = 0; hi < change.hunks.size(); ++hi) {
        const Hunk& h = change.hunks[hi];
        const auto start = static_cast<std::size_t>(
            static_cast<std::ptrdiff_t>(h.old_len == 0 ? h.old_start : h.old_start - 1) + delta);

        std::vector<std::string> new_side;
        std::size_t cursor = start;
        for (const auto& l : h.lines) {
            if (l.tag != LineTag::add) {
                if (cursor >= state.size() || state[cursor] != l.text)
                    throw DiffError("context_mismatch",
                        "hunk " + std::to_string(hi) + " does not match " + change.path);
                ++cursor;
            }
            if (l.tag != LineTag::remove)
                new_side.push_back(l.text);
        }
        const std::size_t old_end = cursor;

        const std::string current = join_lines(state);
        std::size_t above = 0;
        std::size_t below = 0;
        bool grow_above = true;
        std::string search = join_range(state, start, old_end);
        while (!is_unique(current, search)) {
            const bool can_above = start > above;
            const bool can_below = old_end + below < state.size();
            if (above + below >= kMaxAnchorExpansion || (!can_above && !can_below))
                throw DiffError("ambiguous_anchor",
                    "no unique anchor for hunk " + std::to_string(hi) + " of " + change.path);
            if ((grow_above && can_above) || !can_below)
                ++above;
            else
                ++below;
            grow_above = !grow_above;
            search = join_range(state, start - above, old_end + below);
        }

        std::string replace = join_range(state, start - above, start);
        for (const auto& l : new_side)
            replace += l;
        replace += join_range(state, old_end, old_end + below);

        if (search != replace)
            edits.push_back({ change.path, std::move(search), std::move(replace), commit_index });

        state.erase(state.begin() + static_cast<std::ptrdiff_t>(start), state.begin() + static_cast<std::ptrdiff_t>(old_end));
        state.insert(state.begin() + static_cast<std::ptrdiff_t>(start), new_side.begin(), new_side.end());
        delta += static_cast<std::ptrdiff_t>(h.new_len) - static_cast<std::ptrdiff_t>(h.old_len);
    }
    return edits;
}

std::string apply_search_replace(std::string_view content, const SearchReplaceEdit& edit)
{
    if (edit.search.empty()) {
        if (!content.empty())
            throw DiffError("search_not_unique", "empty search block against non-empty " + edit.path);
        return edit.replace;
    }
    const auto pos = content.find(edit.search);
    if (pos == std::string_view::npos || content.find(edit.search, pos + 1) != std::string_view::npos)
        throw DiffError("search_not_unique", "search block is not unique in " + edit.path);
    std::string out;
    out.reserve(content.size() - edit.search.size() + edit.replace.size());
    out.append(content.substr(0, pos));
    out.append(edit.replace);
    out.append(content.substr(pos + edit.search.size()));
    return out;
}

FileMap apply_search_replace(FileMap files, const std::vector<SearchReplaceEdit>& edits)
{
    for (const auto& e : edits) {
        auto it = files.find(e.path);
        const std::string current = it == files.end() ? std::string() : it->second;
        std::string next = apply_search_replace(current, e);
        if (next.empty())
            files.erase(e.path);
        else
            files[e.path] = std::move(next);
    }
    return files;
}

} // namespace prforge::diff
