#include "prforge/filter.hpp"

#include "prforge/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace prforge::filter {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void add_unique(std::vector<std::string>& reasons, const std::string& r)
{
    if (std::find(reasons.begin(), reasons.end(), r) == reasons.end())
        reasons.push_back(r);
}

} // namespace

const char* to_string(Subset subset)
{
    switch (subset) {
    case Subset::none:
        return "none";
    case Subset::ctx_gen:
        return "ctx_gen";
    case Subset::ctx_py:
        return "ctx_py";
    case Subset::both:
        return "both";
    }
    return "none";
}

StarRankTable::StarRankTable(const std::vector<std::string>& names)
{
    std::int64_t rank = 1;
    for (const auto& name : names) {
        if (!m_ranks.emplace(lower(name), rank++).second)
            throw ConfigError("duplicate repository in rank table: " + name);
    }
}

StarRankTable StarRankTable::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open rank table " + path.string());
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#')
            continue;
        auto e = line.find_last_not_of(" \t\r");
        names.push_back(line.substr(b, e - b + 1));
    }
    return StarRankTable(names);
}

std::optional<std::int64_t> StarRankTable::rank(const std::string& full_name) const
{
    auto it = m_ranks.find(lower(full_name));
    if (it == m_ranks.end())
        return std::nullopt;
    return it->second;
}

bool repo_filter_general(const RepositoryMeta& repo, const StarRankTable& table, const Thresholds& t)
{
    auto rank = table.rank(repo.full_name);
    if (!rank)
        rank = repo.star_rank;
    return rank && *rank >= 1 && *rank <= t.star_rank_cutoff;
}

bool repo_filter_python(const RepositoryMeta& repo, const Thresholds& t)
{
    return repo.primary_language == "Python" && repo.stars >= t.min_stars && !repo.archived;
}

bool is_bot_login(const std::string& login)
{
    return ends_with(lower(login), "[bot]");
}

bool is_python_source(const std::string& path)
{
    return ends_with(lower(path), ".py");
}

bool is_documentation(const std::string& path)
{
    const std::string p = lower(path);
    return ends_with(p, ".md") || ends_with(p, ".rst") || ends_with(p, ".txt") || p.rfind("docs/", 0) == 0;
}

Fragment pr_filter_common(const PullRequestRecord& pr)
{
    Fragment f;
    if (!pr.merged)
        f.reasons.push_back(reason::not_merged);
    if (pr.author_is_bot || is_bot_login(pr.author))
        f.reasons.push_back(reason::bot_author);
    return f;
}

std::size_t count_python_files(const std::vector<diff::FileChange>& net)
{
    std::set<std::string> py;
    for (const auto& c : net) {
        if (is_python_source(c.path))
            py.insert(c.path);
        if (c.old_path && is_python_source(*c.old_path))
            py.insert(*c.old_path);
    }
    return py.size();
}

Fragment pr_filter_python(const PullRequestRecord&, const std::vector<diff::FileChange>& net, const Thresholds& t)
{
    Fragment f;
    auto allowed = [](const std::string& p) { return is_python_source(p) || is_documentation(p); };
    for (const auto& c : net) {
        if (!allowed(c.path) || (c.old_path && !allowed(*c.old_path))) {
            f.reasons.push_back(reason::non_python_change);
            break;
        }
    }
    const std::size_t py = count_python_files(net);
    if (py < t.min_py_files)
        f.reasons.push_back(reason::no_py_files);
    else if (py > t.max_py_files)
        f.reasons.push_back(reason::too_many_py_files);
    return f;
}

FilterDecision classify(const PullRequestRecord& pr, const RepositoryMeta& repo, const std::vector<diff::FileChange>& net,
    const StarRankTable& table, const Thresholds& t, Mode mode)
{
    const Fragment common = pr_filter_common(pr);

    std::vector<std::string> gen_reasons = common.reasons;
    if (!repo_filter_general(repo, table, t))
        gen_reasons.push_back(reason::not_top_starred);

    std::vector<std::string> py_reasons = common.reasons;
    if (repo.primary_language != "Python")
        py_reasons.push_back(reason::not_python_repo);
    if (repo.stars < t.min_stars)
        py_reasons.push_back(reason::too_few_stars);
    if (repo.archived)
        py_reasons.push_back(reason::archived_repo);
    for (auto& r : pr_filter_python(pr, net, t).reasons)
        py_reasons.push_back(std::move(r));

    const bool gen_ok = mode != Mode::py && gen_reasons.empty();
    const bool py_ok = mode != Mode::gen && py_reasons.empty();

    FilterDecision d;
    d.subset = gen_ok && py_ok ? Subset::both : gen_ok ? Subset::ctx_gen : py_ok ? Subset::ctx_py : Subset::none;
    d.accepted = d.subset != Subset::none;
    if (!d.accepted) {
        if (mode != Mode::py)
            for (const auto& r : gen_reasons)
                add_unique(d.reasons, r);
        if (mode != Mode::gen)
            for (const auto& r : py_reasons)
                add_unique(d.reasons, r);
    }
    return d;
}

} // namespace prforge::filter
