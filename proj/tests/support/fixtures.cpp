#include "fixtures.hpp"

#include "synth.hpp"

#include "prforge/diff.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fixtures {

using prforge::PullRequestRecord;
using prforge::filter::Subset;

std::filesystem::path test_dir()
{
    return PRFORGE_TEST_DIR;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

void attach_base(PullRequestRecord& pr, const std::string& base, const std::string& path, const std::string& content)
{
    pr.base_commit_meta = base;
    pr.file_snapshots[base][path] = content;
}

} // namespace

PullRequestRecord waitress_pr()
{
    PullRequestRecord pr;
    pr.repo = { "Pylons/waitress", "Waitress - A WSGI server for Python 3", "Python", 1400, false, std::nullopt };
    pr.number = 433;
    pr.title = "Bugfix: Don't strip whitespace from values before inserting into environ";
    pr.body = "This fixes a small bug where the value of the header would get stripped when inserted into the environ "
              "so it no longer matched. Closes #432";
    pr.author = "digitalresistor";
    pr.created_at = prforge::parse_timestamp("2024-03-11T20:01:00Z");
    pr.merged = true;
    pr.linked_issue = prforge::IssueRecord { "\\xa0 and \\x85 are stripped from header values",
        "Given that these bytes are allowed in header values (due to `obs-text`), they shouldn't be stripped during "
        "header-field OWS stripping..." };

    const std::string base = synth::sha_of("waitress/base");
    prforge::CommitRecord c;
    c.sha = synth::sha_of("waitress/c1");
    c.message = "Don't strip value before inserting into environ";
    c.author = "Delta Regeer";
    c.timestamp = prforge::parse_timestamp("2024-03-11T20:00:00Z");
    c.parent_shas = { base };
    c.diffs = { "diff --git a/src/waitress/task.py b/src/waitress/task.py\n"
                "--- a/src/waitress/task.py\n"
                "+++ b/src/waitress/task.py\n"
                "@@ -46,5 +46,4 @@ def get_environment(self):\n"
                "         for key, value in dict(request.headers).items():\n"
                "-            value = value.strip()\n"
                "             mykey = rename_headers.get(key, None)\n"
                "             if mykey is None:\n"
                "                 mykey = \"HTTP_\" + key\n" };
    pr.commits.push_back(c);
    attach_base(pr, base, "src/waitress/task.py", read_file(test_dir() / "support/data/waitress_task.py"));

    pr.events.push_back({ prforge::EventKind::review, "mmerickel", "", prforge::parse_timestamp("2024-03-12T01:00:00Z"),
        prforge::ReviewState::approved, std::nullopt });
    return pr;
}

prforge::render::Enhancements waitress_enhancements()
{
    return { "This pull request removes the erroneous `.strip()` call on header values in the WSGI environ "
             "construction. The HTTP specification allows certain non-ASCII bytes (`\\xa0`, `\\x85`) in header "
             "values via `obs-text`, and these should not be stripped.",
        { "Remove the strip() call from header value processing in get_environment()" }, true };
}

PullRequestRecord parcel_pr()
{
    PullRequestRecord pr;
    pr.repo = { "parcel-bundler/parcel", "The zero configuration build tool for the web.", "JavaScript", 43000, false,
        std::nullopt };
    pr.number = 1211;
    pr.title = "use env port";
    pr.body = "Adds `process.env.PORT` as a default port option...";
    pr.author = "lizzzp1";
    pr.created_at = prforge::parse_timestamp("2018-04-20T10:00:00Z");
    pr.merged = true;

    const std::string base = synth::sha_of("parcel/base");
    prforge::CommitRecord c;
    c.sha = synth::sha_of("parcel/c1");
    c.message = "use env port";
    c.author = "Liz P";
    // Pushed after the discussion, as in the published example.
    c.timestamp = prforge::parse_timestamp("2018-04-22T09:00:00Z");
    c.parent_shas = { base };
    c.diffs = { "diff --git a/packages/core/parcel-bundler/src/cli.js b/packages/core/parcel-bundler/src/cli.js\n"
                "--- a/packages/core/parcel-bundler/src/cli.js\n"
                "+++ b/packages/core/parcel-bundler/src/cli.js\n"
                "@@ -20,7 +20,7 @@ async function bundle(main, command) {\n"
                "   command.target = command.target || 'browser';\n"
                "   if (command.name() === 'serve' && command.target === 'browser') {\n"
                "     const server = await bundler.serve(\n"
                "-      command.port || 1234,\n"
                "+      process.env.PORT || 1234,\n"
                "       command.https,\n"
                "       command.host\n"
                "     );\n" };
    pr.commits.push_back(c);
    attach_base(pr, base, "packages/core/parcel-bundler/src/cli.js", read_file(test_dir() / "support/data/parcel_cli.js"));

    using prforge::EventKind;
    pr.events.push_back({ EventKind::comment, "mischnic", "I think it should rather be...",
        prforge::parse_timestamp("2018-04-20T12:00:00Z"), std::nullopt, std::nullopt });
    pr.events.push_back({ EventKind::review, "devongovett", "Looks good to me.",
        prforge::parse_timestamp("2018-04-21T08:00:00Z"), prforge::ReviewState::approved, std::nullopt });
    pr.events.push_back({ EventKind::status_change, "devongovett", "closed",
        prforge::parse_timestamp("2018-04-22T10:00:00Z"), std::nullopt, std::nullopt });
    return pr;
}

// --- PrBuilder ---------------------------------------------------------------

PrBuilder::PrBuilder(std::string repo, std::int64_t number)
{
    m_pr.repo.full_name = std::move(repo);
    m_pr.repo.description = "Fixture repository";
    m_pr.repo.primary_language = "Python";
    m_pr.repo.stars = 500;
    m_pr.number = number;
    m_pr.title = "Fixture change " + std::to_string(number);
    m_pr.body = "Adjusts a few files.";
    m_pr.author = "contributor";
    m_pr.merged = true;
    m_pr.created_at = { 1'700'000'000 + number * 1000 };
}

PrBuilder& PrBuilder::language(std::string lang)
{
    m_pr.repo.primary_language = std::move(lang);
    return *this;
}

PrBuilder& PrBuilder::stars(std::int64_t n)
{
    m_pr.repo.stars = n;
    return *this;
}

PrBuilder& PrBuilder::archived(bool a)
{
    m_pr.repo.archived = a;
    return *this;
}

PrBuilder& PrBuilder::author(std::string login, bool is_bot)
{
    m_pr.author = std::move(login);
    m_pr.author_is_bot = is_bot;
    return *this;
}

PrBuilder& PrBuilder::merged(bool m)
{
    m_pr.merged = m;
    return *this;
}

PrBuilder& PrBuilder::file(const std::string& path, std::string content)
{
    m_base[path] = content;
    m_state[path] = std::move(content);
    return *this;
}

namespace {

prforge::CommitRecord next_commit(const PullRequestRecord& pr, const std::string& base)
{
    prforge::CommitRecord c;
    const auto i = pr.commits.size();
    c.sha = synth::sha_of(pr.repo.full_name + "#" + std::to_string(pr.number) + "/" + std::to_string(i));
    c.message = "Commit " + std::to_string(i + 1);
    c.author = "Contributor";
    c.timestamp = { pr.created_at.seconds + 60 * static_cast<std::int64_t>(i + 1) };
    c.parent_shas = { i == 0 ? base : pr.commits.back().sha };
    return c;
}

std::string base_sha(const PullRequestRecord& pr)
{
    return synth::sha_of(pr.repo.full_name + "#" + std::to_string(pr.number) + "/base");
}

} // namespace

PrBuilder& PrBuilder::commit(const std::map<std::string, std::optional<std::string>>& changes)
{
    auto c = next_commit(m_pr, base_sha(m_pr));
    for (const auto& [path, after] : changes) {
        std::optional<std::string> before;
        if (const auto it = m_state.find(path); it != m_state.end())
            before = it->second;
        m_read.push_back(path);
        const auto change = prforge::diff::make_change(path, before, after);
        if (change)
            c.diffs.push_back(prforge::diff::serialize(*change));
        if (after)
            m_state[path] = *after;
        else
            m_state.erase(path);
    }
    m_pr.commits.push_back(std::move(c));
    return *this;
}

PrBuilder& PrBuilder::rename(const std::string& from, const std::string& to)
{
    auto c = next_commit(m_pr, base_sha(m_pr));
    prforge::diff::FileChange change;
    change.path = to;
    change.kind = prforge::diff::ChangeKind::rename;
    change.old_path = from;
    c.diffs.push_back(prforge::diff::serialize(change));
    m_read.push_back(from);
    m_read.push_back(to);
    m_state[to] = m_state.at(from);
    m_state.erase(from);
    m_pr.commits.push_back(std::move(c));
    return *this;
}

PullRequestRecord PrBuilder::build() const
{
    PullRequestRecord pr = m_pr;
    const auto base = base_sha(pr);
    pr.base_commit_meta = base;
    auto& snap = pr.file_snapshots[base];
    for (const auto& p : m_read) {
        const auto it = m_base.find(p);
        snap[p] = it == m_base.end() ? std::nullopt : std::optional<std::string>(it->second);
    }
    return pr;
}

// --- labeled filter fixtures --------------------------------------------------

std::vector<std::string> rank_names()
{
    std::vector<std::string> names;
    names.reserve(10'001);
    names.push_back("acme/pytool");
    names.push_back("acme/webapp");
    names.push_back("acme/old");
    names.push_back("acme/tiny");
    while (names.size() < 9'999)
        names.push_back("filler/r" + std::to_string(names.size() + 1));
    names.push_back("edge/at-cutoff");   // rank 10000
    names.push_back("edge/past-cutoff"); // rank 10001
    return names;
}

namespace {

const std::string kPy = "def f():\n    return 1\n";
const std::string kPy2 = "def f():\n    return 2\n";

PrBuilder top(std::int64_t n)
{
    return PrBuilder("acme/pytool", n);
}

std::map<std::string, std::optional<std::string>> py_files(int count)
{
    std::map<std::string, std::optional<std::string>> m;
    for (int i = 0; i < count; ++i)
        m["pkg/mod" + std::to_string(i) + ".py"] = "x = " + std::to_string(i) + "\n";
    return m;
}

LabeledPr labeled(std::string label, const PrBuilder& b, Subset s, std::vector<std::string> reasons = {})
{
    return { std::move(label), b.build(), s, std::move(reasons) };
}

} // namespace

std::vector<LabeledPr> filter_fixture_20()
{
    namespace r = prforge::filter::reason;
    std::vector<LabeledPr> v;
    v.push_back(labeled("one_py_file", top(1).file("a.py", kPy).commit({ { "a.py", kPy2 } }), Subset::both));
    v.push_back(labeled("not_merged", top(2).merged(false).commit({ { "a.py", kPy } }), Subset::none, { r::not_merged }));
    v.push_back(labeled("bot_login", top(3).author("dependabot[bot]").commit({ { "a.py", kPy } }), Subset::none,
        { r::bot_author }));
    v.push_back(labeled("bot_flag", top(4).author("renovate", true).commit({ { "a.py", kPy } }), Subset::none,
        { r::bot_author }));
    v.push_back(labeled("rank_at_cutoff", PrBuilder("edge/at-cutoff", 5).commit({ { "a.py", kPy }, { "b.py", kPy } }),
        Subset::both));
    v.push_back(labeled("rank_past_cutoff", PrBuilder("edge/past-cutoff", 6).stars(50).commit({ { "a.py", kPy } }),
        Subset::ctx_py));
    v.push_back(labeled("exactly_5_py", top(7).commit(py_files(5)), Subset::both));
    v.push_back(labeled("exactly_6_py", top(8).commit(py_files(6)), Subset::ctx_gen));
    v.push_back(labeled("py_plus_c", top(9).commit({ { "a.py", kPy }, { "util.c", "int x;\n" } }), Subset::ctx_gen));
    v.push_back(labeled("py_plus_readme",
        top(10).commit({ { "a.py", kPy }, { "b.py", kPy }, { "README.md", "# Tool\n" } }), Subset::both));
    v.push_back(labeled("py_plus_docs_dir", top(11).commit({ { "a.py", kPy }, { "docs/guide.html", "<p>x</p>\n" } }),
        Subset::both));
    v.push_back(labeled("docs_only", top(12).commit({ { "README.md", "# Tool\n" } }), Subset::ctx_gen));
    v.push_back(labeled("py_deletion_only", top(13).file("old.py", kPy).commit({ { "old.py", std::nullopt } }),
        Subset::both));
    v.push_back(labeled("cancelled_c_file",
        top(14).file("a.py", kPy)
            .commit({ { "tmp.c", "int y;\n" }, { "a.py", kPy2 } })
            .commit({ { "tmp.c", std::nullopt } }),
        Subset::both));
    v.push_back(labeled("py_rename", top(15).file("old.py", kPy).rename("old.py", "new.py"), Subset::both));
    v.push_back(labeled("four_stars", PrBuilder("acme/tiny", 16).stars(4).commit({ { "a.py", kPy } }), Subset::ctx_gen));
    v.push_back(labeled("five_stars_unranked", PrBuilder("small/lib", 17).stars(5).commit({ { "a.py", kPy } }),
        Subset::ctx_py));
    v.push_back(labeled("archived", PrBuilder("acme/old", 18).archived().commit({ { "a.py", kPy } }), Subset::ctx_gen));
    v.push_back(labeled("javascript_repo",
        PrBuilder("acme/webapp", 19).language("JavaScript").commit({ { "index.js", "let x;\n" } }), Subset::ctx_gen));
    v.push_back(labeled("rust_unranked", PrBuilder("crab/tool", 20).language("Rust").commit({ { "lib.rs", "fn x() {}\n" } }),
        Subset::none, { r::not_top_starred, r::not_python_repo, r::non_python_change, r::no_py_files }));
    return v;
}

std::vector<LabeledPr> filter_fixture_13()
{
    const auto all = filter_fixture_20();
    // Passing the Python rules: at/past cutoff, 5 files, docs, deletion, rename,
    // 5 stars → pick six; failing: not merged, bot, 6 files, .c, 4 stars,
    // archived, JavaScript.
    const char* keep[] = { "one_py_file", "exactly_5_py", "py_plus_docs_dir", "py_deletion_only", "py_rename",
        "five_stars_unranked", "not_merged", "bot_login", "exactly_6_py", "py_plus_c", "four_stars", "archived",
        "javascript_repo" };
    std::vector<LabeledPr> out;
    for (const char* k : keep)
        for (const auto& l : all)
            if (l.label == k)
                out.push_back(l);
    return out;
}

} // namespace fixtures
