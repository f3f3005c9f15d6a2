#include "synth.hpp"

#include "prforge/error.hpp"
#include "prforge/net_diff.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace prforge;
using namespace prforge::diff;

namespace {

std::vector<std::vector<FileChange>> parsed_commits(const PullRequestRecord& pr)
{
    std::vector<std::vector<FileChange>> out;
    for (const auto& c : pr.commits) {
        std::vector<FileChange> changes;
        for (const auto& d : c.diffs)
            for (auto& f : parse_unified_diff(d))
                changes.push_back(std::move(f));
        out.push_back(std::move(changes));
    }
    return out;
}

FileChange change(const std::string& path, std::optional<std::string> before, std::optional<std::string> after)
{
    return *make_change(path, before, after);
}

} // namespace

TEST(NetDiff, TwoHundredSyntheticPrsReproduceHead)
{
    std::mt19937_64 rng(99);
    synth::Options o;
    o.python_only = false;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 200; ++i) {
        const auto s = synth::make_pr(rng, i, o);
        const auto net = net_diff(parsed_commits(s.pr));
        ASSERT_EQ(apply_changes(s.base, net), s.head) << "pr " << i;
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 10.0);
}

TEST(NetDiff, SequentialEditsCompose)
{
    const std::string v0 = "a\nb\nc\nd\ne\nf\ng\nh\n";
    const std::string v1 = "a\nB\nc\nd\ne\nf\ng\nh\n";
    const std::string v2 = "a\nB\nc\nd\ne\nf\nG\nh\nI\n";
    const auto net = net_diff({ { change("f", v0, v1) }, { change("f", v1, v2) } });
    ASSERT_EQ(net.size(), 1u);
    EXPECT_EQ(apply_patch(v0, net[0]), v2);
}

TEST(NetDiff, CreateThenDeleteVanishes)
{
    const auto net = net_diff({ { change("tmp.c", std::nullopt, std::string("x\n")) },
        { change("tmp.c", std::string("x\n"), std::nullopt) } });
    EXPECT_TRUE(net.empty());
}

TEST(NetDiff, RevertLeavesNoChange)
{
    const std::string v0 = "a\nb\nc\n";
    const std::string v1 = "a\nX\nc\n";
    const auto net = net_diff({ { change("f", v0, v1) }, { change("f", v1, v0) } });
    EXPECT_TRUE(net.empty());
}

TEST(NetDiff, CreateThenModifyIsOneCreate)
{
    const auto net = net_diff({ { change("n.py", std::nullopt, std::string("a\n")) },
        { change("n.py", std::string("a\n"), std::string("a\nb\n")) } });
    ASSERT_EQ(net.size(), 1u);
    EXPECT_EQ(net[0].kind, ChangeKind::create);
    EXPECT_EQ(apply_patch("", net[0]), "a\nb\n");
}

TEST(NetDiff, RenameThenEditKeepsSource)
{
    FileChange mv;
    mv.kind = ChangeKind::rename;
    mv.old_path = "old.py";
    mv.path = "new.py";
    const auto net = net_diff({ { mv }, { change("new.py", std::string("a\nb\n"), std::string("a\nB\n")) } });
    ASSERT_EQ(net.size(), 1u);
    EXPECT_EQ(net[0].source_path(), "old.py");
    EXPECT_EQ(net[0].path, "new.py");
    const auto head = apply_changes({ { "old.py", "a\nb\n" } }, net);
    EXPECT_EQ(head, (FileMap { { "new.py", "a\nB\n" } }));
}

TEST(NetDiff, ContradictingContextIsAConflict)
{
    const std::string v0 = "a\nb\nc\n";
    const std::string v1 = "a\nX\nc\n";
    // Second commit claims line 2 is still "b".
    try {
        net_diff({ { change("f", v0, v1) }, { change("f", v0, std::string("a\nb\nZ\n")) } });
        FAIL();
    } catch (const DiffError& e) {
        EXPECT_EQ(e.code(), "composition_conflict");
    }
}

TEST(NetDiff, OutputSortedByPath)
{
    const auto net = net_diff({ { change("z.py", std::nullopt, std::string("1\n")),
        change("a.py", std::nullopt, std::string("2\n")) } });
    ASSERT_EQ(net.size(), 2u);
    EXPECT_EQ(net[0].path, "a.py");
    EXPECT_EQ(net[1].path, "z.py");
}
