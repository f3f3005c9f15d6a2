#include "fixtures.hpp"

#include "prforge/error.hpp"
#include "prforge/filter.hpp"
#include "prforge/render.hpp"

#include <gtest/gtest.h>

using namespace prforge;
using namespace prforge::filter;

namespace {

const StarRankTable& table()
{
    static const StarRankTable t(fixtures::rank_names());
    return t;
}

FilterDecision decide(const PullRequestRecord& pr, Mode mode = Mode::both)
{
    return classify(pr, pr.repo, render::reconstruct(pr).net, table(), {}, mode);
}

} // namespace

TEST(LabeledFixture, TwentyOfTwenty)
{
    const auto fixture = fixtures::filter_fixture_20();
    ASSERT_EQ(fixture.size(), 20u);
    int matched = 0;
    for (const auto& l : fixture) {
        const auto d = decide(l.pr);
        EXPECT_EQ(d.subset, l.expected) << l.label << ": got " << to_string(d.subset);
        EXPECT_EQ(d.reasons, l.reasons) << l.label;
        EXPECT_EQ(d.accepted, l.expected != Subset::none) << l.label;
        matched += d.subset == l.expected && d.reasons == l.reasons;
    }
    EXPECT_EQ(matched, 20);
}

TEST(LabeledFixture, ThirteenYieldSixPython)
{
    const auto fixture = fixtures::filter_fixture_13();
    ASSERT_EQ(fixture.size(), 13u);
    int py = 0;
    for (const auto& l : fixture) {
        const auto d = decide(l.pr, Mode::py);
        EXPECT_NE(d.subset, Subset::ctx_gen) << l.label;
        EXPECT_NE(d.subset, Subset::both) << l.label;
        py += d.subset == Subset::ctx_py;
    }
    EXPECT_EQ(py, 6);
}

TEST(PythonFileCount, BoundariesAtFiveAndSix)
{
    for (const auto& l : fixtures::filter_fixture_20()) {
        if (l.label == "exactly_5_py")
            EXPECT_EQ(count_python_files(render::reconstruct(l.pr).net), 5u);
        if (l.label == "exactly_6_py") {
            EXPECT_EQ(count_python_files(render::reconstruct(l.pr).net), 6u);
            EXPECT_EQ(decide(l.pr, Mode::py).reasons, std::vector<std::string> { reason::too_many_py_files });
        }
    }
}

TEST(ModeGating, SubsetsOutsideModeNeverGranted)
{
    for (const auto& l : fixtures::filter_fixture_20()) {
        EXPECT_NE(decide(l.pr, Mode::gen).subset, Subset::ctx_py) << l.label;
        EXPECT_NE(decide(l.pr, Mode::gen).subset, Subset::both) << l.label;
        EXPECT_NE(decide(l.pr, Mode::py).subset, Subset::ctx_gen) << l.label;
    }
}

TEST(Rules, PathPredicates)
{
    EXPECT_TRUE(is_python_source("a/b.py"));
    EXPECT_FALSE(is_python_source("a/b.pyc"));
    EXPECT_FALSE(is_python_source("a/b.pyi"));
    EXPECT_TRUE(is_documentation("README.md"));
    EXPECT_TRUE(is_documentation("notes.rst"));
    EXPECT_TRUE(is_documentation("docs/img.svg"));
    EXPECT_FALSE(is_documentation("src/docs/x.c"));
    EXPECT_TRUE(is_bot_login("dependabot[bot]"));
    EXPECT_FALSE(is_bot_login("robotics-dev"));
}

TEST(Rules, RankTable)
{
    EXPECT_EQ(table().rank("acme/pytool"), std::optional<std::int64_t>(1));
    EXPECT_EQ(table().rank("ACME/PyTool"), std::optional<std::int64_t>(1));
    EXPECT_EQ(table().rank("edge/at-cutoff"), std::optional<std::int64_t>(10'000));
    EXPECT_EQ(table().rank("edge/past-cutoff"), std::optional<std::int64_t>(10'001));
    EXPECT_FALSE(table().rank("nobody/here"));
    EXPECT_THROW(StarRankTable({ "a/b", "A/B" }), ConfigError);
}
