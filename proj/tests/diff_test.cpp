#include "synth.hpp"

#include "prforge/diff.hpp"
#include "prforge/error.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace prforge;
using namespace prforge::diff;

namespace {

std::string expect_code(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

} // namespace

TEST(SplitLines, KeepsTerminators)
{
    EXPECT_EQ(split_lines("a\nb\n"), (std::vector<std::string> { "a\n", "b\n" }));
    EXPECT_EQ(split_lines("a\nb"), (std::vector<std::string> { "a\n", "b" }));
    EXPECT_TRUE(split_lines("").empty());
    EXPECT_EQ(join_lines(split_lines("x\n\ny")), "x\n\ny");
    EXPECT_EQ(normalize_newlines("a\r\nb\rc\n"), "a\nb\nc\n");
}

TEST(Parse, GitStyleModify)
{
    const std::string text = "diff --git a/src/x.py b/src/x.py\n"
                             "index 123..456 100644\n"
                             "--- a/src/x.py\n"
                             "+++ b/src/x.py\n"
                             "@@ -1,3 +1,3 @@ def f():\n"
                             " a\n"
                             "-b\n"
                             "+B\n"
                             " c\n";
    const auto changes = parse_unified_diff(text);
    ASSERT_EQ(changes.size(), 1u);
    const auto& c = changes[0];
    EXPECT_EQ(c.path, "src/x.py");
    EXPECT_EQ(c.kind, ChangeKind::modify);
    ASSERT_EQ(c.hunks.size(), 1u);
    EXPECT_EQ(c.hunks[0].section, "def f():");
    EXPECT_EQ(c.hunks[0].old_start, 1u);
    EXPECT_EQ(c.hunks[0].old_len, 3u);
    EXPECT_EQ(apply_patch("a\nb\nc\n", c), "a\nB\nc\n");
}

TEST(Parse, CreateDeleteRenameBinary)
{
    const std::string text = "diff --git a/new.py b/new.py\n"
                             "new file mode 100644\n"
                             "--- /dev/null\n"
                             "+++ b/new.py\n"
                             "@@ -0,0 +1,2 @@\n"
                             "+x\n"
                             "+y\n"
                             "diff --git a/gone.py b/gone.py\n"
                             "deleted file mode 100644\n"
                             "--- a/gone.py\n"
                             "+++ /dev/null\n"
                             "@@ -1 +0,0 @@\n"
                             "-z\n"
                             "diff --git a/old.py b/moved.py\n"
                             "similarity index 100%\n"
                             "rename from old.py\n"
                             "rename to moved.py\n"
                             "diff --git a/logo.png b/logo.png\n"
                             "Binary files a/logo.png and b/logo.png differ\n";
    const auto c = parse_unified_diff(text);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0].kind, ChangeKind::create);
    EXPECT_EQ(apply_patch("", c[0]), "x\ny\n");
    EXPECT_EQ(c[1].kind, ChangeKind::remove);
    EXPECT_EQ(apply_patch("z\n", c[1]), "");
    EXPECT_EQ(c[2].kind, ChangeKind::rename);
    EXPECT_EQ(c[2].old_path, std::optional<std::string>("old.py"));
    EXPECT_EQ(c[2].path, "moved.py");
    EXPECT_TRUE(c[3].binary);
}

TEST(Parse, NoNewlineMarker)
{
    const std::string text = "--- a/f\n"
                             "+++ b/f\n"
                             "@@ -1 +1 @@\n"
                             "-old\n"
                             "\\ No newline at end of file\n"
                             "+new\n";
    const auto c = parse_unified_diff(text);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(apply_patch("old", c[0]), "new\n");
    EXPECT_EQ(serialize_hunks(c[0].hunks), "@@ -1 +1 @@\n-old\n\\ No newline at end of file\n+new\n");
}

TEST(Parse, CrlfIsNormalized)
{
    const std::string text = "--- a/f\r\n+++ b/f\r\n@@ -1 +1 @@\r\n-a\r\n+b\r\n";
    const auto c = parse_unified_diff(text);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(apply_patch("a\n", c[0]), "b\n");
}

TEST(Parse, MalformedInputs)
{
    EXPECT_EQ(expect_code([] { parse_unified_diff("--- a/f\n+++ b/f\n@@ -x +1 @@\n"); }), "malformed_diff");
    EXPECT_EQ(expect_code([] { parse_unified_diff("--- a/f\n+++ b/f\n@@ -1,2 +1,2 @@\n a\n"); }), "malformed_diff");
    EXPECT_EQ(expect_code([] { parse_unified_diff("--- a/f\n+++ b/f\n@@ -1 +1 @@\n?a\n"); }), "malformed_diff");
}

TEST(Apply, ContextMismatchIsExact)
{
    const auto c = make_change("f", std::string("a\nb\nc\n"), std::string("a\nB\nc\n"));
    ASSERT_TRUE(c);
    EXPECT_EQ(expect_code([&] { apply_patch("a\nb \nc\n", *c); }), "context_mismatch");
    EXPECT_EQ(expect_code([&] { apply_patch("a\nb\nc", *c); }), "context_mismatch");
}

TEST(Apply, IdenticalInputsGiveNoChange)
{
    EXPECT_TRUE(diff_lines("a\nb\n", "a\nb\n").empty());
    EXPECT_FALSE(make_change("f", std::string("a\n"), std::string("a\n")));
}

TEST(RoundTrip, ThousandRandomDiffs)
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto before = synth::random_file(rng, 1 + static_cast<int>(rng() % 60), rng() % 10 != 0);
        const auto after = synth::mutate(rng, before);
        const auto change = make_change("f.py", before, after);
        if (!change)
            continue;
        const auto text = serialize(*change);
        const auto parsed = parse_unified_diff(text);
        ASSERT_EQ(parsed.size(), 1u) << i;
        EXPECT_EQ(parsed[0], *change) << i;
        EXPECT_EQ(serialize(parsed[0]), text) << i;
        ASSERT_EQ(apply_patch(before, parsed[0]), after) << i;
        // Reverse property: apply then reverse-apply is the identity.
        EXPECT_EQ(apply_patch(after, reverse_patch(parsed[0])), before) << i;
    }
}

TEST(Reverse, CreateBecomesRemoveAndRenameInverts)
{
    const auto c = make_change("n.py", std::nullopt, std::string("x\n"));
    ASSERT_TRUE(c);
    const auto r = reverse_patch(*c);
    EXPECT_EQ(r.kind, ChangeKind::remove);
    EXPECT_EQ(apply_patch("x\n", r), "");
    EXPECT_EQ(reverse_patch(r), *c);

    FileChange mv;
    mv.kind = ChangeKind::rename;
    mv.old_path = "a.py";
    mv.path = "b.py";
    const auto back = reverse_patch(mv);
    EXPECT_EQ(back.path, "a.py");
    EXPECT_EQ(back.old_path, std::optional<std::string>("b.py"));
}
