#include "oracle.hpp"

#include "prforge/error.hpp"
#include "prforge/postprocess.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace prforge;
using namespace prforge::postprocess;

namespace {

using oracle::split_ws;

std::set<oracle::Gram> brute_grams(const std::string& text, std::size_t n)
{
    return oracle::grams(text, n);
}

std::pair<std::size_t, std::size_t> brute_ratio(const std::string& instance, const std::string& sample, std::size_t n)
{
    return oracle::overlap(instance, sample, n);
}

std::string random_text(std::mt19937_64& rng, std::size_t tokens, int vocab)
{
    std::string s;
    for (std::size_t i = 0; i < tokens; ++i)
        s += (i ? (rng() % 7 == 0 ? "\n" : " ") : "") + std::string("w") + std::to_string(rng() % vocab);
    return s;
}

// Sample text that borrows a random slice of `donor`.
std::string borrowing(std::mt19937_64& rng, const std::string& donor)
{
    const auto t = split_ws(donor);
    std::string s = random_text(rng, 5 + rng() % 30, 40);
    if (!t.empty() && rng() % 3 != 0) {
        const auto from = rng() % t.size();
        const auto len = std::min<std::size_t>(t.size() - from, 10 + rng() % 40);
        for (std::size_t i = 0; i < len; ++i)
            s += " " + t[from + i];
    }
    return s + " " + random_text(rng, rng() % 20, 40);
}

RenderedSample sample_with_tokens(std::size_t n)
{
    RenderedSample s;
    s.token_count = n;
    return s;
}

} // namespace

TEST(LengthFilter, ExactBoundaries)
{
    EXPECT_TRUE(length_filter(sample_with_tokens(32'768), kMaxContextTokens));
    EXPECT_FALSE(length_filter(sample_with_tokens(32'769), kMaxContextTokens));
    EXPECT_TRUE(length_filter(sample_with_tokens(131'072), kMaxTrajectoryTokens));
    EXPECT_FALSE(length_filter(sample_with_tokens(131'073), kMaxTrajectoryTokens));
}

TEST(Blocklist, NormalizesNames)
{
    const Blocklist b({ "  Org/Bench  ", "other/repo" });
    RenderedSample s;
    s.source_repo = "org/bench";
    EXPECT_FALSE(repo_decontaminate(s, b));
    s.source_repo = "ORG/BENCH";
    EXPECT_FALSE(repo_decontaminate(s, b));
    s.source_repo = "org/bench2";
    EXPECT_TRUE(repo_decontaminate(s, b));
}

TEST(Blocklist, LoadAndMissingFile)
{
    const auto path = std::filesystem::temp_directory_path() / "prforge_blocklist_test.txt";
    std::ofstream(path) << "# benchmark sources\nA/B\n\nc/d\n";
    const auto b = Blocklist::load(path);
    EXPECT_EQ(b.size(), 2u);
    EXPECT_TRUE(b.contains("a/b"));
    std::filesystem::remove(path);
    try {
        Blocklist::load(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "missing_blocklist");
    }
}

TEST(Ratio, DecimalParsingIsExact)
{
    EXPECT_EQ(parse_decimal("0.10"), (Ratio { 1, 10 }));
    EXPECT_EQ(parse_decimal("1"), (Ratio { 1, 1 }));
    EXPECT_EQ(parse_decimal(".5"), (Ratio { 1, 2 }));
    EXPECT_TRUE((Ratio { 10, 100 }) >= parse_decimal("0.10"));
    EXPECT_TRUE((Ratio { 9, 100 }) < parse_decimal("0.10"));
    for (const char* bad : { "", "abc", "-0.1", "1e-2", "0.1.2" })
        EXPECT_THROW(parse_decimal(bad), ConfigError) << bad;
}

TEST(Leakage, EmptyInstanceThrows)
{
    const WhitespaceTokenizer tok;
    try {
        leakage_ratio(unique_ngrams(tok, "too short", 13), unique_ngrams(tok, "x", 13));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "empty_instance_grams");
    }
}

TEST(Leakage, ThousandRandomPairsMatchBruteForce)
{
    const WhitespaceTokenizer tok;
    std::mt19937_64 rng(13);
    int compared = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng() % 13;
        const auto inst = random_text(rng, n + rng() % 60, 25);
        const auto samp = borrowing(rng, inst);
        const auto [common, total] = brute_ratio(inst, samp, n);
        if (total == 0)
            continue;
        const auto r = leakage_ratio(unique_ngrams(tok, inst, n), unique_ngrams(tok, samp, n));
        EXPECT_EQ(r, (Ratio { common, total })) << i;
        ++compared;
    }
    EXPECT_GT(compared, 900);
}

namespace {

struct Corpus {
    std::vector<BenchmarkInstance> instances;
    std::vector<std::pair<std::string, std::string>> samples; // id, text
};

Corpus random_corpus(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Corpus c;
    for (int i = 0; i < 40; ++i)
        c.instances.push_back({ "inst-" + std::to_string(i), random_text(rng, 10 + rng() % 80, 30) });
    for (int i = 0; i < 200; ++i) {
        const auto& donor = c.instances[rng() % c.instances.size()].text;
        c.samples.push_back({ "s" + std::to_string(i), borrowing(rng, donor) });
    }
    // Duplicate texts under different ids exercise the tie-break.
    c.samples.push_back({ "a-dup", c.samples[3].second });
    return c;
}

} // namespace

TEST(Scanner, StreamingEqualsBruteForce)
{
    const WhitespaceTokenizer tok;
    const std::size_t n = 5;
    const auto c = random_corpus(21);
    const NgramIndex index(c.instances, tok, n);
    ContaminationScanner scan(index, tok);
    for (const auto& [id, text] : c.samples)
        scan.add_sample(id, text);
    const auto report = scan.report(parse_decimal("0.10"));
    ASSERT_EQ(report.scores.size(), c.instances.size());

    std::size_t skipped = 0;
    for (std::size_t i = 0; i < c.instances.size(); ++i) {
        const auto& inst = c.instances[i];
        const auto total = brute_grams(inst.text, n).size();
        if (total == 0) {
            ++skipped;
            continue;
        }
        std::size_t best = 0;
        std::string best_id;
        for (const auto& [id, text] : c.samples) {
            const auto common = brute_ratio(inst.text, text, n).first;
            if (common > best || (common == best && common > 0 && id < best_id)) {
                best = common;
                best_id = id;
            }
        }
        const auto& s = *std::find_if(
            report.scores.begin(), report.scores.end(), [&](const auto& x) { return x.instance_id == inst.id; });
        EXPECT_EQ(s.score, (Ratio { best, total })) << inst.id;
        EXPECT_EQ(s.argmax_sample, best_id) << inst.id;
        EXPECT_EQ(s.flagged, best * 10 >= total) << inst.id;
    }
    EXPECT_EQ(report.skipped.size(), skipped);
}

TEST(Scanner, PlantedTenPercentOverlapIsFlagged)
{
    const WhitespaceTokenizer tok;
    std::string inst;
    for (int i = 0; i < 112; ++i) // 112 distinct tokens → 100 13-grams
        inst += (i ? " " : "") + std::string("t") + std::to_string(i);
    std::string hit = "prefix words here";
    std::string miss = hit;
    for (int i = 40; i < 62; ++i) // 22 tokens → 10 grams
        hit += " t" + std::to_string(i);
    for (int i = 40; i < 61; ++i) // 21 tokens → 9 grams
        miss += " t" + std::to_string(i);

    const NgramIndex index({ { "planted", inst } }, tok, 13);
    ContaminationScanner a(index, tok);
    a.add_sample("hit", hit);
    const auto ra = a.report(parse_decimal("0.10"));
    EXPECT_EQ(ra.scores[0].score, (Ratio { 10, 100 }));
    EXPECT_TRUE(ra.scores[0].flagged);
    EXPECT_EQ(ra.flagged(), std::vector<std::string> { "planted" });

    ContaminationScanner b(index, tok);
    b.add_sample("miss", miss);
    EXPECT_FALSE(b.report(parse_decimal("0.10")).scores[0].flagged);
}

TEST(Scanner, InvariantUnderPermutationAndSharding)
{
    const WhitespaceTokenizer tok;
    auto c = random_corpus(5);
    const NgramIndex index(c.instances, tok, 4);
    const auto tau = parse_decimal("0.10");

    auto run = [&](const std::vector<std::pair<std::string, std::string>>& samples, std::size_t shards) {
        std::vector<ContaminationScanner> parts(shards, ContaminationScanner(index, tok));
        for (std::size_t i = 0; i < samples.size(); ++i)
            parts[i % shards].add_sample(samples[i].first, samples[i].second);
        for (std::size_t k = 1; k < shards; ++k)
            parts[0].merge(parts[k]);
        std::vector<nlohmann::json> out;
        for (const auto& s : parts[0].report(tau).scores)
            out.push_back(to_json(s));
        return out;
    };

    const auto reference = run(c.samples, 1);
    std::mt19937_64 rng(77);
    for (int p = 0; p < 5; ++p) {
        std::shuffle(c.samples.begin(), c.samples.end(), rng);
        EXPECT_EQ(run(c.samples, 1 + p), reference) << "permutation " << p;
    }
}
