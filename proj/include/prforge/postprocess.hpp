#pragma once

#include "prforge/sample.hpp"
#include "prforge/tokenizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace prforge::postprocess {

inline constexpr std::size_t kMaxContextTokens = 32'768;
inline constexpr std::size_t kMaxTrajectoryTokens = 131'072;
inline constexpr std::size_t kDefaultNgram = 13;

/// Keep iff token_count <= max_tokens; only strictly longer samples drop.
bool length_filter(const RenderedSample& sample, std::size_t max_tokens);

/// Repository names matched after trimming and lower-casing.
class Blocklist {
public:
    Blocklist() = default;
    explicit Blocklist(const std::vector<std::string>& names);

    /// One full_name per line. Throws Error("missing_blocklist") if unreadable.
    static Blocklist load(const std::filesystem::path& path);

    bool contains(const std::string& full_name) const;
    std::size_t size() const { return m_names.size(); }

private:
    std::set<std::string> m_names;
};

std::string normalize_repo_name(const std::string& name);

/// Keep iff the sample's source repository is not blocklisted.
bool repo_decontaminate(const RenderedSample& sample, const Blocklist& blocklist);

/// Exact non-negative fraction; compared by cross-multiplication.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Ratio& o) const { return num * o.den == o.num * den; }
    bool operator<(const Ratio& o) const { return num * o.den < o.num * den; }
    bool operator>=(const Ratio& o) const { return !(*this < o); }
};

/// "0.10" → 10/100. Accepts plain decimals only.
Ratio parse_decimal(const std::string& text);
Ratio ratio_from_double(double value);

using GramSet = std::vector<std::uint64_t>; // sorted, unique

/// Unique n-grams over token ids, each n-gram hashed to 64 bits.
GramSet unique_ngrams(const std::vector<Token>& tokens, std::size_t n);
GramSet unique_ngrams(const Tokenizer& tok, std::string_view text, std::size_t n);

/// |G_e ∩ G_x| / |G_e|. Throws Error("empty_instance_grams") when G_e is empty.
Ratio leakage_ratio(const GramSet& instance, const GramSet& sample);

struct BenchmarkInstance {
    std::string id;
    std::string text; // prompt + canonical solution
};

/// Inverted index from n-gram to the benchmark instances containing it.
class NgramIndex {
public:
    NgramIndex(const std::vector<BenchmarkInstance>& instances, const Tokenizer& tok, std::size_t n = kDefaultNgram);

    std::size_t n() const { return m_n; }
    std::size_t size() const { return m_ids.size(); }
    const std::string& instance_id(std::size_t i) const { return m_ids[i]; }
    std::size_t gram_count(std::size_t i) const { return m_gram_counts[i]; }
    const std::vector<std::uint32_t>* lookup(std::uint64_t gram) const;

    /// Instances shorter than n tokens, left out of the index.
    const std::vector<std::string>& skipped() const { return m_skipped; }

private:
    std::size_t m_n;
    std::vector<std::string> m_ids;
    std::vector<std::size_t> m_gram_counts;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> m_postings;
    std::vector<std::string> m_skipped;
};

struct InstanceScore {
    std::string instance_id;
    Ratio score;                 // max leakage ratio over samples seen
    std::string argmax_sample;   // empty while score is 0
    bool flagged = false;
};

struct ContaminationReport {
    Ratio tau;
    std::vector<InstanceScore> scores; // index order
    std::vector<std::string> skipped;  // instances with < n tokens

    std::vector<std::string> flagged() const;
};

/// Single streaming pass: feed samples in any order, shard across scanners
/// and merge; the result does not depend on order. Ties on the best score
/// go to the lexicographically smallest sample id.
class ContaminationScanner {
public:
    ContaminationScanner(const NgramIndex& index, const Tokenizer& tok);

    void add_sample(const std::string& sample_id, std::string_view text);
    void merge(const ContaminationScanner& other);
    ContaminationReport report(Ratio tau) const;

    std::size_t samples_seen() const { return m_samples; }

private:
    void offer(std::size_t instance, std::uint64_t overlap, const std::string& sample_id);

    const NgramIndex* m_index;
    const Tokenizer* m_tok;
    std::vector<std::uint64_t> m_best_overlap;
    std::vector<std::string> m_best_sample;
    std::size_t m_samples = 0;
};

nlohmann::json to_json(const InstanceScore& s);

} // namespace prforge::postprocess
