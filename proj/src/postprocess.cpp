#include "prforge/postprocess.hpp"

#include "prforge/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace prforge::postprocess {

bool length_filter(const RenderedSample& sample, std::size_t max_tokens)
{
    return sample.token_count <= max_tokens;
}

std::string normalize_repo_name(const std::string& name)
{
    const auto b = name.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = name.find_last_not_of(" \t\r\n");
    std::string out = name.substr(b, e - b + 1);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

Blocklist::Blocklist(const std::vector<std::string>& names)
{
    for (const auto& n : names) {
        auto norm = normalize_repo_name(n);
        if (!norm.empty())
            m_names.insert(std::move(norm));
    }
}

Blocklist Blocklist::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("missing_blocklist", "cannot read blocklist " + path.string());
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#')
            continue;
        names.push_back(line);
    }
    return Blocklist(names);
}

bool Blocklist::contains(const std::string& full_name) const
{
    return m_names.count(normalize_repo_name(full_name)) > 0;
}

bool repo_decontaminate(const RenderedSample& sample, const Blocklist& blocklist)
{
    return !blocklist.contains(sample.source_repo);
}

Ratio parse_decimal(const std::string& text)
{
    Ratio r { 0, 1 };
    bool seen_dot = false;
    bool any_digit = false;
    for (char c : text) {
        if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            r.num = r.num * 10 + static_cast<std::uint64_t>(c - '0');
            if (seen_dot)
                r.den *= 10;
            any_digit = true;
        } else {
            throw ConfigError("not a plain decimal: '" + text + "'");
        }
    }
    if (!any_digit || r.den > 1'000'000'000'000ULL)
        throw ConfigError("not a plain decimal: '" + text + "'");
    return r;
}

Ratio ratio_from_double(double value)
{
    if (!(value >= 0.0))
        throw ConfigError("threshold must be non-negative");
    char buf[64];
    // Shortest round-trip representation, then read it as a decimal.
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
    if (ec != std::errc())
        throw ConfigError("cannot represent threshold");
    return parse_decimal(std::string(buf, ptr));
}

GramSet unique_ngrams(const std::vector<Token>& tokens, std::size_t n)
{
    GramSet grams;
    if (n == 0 || tokens.size() < n)
        return grams;
    grams.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t k = 0; k < n; ++k) {
            std::uint64_t id = tokens[i + k].id;
            for (int b = 0; b < 8; ++b) {
                h ^= (id >> (8 * b)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        }
        grams.push_back(h);
    }
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

GramSet unique_ngrams(const Tokenizer& tok, std::string_view text, std::size_t n)
{
    return unique_ngrams(tok.encode(text), n);
}

Ratio leakage_ratio(const GramSet& instance, const GramSet& sample)
{
    if (instance.empty())
        throw Error("empty_instance_grams", "benchmark instance has no n-grams");
    std::uint64_t overlap = 0;
    auto a = instance.begin();
    auto b = sample.begin();
    while (a != instance.end() && b != sample.end()) {
        if (*a < *b) {
            ++a;
        } else if (*b < *a) {
            ++b;
        } else {
            ++overlap;
            ++a;
            ++b;
        }
    }
    return Ratio { overlap, instance.size() };
}

NgramIndex::NgramIndex(const std::vector<BenchmarkInstance>& instances, const Tokenizer& tok, std::size_t n)
    : m_n(n)
{
    if (n == 0)
        throw ConfigError("n-gram size must be positive");
    for (const auto& inst : instances) {
        const GramSet grams = unique_ngrams(tok, inst.text, n);
        if (grams.empty()) {
            m_skipped.push_back(inst.id);
            continue;
        }
        const auto idx = static_cast<std::uint32_t>(m_ids.size());
        m_ids.push_back(inst.id);
        m_gram_counts.push_back(grams.size());
        for (auto g : grams)
            m_postings[g].push_back(idx);
    }
}

const std::vector<std::uint32_t>* NgramIndex::lookup(std::uint64_t gram) const
{
    auto it = m_postings.find(gram);
    return it == m_postings.end() ? nullptr : &it->second;
}

std::vector<std::string> ContaminationReport::flagged() const
{
    std::vector<std::string> out;
    for (const auto& s : scores)
        if (s.flagged)
            out.push_back(s.instance_id);
    return out;
}

ContaminationScanner::ContaminationScanner(const NgramIndex& index, const Tokenizer& tok)
    : m_index(&index)
    , m_tok(&tok)
    , m_best_overlap(index.size(), 0)
    , m_best_sample(index.size())
{
}

void ContaminationScanner::offer(std::size_t instance, std::uint64_t overlap, const std::string& sample_id)
{
    if (overlap == 0)
        return;
    auto& best = m_best_overlap[instance];
    auto& who = m_best_sample[instance];
    if (overlap > best || (overlap == best && sample_id < who)) {
        best = overlap;
        who = sample_id;
    }
}

void ContaminationScanner::add_sample(const std::string& sample_id, std::string_view text)
{
    ++m_samples;
    const GramSet grams = unique_ngrams(*m_tok, text, m_index->n());
    std::unordered_map<std::uint32_t, std::uint64_t> overlap;
    for (auto g : grams) {
        if (const auto* posting = m_index->lookup(g))
            for (auto inst : *posting)
                ++overlap[inst];
    }
    for (const auto& [inst, count] : overlap)
        offer(inst, count, sample_id);
}

void ContaminationScanner::merge(const ContaminationScanner& other)
{
    for (std::size_t i = 0; i < m_best_overlap.size(); ++i)
        offer(i, other.m_best_overlap[i], other.m_best_sample[i]);
    m_samples += other.m_samples;
}

ContaminationReport ContaminationScanner::report(Ratio tau) const
{
    ContaminationReport r;
    r.tau = tau;
    r.skipped = m_index->skipped();
    for (std::size_t i = 0; i < m_index->size(); ++i) {
        InstanceScore s;
        s.instance_id = m_index->instance_id(i);
        s.score = Ratio { m_best_overlap[i], m_index->gram_count(i) };
        s.argmax_sample = m_best_sample[i];
        s.flagged = s.score >= tau;
        r.scores.push_back(std::move(s));
    }
    return r;
}

nlohmann::json to_json(const InstanceScore& s)
{
    return nlohmann::json {
        { "instance_id", s.instance_id },
        { "score", s.score.value() },
        { "overlap", s.score.num },
        { "grams", s.score.den },
        { "argmax_sample", s.argmax_sample.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.argmax_sample) },
        { "flagged", s.flagged },
    };
}

} // namespace prforge::postprocess
