#include "prforge/tokenizer.hpp"

#include "prforge/error.hpp"

#include <fstream>
#include <limits>

#include <json.hpp>

namespace prforge {

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t Tokenizer::count(std::string_view text) const
{
    return encode(text).size();
}

std::string Tokenizer::truncate(std::string_view text, std::size_t max_tokens) const
{
    const auto tokens = encode(text);
    if (tokens.size() <= max_tokens)
        return std::string(text);
    if (max_tokens == 0)
        return {};
    return std::string(text.substr(0, tokens[max_tokens - 1].end));
}

WhitespaceTokenizer::WhitespaceTokenizer(std::string id)
    : m_id(std::move(id))
{
}

std::vector<Token> WhitespaceTokenizer::encode(std::string_view text) const
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i]))
            ++i;
        if (i == text.size())
            break;
        const std::size_t begin = i;
        while (i < text.size() && !is_space(text[i]))
            ++i;
        out.push_back(Token { fnv1a64(text.substr(begin, i - begin)), begin, i });
    }
    return out;
}

std::size_t WhitespaceTokenizer::count(std::string_view text) const
{
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = is_space(c);
        if (!space && !in_token)
            ++n;
        in_token = !space;
    }
    return n;
}

BpeTokenizer::BpeTokenizer(std::vector<std::pair<std::string, std::string>> merges, std::string id)
    : m_id(std::move(id))
{
    for (std::uint32_t b = 0; b < 256; ++b) {
        m_token_ids.emplace(std::string(1, static_cast<char>(b)), b);
        m_token_len.push_back(1);
    }
    for (std::size_t i = 0; i < merges.size(); ++i) {
        const auto& [left, right] = merges[i];
        auto l = m_token_ids.find(left);
        auto r = m_token_ids.find(right);
        if (l == m_token_ids.end() || r == m_token_ids.end())
            throw ConfigError("BPE merge " + std::to_string(i) + " references an unknown token");
        const auto new_id = static_cast<std::uint32_t>(256 + i);
        m_merge_rank.emplace(std::make_pair(l->second, r->second), new_id);
        m_token_ids.emplace(left + right, new_id);
        m_token_len.push_back(left.size() + right.size());
    }
}

BpeTokenizer BpeTokenizer::load(const std::filesystem::path& vocab, std::string id)
{
    std::ifstream in(vocab);
    if (!in)
        throw ConfigError("cannot open vocabulary " + vocab.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("bad vocabulary " + vocab.string() + ": " + e.what());
    }
    std::vector<std::pair<std::string, std::string>> merges;
    for (const auto& m : j.at("merges"))
        merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
    return BpeTokenizer(std::move(merges), std::move(id));
}

std::vector<std::uint32_t> BpeTokenizer::encode_word(std::string_view word) const
{
    std::vector<std::uint32_t> ids;
    ids.reserve(word.size());
    for (unsigned char c : word)
        ids.push_back(c);
    // Repeatedly apply the lowest-ranked (earliest) merge present.
    while (ids.size() > 1) {
        std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
        std::size_t best_pos = 0;
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
            auto it = m_merge_rank.find({ ids[i], ids[i + 1] });
            if (it != m_merge_rank.end() && it->second < best) {
                best = it->second;
                best_pos = i;
            }
        }
        if (best == std::numeric_limits<std::uint32_t>::max())
            break;
        ids[best_pos] = best;
        ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
    }
    return ids;
}

std::vector<Token> BpeTokenizer::encode(std::string_view text) const
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool space = is_space(text[i]);
        std::size_t j = i;
        while (j < text.size() && is_space(text[j]) == space)
            ++j;
        std::size_t pos = i;
        for (std::uint32_t id : encode_word(text.substr(i, j - i))) {
            out.push_back(Token { id, pos, pos + m_token_len[id] });
            pos += m_token_len[id];
        }
        i = j;
    }
    return out;
}

std::unique_ptr<Tokenizer> make_tokenizer(const TokenizerSpec& spec)
{
    switch (spec.kind) {
    case TokenizerKind::whitespace:
        return std::make_unique<WhitespaceTokenizer>(spec.id);
    case TokenizerKind::byte_fallback_bpe:
        if (!spec.vocab_source)
            throw ConfigError("byte_fallback_bpe tokenizer needs a vocabulary file");
        return std::make_unique<BpeTokenizer>(BpeTokenizer::load(*spec.vocab_source, spec.id));
    }
    throw ConfigError("unknown tokenizer kind");
}

} // namespace prforge
