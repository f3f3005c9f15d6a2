#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prforge {

struct Token {
    std::uint64_t id = 0;
    std::size_t begin = 0; // byte span in the source text
    std::size_t end = 0;
};

enum class TokenizerKind { whitespace, byte_fallback_bpe };

struct TokenizerSpec {
    TokenizerKind kind = TokenizerKind::whitespace;
    std::optional<std::filesystem::path> vocab_source;
    std::string id = "whitespace-v1";

    bool operator==(const TokenizerSpec&) const = default;
};

class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    virtual const std::string& id() const = 0;
    virtual std::vector<Token> encode(std::string_view text) const = 0;
    virtual std::size_t count(std::string_view text) const;

    /// Longest prefix of `text` holding at most `max_tokens` tokens, cut at
    /// the end of the last kept token.
    std::string truncate(std::string_view text, std::size_t max_tokens) const;
};

/// Splits on runs of ASCII whitespace; a token's id is the FNV-1a hash of its bytes.
class WhitespaceTokenizer final : public Tokenizer {
public:
    explicit WhitespaceTokenizer(std::string id = "whitespace-v1");

    const std::string& id() const override { return m_id; }
    std::vector<Token> encode(std::string_view text) const override;
    std::size_t count(std::string_view text) const override;

private:
    std::string m_id;
};

/// Byte-level BPE. Text is pre-split into whitespace and non-whitespace runs,
/// each run starts as raw bytes (ids 0-255) and merges apply by rank; merge
/// i produces id 256 + i.
///
/// Vocabulary file: JSON {"merges": [["a", "b"], ...]} where each entry is a
/// pair of already-known token strings.
class BpeTokenizer final : public Tokenizer {
public:
    BpeTokenizer(std::vector<std::pair<std::string, std::string>> merges, std::string id);
    static BpeTokenizer load(const std::filesystem::path& vocab, std::string id);

    const std::string& id() const override { return m_id; }
    std::vector<Token> encode(std::string_view text) const override;

private:
    std::vector<std::uint32_t> encode_word(std::string_view word) const;

    std::string m_id;
    std::unordered_map<std::string, std::uint32_t> m_token_ids;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> m_merge_rank;
    std::vector<std::size_t> m_token_len;
};

std::unique_ptr<Tokenizer> make_tokenizer(const TokenizerSpec& spec);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace prforge
