#pragma once

#include "prforge/filter.hpp"
#include "prforge/postprocess.hpp"
#include "prforge/tokenizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace prforge {

struct LlmConfig {
    std::optional<std::string> endpoint; // full chat-completions URL
    std::optional<std::string> model;
    std::optional<std::string> api_key;

    bool operator==(const LlmConfig&) const = default;
};

struct PipelineConfig {
    TokenizerSpec tokenizer;

    std::size_t max_ctx_tokens = 32'768;
    std::size_t max_traj_tokens = 131'072;
    std::size_t ngram_n = 13;
    std::string tau = "0.10"; // kept as written; compared as an exact fraction
    std::int64_t star_rank_cutoff = 10'000;
    std::int64_t min_stars = 5;
    std::size_t min_py_files = 1;
    std::size_t max_py_files = 5;

    std::optional<std::filesystem::path> blocklist;
    std::optional<std::filesystem::path> ranks;
    LlmConfig llm;

    std::uint64_t seed = 0;

    filter::Thresholds filter_thresholds() const;
    postprocess::Ratio tau_ratio() const;
};

/// Missing keys take defaults; unknown keys are rejected. Throws ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical form with every key present.
nlohmann::json to_json(const PipelineConfig& c);

/// FNV-1a of the canonical form, 16 hex digits.
std::string config_hash(const PipelineConfig& c);

} // namespace prforge
