#pragma once

#include "prforge/sample.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace prforge::mixer {

/// Recorded in every manifest so consumers know how entries were ordered.
inline constexpr const char* kPrngName = "mt19937_64/fisher-yates/v1";

struct Component {
    SampleSubset subset = SampleSubset::ctx_gen;
    std::size_t factor = 1; // upsampling repetitions

    bool operator==(const Component&) const = default;
};

struct StagePlan {
    std::string name;
    std::vector<Component> components;

    bool operator==(const StagePlan&) const = default;
};

struct Plan {
    std::vector<StagePlan> stages;
    // Sample files feeding each subset; used by the CLI, ignored by build_manifest.
    std::map<std::string, std::vector<std::string>> inputs;

    bool operator==(const Plan&) const = default;
};

/// stage1 = {ctx_gen x1}; stage2 = {ctx_py x1, env_fail x1, env_pass x3}.
Plan default_plan();

nlohmann::json to_json(const Plan& plan);
/// Throws Error("unknown_subset") or ConfigError.
Plan plan_from_json(const nlohmann::json& j);
Plan load_plan(const std::filesystem::path& path);

/// What the mixer needs to know about a sample.
struct SampleRef {
    std::string id;
    std::size_t tokens = 0;
};

struct Entry {
    std::string stage;
    std::string id;
    SampleSubset subset = SampleSubset::ctx_gen;
    std::size_t rep = 1; // 1..factor
    std::size_t tokens = 0;

    bool operator==(const Entry&) const = default;
};

struct Manifest {
    std::uint64_t seed = 0;
    std::string tokenizer_id;
    Plan plan;
    std::vector<Entry> entries; // linearized: stage order, shuffled within stage
};

/// Uniform integer in [0, bound) by rejection sampling, so results do not
/// depend on the standard library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound);

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

/// Expands each stage's components by their factors and shuffles the stage.
/// Throws Error("duplicate_sample_id") when an id repeats within a subset.
Manifest build_manifest(const std::map<SampleSubset, std::vector<SampleRef>>& subsets, const Plan& plan,
    std::uint64_t seed, const std::string& tokenizer_id);

nlohmann::json header_json(const Manifest& m);
nlohmann::json to_json(const Entry& e);
Entry entry_from_json(const nlohmann::json& j);

void write_manifest(std::ostream& out, const Manifest& m);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

struct SubsetTotals {
    std::uint64_t raw = 0;       // tokens of first repetitions only
    std::uint64_t effective = 0; // tokens of every entry
    std::size_t samples = 0;
    std::size_t entries = 0;
};

struct TokenStats {
    std::map<std::string, SubsetTotals> subsets;
    std::map<std::string, std::uint64_t> stages; // effective tokens
    std::uint64_t raw = 0;
    std::uint64_t effective = 0;

    void add(const Entry& e);
    void merge(const TokenStats& other);
};

TokenStats token_stats(const Manifest& m);
/// Streams a manifest file without holding its entries.
TokenStats token_stats(const std::filesystem::path& manifest);

/// Three significant figures, e.g. 0.226, 1.45, 3.00.
std::string three_sig(double value);

nlohmann::json to_json(const TokenStats& s);

} // namespace prforge::mixer
