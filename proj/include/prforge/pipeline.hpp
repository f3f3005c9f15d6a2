#pragma once

#include "prforge/config.hpp"
#include "prforge/filter.hpp"
#include "prforge/ingest.hpp"
#include "prforge/render.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace prforge::pipeline {

/// Machine-readable summary of one stage run. Rejects are counted under the
/// first reason of each rejected item, so they always sum to
/// inputs - outputs.
struct StageReport {
    std::string stage;
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::map<std::string, std::size_t> rejects;
    std::map<std::string, std::uint64_t> token_totals;
    std::vector<std::string> output_ids;
    nlohmann::json details = nlohmann::json::object();

    void reject(const std::string& reason) { ++rejects[reason]; }
    void accept(const std::string& id)
    {
        ++outputs;
        output_ids.push_back(id);
    }
    std::size_t rejected() const;
};

/// Report line: the report plus config hash and wall-clock time.
nlohmann::json to_json(const StageReport& r, const std::string& config_hash);

/// Appends one line to `path` (created if needed).
void append_report(const std::filesystem::path& path, const StageReport& r, const std::string& config_hash);

// File names inside a pipeline working directory.
inline constexpr const char* kIngestFile = "prs.jsonl";
inline constexpr const char* kGeneralFile = "ctx_gen.jsonl";
inline constexpr const char* kPythonFile = "ctx_py.jsonl";

/// Offline ingestion: validates archive records, resolves base states and
/// writes accepted records to <out_dir>/prs.jsonl.
StageReport ingest_archive(const std::filesystem::path& archive, const std::filesystem::path& out_dir);

/// Live ingestion of every PR of one repository through `source`.
StageReport ingest_repository(ingest::PullRequestSource& source, const std::string& full_name,
    const std::filesystem::path& out_dir);

/// Reads <dir>/prs.jsonl, writes <dir>/ctx_gen.jsonl and/or <dir>/ctx_py.jsonl
/// and one decision line per PR to `decisions_log`.
StageReport run_filter(const std::filesystem::path& dir, const filter::StarRankTable& table, filter::Mode mode,
    const std::filesystem::path& decisions_log, const PipelineConfig& config);

enum class CtxSubset { gen, py };

/// Renders the filtered PRs of one subset into sample lines, applying the
/// Python emission gate, repository blocklist and length filter.
StageReport build_ctx(CtxSubset subset, const std::filesystem::path& dir, const std::filesystem::path& out,
    const PipelineConfig& config, render::ChatEndpoint* endpoint = nullptr);

/// Rollout records → env_pass / env_fail sample files plus a stats file.
StageReport build_env(const std::filesystem::path& in, const std::filesystem::path& out_pass,
    const std::filesystem::path& out_fail, const std::filesystem::path& stats, const PipelineConfig& config);

/// Single streaming pass of the corpus against benchmark instances; writes
/// one line per instance to `report_path`.
StageReport decontam(const std::filesystem::path& corpus, const std::filesystem::path& bench, std::size_t n,
    const std::string& tau, const std::filesystem::path& report_path, const PipelineConfig& config);

/// Builds a manifest from the sample files listed in the plan's inputs.
StageReport mix(const std::filesystem::path& plan, std::uint64_t seed, const std::filesystem::path& out,
    const PipelineConfig& config);

} // namespace prforge::pipeline
