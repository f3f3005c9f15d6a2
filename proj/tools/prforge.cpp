// prforge: PR records and agent rollouts in, mid-training samples out.

#include "prforge/config.hpp"
#include "prforge/error.hpp"
#include "prforge/github.hpp"
#include "prforge/mixer.hpp"
#include "prforge/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace prforge;

namespace {

struct Globals {
    std::string config_path;
    std::string report_path = "prforge-report.jsonl";
};

PipelineConfig load(const Globals& g)
{
    return g.config_path.empty() ? PipelineConfig {} : load_config(g.config_path);
}

void finish(const Globals& g, const PipelineConfig& config, const pipeline::StageReport& r)
{
    pipeline::append_report(g.report_path, r, config_hash(config));
    std::cerr << r.stage << ": " << r.inputs << " in, " << r.outputs << " out";
    for (const auto& [reason, count] : r.rejects)
        std::cerr << ", " << reason << "=" << count;
    std::cerr << "\n";
}

filter::Mode parse_mode(const std::string& s)
{
    if (s == "gen")
        return filter::Mode::gen;
    if (s == "py")
        return filter::Mode::py;
    return filter::Mode::both;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "prforge - builds agent-native mid-training corpora from pull requests and rollouts" };
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--run-report", g.report_path, "Append-only stage report file")->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Fetch PRs from GitHub or load an archive");
    std::string repo, archive, ingest_out, api_url = "https://api.github.com";
    auto* repo_opt = ingest->add_option("--repo", repo, "owner/name to fetch live");
    auto* archive_opt = ingest->add_option("--archive", archive, "Line-delimited PR archive")->check(CLI::ExistingFile);
    repo_opt->excludes(archive_opt);
    ingest->add_option("--out", ingest_out, "Output directory")->required();
    ingest->add_option("--api-url", api_url, "GitHub API base URL")->capture_default_str();

    // filter
    auto* filt = app.add_subcommand("filter", "Apply repository and PR admission rules");
    std::string filter_in, ranks, subset_mode, decisions;
    filt->add_option("--in", filter_in, "Ingest directory")->required()->check(CLI::ExistingDirectory);
    filt->add_option("--ranks", ranks, "Star-rank table, most-starred first")->check(CLI::ExistingFile);
    filt->add_option("--subset", subset_mode, "gen|py|both")->required()->check(CLI::IsMember({ "gen", "py", "both" }));
    filt->add_option("--decisions-log", decisions, "Per-PR decision lines")->required();

    // build-ctx
    auto* ctx = app.add_subcommand("build-ctx", "Render filtered PRs into samples");
    std::string ctx_subset, ctx_in, ctx_out, llm_endpoint, llm_model;
    ctx->add_option("--subset", ctx_subset, "gen|py")->required()->check(CLI::IsMember({ "gen", "py" }));
    ctx->add_option("--in", ctx_in, "Filter directory")->required()->check(CLI::ExistingDirectory);
    ctx->add_option("--out", ctx_out, "Sample file")->required();
    ctx->add_option("--llm-endpoint", llm_endpoint, "Chat-completions URL for enhancements");
    ctx->add_option("--llm-model", llm_model, "Model name sent to the endpoint");

    // build-env
    auto* env = app.add_subcommand("build-env", "Split recorded rollouts into pass/fail samples");
    std::string env_in, out_pass, out_fail, env_stats;
    env->add_option("--in", env_in, "Rollout records")->required()->check(CLI::ExistingFile);
    env->add_option("--out-pass", out_pass, "env_pass samples")->required();
    env->add_option("--out-fail", out_fail, "env_fail samples")->required();
    env->add_option("--stats", env_stats, "Split statistics (JSON)")->required();

    // decontam
    auto* dec = app.add_subcommand("decontam", "Score benchmark instances by n-gram leakage");
    std::string corpus, bench, dec_report, tau;
    std::size_t ngram = 0;
    dec->add_option("--corpus", corpus, "Sample file")->required()->check(CLI::ExistingFile);
    dec->add_option("--bench", bench, "Benchmark instances {id, text}")->required()->check(CLI::ExistingFile);
    dec->add_option("--n", ngram, "n-gram size (default from config)");
    dec->add_option("--tau", tau, "Flag threshold, decimal (default from config)");
    dec->add_option("--report", dec_report, "Per-instance scores")->required();

    // mix
    auto* mixc = app.add_subcommand("mix", "Build a staged, shuffled manifest");
    std::string plan, manifest_out;
    std::optional<std::uint64_t> seed;
    mixc->add_option("--plan", plan, "Staging plan with sample inputs")->required()->check(CLI::ExistingFile);
    mixc->add_option("--seed", seed, "Shuffle seed (default from config)");
    mixc->add_option("--out", manifest_out, "Manifest file")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Token accounting for a manifest");
    std::string manifest_in;
    stats->add_option("--manifest", manifest_in, "Manifest file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    std::string stage = "config";
    try {
        const PipelineConfig config = load(g);

        if (*ingest) {
            stage = "ingest";
            if (repo.empty() == archive.empty())
                throw ConfigError("ingest needs exactly one of --repo or --archive");
            if (!archive.empty()) {
                finish(g, config, pipeline::ingest_archive(archive, ingest_out));
            } else {
                ingest::GitHubOptions options;
                options.base_url = api_url;
                ingest::GitHubClient client(options);
                finish(g, config, pipeline::ingest_repository(client, repo, ingest_out));
            }
        } else if (*filt) {
            stage = "filter";
            const auto mode = parse_mode(subset_mode);
            filter::StarRankTable table;
            const std::string rank_file = !ranks.empty() ? ranks : config.ranks ? config.ranks->string() : "";
            if (!rank_file.empty())
                table = filter::StarRankTable::load(rank_file);
            else if (mode != filter::Mode::py)
                throw ConfigError("--ranks (or paths.ranks) is required for the general subset");
            finish(g, config, pipeline::run_filter(filter_in, table, mode, decisions, config));
        } else if (*ctx) {
            stage = "build-ctx";
            PipelineConfig c = config;
            if (!llm_endpoint.empty())
                c.llm.endpoint = llm_endpoint;
            if (!llm_model.empty())
                c.llm.model = llm_model;
            std::unique_ptr<render::ChatEndpoint> endpoint;
            if (c.llm.endpoint)
                endpoint = std::make_unique<render::HttpChatEndpoint>(*c.llm.endpoint, c.llm.model.value_or(""), c.llm.api_key);
            const auto which = ctx_subset == "py" ? pipeline::CtxSubset::py : pipeline::CtxSubset::gen;
            finish(g, config, pipeline::build_ctx(which, ctx_in, ctx_out, c, endpoint.get()));
        } else if (*env) {
            stage = "build-env";
            finish(g, config, pipeline::build_env(env_in, out_pass, out_fail, env_stats, config));
        } else if (*dec) {
            stage = "decontam";
            const std::size_t n = ngram ? ngram : config.ngram_n;
            const std::string t = tau.empty() ? config.tau : tau;
            finish(g, config, pipeline::decontam(corpus, bench, n, t, dec_report, config));
        } else if (*mixc) {
            stage = "mix";
            finish(g, config, pipeline::mix(plan, seed.value_or(config.seed), manifest_out, config));
        } else if (*stats) {
            stage = "stats";
            std::cout << mixer::to_json(mixer::token_stats(manifest_in)).dump(2) << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "prforge: " << stage << ": config_invalid: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "prforge: " << stage << ": " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "prforge: " << stage << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
