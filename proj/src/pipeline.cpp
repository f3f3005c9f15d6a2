#include "prforge/pipeline.hpp"

#include "prforge/error.hpp"
#include "prforge/mixer.hpp"
#include "prforge/net_diff.hpp"
#include "prforge/postprocess.hpp"
#include "prforge/trajectory.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>

namespace prforge::pipeline {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("io", "cannot write " + path.string());
    return out;
}

std::vector<diff::FileChange> net_of(const PullRequestRecord& pr)
{
    std::vector<std::vector<diff::FileChange>> commits;
    for (const auto& c : pr.commits) {
        std::vector<diff::FileChange> changes;
        for (const auto& text : c.diffs)
            for (auto& ch : diff::parse_unified_diff(text))
                changes.push_back(std::move(ch));
        commits.push_back(std::move(changes));
    }
    return diff::net_diff(commits);
}

// Checks everything later stages rely on; returns a reject reason or "".
std::string admit(const PullRequestRecord& pr)
{
    if (pr.truncated)
        return "truncated";
    try {
        const auto base = ingest::resolve_base_state(pr);
        const auto snap = pr.file_snapshots.find(base);
        for (const auto& path : ingest::touched_source_paths(pr))
            if (snap == pr.file_snapshots.end() || !snap->second.count(path))
                return "missing_base_file";
    } catch (const Error& e) {
        return e.code();
    }
    return {};
}

template <class Fn>
void for_each_record(const std::filesystem::path& path, StageReport& report, Fn&& fn)
{
    ingest::ArchiveReader reader(path);
    while (auto item = reader.next()) {
        ++report.inputs;
        if (auto* bad = std::get_if<ingest::Malformed>(&*item)) {
            std::cerr << "prforge: " << path.string() << ":" << bad->line_no << ": " << bad->message << "\n";
            report.reject("malformed");
            continue;
        }
        fn(std::get<PullRequestRecord>(*item));
    }
}

} // namespace

std::size_t StageReport::rejected() const
{
    std::size_t n = 0;
    for (const auto& [reason, count] : rejects)
        n += count;
    return n;
}

json to_json(const StageReport& r, const std::string& config_hash)
{
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::system_clock::now().time_since_epoch());
    return json {
        { "stage", r.stage },
        { "inputs", r.inputs },
        { "outputs", r.outputs },
        { "rejects", r.rejects },
        { "token_totals", r.token_totals },
        { "output_ids", r.output_ids },
        { "details", r.details },
        { "config_hash", config_hash },
        { "timestamp", format_timestamp(Timestamp { now.count() }) },
    };
}

void append_report(const std::filesystem::path& path, const StageReport& r, const std::string& config_hash)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    JsonLinesWriter(path, true).write(to_json(r, config_hash));
}

StageReport ingest_archive(const std::filesystem::path& archive, const std::filesystem::path& out_dir)
{
    StageReport report;
    report.stage = "ingest";
    std::filesystem::create_directories(out_dir);
    auto out = open_out(out_dir / kIngestFile);
    for_each_record(archive, report, [&](const PullRequestRecord& pr) {
        if (auto why = admit(pr); !why.empty()) {
            report.reject(why);
            return;
        }
        out << ingest::to_archive_line(pr);
        report.accept(pr.id());
    });
    return report;
}

StageReport ingest_repository(ingest::PullRequestSource& source, const std::string& full_name,
    const std::filesystem::path& out_dir)
{
    StageReport report;
    report.stage = "ingest";
    std::filesystem::create_directories(out_dir);
    auto out = open_out(out_dir / kIngestFile);
    const auto repo = source.fetch_repository(full_name);
    std::string cursor;
    do {
        auto page = source.fetch_pull_requests(repo, cursor);
        for (auto& pr : page.records) {
            ++report.inputs;
            if (pr.truncated) {
                report.reject("truncated");
                continue;
            }
            try {
                const auto base = ingest::resolve_base_state(pr);
                ingest::attach_base_files(pr, base,
                    [&](const std::string& path) { return source.fetch_file_at_commit(repo, path, base); });
            } catch (const Error& e) {
                report.reject(e.code());
                continue;
            }
            out << ingest::to_archive_line(pr);
            report.accept(pr.id());
        }
        cursor = page.next_cursor.value_or("");
    } while (!cursor.empty());
    report.details["repository"] = full_name;
    return report;
}

StageReport run_filter(const std::filesystem::path& dir, const filter::StarRankTable& table, filter::Mode mode,
    const std::filesystem::path& decisions_log, const PipelineConfig& config)
{
    StageReport report;
    report.stage = "filter";
    const bool want_gen = mode != filter::Mode::py;
    const bool want_py = mode != filter::Mode::gen;
    std::ofstream gen_out, py_out;
    if (want_gen)
        gen_out = open_out(dir / kGeneralFile);
    if (want_py)
        py_out = open_out(dir / kPythonFile);
    JsonLinesWriter log(decisions_log);
    const auto thresholds = config.filter_thresholds();
    std::size_t gen_count = 0, py_count = 0;

    for_each_record(dir / kIngestFile, report, [&](const PullRequestRecord& pr) {
        filter::FilterDecision d;
        try {
            d = filter::classify(pr, pr.repo, net_of(pr), table, thresholds, mode);
        } catch (const Error& e) {
            d = { false, filter::Subset::none, { e.code() } };
        }
        log.write({ { "id", pr.id() }, { "accepted", d.accepted }, { "subset", filter::to_string(d.subset) },
            { "reasons", d.reasons } });
        if (!d.accepted) {
            report.reject(d.reasons.front());
            return;
        }
        const std::string line = ingest::to_archive_line(pr);
        if (d.subset == filter::Subset::ctx_gen || d.subset == filter::Subset::both) {
            gen_out << line;
            ++gen_count;
        }
        if (d.subset == filter::Subset::ctx_py || d.subset == filter::Subset::both) {
            py_out << line;
            ++py_count;
        }
        report.accept(pr.id());
    });
    report.details["ctx_gen"] = gen_count;
    report.details["ctx_py"] = py_count;
    return report;
}

StageReport build_ctx(CtxSubset subset, const std::filesystem::path& dir, const std::filesystem::path& out_path,
    const PipelineConfig& config, render::ChatEndpoint* endpoint)
{
    StageReport report;
    const bool py = subset == CtxSubset::py;
    report.stage = py ? "build-ctx:py" : "build-ctx:gen";
    const auto tok = make_tokenizer(config.tokenizer);
    std::optional<postprocess::Blocklist> blocklist;
    if (config.blocklist)
        blocklist = postprocess::Blocklist::load(*config.blocklist);

    auto out = open_out(out_path);
    std::size_t enhanced = 0;
    for_each_record(dir / (py ? kPythonFile : kGeneralFile), report, [&](const PullRequestRecord& pr) {
        RenderedSample sample;
        try {
            const auto r = render::reconstruct(pr);
            if (py) {
                const auto edits = render::python_edits(r);
                const auto enh = render::enhance(pr, r, endpoint, *tok);
                sample = render::render_python(pr, r, edits, enh, *tok);
                render::verify_python_sample(sample, r);
            } else {
                sample = render::render_general(pr, r, *tok);
            }
        } catch (const Error& e) {
            report.reject(e.code());
            return;
        }
        if (blocklist && !postprocess::repo_decontaminate(sample, *blocklist)) {
            report.reject("blocklisted_repo");
            return;
        }
        if (!postprocess::length_filter(sample, config.max_ctx_tokens)) {
            report.reject("too_long");
            return;
        }
        out << dump_line(to_json(sample));
        enhanced += sample.enhanced ? 1 : 0;
        report.token_totals[to_string(sample.subset)] += sample.token_count;
        report.accept(sample.id);
    });
    report.details["tokenizer_id"] = tok->id();
    report.details["enhanced"] = enhanced;
    return report;
}

StageReport build_env(const std::filesystem::path& in_path, const std::filesystem::path& out_pass,
    const std::filesystem::path& out_fail, const std::filesystem::path& stats_path, const PipelineConfig& config)
{
    StageReport report;
    report.stage = "build-env";
    const auto tok = make_tokenizer(config.tokenizer);
    std::ifstream in(in_path, std::ios::binary);
    if (!in)
        throw Error("io", "cannot open " + in_path.string());
    auto pass_out = open_out(out_pass);
    auto fail_out = open_out(out_fail);
    trajectory::Splitter splitter(config.max_traj_tokens);

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        ++report.inputs;
        trajectory::Trajectory t;
        try {
            t = trajectory::parse_trajectory(json::parse(line), *tok);
        } catch (const json::exception& e) {
            std::cerr << "prforge: " << in_path.string() << ":" << line_no << ": " << e.what() << "\n";
            report.reject("malformed_record");
            continue;
        } catch (const Error& e) {
            std::cerr << "prforge: " << in_path.string() << ":" << line_no << ": " << e.what() << "\n";
            report.reject(e.code());
            continue;
        }
        const auto where = splitter.offer(t);
        if (where == trajectory::Disposition::too_long) {
            report.reject("too_long");
            continue;
        }
        const auto sample = trajectory::to_sample(t);
        (where == trajectory::Disposition::pass ? pass_out : fail_out) << dump_line(to_json(sample));
        report.token_totals[to_string(sample.subset)] += sample.token_count;
        report.accept(sample.id);
    }

    const json stats {
        { "env_pass", { { "count", splitter.pass_stats().count }, { "tokens", splitter.pass_stats().tokens } } },
        { "env_fail", { { "count", splitter.fail_stats().count }, { "tokens", splitter.fail_stats().tokens } } },
        { "dropped_too_long", splitter.dropped() },
        { "max_tokens", config.max_traj_tokens },
        { "tokenizer_id", tok->id() },
    };
    auto stats_out = open_out(stats_path);
    stats_out << stats.dump(2) << "\n";
    report.details = stats;
    return report;
}

StageReport decontam(const std::filesystem::path& corpus, const std::filesystem::path& bench, std::size_t n,
    const std::string& tau_text, const std::filesystem::path& report_path, const PipelineConfig& config)
{
    StageReport report;
    report.stage = "decontam";
    const auto tok = make_tokenizer(config.tokenizer);
    const auto tau = postprocess::parse_decimal(tau_text);

    std::vector<postprocess::BenchmarkInstance> instances;
    {
        JsonLinesReader reader(bench);
        while (auto j = reader.next()) {
            try {
                instances.push_back({ j->at("id").get<std::string>(), j->at("text").get<std::string>() });
            } catch (const json::exception& e) {
                throw Error("malformed", bench.string() + ":" + std::to_string(reader.line_no()) + ": " + e.what());
            }
        }
    }
    const postprocess::NgramIndex index(instances, *tok, n);
    for (const auto& id : index.skipped())
        std::cerr << "prforge: warning: benchmark instance " << id << " has fewer than " << n
                  << " tokens; excluded from the scan\n";

    postprocess::ContaminationScanner scanner(index, *tok);
    JsonLinesReader reader(corpus);
    while (auto j = reader.next()) {
        ++report.inputs;
        try {
            scanner.add_sample(j->at("id").get<std::string>(), j->at("text").get<std::string>());
        } catch (const json::exception&) {
            report.reject("malformed");
            continue;
        }
        ++report.outputs; // n-gram hits flag benchmark instances, not samples
    }

    const auto result = scanner.report(tau);
    auto out = open_out(report_path);
    for (const auto& s : result.scores)
        out << dump_line(postprocess::to_json(s));
    for (const auto& id : result.skipped)
        out << dump_line(json { { "instance_id", id }, { "score", nullptr }, { "argmax_sample", nullptr },
            { "flagged", false }, { "skipped", true } });
    report.details = {
        { "instances", instances.size() },
        { "indexed", index.size() },
        { "skipped", result.skipped },
        { "flagged", result.flagged() },
        { "n", n },
        { "tau", tau_text },
        { "tokenizer_id", tok->id() },
    };
    return report;
}

StageReport mix(const std::filesystem::path& plan_path, std::uint64_t seed, const std::filesystem::path& out,
    const PipelineConfig& config)
{
    StageReport report;
    report.stage = "mix";
    const auto plan = mixer::load_plan(plan_path);

    std::set<SampleSubset> planned;
    for (const auto& stage : plan.stages)
        for (const auto& c : stage.components)
            planned.insert(c.subset);

    std::map<SampleSubset, std::vector<mixer::SampleRef>> subsets;
    for (const auto& [name, files] : plan.inputs) {
        const auto subset = parse_sample_subset(name);
        for (const auto& file : files) {
            JsonLinesReader reader(file);
            while (auto j = reader.next()) {
                ++report.inputs;
                const auto sample = sample_from_json(*j);
                if (sample.subset != subset)
                    throw Error("subset_mismatch",
                        file + ": sample " + sample.id + " is " + to_string(sample.subset) + ", listed as " + name);
                if (!planned.count(subset)) {
                    report.reject("not_in_plan");
                    continue;
                }
                subsets[subset].push_back({ sample.id, sample.token_count });
                ++report.outputs;
            }
        }
    }
    const auto m = mixer::build_manifest(subsets, plan, seed, make_tokenizer(config.tokenizer)->id());
    mixer::write_manifest(out, m);
    const auto stats = mixer::token_stats(m);
    for (const auto& [name, t] : stats.subsets)
        report.token_totals[name] = t.effective;
    report.details = { { "entries", m.entries.size() }, { "seed", seed }, { "stats", mixer::to_json(stats) } };
    return report;
}

} // namespace prforge::pipeline
