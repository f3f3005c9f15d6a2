#include "prforge/mixer.hpp"

#include "prforge/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace prforge::mixer {

using nlohmann::json;

Plan default_plan()
{
    Plan p;
    p.stages.push_back({ "stage1", { { SampleSubset::ctx_gen, 1 } } });
    p.stages.push_back({ "stage2",
        { { SampleSubset::ctx_py, 1 }, { SampleSubset::env_fail, 1 }, { SampleSubset::env_pass, 3 } } });
    return p;
}

json to_json(const Plan& plan)
{
    json stages = json::array();
    for (const auto& s : plan.stages) {
        json comps = json::array();
        for (const auto& c : s.components)
            comps.push_back({ { "subset", to_string(c.subset) }, { "factor", c.factor } });
        stages.push_back({ { "name", s.name }, { "components", std::move(comps) } });
    }
    json j { { "stages", std::move(stages) } };
    if (!plan.inputs.empty())
        j["inputs"] = plan.inputs;
    return j;
}

Plan plan_from_json(const json& j)
{
    Plan p;
    try {
        // A plan without stages means the default staging.
        if (!j.contains("stages"))
            p.stages = default_plan().stages;
        std::set<std::string> names;
        for (const auto& s : j.value("stages", json::array())) {
            StagePlan stage;
            stage.name = s.at("name").get<std::string>();
            if (!names.insert(stage.name).second)
                throw ConfigError("duplicate stage name '" + stage.name + "'");
            for (const auto& c : s.at("components")) {
                Component comp;
                comp.subset = parse_sample_subset(c.at("subset").get<std::string>());
                comp.factor = c.value("factor", std::size_t { 1 });
                if (comp.factor == 0)
                    throw ConfigError("upsampling factor must be positive");
                stage.components.push_back(comp);
            }
            p.stages.push_back(std::move(stage));
        }
        if (j.contains("inputs"))
            p.inputs = j.at("inputs").get<std::map<std::string, std::vector<std::string>>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad plan: ") + e.what());
    }
    for (const auto& [subset, files] : p.inputs)
        (void)parse_sample_subset(subset);
    return p;
}

Plan load_plan(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read plan " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("bad plan " + path.string() + ": " + e.what());
    }
    Plan p = plan_from_json(j);
    // Relative input paths are resolved against the plan's directory.
    for (auto& [subset, files] : p.inputs)
        for (auto& f : files)
            if (std::filesystem::path(f).is_relative())
                f = (path.parent_path() / f).string();
    return p;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound)
{
    if (bound <= 1)
        return 0;
    // Largest multiple of bound representable; draws above it are rejected.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

Manifest build_manifest(const std::map<SampleSubset, std::vector<SampleRef>>& subsets, const Plan& plan,
    std::uint64_t seed, const std::string& tokenizer_id)
{
    for (const auto& [subset, refs] : subsets) {
        std::set<std::string_view> seen;
        for (const auto& r : refs)
            if (!seen.insert(r.id).second)
                throw Error("duplicate_sample_id", std::string(to_string(subset)) + " contains '" + r.id + "' twice");
    }

    Manifest m;
    m.seed = seed;
    m.tokenizer_id = tokenizer_id;
    m.plan = plan;
    std::mt19937_64 rng(seed);
    static const std::vector<SampleRef> none;
    for (const auto& stage : plan.stages) {
        std::vector<Entry> entries;
        for (const auto& comp : stage.components) {
            const auto it = subsets.find(comp.subset);
            const auto& refs = it == subsets.end() ? none : it->second;
            for (const auto& r : refs)
                for (std::size_t k = 1; k <= comp.factor; ++k)
                    entries.push_back({ stage.name, r.id, comp.subset, k, r.tokens });
        }
        shuffle(entries, rng);
        for (auto& e : entries)
            m.entries.push_back(std::move(e));
    }
    return m;
}

json header_json(const Manifest& m)
{
    json plan = to_json(m.plan);
    plan.erase("inputs");
    return json {
        { "seed", m.seed },
        { "tokenizer_id", m.tokenizer_id },
        { "prng", kPrngName },
        { "plan", std::move(plan) },
        { "epochs", 1 },
    };
}

json to_json(const Entry& e)
{
    return json {
        { "stage", e.stage },
        { "id", e.id },
        { "subset", to_string(e.subset) },
        { "rep", e.rep },
        { "tokens", e.tokens },
    };
}

Entry entry_from_json(const json& j)
{
    Entry e;
    e.stage = j.at("stage").get<std::string>();
    e.id = j.at("id").get<std::string>();
    e.subset = parse_sample_subset(j.at("subset").get<std::string>());
    e.rep = j.at("rep").get<std::size_t>();
    e.tokens = j.at("tokens").get<std::size_t>();
    return e;
}

void write_manifest(std::ostream& out, const Manifest& m)
{
    out << dump_line(header_json(m));
    for (const auto& e : m.entries)
        out << dump_line(to_json(e));
}

void write_manifest(const std::filesystem::path& path, const Manifest& m)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("io", "cannot write " + path.string());
    write_manifest(out, m);
}

Manifest read_manifest(const std::filesystem::path& path)
{
    JsonLinesReader reader(path);
    auto header = reader.next();
    if (!header)
        throw Error("malformed", path.string() + ": empty manifest");
    Manifest m;
    try {
        m.seed = header->at("seed").get<std::uint64_t>();
        m.tokenizer_id = header->at("tokenizer_id").get<std::string>();
        m.plan = plan_from_json(header->at("plan"));
        while (auto j = reader.next())
            m.entries.push_back(entry_from_json(*j));
    } catch (const json::exception& e) {
        throw Error("malformed", path.string() + ":" + std::to_string(reader.line_no()) + ": " + e.what());
    }
    return m;
}

void TokenStats::add(const Entry& e)
{
    auto& s = subsets[to_string(e.subset)];
    ++s.entries;
    s.effective += e.tokens;
    if (e.rep == 1) {
        ++s.samples;
        s.raw += e.tokens;
        raw += e.tokens;
    }
    stages[e.stage] += e.tokens;
    effective += e.tokens;
}

void TokenStats::merge(const TokenStats& o)
{
    for (const auto& [name, t] : o.subsets) {
        auto& s = subsets[name];
        s.raw += t.raw;
        s.effective += t.effective;
        s.samples += t.samples;
        s.entries += t.entries;
    }
    for (const auto& [name, t] : o.stages)
        stages[name] += t;
    raw += o.raw;
    effective += o.effective;
}

TokenStats token_stats(const Manifest& m)
{
    TokenStats s;
    for (const auto& e : m.entries)
        s.add(e);
    return s;
}

TokenStats token_stats(const std::filesystem::path& manifest)
{
    JsonLinesReader reader(manifest);
    if (!reader.next())
        throw Error("malformed", manifest.string() + ": empty manifest");
    TokenStats s;
    try {
        while (auto j = reader.next())
            s.add(entry_from_json(*j));
    } catch (const json::exception& e) {
        throw Error("malformed", manifest.string() + ":" + std::to_string(reader.line_no()) + ": " + e.what());
    }
    return s;
}

std::string three_sig(double value)
{
    if (value == 0.0 || !std::isfinite(value))
        return value == 0.0 ? "0.00" : "nan";
    const int exponent = static_cast<int>(std::floor(std::log10(std::fabs(value))));
    const int decimals = 2 - exponent;
    char buf[64];
    if (decimals >= 0) {
        std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    } else {
        const double scale = std::pow(10.0, -decimals);
        std::snprintf(buf, sizeof buf, "%.0f", std::round(value / scale) * scale);
    }
    return buf;
}

json to_json(const TokenStats& s)
{
    json subsets = json::object();
    for (const auto& [name, t] : s.subsets) {
        subsets[name] = {
            { "raw_tokens", t.raw },
            { "effective_tokens", t.effective },
            { "samples", t.samples },
            { "entries", t.entries },
            { "upsample_ratio", t.raw ? three_sig(static_cast<double>(t.effective) / static_cast<double>(t.raw)) : "0.00" },
            { "share_of_effective",
                s.effective ? three_sig(static_cast<double>(t.effective) / static_cast<double>(s.effective)) : "0.00" },
        };
    }
    return json {
        { "subsets", std::move(subsets) },
        { "stages", s.stages },
        { "raw_tokens", s.raw },
        { "effective_tokens", s.effective },
        { "effective_to_raw", s.raw ? three_sig(static_cast<double>(s.effective) / static_cast<double>(s.raw)) : "0.00" },
    };
}

} // namespace prforge::mixer
