#include "prforge/config.hpp"

#include "prforge/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace prforge {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where)
{
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

std::optional<std::string> opt_string(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    return it->get<std::string>();
}

template <class T>
void read_positive(const json& j, const char* key, T& out)
{
    const auto it = j.find(key);
    if (it == j.end())
        return;
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0)
        throw ConfigError(std::string("thresholds.") + key + " must be a positive integer");
    out = it->get<T>();
}

json opt_json(const std::optional<std::string>& s)
{
    return s ? json(*s) : json(nullptr);
}

json opt_json(const std::optional<std::filesystem::path>& p)
{
    return p ? json(p->string()) : json(nullptr);
}

} // namespace

filter::Thresholds PipelineConfig::filter_thresholds() const
{
    filter::Thresholds t;
    t.star_rank_cutoff = star_rank_cutoff;
    t.min_stars = min_stars;
    t.min_py_files = min_py_files;
    t.max_py_files = max_py_files;
    return t;
}

postprocess::Ratio PipelineConfig::tau_ratio() const
{
    return postprocess::parse_decimal(tau);
}

PipelineConfig config_from_json(const json& j)
{
    PipelineConfig c;
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    try {
        reject_unknown(j, { "tokenizer", "thresholds", "paths", "seed" }, "config");

        if (const auto tok = j.find("tokenizer"); tok != j.end()) {
            reject_unknown(*tok, { "kind", "id", "vocab" }, "tokenizer");
            const std::string kind = tok->value("kind", std::string("whitespace"));
            if (kind == "whitespace") {
                c.tokenizer.kind = TokenizerKind::whitespace;
            } else if (kind == "byte_fallback_bpe") {
                c.tokenizer.kind = TokenizerKind::byte_fallback_bpe;
                c.tokenizer.id = "bpe";
            } else {
                throw ConfigError("unknown tokenizer kind '" + kind + "'");
            }
            c.tokenizer.id = tok->value("id", c.tokenizer.id);
            if (auto v = opt_string(*tok, "vocab"))
                c.tokenizer.vocab_source = *v;
            if (c.tokenizer.kind == TokenizerKind::byte_fallback_bpe && !c.tokenizer.vocab_source)
                throw ConfigError("byte_fallback_bpe tokenizer needs tokenizer.vocab");
        }

        if (const auto t = j.find("thresholds"); t != j.end()) {
            reject_unknown(*t,
                { "max_ctx_tokens", "max_traj_tokens", "ngram_n", "tau", "star_rank_cutoff", "min_stars",
                    "py_file_range" },
                "thresholds");
            read_positive(*t, "max_ctx_tokens", c.max_ctx_tokens);
            read_positive(*t, "max_traj_tokens", c.max_traj_tokens);
            read_positive(*t, "ngram_n", c.ngram_n);
            read_positive(*t, "star_rank_cutoff", c.star_rank_cutoff);
            read_positive(*t, "min_stars", c.min_stars);
            if (const auto tau = t->find("tau"); tau != t->end()) {
                if (tau->is_string()) {
                    c.tau = tau->get<std::string>();
                } else if (tau->is_number()) {
                    // Re-read numbers through their shortest decimal spelling.
                    c.tau = tau->dump();
                } else {
                    throw ConfigError("thresholds.tau must be a number");
                }
                const auto r = postprocess::parse_decimal(c.tau);
                if (r.num == 0 || r.num > r.den)
                    throw ConfigError("thresholds.tau must be in (0, 1]");
            }
            if (const auto range = t->find("py_file_range"); range != t->end()) {
                if (!range->is_array() || range->size() != 2)
                    throw ConfigError("thresholds.py_file_range must be [min, max]");
                const auto lo = (*range)[0].get<std::int64_t>();
                const auto hi = (*range)[1].get<std::int64_t>();
                if (lo <= 0 || hi < lo)
                    throw ConfigError("thresholds.py_file_range must satisfy 0 < min <= max");
                c.min_py_files = static_cast<std::size_t>(lo);
                c.max_py_files = static_cast<std::size_t>(hi);
            }
        }

        if (const auto p = j.find("paths"); p != j.end()) {
            reject_unknown(*p, { "blocklist", "ranks", "llm" }, "paths");
            if (auto v = opt_string(*p, "blocklist"))
                c.blocklist = *v;
            if (auto v = opt_string(*p, "ranks"))
                c.ranks = *v;
            if (const auto llm = p->find("llm"); llm != p->end() && !llm->is_null()) {
                reject_unknown(*llm, { "endpoint", "model", "api_key" }, "paths.llm");
                c.llm.endpoint = opt_string(*llm, "endpoint");
                c.llm.model = opt_string(*llm, "model");
                c.llm.api_key = opt_string(*llm, "api_key");
            }
        }

        if (const auto s = j.find("seed"); s != j.end()) {
            if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
                throw ConfigError("seed must be a non-negative integer");
            c.seed = s->get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("bad config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json to_json(const PipelineConfig& c)
{
    return json {
        { "tokenizer",
            { { "kind", c.tokenizer.kind == TokenizerKind::whitespace ? "whitespace" : "byte_fallback_bpe" },
                { "id", c.tokenizer.id }, { "vocab", opt_json(c.tokenizer.vocab_source) } } },
        { "thresholds",
            {
                { "max_ctx_tokens", c.max_ctx_tokens },
                { "max_traj_tokens", c.max_traj_tokens },
                { "ngram_n", c.ngram_n },
                { "tau", c.tau },
                { "star_rank_cutoff", c.star_rank_cutoff },
                { "min_stars", c.min_stars },
                { "py_file_range", { c.min_py_files, c.max_py_files } },
            } },
        { "paths",
            { { "blocklist", opt_json(c.blocklist) }, { "ranks", opt_json(c.ranks) },
                { "llm",
                    { { "endpoint", opt_json(c.llm.endpoint) }, { "model", opt_json(c.llm.model) },
                        // never hash or echo the key itself
                        { "api_key", c.llm.api_key ? json("<set>") : json(nullptr) } } } } },
        { "seed", c.seed },
    };
}

std::string config_hash(const PipelineConfig& c)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
    return buf;
}

} // namespace prforge
