#include "prforge/trajectory.hpp"

#include "prforge/error.hpp"

namespace prforge::trajectory {

using nlohmann::json;

namespace {

constexpr std::string_view kSystem = "<|system|>";
constexpr std::string_view kUser = "<|user|>";
constexpr std::string_view kAssistant = "<|assistant|>";
constexpr std::string_view kTool = "<|tool|>";

[[noreturn]] void malformed(const std::string& why)
{
    throw Error("malformed_record", why);
}

[[noreturn]] void alternation(std::size_t step, const std::string& why)
{
    throw Error("alternation_violation", "step " + std::to_string(step) + ": " + why);
}

std::string required_string(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        malformed(std::string("missing string field '") + key + "'");
    return it->get<std::string>();
}

// Content lines that could be mistaken for a role marker (or an escaped one)
// get a leading backslash.
void append_block(std::string& out, std::string_view marker, std::string_view content)
{
    out += marker;
    out += '\n';
    std::size_t pos = 0;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        const auto end = nl == std::string_view::npos ? content.size() : nl + 1;
        const auto line = content.substr(pos, end - pos);
        if (line.starts_with("<|") || line.starts_with("\\"))
            out += '\\';
        out += line;
        pos = end;
    }
    out += '\n';
}

} // namespace

const char* to_string(Outcome o)
{
    return o == Outcome::pass ? "pass" : "fail";
}

std::string Trajectory::id() const
{
    return task_id + "#r" + std::to_string(rollout_index);
}

Outcome classify(const TestOutcome& o)
{
    return o.total > 0 && o.failed == 0 && o.passed == o.total ? Outcome::pass : Outcome::fail;
}

Trajectory parse_trajectory(const json& record, const Tokenizer& tok)
{
    if (!record.is_object())
        malformed("record is not an object");
    Trajectory t;
    t.task_id = required_string(record, "task_id");
    t.problem = required_string(record, "problem");
    t.repo_ref = required_string(record, "repo_ref");
    if (t.task_id.empty())
        malformed("empty task_id");

    const auto idx = record.find("rollout_index");
    if (idx == record.end() || !idx->is_number_integer())
        malformed("missing rollout_index");
    t.rollout_index = idx->get<int>();
    if (t.rollout_index < 1 || t.rollout_index > kMaxRollouts)
        malformed("rollout_index out of range [1,4]");

    if (const auto steps = record.find("steps"); steps != record.end()) {
        if (!steps->is_array())
            malformed("steps is not an array");
        for (std::size_t i = 0; i < steps->size(); ++i) {
            const auto& s = (*steps)[i];
            if (!s.is_object())
                malformed("step " + std::to_string(i) + " is not an object");
            const auto a = s.find("action");
            if (a == s.end() || !a->is_string() || a->get<std::string>().empty())
                alternation(i, "observation without an action");
            const auto o = s.find("observation");
            const bool last = i + 1 == steps->size();
            if (o == s.end() || o->is_null()) {
                if (!last)
                    alternation(i, "action without an observation");
                t.steps.push_back({ a->get<std::string>(), "" });
                continue;
            }
            if (!o->is_string())
                malformed("observation is not a string");
            if (o->get<std::string>().empty() && !last)
                alternation(i, "empty observation before the final step");
            t.steps.push_back({ a->get<std::string>(), o->get<std::string>() });
        }
    } else if (const auto turns = record.find("turns"); turns != record.end()) {
        if (!turns->is_array())
            malformed("turns is not an array");
        for (std::size_t i = 0; i < turns->size(); ++i) {
            const auto& turn = (*turns)[i];
            const std::string role = required_string(turn, "role");
            const std::string content = required_string(turn, "content");
            const bool want_action = i % 2 == 0;
            const std::size_t step = i / 2;
            if (role != "action" && role != "observation")
                malformed("unknown role '" + role + "'");
            if (want_action && role != "action")
                alternation(step, "observation without an action");
            if (!want_action && role != "observation")
                alternation(step, "two consecutive actions");
            if (want_action) {
                if (content.empty())
                    alternation(step, "empty action");
                t.steps.push_back({ content, "" });
            } else {
                if (content.empty() && i + 1 != turns->size())
                    alternation(step, "empty observation before the final step");
                t.steps.back().observation = content;
            }
        }
    } else {
        malformed("record has neither steps nor turns");
    }
    if (t.steps.empty())
        malformed("trajectory has no steps");

    const auto out = record.find("test_outcome");
    if (out == record.end() || !out->is_object())
        malformed("missing test_outcome");
    try {
        t.test_outcome.total = out->at("total").get<std::int64_t>();
        t.test_outcome.passed = out->at("passed").get<std::int64_t>();
        t.test_outcome.failed = out->at("failed").get<std::int64_t>();
        t.test_outcome.raw_report = out->value("raw_report", std::string());
    } catch (const json::exception& e) {
        malformed(std::string("bad test_outcome: ") + e.what());
    }
    const auto& o = t.test_outcome;
    if (o.total < 0 || o.passed < 0 || o.failed < 0 || o.passed + o.failed > o.total)
        malformed("inconsistent test counters");

    t.outcome = classify(t.test_outcome);
    t.token_count = tok.count(serialize(t));
    return t;
}

json to_json(const Trajectory& t)
{
    json steps = json::array();
    for (const auto& s : t.steps)
        steps.push_back({ { "action", s.action }, { "observation", s.observation } });
    return json {
        { "task_id", t.task_id },
        { "problem", t.problem },
        { "repo_ref", t.repo_ref },
        { "steps", std::move(steps) },
        { "test_outcome",
            { { "total", t.test_outcome.total }, { "passed", t.test_outcome.passed },
                { "failed", t.test_outcome.failed }, { "raw_report", t.test_outcome.raw_report } } },
        { "rollout_index", t.rollout_index },
    };
}

std::string serialize(const Trajectory& t)
{
    std::string out;
    append_block(out, kSystem, "Repository: " + t.repo_ref + "\nTask: " + t.task_id);
    append_block(out, kUser, t.problem);
    for (const auto& s : t.steps) {
        append_block(out, kAssistant, s.action);
        append_block(out, kTool, s.observation);
    }
    return out;
}

RenderedSample to_sample(const Trajectory& t)
{
    RenderedSample s;
    s.id = t.id();
    s.format = SampleFormat::trajectory;
    s.subset = t.outcome == Outcome::pass ? SampleSubset::env_pass : SampleSubset::env_fail;
    s.text = serialize(t);
    s.token_count = t.token_count;
    s.source_repo = t.repo_ref;
    return s;
}

Deserialized from_sample(const RenderedSample& sample)
{
    if (sample.subset != SampleSubset::env_pass && sample.subset != SampleSubset::env_fail)
        malformed("not a trajectory sample");

    struct Block {
        std::string_view marker;
        std::string content;
    };
    std::vector<Block> blocks;
    std::string_view text = sample.text;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto end = nl == std::string_view::npos ? text.size() : nl + 1;
        const auto line = text.substr(pos, end - pos);
        pos = end;
        const auto bare = line.substr(0, line.size() - (line.ends_with('\n') ? 1 : 0));
        if (bare == kSystem || bare == kUser || bare == kAssistant || bare == kTool) {
            blocks.push_back({ bare == kSystem ? kSystem : bare == kUser ? kUser : bare == kAssistant ? kAssistant : kTool, {} });
            continue;
        }
        if (blocks.empty())
            malformed("text before the first role marker");
        blocks.back().content += line.starts_with("\\") ? line.substr(1) : line;
    }
    for (auto& b : blocks) {
        if (!b.content.ends_with('\n'))
            malformed("block without terminator");
        b.content.pop_back();
    }
    if (blocks.size() < 2 || blocks[0].marker != kSystem || blocks[1].marker != kUser || blocks.size() % 2 != 0)
        malformed("unexpected block layout");

    Deserialized d;
    const auto& sys = blocks[0].content;
    const auto split = sys.find("\nTask: ");
    if (!sys.starts_with("Repository: ") || split == std::string::npos)
        malformed("bad system block");
    d.repo_ref = sys.substr(12, split - 12);
    d.task_id = sys.substr(split + 7);
    d.problem = blocks[1].content;
    for (std::size_t i = 2; i < blocks.size(); i += 2) {
        if (blocks[i].marker != kAssistant || blocks[i + 1].marker != kTool)
            malformed("turns do not alternate");
        d.steps.push_back({ blocks[i].content, blocks[i + 1].content });
    }
    d.outcome = sample.subset == SampleSubset::env_pass ? Outcome::pass : Outcome::fail;
    return d;
}

Disposition Splitter::offer(const Trajectory& t)
{
    if (t.token_count > m_max_tokens) {
        ++m_dropped;
        return Disposition::too_long;
    }
    auto& stats = t.outcome == Outcome::pass ? m_pass : m_fail;
    ++stats.count;
    stats.tokens += t.token_count;
    return t.outcome == Outcome::pass ? Disposition::pass : Disposition::fail;
}

Split filter_and_split(const std::vector<Trajectory>& input, std::size_t max_tokens)
{
    Split out;
    Splitter splitter(max_tokens);
    for (const auto& t : input) {
        switch (splitter.offer(t)) {
        case Disposition::pass:
            out.pass.push_back(t);
            break;
        case Disposition::fail:
            out.fail.push_back(t);
            break;
        case Disposition::too_long:
            out.dropped.push_back(t.id());
            break;
        }
    }
    out.pass_stats = splitter.pass_stats();
    out.fail_stats = splitter.fail_stats();
    return out;
}

} // namespace prforge::trajectory
