#pragma once

#include "prforge/diff.hpp"
#include "prforge/model.hpp"
#include "prforge/net_diff.hpp"
#include "prforge/sample.hpp"
#include "prforge/search_replace.hpp"
#include "prforge/tokenizer.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prforge::render {

struct Budgets {
    std::size_t summary_tokens = 512;
    std::size_t refine_tokens = 256;
    std::size_t patch_chars = 2000;
};

struct Enhancements {
    std::string pr_summary;
    std::vector<std::string> refined_messages; // one per commit
    bool enhanced = false;                     // false: deterministic fallback

    bool operator==(const Enhancements&) const = default;
};

/// Everything derived from a PR's diffs and base snapshot.
struct Reconstruction {
    std::string base_commit;
    std::vector<std::vector<diff::FileChange>> commits; // parsed, PR order
    std::vector<diff::FileChange> net;
    diff::FileMap base; // every touched path present at base
    diff::FileMap head;
};

/// Resolves the base state, parses commits and composes the net diff.
/// Throws RenderError("missing_base_file") when a touched path has no
/// snapshot at the base commit; diff errors propagate with their codes.
Reconstruction reconstruct(const PullRequestRecord& pr);

/// Head state obtained by applying commits one after another (the oracle
/// the net diff must agree with).
diff::FileMap replay_commits(const Reconstruction& r);

/// Net-diff paths read from the base commit, binary changes excluded,
/// sorted. These are the files whose base contents appear in samples.
std::vector<std::string> relevant_files(const Reconstruction& r);

/// Paths present at base that any commit edits, binary changes excluded,
/// sorted. Per-commit edits read all of them, including files whose changes
/// later cancel out of the net diff.
std::vector<std::string> edited_base_files(const Reconstruction& r);

/// Per-commit search/replace edits anchored in each commit's pre-state.
std::vector<std::vector<diff::SearchReplaceEdit>> python_edits(const Reconstruction& r);

// --- enhancement prompts -------------------------------------------------

struct PatchView {
    std::string path;
    std::string patch; // hunk text as the API reports it (no trailing newline)
};

struct CommitView {
    std::string message;
    std::vector<PatchView> diffs;
};

std::vector<CommitView> commit_views(const Reconstruction& r, const PullRequestRecord& pr);

/// First `max_chars` code points of `patch`.
std::string truncate_patch(std::string_view patch, std::size_t max_chars);

std::string build_summary_prompt(const PullRequestRecord& pr, const std::optional<IssueRecord>& issue,
    const std::vector<std::string>& changed_files, const std::vector<CommitView>& commits);

std::string build_commit_refine_prompt(const CommitView& commit, const std::string& pr_summary,
    std::size_t patch_chars = 2000);

/// Chat-completion client. Implementations throw Error("endpoint_failure").
class ChatEndpoint {
public:
    virtual ~ChatEndpoint() = default;
    virtual std::string complete(const std::string& prompt, std::size_t max_tokens) = 0;
};

/// OpenAI-compatible POST to `url` (the full chat-completions URL).
class HttpChatEndpoint final : public ChatEndpoint {
public:
    HttpChatEndpoint(std::string url, std::string model, std::optional<std::string> api_key = std::nullopt);
    std::string complete(const std::string& prompt, std::size_t max_tokens) override;

private:
    std::string m_origin;
    std::string m_path;
    std::string m_model;
    std::optional<std::string> m_api_key;
};

/// Up to the first `count` sentences of `text`, trimmed.
std::string leading_sentences(std::string_view text, std::size_t count);

Enhancements fallback_enhancements(const PullRequestRecord& pr, const Tokenizer& tok, const Budgets& budgets = {});

/// With an endpoint, asks for a summary and one refinement per commit and
/// truncates each to its token budget. Any endpoint failure degrades the
/// whole PR to the fallback (enhanced = false).
Enhancements enhance(const PullRequestRecord& pr, const Reconstruction& r, ChatEndpoint* endpoint,
    const Tokenizer& tok, const Budgets& budgets = {});

// --- formats -------------------------------------------------------------

/// Backtick fence longer than any backtick run inside `content` (min 3).
std::string fence_for(std::string_view content);

RenderedSample render_python(const PullRequestRecord& pr, const Reconstruction& r,
    const std::vector<std::vector<diff::SearchReplaceEdit>>& edits, const Enhancements& enh, const Tokenizer& tok);

RenderedSample render_general(const PullRequestRecord& pr, const Reconstruction& r, const Tokenizer& tok);

struct ParsedPythonSample {
    diff::FileMap relevant_files;
    std::vector<diff::SearchReplaceEdit> edits; // document order
};

/// Reads the Relevant Files and Edits sections back out of a rendered
/// Python-format document. Throws RenderError("unparseable_sample").
ParsedPythonSample parse_python_sample(std::string_view text);

/// Emission gate: re-extracted edits substituted into the sample's own
/// Relevant Files must reproduce the head files byte-for-byte. Throws
/// RenderError("search_replace_mismatch").
void verify_python_sample(const RenderedSample& sample, const Reconstruction& r);

} // namespace prforge::render
