#include "prforge/model.hpp"

#include "prforge/error.hpp"

#include <algorithm>
#include <numeric>

namespace prforge {

std::string PullRequestRecord::id() const
{
    return repo.full_name + "#" + std::to_string(number);
}

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::comment:
        return "comment";
    case EventKind::review:
        return "review";
    case EventKind::review_comment:
        return "review_comment";
    case EventKind::status_change:
        return "status_change";
    }
    return "comment";
}

const char* to_string(ReviewState state)
{
    switch (state) {
    case ReviewState::approved:
        return "approved";
    case ReviewState::changes_requested:
        return "changes_requested";
    case ReviewState::commented:
        return "commented";
    }
    return "commented";
}

EventKind parse_event_kind(const std::string& text)
{
    if (text == "comment")
        return EventKind::comment;
    if (text == "review")
        return EventKind::review;
    if (text == "review_comment")
        return EventKind::review_comment;
    if (text == "status_change")
        return EventKind::status_change;
    throw IngestError("malformed", "unknown event kind '" + text + "'");
}

ReviewState parse_review_state(const std::string& text)
{
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "approved")
        return ReviewState::approved;
    if (lower == "changes_requested")
        return ReviewState::changes_requested;
    if (lower == "commented")
        return ReviewState::commented;
    throw IngestError("malformed", "unknown review state '" + text + "'");
}

void normalize_events(std::vector<InteractionEvent>& events)
{
    std::stable_sort(events.begin(), events.end(), [](const InteractionEvent& a, const InteractionEvent& b) {
        if (a.timestamp != b.timestamp)
            return a.timestamp < b.timestamp;
        if (a.kind != b.kind)
            return a.kind < b.kind;
        return a.author < b.author;
    });
}

void validate(const PullRequestRecord& pr)
{
    auto fail = [&](const std::string& what) { throw IngestError("malformed", pr.id() + ": " + what); };

    if (std::count(pr.repo.full_name.begin(), pr.repo.full_name.end(), '/') != 1)
        fail("repository name must be owner/repo");
    if (pr.repo.stars < 0)
        fail("negative star count");
    if (pr.number <= 0)
        fail("PR number must be positive");
    if (pr.merged && pr.commits.empty())
        fail("merged PR without commits");
    for (const auto& c : pr.commits) {
        const bool hex = c.sha.size() == 40
            && std::all_of(c.sha.begin(), c.sha.end(), [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)); });
        if (!hex)
            fail("commit sha '" + c.sha + "' is not 40 hex characters");
    }
    for (std::size_t i = 0; i < pr.events.size(); ++i) {
        const auto& e = pr.events[i];
        if ((e.kind == EventKind::review) != e.review_state.has_value())
            fail("review_state must be present exactly on review events");
        if (i > 0 && e.timestamp < pr.events[i - 1].timestamp)
            fail("events are not in timestamp order");
    }
}

} // namespace prforge
