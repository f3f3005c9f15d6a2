#pragma once

#include "prforge/ingest.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace prforge::ingest {

/// Request budget shared by every worker talking to one API host. Workers
/// block in acquire() while the budget is exhausted; the server's
/// x-ratelimit-* headers refresh it after each response.
class RateBudget {
public:
    using Clock = std::function<std::int64_t()>; // epoch seconds
    using Sleeper = std::function<void(std::chrono::seconds)>;

    RateBudget();
    RateBudget(Clock clock, Sleeper sleeper);

    void acquire();
    void update(std::optional<std::int64_t> remaining, std::optional<std::int64_t> reset_epoch);
    void wait(std::chrono::seconds duration);

    std::int64_t total_waited_seconds() const;

private:
    mutable std::mutex m_mutex;
    Clock m_clock;
    Sleeper m_sleeper;
    std::optional<std::int64_t> m_remaining;
    std::int64_t m_reset_epoch = 0;
    std::int64_t m_waited = 0;
};

struct GitHubOptions {
    std::string base_url = "https://api.github.com";
    std::optional<std::string> token; // defaults to $PRFORGE_GH_TOKEN
    int per_page = 100;
    int max_retries = 6;
    std::shared_ptr<RateBudget> budget; // created on demand when null
};

class GitHubClient : public PullRequestSource {
public:
    explicit GitHubClient(GitHubOptions options = {});
    ~GitHubClient() override;

    RepositoryMeta fetch_repository(const std::string& full_name) override;
    Page fetch_pull_requests(const RepositoryMeta& repo, const std::string& cursor) override;
    std::string fetch_file_at_commit(
        const RepositoryMeta& repo, const std::string& path, const std::string& commit) override;

    std::size_t request_count() const { return m_requests; }

private:
    struct Response;
    Response request(const std::string& method, const std::string& target, const std::string& body = {},
        const std::string& accept = "application/vnd.github+json");
    nlohmann::json get_json(const std::string& target);
    nlohmann::json get_all_pages(const std::string& target);
    PullRequestRecord hydrate(const RepositoryMeta& repo, const nlohmann::json& pr);
    std::optional<IssueRecord> linked_issue(const RepositoryMeta& repo, std::int64_t number);

    GitHubOptions m_options;
    std::string m_origin;      // scheme://host[:port]
    std::string m_path_prefix; // e.g. "/api/v3" for enterprise hosts
    std::size_t m_requests = 0;
};

/// Splits "https://host:8443/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url);

/// Percent-encodes a repository path, keeping '/' separators.
std::string encode_path(const std::string& path);

/// Extracts the rel="next" target from a Link header.
std::optional<std::string> next_link(const std::string& link_header);

} // namespace prforge::ingest
