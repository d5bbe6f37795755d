#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medrag/document.hpp"

namespace medrag {

// Injectable time source so rate limiting and retry backoff are testable
// on a simulated clock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0;                 // seconds, monotonic
    virtual void wait_until(double when) = 0;  // no-op if already past
};

class SystemClock final : public Clock {
public:
    SystemClock();
    double now() override;
    void wait_until(double when) override;

private:
    double origin_;
};

// Deterministic clock for tests: waiting simply advances time.
class SimClock final : public Clock {
public:
    double now() override;
    void wait_until(double when) override;

private:
    std::mutex mu_;
    double now_ = 0.0;
};

// NCBI usage policy: 3 requests/second without an API key, 10 with.
struct RateLimitPolicy {
    int max_requests_per_second = 3;
    std::optional<std::string> api_key;

    static RateLimitPolicy from_env();  // reads NCBI_API_KEY
};

// Sliding-window admission gate: for any i, the (i+limit)-th admission
// happens at least one second after the i-th, so no window [t, t+1)
// holds more than `limit` requests. Callers that exceed the budget wait.
class RateGate {
public:
    RateGate(RateLimitPolicy policy, std::shared_ptr<Clock> clock);

    // Blocks until a slot is free; returns the admission time.
    double acquire();

    const RateLimitPolicy& policy() const { return policy_; }

private:
    RateLimitPolicy policy_;
    std::shared_ptr<Clock> clock_;
    std::mutex mu_;
    std::deque<double> recent_;
};

struct HttpResponse {
    int status = 0;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

// Single-call HTTP abstraction. Implementations: live HTTPS, replay from
// fixture files, and a recording wrapper that produces those files.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& url) = 0;
};

class HttplibTransport final : public Transport {
public:
    explicit HttplibTransport(double timeout_seconds = 30.0);
    HttpResponse get(const std::string& url) override;

private:
    double timeout_seconds_;
};

// Replays responses from a directory of files named by request hash,
// each holding a status line, headers, a blank line, then body bytes.
class FixtureTransport final : public Transport {
public:
    explicit FixtureTransport(std::filesystem::path dir);
    HttpResponse get(const std::string& url) override;

    static std::string fixture_filename(const std::string& url);

private:
    std::filesystem::path dir_;
};

class RecordingTransport final : public Transport {
public:
    RecordingTransport(std::shared_ptr<Transport> inner, std::filesystem::path dir);
    HttpResponse get(const std::string& url) override;

    static void write_fixture(const std::filesystem::path& dir,
                              const std::string& url, const HttpResponse& response);

private:
    std::shared_ptr<Transport> inner_;
    std::filesystem::path dir_;
};

enum class EutilsDb { pubmed, pmc };

std::string to_string(EutilsDb db);

struct ESearchResult {
    std::vector<std::string> pmids;  // PMC numeric ids for db=pmc
    long total_count = 0;
    std::string query_translation;
};

struct EfetchResult {
    std::string xml;
    bool partial = false;                 // some batches failed
    std::vector<std::size_t> failed_batches;
    std::string error_message;
};

struct DateRange {
    std::optional<Date> min;
    std::optional<Date> max;
};

// Rate-limited esearch/efetch client. All requests pass the gate; fixture
// transports make every behavior reproducible offline.
class EutilsClient {
public:
    EutilsClient(std::shared_ptr<Transport> transport, RateLimitPolicy policy,
                 std::shared_ptr<Clock> clock,
                 std::string base_url = kDefaultBaseUrl);

    ESearchResult esearch(EutilsDb db, const std::string& term, int retmax,
                          const std::optional<DateRange>& date_range = std::nullopt);

    // Fetches ids in batches of at most kMaxIdsPerRequest; the returned
    // XML is the concatenation of the batch responses in input order.
    EfetchResult efetch(EutilsDb db, const std::vector<std::string>& ids);

    std::string esearch_url(EutilsDb db, const std::string& term, int retmax,
                            const std::optional<DateRange>& date_range) const;
    std::string efetch_url(EutilsDb db, const std::vector<std::string>& ids) const;

    int max_attempts = 3;  // per request, exponential backoff 0.5/1/2 s

    static constexpr std::size_t kMaxIdsPerRequest = 200;
    static constexpr const char* kDefaultBaseUrl =
        "https://eutils.ncbi.nlm.nih.gov/entrez/eutils";

private:
    std::string request(const std::string& url);

    std::shared_ptr<Transport> transport_;
    std::shared_ptr<Clock> clock_;
    RateGate gate_;
    std::string base_url_;
    std::optional<std::string> api_key_;
};

std::string url_encode(std::string_view value);

}  // namespace medrag
