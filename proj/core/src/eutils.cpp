#include "medrag/eutils.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "medrag/errors.hpp"
#include "medrag/hash.hpp"

namespace medrag {

namespace {
constexpr double kWindowSeconds = 1.0;
// Nudge past the window edge so a closed-interval observer never sees
// limit+1 admissions either.
constexpr double kWindowSlack = 1e-6;
}  // namespace

SystemClock::SystemClock() {
    origin_ = std::chrono::duration<double>(
                  std::chrono::steady_clock::now().time_since_epoch())
                  .count();
}

double SystemClock::now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
               .count() -
           origin_;
}

void SystemClock::wait_until(double when) {
    double delta = when - now();
    if (delta > 0) std::this_thread::sleep_for(std::chrono::duration<double>(delta));
}

double SimClock::now() {
    std::lock_guard lock(mu_);
    return now_;
}

void SimClock::wait_until(double when) {
    std::lock_guard lock(mu_);
    now_ = std::max(now_, when);
}

RateLimitPolicy RateLimitPolicy::from_env() {
    RateLimitPolicy policy;
    if (const char* key = std::getenv("NCBI_API_KEY"); key && *key) {
        policy.api_key = key;
        policy.max_requests_per_second = 10;
    }
    return policy;
}

RateGate::RateGate(RateLimitPolicy policy, std::shared_ptr<Clock> clock)
    : policy_(std::move(policy)), clock_(std::move(clock)) {}

double RateGate::acquire() {
    std::lock_guard lock(mu_);
    const auto limit = static_cast<std::size_t>(policy_.max_requests_per_second);
    double t = clock_->now();
    if (recent_.size() == limit) {
        double earliest = recent_.front() + kWindowSeconds + kWindowSlack;
        if (t < earliest) {
            clock_->wait_until(earliest);
            t = std::max(clock_->now(), earliest);
        }
        recent_.pop_front();
    }
    recent_.push_back(t);
    return t;
}

HttplibTransport::HttplibTransport(double timeout_seconds)
    : timeout_seconds_(timeout_seconds) {}

HttpResponse HttplibTransport::get(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("malformed url: " + url, 1);
    auto path_start = url.find('/', scheme_end + 3);
    std::string host = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_seconds_));
    client.set_read_timeout(std::chrono::duration<double>(timeout_seconds_));
    client.set_follow_location(true);
    auto result = client.Get(path);
    if (!result) {
        throw TransportError("transport failure for " + url + ": " +
                                 httplib::to_string(result.error()),
                             1);
    }
    HttpResponse response;
    response.status = result->status;
    for (const auto& [k, v] : result->headers) response.headers.emplace_back(k, v);
    response.body = result->body;
    return response;
}

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string FixtureTransport::fixture_filename(const std::string& url) {
    return hex64(fnv1a64(url)) + ".http";
}

HttpResponse FixtureTransport::get(const std::string& url) {
    auto path = dir_ / fixture_filename(url);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TransportError("no fixture " + path.string() + " for url " + url, 1);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string raw = buffer.str();

    HttpResponse response;
    std::size_t pos = raw.find('\n');
    if (pos == std::string::npos)
        throw TransportError("fixture missing status line: " + path.string(), 1);
    std::string status_line = raw.substr(0, pos);
    if (!status_line.empty() && status_line.back() == '\r') status_line.pop_back();
    // "HTTP/1.1 200 OK"
    auto sp = status_line.find(' ');
    if (sp == std::string::npos)
        throw TransportError("fixture bad status line: " + path.string(), 1);
    response.status = std::atoi(status_line.c_str() + sp + 1);

    std::size_t cursor = pos + 1;
    while (cursor < raw.size()) {
        std::size_t eol = raw.find('\n', cursor);
        if (eol == std::string::npos) eol = raw.size();
        std::string line = raw.substr(cursor, eol - cursor);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        cursor = eol + 1;
        if (line.empty()) break;  // end of headers
        auto colon = line.find(':');
        if (colon != std::string::npos) {
            std::string key = line.substr(0, colon);
            std::string value = line.substr(colon + 1);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            response.headers.emplace_back(key, value);
        }
    }
    if (cursor < raw.size()) response.body = raw.substr(cursor);
    return response;
}

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner,
                                       std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void RecordingTransport::write_fixture(const std::filesystem::path& dir,
                                       const std::string& url,
                                       const HttpResponse& response) {
    std::filesystem::create_directories(dir);
    auto path = dir / FixtureTransport::fixture_filename(url);
    std::ofstream out(path, std::ios::binary);
    out << "HTTP/1.1 " << response.status << " \r\n";
    for (const auto& [k, v] : response.headers) out << k << ": " << v << "\r\n";
    out << "\r\n";
    out << response.body;
}

HttpResponse RecordingTransport::get(const std::string& url) {
    HttpResponse response = inner_->get(url);
    write_fixture(dir_, url, response);
    return response;
}

std::string to_string(EutilsDb db) {
    return db == EutilsDb::pubmed ? "pubmed" : "pmc";
}

std::string url_encode(std::string_view value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

EutilsClient::EutilsClient(std::shared_ptr<Transport> transport,
                           RateLimitPolicy policy, std::shared_ptr<Clock> clock,
                           std::string base_url)
    : transport_(std::move(transport)),
      clock_(std::move(clock)),
      gate_(policy, clock_),
      base_url_(std::move(base_url)),
      api_key_(policy.api_key) {}

namespace {
std::string date_param(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d/%02d/%02d", d.year, d.month, d.day);
    return buf;
}
}  // namespace

std::string EutilsClient::esearch_url(EutilsDb db, const std::string& term,
                                      int retmax,
                                      const std::optional<DateRange>& range) const {
    std::string url = base_url_ + "/esearch.fcgi?db=" + to_string(db) +
                      "&term=" + url_encode(term) +
                      "&retmax=" + std::to_string(retmax) + "&retmode=json";
    if (range && (range->min || range->max)) {
        url += "&datetype=pdat";
        if (range->min) url += "&mindate=" + date_param(*range->min);
        if (range->max) url += "&maxdate=" + date_param(*range->max);
    }
    if (api_key_) url += "&api_key=" + url_encode(*api_key_);
    return url;
}

std::string EutilsClient::efetch_url(EutilsDb db,
                                     const std::vector<std::string>& ids) const {
    std::string url = base_url_ + "/efetch.fcgi?db=" + to_string(db) + "&id=";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) url += ",";
        url += ids[i];
    }
    url += "&retmode=xml";
    if (api_key_) url += "&api_key=" + url_encode(*api_key_);
    return url;
}

std::string EutilsClient::request(const std::string& url) {
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        gate_.acquire();
        try {
            HttpResponse response = transport_->get(url);
            if (response.status >= 200 && response.status < 300) {
                return response.body;
            }
            if (response.status == 429 || response.status >= 500) {
                last_error = "HTTP " + std::to_string(response.status);
            } else {
                throw QueryError("HTTP " + std::to_string(response.status) +
                                 " for " + url);
            }
        } catch (const TransportError& e) {
            last_error = e.what();
        }
        if (attempt < max_attempts) {
            double delay = 0.5 * static_cast<double>(1 << (attempt - 1));
            clock_->wait_until(clock_->now() + delay);
        }
    }
    throw TransportError("request failed after " + std::to_string(max_attempts) +
                             " attempts: " + last_error + " (" + url + ")",
                         max_attempts);
}

ESearchResult EutilsClient::esearch(EutilsDb db, const std::string& term,
                                    int retmax,
                                    const std::optional<DateRange>& range) {
    if (term.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw std::invalid_argument("esearch: empty term");
    }
    std::string body = request(esearch_url(db, term, retmax, range));

    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw QueryError("esearch: response is not JSON");
    if (j.contains("error")) {
        throw QueryError("esearch server error: " + j["error"].dump());
    }
    if (!j.contains("esearchresult")) {
        throw QueryError("esearch: missing esearchresult");
    }
    const auto& r = j["esearchresult"];
    if (r.contains("ERROR")) {
        throw QueryError("esearch server error: " + r["ERROR"].dump());
    }
    ESearchResult result;
    if (r.contains("count")) {
        const auto& c = r["count"];
        result.total_count = c.is_string() ? std::atol(c.get<std::string>().c_str())
                                           : c.get<long>();
    }
    if (r.contains("idlist")) {
        for (const auto& id : r["idlist"]) result.pmids.push_back(id.get<std::string>());
    }
    if (result.pmids.size() > static_cast<std::size_t>(retmax)) {
        result.pmids.resize(static_cast<std::size_t>(retmax));
    }
    if (r.contains("querytranslation") && r["querytranslation"].is_string()) {
        result.query_translation = r["querytranslation"].get<std::string>();
    }
    return result;
}

EfetchResult EutilsClient::efetch(EutilsDb db, const std::vector<std::string>& ids) {
    if (ids.empty()) throw std::invalid_argument("efetch: empty id list");
    for (const auto& id : ids) {
        if (id.empty() || !std::all_of(id.begin(), id.end(), [](unsigned char c) {
                return std::isdigit(c) != 0;
            })) {
            throw std::invalid_argument("efetch: non-numeric id '" + id + "'");
        }
    }
    EfetchResult result;
    std::size_t n_batches = (ids.size() + kMaxIdsPerRequest - 1) / kMaxIdsPerRequest;
    for (std::size_t b = 0; b < n_batches; ++b) {
        std::size_t begin = b * kMaxIdsPerRequest;
        std::size_t end = std::min(ids.size(), begin + kMaxIdsPerRequest);
        std::vector<std::string> batch(ids.begin() + static_cast<std::ptrdiff_t>(begin),
                                       ids.begin() + static_cast<std::ptrdiff_t>(end));
        try {
            result.xml += request(efetch_url(db, batch));
        } catch (const Error& e) {
            result.partial = true;
            result.failed_batches.push_back(b);
            if (!result.error_message.empty()) result.error_message += "; ";
            result.error_message +=
                "batch " + std::to_string(b) + " failed: " + e.what();
        }
    }
    if (result.failed_batches.size() == n_batches) {
        throw TransportError("efetch: all " + std::to_string(n_batches) +
                                 " batches failed: " + result.error_message,
                             max_attempts);
    }
    return result;
}

}  // namespace medrag
