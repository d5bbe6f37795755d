#include "medrag/reranker.hpp"

#include <unordered_set>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "medrag/errors.hpp"
#include "medrag/text.hpp"

namespace medrag {

double TermOverlapReranker::score(const std::string& query,
                                  const std::string& passage) const {
    auto query_terms = word_tokens(query);
    if (query_terms.empty()) return 0.0;
    std::unordered_set<std::string> distinct(query_terms.begin(), query_terms.end());
    std::unordered_set<std::string> passage_terms;
    for (auto& t : word_tokens(passage)) passage_terms.insert(std::move(t));
    std::size_t hit = 0;
    for (const auto& t : distinct) {
        if (passage_terms.count(t)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(distinct.size());
}

RemoteReranker::RemoteReranker(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

double RemoteReranker::score(const std::string& query, const std::string& passage) const {
    auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("malformed endpoint: " + endpoint_, 1);
    auto path_start = endpoint_.find('/', scheme_end + 3);
    std::string host = endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

    nlohmann::json body{{"query", query}, {"passage", passage}};
    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_seconds_));
    client.set_read_timeout(std::chrono::duration<double>(timeout_seconds_));
    auto result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        throw TransportError("rerank request failed: " +
                                 httplib::to_string(result.error()),
                             1);
    }
    nlohmann::json j = nlohmann::json::parse(result->body, nullptr, false);
    if (j.is_discarded() || !j.contains("score") || !j["score"].is_number()) {
        throw TransportError("rerank response missing 'score'", 1);
    }
    return j["score"].get<double>();
}

}  // namespace medrag
