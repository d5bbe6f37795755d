#include "medrag/generation.hpp"

#include <fstream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "medrag/errors.hpp"
#include "medrag/hash.hpp"

namespace medrag {

std::string prompt_hash(const std::string& system, const std::string& user) {
    // 0x1f separator keeps (system, user) unambiguous.
    std::string payload = system;
    payload.push_back('\x1f');
    payload += user;
    return hex64(fnv1a64(payload));
}

FixtureGenerationClient::FixtureGenerationClient(
    std::map<std::string, std::string> transcript,
    std::optional<std::string> default_response)
    : transcript_(std::move(transcript)),
      default_response_(std::move(default_response)) {}

FixtureGenerationClient FixtureGenerationClient::from_file(
    const std::filesystem::path& path, std::optional<std::string> default_response) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open transcript " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    std::map<std::string, std::string> transcript;
    for (auto& [key, value] : j.items()) transcript[key] = value.get<std::string>();
    return FixtureGenerationClient(std::move(transcript), std::move(default_response));
}

std::string FixtureGenerationClient::complete(const std::string& system,
                                              const std::string& user) {
    auto it = transcript_.find(prompt_hash(system, user));
    if (it != transcript_.end()) return it->second;
    if (default_response_) return *default_response_;
    throw TransportError("no transcript entry for prompt " + prompt_hash(system, user), 1);
}

HttpGenerationClient::HttpGenerationClient(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

std::string HttpGenerationClient::complete(const std::string& system,
                                           const std::string& user) {
    auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("malformed endpoint: " + endpoint_, 1);
    auto path_start = endpoint_.find('/', scheme_end + 3);
    std::string host = endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

    nlohmann::json body{{"system", system}, {"user", user}};
    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_seconds_));
    client.set_read_timeout(std::chrono::duration<double>(timeout_seconds_));
    auto result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        throw TransportError("generation request failed: " +
                                 httplib::to_string(result.error()),
                             1);
    }
    if (result->status < 200 || result->status >= 300) {
        throw TransportError("generation HTTP " + std::to_string(result->status), 1);
    }
    nlohmann::json j = nlohmann::json::parse(result->body, nullptr, false);
    if (j.is_discarded() || !j.contains("response") || !j["response"].is_string()) {
        throw TransportError("generation response missing 'response' field", 1);
    }
    return j["response"].get<std::string>();
}

RecordingGenerationClient::RecordingGenerationClient(
    std::shared_ptr<GenerationClient> inner, std::filesystem::path transcript_path)
    : inner_(std::move(inner)), path_(std::move(transcript_path)) {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (!j.is_discarded()) {
            for (auto& [key, value] : j.items())
                transcript_[key] = value.get<std::string>();
        }
    }
}

RecordingGenerationClient::~RecordingGenerationClient() { flush(); }

std::string RecordingGenerationClient::complete(const std::string& system,
                                                const std::string& user) {
    std::string response = inner_->complete(system, user);
    transcript_[prompt_hash(system, user)] = response;
    return response;
}

void RecordingGenerationClient::flush() {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : transcript_) j[key] = value;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << "\n";
}

}  // namespace medrag
