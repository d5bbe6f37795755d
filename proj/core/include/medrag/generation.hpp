#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace medrag {

// Minimal text-generation contract: a system prompt plus a user prompt in,
// one completion out. Concrete models live behind this interface so the
// pipeline stays deterministic and testable offline.
class GenerationClient {
public:
    virtual ~GenerationClient() = default;
    virtual std::string complete(const std::string& system, const std::string& user) = 0;
};

// Stable key a (system, user) pair maps to in transcript files.
std::string prompt_hash(const std::string& system, const std::string& user);

// Replays completions from a JSON object {prompt_hash: response}. When
// strict, an unknown prompt throws; otherwise default_response is used.
class FixtureGenerationClient final : public GenerationClient {
public:
    explicit FixtureGenerationClient(std::map<std::string, std::string> transcript,
                                     std::optional<std::string> default_response = {});
    static FixtureGenerationClient from_file(const std::filesystem::path& path,
                                             std::optional<std::string> default_response = {});

    std::string complete(const std::string& system, const std::string& user) override;

private:
    std::map<std::string, std::string> transcript_;
    std::optional<std::string> default_response_;
};

// POSTs {"system": ..., "user": ...} and expects {"response": ...}; an
// adapter service maps this onto whatever model API is in use.
class HttpGenerationClient final : public GenerationClient {
public:
    explicit HttpGenerationClient(std::string endpoint, double timeout_seconds = 120.0);
    std::string complete(const std::string& system, const std::string& user) override;

private:
    std::string endpoint_;
    double timeout_seconds_;
};

// Wraps another client and appends every exchange to a transcript file
// compatible with FixtureGenerationClient.
class RecordingGenerationClient final : public GenerationClient {
public:
    RecordingGenerationClient(std::shared_ptr<GenerationClient> inner,
                              std::filesystem::path transcript_path);
    ~RecordingGenerationClient() override;

    std::string complete(const std::string& system, const std::string& user) override;
    void flush();

private:
    std::shared_ptr<GenerationClient> inner_;
    std::filesystem::path path_;
    std::map<std::string, std::string> transcript_;
};

}  // namespace medrag
