#pragma once

#include <string>

namespace medrag {

// Cross-encoding scorer: higher means more relevant. Must be a pure
// function of (query, passage, configuration).
class Reranker {
public:
    virtual ~Reranker() = default;
    virtual double score(const std::string& query, const std::string& passage) const = 0;
};

// |query terms ∩ passage terms| / |query terms| over lowercased word
// tokens. Deterministic and monotone; used to exercise stage-2
// reordering in tests and offline runs.
class TermOverlapReranker final : public Reranker {
public:
    double score(const std::string& query, const std::string& passage) const override;
};

// POSTs {"query": ..., "passage": ...} and expects {"score": ...}.
class RemoteReranker final : public Reranker {
public:
    explicit RemoteReranker(std::string endpoint, double timeout_seconds = 120.0);
    double score(const std::string& query, const std::string& passage) const override;

private:
    std::string endpoint_;
    double timeout_seconds_;
};

}  // namespace medrag
