#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace medrag {

// D1: PubMed abstract, D2: PMC review article, D3: other PMC article.
enum class SourceCategory { D1, D2, D3 };

// E1: found by the semantic path only, E2: by the term path only,
// E3: by both.
enum class EvidenceCategory { E1, E2, E3 };

std::string to_string(SourceCategory c);
std::string to_string(EvidenceCategory c);
std::optional<SourceCategory> source_category_from_string(std::string_view s);
std::optional<EvidenceCategory> evidence_category_from_string(std::string_view s);

// Calendar date; month/day default to 1 when the source only gives a year.
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    // "YYYY-MM-DD"; also accepts "YYYY" and "YYYY-MM".
    static std::optional<Date> parse(std::string_view text);
    std::string to_string() const;
};

// One PubMed/PMC record.
struct Document {
    std::string pmid;
    std::optional<std::string> pmcid;
    std::string title;
    std::optional<std::string> abstract;
    std::optional<std::string> full_text;
    std::optional<Date> pub_date;  // absent when no parseable year
    std::set<std::string> publication_types;
    SourceCategory source_category = SourceCategory::D1;

    bool has_abstract() const { return abstract && !abstract->empty(); }

    bool operator==(const Document&) const = default;
};

// A contiguous run of complete sentences plus the overlap carried over
// from the previous chunk.
struct Chunk {
    std::string doc_id;
    int chunk_index = 0;
    std::string core_text;
    std::string overlap_prefix;  // empty for chunk_index 0
    int token_count = 0;         // counter(overlap_prefix + core_text)
    std::map<std::string, std::string> metadata;

    // Text as seen by retrievers: prefix and core joined by one space.
    std::string full_text() const {
        if (overlap_prefix.empty()) return core_text;
        return overlap_prefix + " " + core_text;
    }

    bool operator==(const Chunk&) const = default;
};

// One ranked retrieval result. Categories are carried when known.
struct EvidenceItem {
    std::string doc_id;
    std::optional<int> chunk_index;
    double score = 0.0;
    int rank = 0;  // 1-based
    std::optional<EvidenceCategory> evidence_category;
    std::optional<SourceCategory> source_category;

    bool operator==(const EvidenceItem&) const = default;
};

// Source classification. D2 = PMC review, D3 = other PMC, D1 = abstract
// only. Returns nullopt for documents with neither a PMCID nor an
// abstract (unretrievable; callers drop those).
std::optional<SourceCategory> classify_source(const Document& doc);

// Keeps documents inside [min_date, max_date] (open bounds when absent)
// and, when require_abstract is set, with a non-empty abstract. Documents
// without a parseable date fail any filter with a lower bound. Input
// order is preserved. Throws std::invalid_argument if min_date > max_date.
std::vector<Document> filter_documents(const std::vector<Document>& docs,
                                       std::optional<Date> min_date,
                                       std::optional<Date> max_date,
                                       bool require_abstract);

}  // namespace medrag
