#include "medrag/document.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace medrag {

std::string to_string(SourceCategory c) {
    switch (c) {
        case SourceCategory::D1: return "D1";
        case SourceCategory::D2: return "D2";
        case SourceCategory::D3: return "D3";
    }
    return "D1";
}

std::string to_string(EvidenceCategory c) {
    switch (c) {
        case EvidenceCategory::E1: return "E1";
        case EvidenceCategory::E2: return "E2";
        case EvidenceCategory::E3: return "E3";
    }
    return "E1";
}

std::optional<SourceCategory> source_category_from_string(std::string_view s) {
    if (s == "D1") return SourceCategory::D1;
    if (s == "D2") return SourceCategory::D2;
    if (s == "D3") return SourceCategory::D3;
    return std::nullopt;
}

std::optional<EvidenceCategory> evidence_category_from_string(std::string_view s) {
    if (s == "E1") return EvidenceCategory::E1;
    if (s == "E2") return EvidenceCategory::E2;
    if (s == "E3") return EvidenceCategory::E3;
    return std::nullopt;
}

namespace {
std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}
}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
    Date d;
    std::size_t first = text.find('-');
    auto year = parse_int(text.substr(0, first));
    if (!year || *year <= 0) return std::nullopt;
    d.year = *year;
    if (first == std::string_view::npos) return d;
    std::string_view rest = text.substr(first + 1);
    std::size_t second = rest.find('-');
    auto month = parse_int(rest.substr(0, second));
    if (!month || *month < 1 || *month > 12) return std::nullopt;
    d.month = *month;
    if (second == std::string_view::npos) return d;
    auto day = parse_int(rest.substr(second + 1));
    if (!day || *day < 1 || *day > 31) return std::nullopt;
    d.day = *day;
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<SourceCategory> classify_source(const Document& doc) {
    if (doc.pmcid && !doc.pmcid->empty()) {
        return doc.publication_types.count("Review") ? SourceCategory::D2
                                                     : SourceCategory::D3;
    }
    if (doc.has_abstract()) return SourceCategory::D1;
    return std::nullopt;
}

std::vector<Document> filter_documents(const std::vector<Document>& docs,
                                       std::optional<Date> min_date,
                                       std::optional<Date> max_date,
                                       bool require_abstract) {
    if (min_date && max_date && *min_date > *max_date) {
        throw std::invalid_argument("filter_documents: min_date > max_date");
    }
    std::vector<Document> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) {
        if (require_abstract && !doc.has_abstract()) continue;
        if (min_date && (!doc.pub_date || *doc.pub_date < *min_date)) continue;
        if (max_date && doc.pub_date && *max_date < *doc.pub_date) continue;
        out.push_back(doc);
    }
    return out;
}

}  // namespace medrag
