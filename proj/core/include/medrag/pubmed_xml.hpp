#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medrag/document.hpp"

namespace medrag {

struct PubmedParseResult {
    std::vector<Document> documents;
    std::size_t skipped_without_pmid = 0;
};

// Parses PubMed efetch XML (PubmedArticleSet) into Documents. Accepts a
// single well-formed document or several concatenated ones, as produced
// by batched efetch. Abstracts are the space-joined AbstractText
// sections, each prefixed with its Label when present; pub_date is the
// earliest of ArticleDate/PubDate with missing month/day defaulting
// to 1. Articles without a PMID are skipped and tallied.
// Throws XmlParseError (with byte offset) on malformed input.
PubmedParseResult parse_pubmed_xml(std::string_view xml_bytes);

// One full-text article from a PMC efetch response.
struct PmcArticle {
    std::string pmcid;  // normalized to "PMC<digits>"
    std::optional<std::string> pmid;
    std::string title;
    std::string full_text;
};

// Parses PMC efetch XML (pmc-articleset). Full text is the body's
// paragraphs in document order with section titles inlined as their own
// lines; tables and figures are dropped.
std::vector<PmcArticle> parse_pmc_xml(std::string_view xml_bytes);

}  // namespace medrag
