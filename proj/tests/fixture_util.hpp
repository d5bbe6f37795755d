#pragma once

// Mock E-Utilities building blocks shared by the unit and acceptance
// suites. No test-framework dependencies.

#include <string>
#include <vector>

#include "medrag/document.hpp"
#include "medrag/eutils.hpp"

namespace fixture_util {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// efetch-shaped XML for a set of documents, enough for the parser.
inline std::string make_pubmed_xml(const std::vector<medrag::Document>& docs) {
    std::string xml = "<?xml version=\"1.0\" ?>\n<PubmedArticleSet>\n";
    for (const auto& doc : docs) {
        xml += "<PubmedArticle><MedlineCitation><PMID>" + doc.pmid + "</PMID><Article>";
        if (doc.pub_date) {
            xml += "<Journal><JournalIssue><PubDate><Year>" +
                   std::to_string(doc.pub_date->year) + "</Year><Month>" +
                   std::to_string(doc.pub_date->month) + "</Month><Day>" +
                   std::to_string(doc.pub_date->day) +
                   "</Day></PubDate></JournalIssue></Journal>";
        }
        xml += "<ArticleTitle>" + xml_escape(doc.title) + "</ArticleTitle>";
        if (doc.abstract) {
            xml += "<Abstract><AbstractText>" + xml_escape(*doc.abstract) +
                   "</AbstractText></Abstract>";
        }
        xml += "<PublicationTypeList>";
        for (const auto& t : doc.publication_types) {
            xml += "<PublicationType>" + xml_escape(t) + "</PublicationType>";
        }
        xml += "</PublicationTypeList></Article></MedlineCitation><PubmedData><ArticleIdList>";
        xml += "<ArticleId IdType=\"pubmed\">" + doc.pmid + "</ArticleId>";
        if (doc.pmcid) {
            xml += "<ArticleId IdType=\"pmc\">" + *doc.pmcid + "</ArticleId>";
        }
        xml += "</ArticleIdList></PubmedData></PubmedArticle>\n";
    }
    xml += "</PubmedArticleSet>\n";
    return xml;
}

inline std::string make_pmc_xml(const std::vector<medrag::Document>& docs) {
    std::string xml = "<?xml version=\"1.0\" ?>\n<pmc-articleset>\n";
    for (const auto& doc : docs) {
        if (!doc.pmcid || !doc.full_text) continue;
        xml += "<article><front><article-meta>";
        xml += "<article-id pub-id-type=\"pmid\">" + doc.pmid + "</article-id>";
        xml += "<article-id pub-id-type=\"pmc\">" + *doc.pmcid + "</article-id>";
        xml += "<title-group><article-title>" + xml_escape(doc.title) +
               "</article-title></title-group></article-meta></front><body>";
        xml += "<sec><p>" + xml_escape(*doc.full_text) + "</p></sec>";
        xml += "</body></article>\n";
    }
    xml += "</pmc-articleset>\n";
    return xml;
}

// esearch JSON in the server's shape (count as a string).
inline std::string esearch_body(long count, const std::vector<std::string>& ids,
                                const std::string& translation = "") {
    std::string idlist;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) idlist += ",";
        idlist += "\"" + ids[i] + "\"";
    }
    return "{\"header\":{\"type\":\"esearch\",\"version\":\"0.3\"},"
           "\"esearchresult\":{\"count\":\"" + std::to_string(count) +
           "\",\"retmax\":\"" + std::to_string(ids.size()) +
           "\",\"retstart\":\"0\",\"idlist\":[" + idlist +
           "],\"querytranslation\":\"" + translation + "\"}}";
}

// Query-string value from a URL; empty when missing.
inline std::string url_param(const std::string& url, const std::string& key) {
    auto qpos = url.find('?');
    if (qpos == std::string::npos) return "";
    std::string qs = url.substr(qpos + 1);
    std::size_t pos = 0;
    while (pos < qs.size()) {
        auto amp = qs.find('&', pos);
        if (amp == std::string::npos) amp = qs.size();
        auto eq = qs.find('=', pos);
        if (eq != std::string::npos && eq < amp && qs.substr(pos, eq - pos) == key) {
            return qs.substr(eq + 1, amp - eq - 1);
        }
        pos = amp + 1;
    }
    return "";
}

inline medrag::HttpResponse ok_json(std::string body) {
    return {200, {{"Content-Type", "application/json"}}, std::move(body)};
}

inline medrag::HttpResponse ok_xml(std::string body) {
    return {200, {{"Content-Type", "text/xml"}}, std::move(body)};
}

}  // namespace fixture_util
