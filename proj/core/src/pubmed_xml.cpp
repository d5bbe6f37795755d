#include "medrag/pubmed_xml.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <cstring>

#include "medrag/errors.hpp"
#include "medrag/text.hpp"

namespace medrag {

namespace {

std::optional<int> month_number(std::string_view text) {
    static const char* const names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                        "jul", "aug", "sep", "oct", "nov", "dec"};
    if (text.empty()) return std::nullopt;
    if (std::isdigit(static_cast<unsigned char>(text[0]))) {
        int v = 0;
        for (char c : text) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            v = v * 10 + (c - '0');
        }
        return (v >= 1 && v <= 12) ? std::optional<int>(v) : std::nullopt;
    }
    std::string lower = to_lower(text.substr(0, std::min<std::size_t>(3, text.size())));
    for (int i = 0; i < 12; ++i) {
        if (lower == names[i]) return i + 1;
    }
    return std::nullopt;
}

std::optional<int> parse_year(std::string_view text) {
    // First 4-digit run; covers plain years and MedlineDate strings like
    // "1998 Dec-1999 Jan".
    for (std::size_t i = 0; i + 3 < text.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(text[i])) &&
            std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
            std::isdigit(static_cast<unsigned char>(text[i + 2])) &&
            std::isdigit(static_cast<unsigned char>(text[i + 3]))) {
            return (text[i] - '0') * 1000 + (text[i + 1] - '0') * 100 +
                   (text[i + 2] - '0') * 10 + (text[i + 3] - '0');
        }
    }
    return std::nullopt;
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct DateParts {
    std::string year, month, day;

    std::optional<Date> to_date() const {
        auto y = parse_year(year);
        if (!y) return std::nullopt;
        Date d{*y, 1, 1};
        if (auto m = month_number(trimmed(month))) d.month = *m;
        std::string dd = trimmed(day);
        if (!dd.empty()) {
            int v = 0;
            bool ok = true;
            for (char c : dd) {
                if (!std::isdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                v = v * 10 + (c - '0');
            }
            if (ok && v >= 1 && v <= 31) d.day = v;
        }
        return d;
    }
};

// What the currently captured element should be stored as once it closes.
enum class Field {
    none,
    pmid,
    article_title,
    abstract_text,
    publication_type,
    article_id,
    date_year,
    date_month,
    date_day,
};

struct PubmedHandler {
    PubmedParseResult result;

    std::vector<std::string> path;
    bool in_article = false;

    std::string pmid;
    std::string title;
    std::vector<std::string> abstract_sections;
    std::set<std::string> publication_types;
    std::optional<std::string> pmcid;
    std::vector<DateParts> dates;

    Field field = Field::none;
    std::size_t capture_depth = 0;
    std::string text_buf;
    std::string current_label;
    std::string current_id_type;

    void reset_article() {
        pmid.clear();
        title.clear();
        abstract_sections.clear();
        publication_types.clear();
        pmcid.reset();
        dates.clear();
        field = Field::none;
        text_buf.clear();
    }

    bool parent_is(std::string_view name) const {
        return path.size() >= 2 && path[path.size() - 2] == name;
    }

    void begin_capture(Field f) {
        field = f;
        capture_depth = path.size();
        text_buf.clear();
    }

    void start(const char* name, const char** attrs) {
        path.emplace_back(name);
        std::string_view el = name;
        if (el == "PubmedArticle") {
            in_article = true;
            reset_article();
            return;
        }
        if (!in_article || field != Field::none) return;  // skip children of a capture

        if (el == "PMID" && parent_is("MedlineCitation")) {
            begin_capture(Field::pmid);
        } else if (el == "ArticleTitle" && parent_is("Article")) {
            begin_capture(Field::article_title);
        } else if (el == "AbstractText" && parent_is("Abstract")) {
            begin_capture(Field::abstract_text);
            current_label.clear();
            for (int i = 0; attrs && attrs[i]; i += 2) {
                if (std::strcmp(attrs[i], "Label") == 0) current_label = attrs[i + 1];
            }
        } else if (el == "PublicationType") {
            begin_capture(Field::publication_type);
        } else if (el == "ArticleId") {
            begin_capture(Field::article_id);
            current_id_type.clear();
            for (int i = 0; attrs && attrs[i]; i += 2) {
                if (std::strcmp(attrs[i], "IdType") == 0) current_id_type = attrs[i + 1];
            }
        } else if (el == "ArticleDate" || (el == "PubDate" && parent_is("JournalIssue"))) {
            dates.emplace_back();
        } else if (!dates.empty() &&
                   (parent_is("ArticleDate") || parent_is("PubDate"))) {
            if (el == "Year" || el == "MedlineDate") begin_capture(Field::date_year);
            else if (el == "Month") begin_capture(Field::date_month);
            else if (el == "Day") begin_capture(Field::date_day);
        }
    }

    void end(const char* name) {
        std::string_view el = name;
        if (in_article && field != Field::none && path.size() == capture_depth) {
            std::string text = trimmed(text_buf);
            switch (field) {
                case Field::pmid: pmid = text; break;
                case Field::article_title: title = text; break;
                case Field::abstract_text:
                    if (!current_label.empty() && !text.empty())
                        text = current_label + ": " + text;
                    if (!text.empty()) abstract_sections.push_back(text);
                    break;
                case Field::publication_type:
                    if (!text.empty()) publication_types.insert(text);
                    break;
                case Field::article_id:
                    if (current_id_type == "pmc" && !text.empty()) pmcid = text;
                    break;
                case Field::date_year: dates.back().year = text; break;
                case Field::date_month: dates.back().month = text; break;
                case Field::date_day: dates.back().day = text; break;
                case Field::none: break;
            }
            field = Field::none;
            text_buf.clear();
        }
        if (el == "PubmedArticle" && in_article) {
            finish_article();
            in_article = false;
        }
        path.pop_back();
    }

    void chars(const char* data, int len) {
        if (field != Field::none) text_buf.append(data, static_cast<std::size_t>(len));
    }

    void finish_article() {
        bool pmid_ok = !pmid.empty() &&
                       std::all_of(pmid.begin(), pmid.end(), [](unsigned char c) {
                           return std::isdigit(c) != 0;
                       });
        if (!pmid_ok) {
            ++result.skipped_without_pmid;
            return;
        }
        Document doc;
        doc.pmid = pmid;
        doc.pmcid = pmcid;
        doc.title = title;
        if (!abstract_sections.empty()) doc.abstract = join(abstract_sections, " ");
        doc.publication_types = publication_types;
        for (const auto& parts : dates) {
            if (auto d = parts.to_date()) {
                if (!doc.pub_date || *d < *doc.pub_date) doc.pub_date = d;
            }
        }
        if (auto cat = classify_source(doc)) doc.source_category = *cat;
        result.documents.push_back(std::move(doc));
    }
};

// PMC full-text handler. Paragraph text and section titles are collected
// in document order; table-wrap/fig/table subtrees are dropped.
struct PmcHandler {
    std::vector<PmcArticle> articles;

    std::vector<std::string> path;
    int suppress = 0;
    bool in_article = false;
    bool in_body = false;

    std::string pmcid, pmid, title;
    std::vector<std::string> lines;

    enum class Cap { none, article_id, article_title, body_line };
    Cap cap = Cap::none;
    std::size_t capture_depth = 0;
    std::string text_buf;
    std::string current_id_type;

    bool parent_is(std::string_view name) const {
        return path.size() >= 2 && path[path.size() - 2] == name;
    }

    void begin_capture(Cap c) {
        cap = c;
        capture_depth = path.size();
        text_buf.clear();
    }

    void start(const char* name, const char** attrs) {
        path.emplace_back(name);
        std::string_view el = name;
        if (suppress > 0) {
            ++suppress;
            return;
        }
        if (el == "article") {
            in_article = true;
            in_body = false;
            pmcid.clear();
            pmid.clear();
            title.clear();
            lines.clear();
            cap = Cap::none;
            return;
        }
        if (!in_article) return;
        if (el == "table-wrap" || el == "fig" || el == "table" || el == "graphic") {
            suppress = 1;
            return;
        }
        if (el == "body") {
            in_body = true;
            return;
        }
        if (cap != Cap::none) return;

        if (el == "article-id" && !in_body) {
            begin_capture(Cap::article_id);
            current_id_type.clear();
            for (int i = 0; attrs && attrs[i]; i += 2) {
                if (std::strcmp(attrs[i], "pub-id-type") == 0) current_id_type = attrs[i + 1];
            }
        } else if (el == "article-title" && !in_body && parent_is("title-group")) {
            begin_capture(Cap::article_title);
        } else if (in_body && (el == "p" || el == "title")) {
            begin_capture(Cap::body_line);
        }
    }

    void end(const char* name) {
        std::string_view el = name;
        if (suppress > 0) {
            --suppress;
            path.pop_back();
            return;
        }
        if (in_article && cap != Cap::none && path.size() == capture_depth) {
            std::string text = trimmed(text_buf);
            switch (cap) {
                case Cap::article_id:
                    if (current_id_type == "pmc" && !text.empty()) {
                        pmcid = text.starts_with("PMC") ? text : "PMC" + text;
                    } else if (current_id_type == "pmid" && !text.empty()) {
                        pmid = text;
                    }
                    break;
                case Cap::article_title: title = text; break;
                case Cap::body_line:
                    if (!text.empty()) lines.push_back(text);
                    break;
                case Cap::none: break;
            }
            cap = Cap::none;
            text_buf.clear();
        }
        if (el == "body") in_body = false;
        if (el == "article" && in_article) {
            PmcArticle art;
            art.pmcid = pmcid;
            if (!pmid.empty()) art.pmid = pmid;
            art.title = title;
            art.full_text = join(lines, "\n");
            articles.push_back(std::move(art));
            in_article = false;
        }
        path.pop_back();
    }

    void chars(const char* data, int len) {
        if (cap != Cap::none && suppress == 0)
            text_buf.append(data, static_cast<std::size_t>(len));
    }
};

template <typename Handler>
void run_expat(std::string_view xml, std::size_t base_offset, Handler& handler) {
    XML_Parser parser = XML_ParserCreate(nullptr);
    XML_SetUserData(parser, &handler);
    XML_SetElementHandler(
        parser,
        [](void* ud, const XML_Char* name, const XML_Char** attrs) {
            static_cast<Handler*>(ud)->start(name, attrs);
        },
        [](void* ud, const XML_Char* name) { static_cast<Handler*>(ud)->end(name); });
    XML_SetCharacterDataHandler(parser, [](void* ud, const XML_Char* s, int len) {
        static_cast<Handler*>(ud)->chars(s, len);
    });
    XML_Status status = XML_Parse(parser, xml.data(), static_cast<int>(xml.size()), 1);
    if (status != XML_STATUS_OK) {
        std::size_t offset =
            base_offset + static_cast<std::size_t>(XML_GetErrorByteIndex(parser));
        std::string message = XML_ErrorString(XML_GetErrorCode(parser));
        XML_ParserFree(parser);
        throw XmlParseError("XML parse error at byte " + std::to_string(offset) +
                                ": " + message,
                            offset);
    }
    XML_ParserFree(parser);
}

// Batched efetch responses concatenate whole documents; split on the
// closing root tag so each segment is well-formed on its own.
std::vector<std::pair<std::size_t, std::string_view>> split_documents(
    std::string_view bytes, std::string_view closing_tag) {
    std::vector<std::pair<std::size_t, std::string_view>> segments;
    std::size_t start = 0;
    while (start < bytes.size()) {
        std::size_t end = bytes.find(closing_tag, start);
        if (end == std::string_view::npos) {
            segments.emplace_back(start, bytes.substr(start));
            break;
        }
        end += closing_tag.size();
        segments.emplace_back(start, bytes.substr(start, end - start));
        while (end < bytes.size() &&
               std::isspace(static_cast<unsigned char>(bytes[end]))) {
            ++end;
        }
        start = end;
    }
    return segments;
}

}  // namespace

PubmedParseResult parse_pubmed_xml(std::string_view xml_bytes) {
    PubmedParseResult result;
    for (auto [offset, segment] : split_documents(xml_bytes, "</PubmedArticleSet>")) {
        PubmedHandler handler;
        run_expat(segment, offset, handler);
        result.skipped_without_pmid += handler.result.skipped_without_pmid;
        for (auto& doc : handler.result.documents) {
            result.documents.push_back(std::move(doc));
        }
    }
    return result;
}

std::vector<PmcArticle> parse_pmc_xml(std::string_view xml_bytes) {
    std::vector<PmcArticle> out;
    for (auto [offset, segment] : split_documents(xml_bytes, "</pmc-articleset>")) {
        PmcHandler handler;
        run_expat(segment, offset, handler);
        for (auto& art : handler.articles) out.push_back(std::move(art));
    }
    return out;
}

}  // namespace medrag
