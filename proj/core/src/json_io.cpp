#include "medrag/json_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "medrag/errors.hpp"

namespace medrag {

using nlohmann::json;

namespace {

json parse_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error("invalid JSON line: " + line.substr(0, 120));
    return j;
}

json optional_string(const std::optional<std::string>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<std::string> get_optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

}  // namespace

std::string to_json_line(const Document& doc) {
    json j;
    j["pmid"] = doc.pmid;
    j["pmcid"] = optional_string(doc.pmcid);
    j["title"] = doc.title;
    j["abstract"] = optional_string(doc.abstract);
    j["full_text"] = optional_string(doc.full_text);
    j["pub_date"] = doc.pub_date ? json(doc.pub_date->to_string()) : json(nullptr);
    j["publication_types"] = doc.publication_types;  // std::set keeps order stable
    j["source_category"] = to_string(doc.source_category);
    return j.dump();
}

Document document_from_json(const std::string& line) {
    json j = parse_line(line);
    Document doc;
    doc.pmid = j.at("pmid").get<std::string>();
    doc.pmcid = get_optional_string(j, "pmcid");
    doc.title = j.value("title", std::string{});
    doc.abstract = get_optional_string(j, "abstract");
    doc.full_text = get_optional_string(j, "full_text");
    if (auto date = get_optional_string(j, "pub_date")) {
        doc.pub_date = Date::parse(*date);
    }
    if (j.contains("publication_types")) {
        for (const auto& t : j["publication_types"])
            doc.publication_types.insert(t.get<std::string>());
    }
    if (auto cat = get_optional_string(j, "source_category")) {
        if (auto parsed = source_category_from_string(*cat)) doc.source_category = *parsed;
    }
    return doc;
}

std::string to_json_line(const Chunk& chunk) {
    json j;
    j["doc_id"] = chunk.doc_id;
    j["chunk_index"] = chunk.chunk_index;
    j["core_text"] = chunk.core_text;
    j["overlap_prefix"] = chunk.overlap_prefix;
    j["token_count"] = chunk.token_count;
    j["metadata"] = chunk.metadata;
    return j.dump();
}

Chunk chunk_from_json(const std::string& line) {
    json j = parse_line(line);
    Chunk chunk;
    chunk.doc_id = j.at("doc_id").get<std::string>();
    chunk.chunk_index = j.at("chunk_index").get<int>();
    chunk.core_text = j.at("core_text").get<std::string>();
    chunk.overlap_prefix = j.value("overlap_prefix", std::string{});
    chunk.token_count = j.value("token_count", 0);
    if (j.contains("metadata")) {
        for (auto& [key, value] : j["metadata"].items())
            chunk.metadata[key] = value.get<std::string>();
    }
    return chunk;
}

std::string to_json_line(const EvidenceItem& item) {
    json j;
    j["doc_id"] = item.doc_id;
    j["chunk_index"] = item.chunk_index ? json(*item.chunk_index) : json(nullptr);
    j["score"] = item.score;
    j["rank"] = item.rank;
    j["evidence_category"] =
        item.evidence_category ? json(to_string(*item.evidence_category)) : json(nullptr);
    j["source_category"] =
        item.source_category ? json(to_string(*item.source_category)) : json(nullptr);
    return j.dump();
}

namespace {
EvidenceItem evidence_from(const json& j) {
    EvidenceItem item;
    item.doc_id = j.at("doc_id").get<std::string>();
    if (j.contains("chunk_index") && !j["chunk_index"].is_null()) {
        item.chunk_index = j["chunk_index"].get<int>();
    }
    item.score = j.value("score", 0.0);
    item.rank = j.value("rank", 0);
    if (auto e = get_optional_string(j, "evidence_category")) {
        item.evidence_category = evidence_category_from_string(*e);
    }
    if (auto s = get_optional_string(j, "source_category")) {
        item.source_category = source_category_from_string(*s);
    }
    return item;
}

json evidence_to(const EvidenceItem& item) {
    return json::parse(to_json_line(item));
}
}  // namespace

EvidenceItem evidence_item_from_json(const std::string& line) {
    return evidence_from(parse_line(line));
}

std::string to_json_line(const RetrievalJudgment& judgment) {
    json j;
    j["query_id"] = judgment.query_id;
    j["query"] = judgment.query;
    json relevant = json::array();
    for (const auto& [doc_id, chunk_index] : judgment.relevant_ids) {
        json r;
        r["doc_id"] = doc_id;
        r["chunk_index"] = chunk_index ? json(*chunk_index) : json(nullptr);
        relevant.push_back(r);
    }
    j["relevant"] = relevant;
    json results = json::array();
    for (const auto& item : judgment.results) results.push_back(evidence_to(item));
    j["results"] = results;
    return j.dump();
}

RetrievalJudgment judgment_from_json(const std::string& line) {
    json j = parse_line(line);
    RetrievalJudgment judgment;
    judgment.query_id = j.at("query_id").get<std::string>();
    judgment.query = j.value("query", std::string{});
    if (j.contains("relevant")) {
        for (const auto& r : j["relevant"]) {
            std::optional<int> chunk_index;
            if (r.contains("chunk_index") && !r["chunk_index"].is_null()) {
                chunk_index = r["chunk_index"].get<int>();
            }
            judgment.relevant_ids.insert({r.at("doc_id").get<std::string>(), chunk_index});
        }
    }
    if (j.contains("results")) {
        for (const auto& r : j["results"]) judgment.results.push_back(evidence_from(r));
    }
    return judgment;
}

std::string to_json_line(const QuestionRecord& question) {
    json j;
    j["id"] = question.id;
    j["question"] = question.question;
    j["options"] = question.options;
    j["gold"] = optional_string(question.gold);
    return j.dump();
}

QuestionRecord question_from_json(const std::string& line) {
    json j = parse_line(line);
    QuestionRecord q;
    q.id = j.at("id").get<std::string>();
    q.question = j.at("question").get<std::string>();
    if (j.contains("options")) {
        for (const auto& o : j["options"]) q.options.push_back(o.get<std::string>());
    }
    q.gold = get_optional_string(j, "gold");
    return q;
}

std::string to_json_line(const AnswerRecord& record) {
    json j;
    j["question_id"] = record.question_id;
    j["question"] = record.question;
    j["options"] = record.options;
    j["gold"] = optional_string(record.gold);
    j["mode"] = record.mode;
    json ladder;
    ladder["levels"] = record.ladder.levels;
    ladder["origin"] = record.ladder.origin == LadderOrigin::llm ? "llm" : "rule_based";
    ladder["fallback_reason"] = optional_string(record.ladder.fallback_reason);
    ladder["level_used"] =
        record.ladder.level_used ? json(*record.ladder.level_used) : json(nullptr);
    j["ladder"] = ladder;
    j["evidence_counts"] = record.evidence_counts;
    j["source_counts"] = record.source_counts;
    j["term_path_failed"] = record.term_path_failed;
    json evidence = json::array();
    for (const auto& item : record.evidence) evidence.push_back(evidence_to(item));
    j["evidence"] = evidence;
    j["context"] = record.context;
    j["raw_output"] = record.raw_output;
    j["parsed_answer"] = optional_string(record.parsed_answer);
    return j.dump();
}

AnswerRecord answer_record_from_json(const std::string& line) {
    json j = parse_line(line);
    AnswerRecord record;
    record.question_id = j.at("question_id").get<std::string>();
    record.question = j.value("question", std::string{});
    if (j.contains("options")) {
        for (const auto& o : j["options"]) record.options.push_back(o.get<std::string>());
    }
    record.gold = get_optional_string(j, "gold");
    record.mode = j.value("mode", std::string{"rag"});
    if (j.contains("ladder")) {
        const auto& ladder = j["ladder"];
        if (ladder.contains("levels")) {
            for (const auto& level : ladder["levels"])
                record.ladder.levels.push_back(level.get<std::string>());
        }
        record.ladder.origin = ladder.value("origin", std::string{"rule_based"}) == "llm"
                                   ? LadderOrigin::llm
                                   : LadderOrigin::rule_based;
        record.ladder.fallback_reason = get_optional_string(ladder, "fallback_reason");
        if (ladder.contains("level_used") && !ladder["level_used"].is_null()) {
            record.ladder.level_used = ladder["level_used"].get<std::size_t>();
        }
    }
    if (j.contains("evidence_counts")) {
        for (auto& [key, value] : j["evidence_counts"].items())
            record.evidence_counts[key] = value.get<int>();
    }
    if (j.contains("source_counts")) {
        for (auto& [key, value] : j["source_counts"].items())
            record.source_counts[key] = value.get<int>();
    }
    record.term_path_failed = j.value("term_path_failed", false);
    if (j.contains("evidence")) {
        for (const auto& e : j["evidence"]) record.evidence.push_back(evidence_from(e));
    }
    record.context = j.value("context", std::string{});
    record.raw_output = j.value("raw_output", std::string{});
    record.parsed_answer = get_optional_string(j, "parsed_answer");
    return record;
}

namespace {
template <typename T>
std::vector<T> read_lines(std::istream& in, T (*parse)(const std::string&)) {
    std::vector<T> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse(line));
    }
    return out;
}

template <typename T>
std::vector<T> read_file(const std::filesystem::path& path,
                         T (*parse)(const std::string&)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_lines(in, parse);
}
}  // namespace

std::vector<Document> read_documents_jsonl(std::istream& in) {
    return read_lines(in, document_from_json);
}
std::vector<Document> read_documents_file(const std::filesystem::path& path) {
    return read_file(path, document_from_json);
}
void write_documents_jsonl(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) out << to_json_line(d) << "\n";
}

std::vector<Chunk> read_chunks_jsonl(std::istream& in) {
    return read_lines(in, chunk_from_json);
}
std::vector<Chunk> read_chunks_file(const std::filesystem::path& path) {
    return read_file(path, chunk_from_json);
}
void write_chunks_jsonl(std::ostream& out, const std::vector<Chunk>& chunks) {
    for (const auto& c : chunks) out << to_json_line(c) << "\n";
}

std::vector<QuestionRecord> read_questions_jsonl(std::istream& in) {
    return read_lines(in, question_from_json);
}
std::vector<QuestionRecord> read_questions_file(const std::filesystem::path& path) {
    return read_file(path, question_from_json);
}

std::vector<AnswerRecord> read_answer_records_jsonl(std::istream& in) {
    return read_lines(in, answer_record_from_json);
}
std::vector<AnswerRecord> read_answer_records_file(const std::filesystem::path& path) {
    return read_file(path, answer_record_from_json);
}
void write_answer_records_jsonl(std::ostream& out,
                                const std::vector<AnswerRecord>& records) {
    for (const auto& r : records) out << to_json_line(r) << "\n";
}

std::vector<RetrievalJudgment> read_judgments_jsonl(std::istream& in) {
    return read_lines(in, judgment_from_json);
}
std::vector<RetrievalJudgment> read_judgments_file(const std::filesystem::path& path) {
    return read_file(path, judgment_from_json);
}
void write_judgments_jsonl(std::ostream& out,
                           const std::vector<RetrievalJudgment>& judgments) {
    for (const auto& j : judgments) out << to_json_line(j) << "\n";
}

}  // namespace medrag
