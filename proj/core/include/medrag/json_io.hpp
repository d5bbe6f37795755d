#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "medrag/document.hpp"
#include "medrag/metrics.hpp"
#include "medrag/pipeline.hpp"

namespace medrag {

// Single-line JSON encodings for the artifact's .jsonl formats. Field
// names are the snake_case type fields; absent optionals serialize as
// null. Encoding is deterministic (keys sorted), so identical inputs
// yield byte-identical files.

std::string to_json_line(const Document& doc);
Document document_from_json(const std::string& line);

std::string to_json_line(const Chunk& chunk);
Chunk chunk_from_json(const std::string& line);

std::string to_json_line(const EvidenceItem& item);
EvidenceItem evidence_item_from_json(const std::string& line);

std::string to_json_line(const RetrievalJudgment& judgment);
RetrievalJudgment judgment_from_json(const std::string& line);

std::string to_json_line(const AnswerRecord& record);
AnswerRecord answer_record_from_json(const std::string& line);

std::string to_json_line(const QuestionRecord& question);
QuestionRecord question_from_json(const std::string& line);

// Line-oriented readers/writers. Blank lines are skipped on read.
template <typename T>
std::vector<T> read_jsonl(std::istream& in, T (*parse)(const std::string&));

std::vector<Document> read_documents_jsonl(std::istream& in);
std::vector<Document> read_documents_file(const std::filesystem::path& path);
void write_documents_jsonl(std::ostream& out, const std::vector<Document>& docs);

std::vector<Chunk> read_chunks_jsonl(std::istream& in);
std::vector<Chunk> read_chunks_file(const std::filesystem::path& path);
void write_chunks_jsonl(std::ostream& out, const std::vector<Chunk>& chunks);

std::vector<QuestionRecord> read_questions_jsonl(std::istream& in);
std::vector<QuestionRecord> read_questions_file(const std::filesystem::path& path);

std::vector<AnswerRecord> read_answer_records_jsonl(std::istream& in);
std::vector<AnswerRecord> read_answer_records_file(const std::filesystem::path& path);
void write_answer_records_jsonl(std::ostream& out,
                                const std::vector<AnswerRecord>& records);

std::vector<RetrievalJudgment> read_judgments_jsonl(std::istream& in);
std::vector<RetrievalJudgment> read_judgments_file(const std::filesystem::path& path);
void write_judgments_jsonl(std::ostream& out,
                           const std::vector<RetrievalJudgment>& judgments);

}  // namespace medrag
