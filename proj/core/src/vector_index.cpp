#include "medrag/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "medrag/errors.hpp"

namespace medrag {

namespace {
constexpr char kMagic[4] = {'H', 'V', 'I', 'X'};
constexpr std::uint16_t kVersion = 1;

void append_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void append_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    append_u32(out, bits);
}

struct Reader {
    std::string_view bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) {
        if (pos + n > bytes.size()) {
            throw IndexLoadError(IndexLoadError::Kind::truncated,
                                 std::string("truncated payload reading ") + what);
        }
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i)
            v |= static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[pos + i]))
                 << (8 * i);
        pos += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i]))
                 << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i]))
                 << (8 * i);
        pos += 8;
        return v;
    }
    float f32(const char* what) {
        std::uint32_t bits = u32(what);
        float f;
        std::memcpy(&f, &bits, 4);
        return f;
    }
};

double row_norm(const float* row, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += static_cast<double>(row[i]) * row[i];
    return std::sqrt(s);
}
}  // namespace

VectorIndex VectorIndex::build(std::vector<std::string> ids, std::vector<float> vectors,
                               int dim, bool renormalize) {
    if (dim <= 0) throw std::invalid_argument("VectorIndex: dim must be positive");
    if (vectors.size() != ids.size() * static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("VectorIndex: vectors size != ids * dim");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw std::invalid_argument("VectorIndex: duplicate id " + id);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        float* row = vectors.data() + i * static_cast<std::size_t>(dim);
        double norm = row_norm(row, dim);
        if (norm == 0.0) {
            throw std::invalid_argument("VectorIndex: zero row for id " + ids[i]);
        }
        if (std::abs(norm - 1.0) > 1e-5) {
            if (!renormalize) {
                throw std::invalid_argument("VectorIndex: row for id " + ids[i] +
                                            " is not unit norm");
            }
            float inv = static_cast<float>(1.0 / norm);
            for (int d = 0; d < dim; ++d) row[d] *= inv;
        }
    }
    VectorIndex index;
    index.dim_ = dim;
    index.ids_ = std::move(ids);
    index.vectors_ = std::move(vectors);
    return index;
}

std::vector<SearchHit> search(const VectorIndex& index, const std::vector<float>& query,
                              int k) {
    if (static_cast<int>(query.size()) != index.dim()) {
        throw std::invalid_argument("search: query dim " +
                                    std::to_string(query.size()) + " != index dim " +
                                    std::to_string(index.dim()));
    }
    if (k <= 0) return {};
    const std::size_t n = index.size();
    std::vector<std::pair<double, std::size_t>> scored(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = index.row(i);
        double dot = 0.0;
        for (int d = 0; d < index.dim(); ++d)
            dot += static_cast<double>(row[d]) * query[static_cast<std::size_t>(d)];
        scored[i] = {dot, i};
    }
    auto better = [&](const std::pair<double, std::size_t>& a,
                      const std::pair<double, std::size_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return index.ids()[a.second] < index.ids()[b.second];
    };
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::partial_sort(scored.begin(),
                      scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      better);
    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        hits.push_back({index.ids()[scored[i].second], scored[i].first});
    }
    return hits;
}

std::string save_index(const VectorIndex& index) {
    std::string out;
    out.append(kMagic, 4);
    append_u16(out, kVersion);
    append_u32(out, static_cast<std::uint32_t>(index.dim()));
    append_u64(out, index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const float* row = index.row(i);
        for (int d = 0; d < index.dim(); ++d) append_f32(out, row[d]);
    }
    for (const auto& id : index.ids()) {
        append_u32(out, static_cast<std::uint32_t>(id.size()));
        out += id;
    }
    return out;
}

VectorIndex load_index(std::string_view bytes) {
    Reader r{bytes};
    r.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw IndexLoadError(IndexLoadError::Kind::bad_magic, "bad magic");
    }
    r.pos = 4;
    std::uint16_t version = r.u16("version");
    if (version != kVersion) {
        throw IndexLoadError(IndexLoadError::Kind::bad_version,
                             "unsupported version " + std::to_string(version));
    }
    auto dim = static_cast<int>(r.u32("dim"));
    std::uint64_t count = r.u64("count");
    if (dim <= 0) {
        throw IndexLoadError(IndexLoadError::Kind::mismatch, "non-positive dim");
    }
    std::vector<float> vectors;
    vectors.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(dim));
    for (std::uint64_t i = 0; i < count; ++i) {
        for (int d = 0; d < dim; ++d) vectors.push_back(r.f32("vector row"));
    }
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t len = r.u32("id length");
        r.need(len, "id bytes");
        ids.emplace_back(bytes.substr(r.pos, len));
        r.pos += len;
    }
    if (r.pos != bytes.size()) {
        throw IndexLoadError(IndexLoadError::Kind::mismatch,
                             "trailing bytes after payload");
    }
    VectorIndex index;
    // Bit-exact round trip: bypass the normalization checks in build().
    try {
        index = VectorIndex::build(std::move(ids), std::move(vectors), dim, true);
    } catch (const std::invalid_argument& e) {
        throw IndexLoadError(IndexLoadError::Kind::bad_data, e.what());
    }
    return index;
}

void save_index_file(const VectorIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    std::string bytes = save_index(index);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

VectorIndex load_index_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string bytes = buffer.str();
    return load_index(bytes);
}

namespace {
std::vector<float> parse_vector_json(const nlohmann::json& arr, std::size_t row) {
    std::vector<float> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) {
            throw Error("load_precomputed: non-numeric value in row " +
                        std::to_string(row));
        }
        auto f = x.get<double>();
        if (!std::isfinite(f)) {
            throw Error("load_precomputed: non-finite value in row " +
                        std::to_string(row));
        }
        v.push_back(static_cast<float>(f));
    }
    return v;
}
}  // namespace

VectorIndex load_precomputed(const std::filesystem::path& embeddings_file,
                             const std::filesystem::path& ids_file) {
    std::ifstream emb(embeddings_file, std::ios::binary);
    if (!emb) throw Error("cannot open " + embeddings_file.string());

    std::vector<std::string> ids;
    std::vector<std::vector<float>> rows;

    bool paired = !ids_file.empty();
    if (paired) {
        std::ifstream idf(ids_file, std::ios::binary);
        if (!idf) throw Error("cannot open " + ids_file.string());
        std::string line;
        while (std::getline(idf, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) ids.push_back(line);
        }
    }

    std::string line;
    std::size_t row = 0;
    while (std::getline(emb, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error("load_precomputed: bad JSON on row " + std::to_string(row));
        }
        if (paired) {
            if (!j.is_array())
                throw Error("load_precomputed: expected array on row " +
                            std::to_string(row));
            rows.push_back(parse_vector_json(j, row));
        } else {
            if (!j.is_object() || !j.contains("pmid") || !j.contains("vector")) {
                throw Error("load_precomputed: expected {\"pmid\",\"vector\"} on row " +
                            std::to_string(row));
            }
            ids.push_back(j["pmid"].get<std::string>());
            rows.push_back(parse_vector_json(j["vector"], row));
        }
        ++row;
    }

    if (ids.size() != rows.size()) {
        throw Error("load_precomputed: " + std::to_string(rows.size()) +
                    " embedding rows but " + std::to_string(ids.size()) + " ids");
    }
    if (rows.empty()) throw Error("load_precomputed: no rows");
    std::size_t dim = rows[0].size();
    std::vector<float> flat;
    flat.reserve(rows.size() * dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) {
            throw Error("load_precomputed: row " + std::to_string(i) +
                        " has dim " + std::to_string(rows[i].size()) + ", expected " +
                        std::to_string(dim));
        }
        double norm = 0.0;
        for (float x : rows[i]) norm += static_cast<double>(x) * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            throw Error("load_precomputed: zero vector in row " + std::to_string(i) +
                        " (cannot normalize)");
        }
        if (std::abs(norm - 1.0) > 1e-3) {
            std::cerr << "[warn] load_precomputed: re-normalizing row " << i
                      << " (norm " << norm << ")\n";
        }
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return VectorIndex::build(std::move(ids), std::move(flat), static_cast<int>(dim),
                              true);
}

}  // namespace medrag
