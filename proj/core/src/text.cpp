#include "medrag/text.hpp"

#include <cctype>

namespace medrag {

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> lowercase_tokens(std::string_view text) {
    auto toks = whitespace_tokens(text);
    for (auto& t : toks) {
        for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return toks;
}

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& raw : whitespace_tokens(text)) {
        std::string tok;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(raw[i]);
            if (std::isalnum(c)) {
                tok.push_back(static_cast<char>(std::tolower(c)));
            } else if (raw[i] == '-' && i > 0 && i + 1 < raw.size() &&
                       std::isalnum(static_cast<unsigned char>(raw[i - 1])) &&
                       std::isalnum(static_cast<unsigned char>(raw[i + 1]))) {
                tok.push_back('-');
            }
        }
        if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
}

int count_whitespace_tokens(std::string_view text) {
    int n = 0;
    bool in_token = false;
    for (char ch : text) {
        bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

TokenCounter default_token_counter() {
    return [](std::string_view s) { return count_whitespace_tokens(s); };
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace medrag
