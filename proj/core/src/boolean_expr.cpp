#include "medrag/boolean_expr.hpp"

#include <cctype>
#include <stdexcept>

namespace medrag {

BooleanExpr BooleanExpr::make_term(std::string text, std::string field_tag) {
    if (text.empty()) throw std::invalid_argument("term text must be non-empty");
    BooleanExpr e;
    e.kind = Kind::term;
    e.text = std::move(text);
    e.field_tag = std::move(field_tag);
    return e;
}

BooleanExpr BooleanExpr::make_and(std::vector<BooleanExpr> children) {
    if (children.size() < 2) throw std::invalid_argument("And needs >= 2 children");
    BooleanExpr e;
    e.kind = Kind::and_;
    e.children = std::move(children);
    return e;
}

BooleanExpr BooleanExpr::make_or(std::vector<BooleanExpr> children) {
    if (children.size() < 2) throw std::invalid_argument("Or needs >= 2 children");
    BooleanExpr e;
    e.kind = Kind::or_;
    e.children = std::move(children);
    return e;
}

BooleanExpr BooleanExpr::make_not(BooleanExpr child) {
    BooleanExpr e;
    e.kind = Kind::not_;
    e.children.push_back(std::move(child));
    return e;
}

namespace {
void collect_terms(const BooleanExpr& e, std::vector<std::string>& out) {
    if (e.kind == BooleanExpr::Kind::term) {
        for (const auto& t : out) {
            if (t == e.text) return;
        }
        out.push_back(e.text);
        return;
    }
    for (const auto& c : e.children) collect_terms(c, out);
}
}  // namespace

std::vector<std::string> BooleanExpr::term_texts() const {
    std::vector<std::string> out;
    collect_terms(*this, out);
    return out;
}

namespace {

bool has_whitespace(const std::string& s) {
    for (unsigned char c : s) {
        if (std::isspace(c)) return true;
    }
    return false;
}

void render_into(const BooleanExpr& e, std::string& out) {
    switch (e.kind) {
        case BooleanExpr::Kind::term:
            if (has_whitespace(e.text)) {
                out += '"';
                out += e.text;
                out += '"';
            } else {
                out += e.text;
            }
            out += e.field_tag;
            break;
        case BooleanExpr::Kind::and_:
        case BooleanExpr::Kind::or_: {
            const char* op = e.kind == BooleanExpr::Kind::and_ ? " AND " : " OR ";
            out += '(';
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += op;
                render_into(e.children[i], out);
            }
            out += ')';
            break;
        }
        case BooleanExpr::Kind::not_:
            out += "(NOT ";
            render_into(e.children[0], out);
            out += ')';
            break;
    }
}

// --- parser ---

struct Token {
    enum class Type { word, quoted, tag, and_, or_, not_, lparen, rparen, end };
    Type type;
    std::string value;
};

class Lexer {
public:
    explicit Lexer(std::string_view in) : in_(in) {}

    std::optional<Token> next() {
        while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_])))
            ++pos_;
        if (pos_ >= in_.size()) return Token{Token::Type::end, ""};
        char c = in_[pos_];
        if (c == '(') { ++pos_; return Token{Token::Type::lparen, "("}; }
        if (c == ')') { ++pos_; return Token{Token::Type::rparen, ")"}; }
        if (c == '"') {
            std::size_t close = in_.find('"', pos_ + 1);
            if (close == std::string_view::npos) return std::nullopt;
            std::string value(in_.substr(pos_ + 1, close - pos_ - 1));
            pos_ = close + 1;
            if (value.empty()) return std::nullopt;
            return Token{Token::Type::quoted, value};
        }
        if (c == '[') {
            std::size_t close = in_.find(']', pos_ + 1);
            if (close == std::string_view::npos) return std::nullopt;
            std::string value(in_.substr(pos_, close - pos_ + 1));
            pos_ = close + 1;
            return Token{Token::Type::tag, value};
        }
        std::size_t start = pos_;
        while (pos_ < in_.size()) {
            char d = in_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' ||
                d == '"' || d == '[')
                break;
            ++pos_;
        }
        std::string word(in_.substr(start, pos_ - start));
        if (word == "AND") return Token{Token::Type::and_, word};
        if (word == "OR") return Token{Token::Type::or_, word};
        if (word == "NOT") return Token{Token::Type::not_, word};
        return Token{Token::Type::word, word};
    }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view in) : lexer_(in) { advance(); }

    std::optional<BooleanExpr> parse() {
        auto expr = parse_or();
        if (!expr || !ok_ || current_.type != Token::Type::end) return std::nullopt;
        return expr;
    }

private:
    void advance() {
        auto t = lexer_.next();
        if (!t) { ok_ = false; current_ = Token{Token::Type::end, ""}; return; }
        current_ = *t;
    }

    std::optional<BooleanExpr> parse_or() {
        auto first = parse_and();
        if (!first) return std::nullopt;
        std::vector<BooleanExpr> children;
        children.push_back(std::move(*first));
        while (ok_ && current_.type == Token::Type::or_) {
            advance();
            auto next = parse_and();
            if (!next) return std::nullopt;
            children.push_back(std::move(*next));
        }
        if (children.size() == 1) return std::move(children[0]);
        return BooleanExpr::make_or(std::move(children));
    }

    std::optional<BooleanExpr> parse_and() {
        auto first = parse_unary();
        if (!first) return std::nullopt;
        std::vector<BooleanExpr> children;
        children.push_back(std::move(*first));
        while (ok_ && current_.type == Token::Type::and_) {
            advance();
            auto next = parse_unary();
            if (!next) return std::nullopt;
            children.push_back(std::move(*next));
        }
        if (children.size() == 1) return std::move(children[0]);
        return BooleanExpr::make_and(std::move(children));
    }

    std::optional<BooleanExpr> parse_unary() {
        if (current_.type == Token::Type::not_) {
            advance();
            auto child = parse_unary();
            if (!child) return std::nullopt;
            return BooleanExpr::make_not(std::move(*child));
        }
        return parse_atom();
    }

    std::optional<BooleanExpr> parse_atom() {
        if (current_.type == Token::Type::lparen) {
            advance();
            auto inner = parse_or();
            if (!inner || current_.type != Token::Type::rparen) return std::nullopt;
            advance();
            return inner;
        }
        if (current_.type == Token::Type::quoted || current_.type == Token::Type::word) {
            std::string text = current_.value;
            bool quoted = current_.type == Token::Type::quoted;
            bool multiword = false;
            advance();
            // unquoted adjacent words merge into one term (PubMed style)
            while (!quoted && ok_ && current_.type == Token::Type::word) {
                text += " " + current_.value;
                multiword = true;
                advance();
            }
            std::string tag;
            if (ok_ && current_.type == Token::Type::tag) {
                tag = current_.value;
                advance();
            }
            if (!ok_) return std::nullopt;
            // a bare multiword term must be quoted or field-tagged; this is
            // what keeps prose from parsing as a query
            if (multiword && tag.empty()) return std::nullopt;
            return BooleanExpr::make_term(std::move(text), std::move(tag));
        }
        return std::nullopt;
    }

    Lexer lexer_;
    Token current_{Token::Type::end, ""};
    bool ok_ = true;
};

}  // namespace

std::string render(const BooleanExpr& expr) {
    std::string out;
    render_into(expr, out);
    return out;
}

std::optional<BooleanExpr> parse_boolean_expression(std::string_view input) {
    Parser parser(input);
    auto result = parser.parse();
    return result;
}

}  // namespace medrag
