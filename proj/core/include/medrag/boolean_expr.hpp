#pragma once

#include <optional>
#include <string>
#include <vector>

namespace medrag {

// Boolean query tree in E-Utilities term syntax. And/Or hold >= 2
// children, Not exactly one; terms carry an optional field tag such as
// "[Title/Abstract]".
struct BooleanExpr {
    enum class Kind { term, and_, or_, not_ };

    Kind kind = Kind::term;
    std::string text;       // term only
    std::string field_tag;  // term only, may be empty
    std::vector<BooleanExpr> children;

    static BooleanExpr make_term(std::string text, std::string field_tag = "");
    static BooleanExpr make_and(std::vector<BooleanExpr> children);
    static BooleanExpr make_or(std::vector<BooleanExpr> children);
    static BooleanExpr make_not(BooleanExpr child);

    // Distinct term texts in the subtree, in first-appearance order.
    std::vector<std::string> term_texts() const;

    bool operator==(const BooleanExpr&) const = default;
};

// Parenthesized infix rendering with uppercase operators; multiword terms
// are double-quoted and field tags appended. Deterministic in child order.
std::string render(const BooleanExpr& expr);

// Inverse of render for the supported syntax. Consecutive bare words form
// one term; AND/OR chains without parentheses become one n-ary node.
// Returns nullopt when the input is not a valid expression.
std::optional<BooleanExpr> parse_boolean_expression(std::string_view input);

}  // namespace medrag
