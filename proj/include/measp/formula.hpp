// Small arithmetic expression language used by feature manifests and by
// engine admission conditions.
//
//   expr   := term (('+' | '-') term)*
//   term   := power (('*' | '/') power)*
//   power  := unary ('^' integer)?
//   unary  := '-' unary | primary
//   primary:= number | name | name '(' expr ')' | '(' expr ')'
//   cond   := expr cmp expr ('and' expr cmp expr)*     cmp: < <= > >= == !=
//
// Division by zero evaluates to 0. The only function is ln1p.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace measp {

class FormulaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Maps a variable name to its slot, or nullopt if unknown.
using SymbolResolver = std::function<std::optional<std::size_t>(std::string_view)>;

class Formula {
public:
    Formula();
    static Formula compile(std::string_view text, const SymbolResolver& resolve);

    [[nodiscard]] double evaluate(std::span<const double> slots) const;
    [[nodiscard]] const std::string& text() const { return text_; }

    struct Node;

private:
    friend class Condition;
    std::string                 text_;
    std::shared_ptr<const Node> root_;
};

class Condition {
public:
    static Condition compile(std::string_view text, const SymbolResolver& resolve);
    [[nodiscard]] bool holds(std::span<const double> slots) const;
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    struct Clause {
        Formula lhs;
        Formula rhs;
        int     op = 0;
    };
    std::string         text_;
    std::vector<Clause> clauses_;
};

} // namespace measp
