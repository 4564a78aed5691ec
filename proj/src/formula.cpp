#include <measp/formula.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <variant>

namespace measp {

struct Formula::Node {
    enum Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Ln1p } kind = Const;
    double                      value = 0.0;
    std::size_t                 slot  = 0;
    int                         exponent = 1;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Formula::Node>;
using Node    = Formula::Node;

double eval(const Node& n, std::span<const double> slots) {
    switch (n.kind) {
        case Node::Const: return n.value;
        case Node::Var: return slots[n.slot];
        case Node::Neg: return -eval(*n.lhs, slots);
        case Node::Add: return eval(*n.lhs, slots) + eval(*n.rhs, slots);
        case Node::Sub: return eval(*n.lhs, slots) - eval(*n.rhs, slots);
        case Node::Mul: return eval(*n.lhs, slots) * eval(*n.rhs, slots);
        case Node::Div: {
            double d = eval(*n.rhs, slots);
            return d == 0.0 ? 0.0 : eval(*n.lhs, slots) / d;
        }
        case Node::Pow: {
            double base = eval(*n.lhs, slots);
            double acc  = 1.0;
            for (int k = 0; k < n.exponent; ++k) acc *= base;
            return acc;
        }
        case Node::Ln1p: return std::log1p(eval(*n.lhs, slots));
    }
    return 0.0;
}

class ExprParser {
public:
    ExprParser(std::string_view text, const SymbolResolver& resolve) : s_(text), resolve_(resolve) {}

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            skip();
            if (eat('+')) lhs = binary(Node::Add, lhs, term());
            else if (eat('-')) lhs = binary(Node::Sub, lhs, term());
            else return lhs;
        }
    }

    int comparison() {
        skip();
        static constexpr std::pair<std::string_view, int> ops[] = {
            {"<=", 1}, {">=", 3}, {"==", 4}, {"!=", 5}, {"<", 0}, {">", 2}};
        for (auto [tok, code] : ops) {
            if (s_.substr(pos_).starts_with(tok)) {
                pos_ += tok.size();
                return code;
            }
        }
        fail("expected comparison operator");
    }

    bool keyword(std::string_view kw) {
        skip();
        if (s_.substr(pos_).starts_with(kw) &&
            (pos_ + kw.size() == s_.size() || !std::isalnum(static_cast<unsigned char>(s_[pos_ + kw.size()])))) {
            pos_ += kw.size();
            return true;
        }
        return false;
    }

    bool at_end() {
        skip();
        return pos_ == s_.size();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormulaError("formula '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + msg);
    }

private:
    static NodePtr binary(Node::Kind k, NodePtr a, NodePtr b) {
        auto n  = std::make_shared<Node>();
        n->kind = k;
        n->lhs  = std::move(a);
        n->rhs  = std::move(b);
        return n;
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr term() {
        NodePtr lhs = power();
        for (;;) {
            skip();
            if (eat('*')) lhs = binary(Node::Mul, lhs, power());
            else if (eat('/')) lhs = binary(Node::Div, lhs, power());
            else return lhs;
        }
    }

    NodePtr power() {
        NodePtr base = unary();
        if (!eat('^')) return base;
        skip();
        int         k   = 0;
        const char* beg = s_.data() + pos_;
        auto [end, ec]  = std::from_chars(beg, s_.data() + s_.size(), k);
        if (ec != std::errc() || k < 0) fail("expected non-negative integer exponent");
        pos_ += static_cast<std::size_t>(end - beg);
        auto n      = std::make_shared<Node>();
        n->kind     = Node::Pow;
        n->exponent = k;
        n->lhs      = std::move(base);
        return n;
    }

    NodePtr unary() {
        if (eat('-')) {
            auto n  = std::make_shared<Node>();
            n->kind = Node::Neg;
            n->lhs  = unary();
            return n;
        }
        return primary();
    }

    NodePtr primary() {
        skip();
        if (eat('(')) {
            NodePtr inner = expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
            double      v   = 0;
            const char* beg = s_.data() + pos_;
            auto [end, ec]  = std::from_chars(beg, s_.data() + s_.size(), v);
            if (ec != std::errc()) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - beg);
            auto n   = std::make_shared<Node>();
            n->kind  = Node::Const;
            n->value = v;
            return n;
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (start == pos_) fail("expected operand");
        std::string_view name = s_.substr(start, pos_ - start);
        if (eat('(')) {
            if (name != "ln1p") fail("unknown function '" + std::string(name) + "'");
            auto n  = std::make_shared<Node>();
            n->kind = Node::Ln1p;
            n->lhs  = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        auto slot = resolve_(name);
        if (!slot) fail("unknown name '" + std::string(name) + "'");
        auto n  = std::make_shared<Node>();
        n->kind = Node::Var;
        n->slot = *slot;
        return n;
    }

    std::string_view      s_;
    std::size_t           pos_ = 0;
    const SymbolResolver& resolve_;
};

} // namespace

Formula::Formula() : root_(std::make_shared<Node>()) {}

Formula Formula::compile(std::string_view text, const SymbolResolver& resolve) {
    ExprParser p(text, resolve);
    Formula    f;
    f.text_ = std::string(text);
    f.root_ = p.expr();
    if (!p.at_end()) p.fail("trailing input");
    return f;
}

double Formula::evaluate(std::span<const double> slots) const { return eval(*root_, slots); }

Condition Condition::compile(std::string_view text, const SymbolResolver& resolve) {
    Condition c;
    c.text_ = std::string(text);
    ExprParser p(text, resolve);
    do {
        Clause cl;
        cl.lhs.root_ = p.expr();
        cl.op        = p.comparison();
        cl.rhs.root_ = p.expr();
        c.clauses_.push_back(std::move(cl));
    } while (p.keyword("and"));
    if (!p.at_end()) p.fail("trailing input");
    return c;
}

bool Condition::holds(std::span<const double> slots) const {
    for (const auto& cl : clauses_) {
        double a = cl.lhs.evaluate(slots);
        double b = cl.rhs.evaluate(slots);
        bool   ok = false;
        switch (cl.op) {
            case 0: ok = a < b; break;
            case 1: ok = a <= b; break;
            case 2: ok = a > b; break;
            case 3: ok = a >= b; break;
            case 4: ok = a == b; break;
            case 5: ok = a != b; break;
        }
        if (!ok) return false;
    }
    return true;
}

} // namespace measp
