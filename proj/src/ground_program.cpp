#include <measp/ground_program.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace measp {

std::string Atom::str() const {
    std::string s = predicate;
    if (!args.empty()) {
        s += '(';
        for (std::size_t i = 0; i != args.size(); ++i) {
            if (i) s += ',';
            s += args[i];
        }
        s += ')';
    }
    return s;
}

bool Rule::has_negation() const {
    return std::any_of(body.begin(), body.end(), [](const Literal& l) { return l.negated; });
}

std::int64_t AtomTable::find(std::string_view text) const {
    auto it = index_.find(std::string(text));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

AtomId AtomTable::intern(Atom atom) {
    std::string key = atom.str();
    auto [it, added] = index_.try_emplace(key, static_cast<AtomId>(atoms_.size()));
    if (added) {
        atoms_.push_back(std::move(atom));
        names_.push_back(std::move(key));
    }
    return it->second;
}

GroundProgram::GroundProgram() : atoms_(std::make_shared<const AtomTable>()) {}

GroundProgram::GroundProgram(std::shared_ptr<const AtomTable> atoms, std::vector<Rule> rules)
    : atoms_(atoms ? std::move(atoms) : std::make_shared<const AtomTable>()), rules_(std::move(rules)) {
    const auto n = atoms_->size();
    for (const auto& r : rules_) {
        for (auto a : r.head)
            if (a >= n) throw std::out_of_range("rule head refers to unknown atom id");
        for (auto l : r.body)
            if (l.atom >= n) throw std::out_of_range("rule body refers to unknown atom id");
    }
}

bool GroundProgram::has_disjunction() const {
    return std::any_of(rules_.begin(), rules_.end(), [](const Rule& r) { return r.is_disjunctive(); });
}

ProgramBuilder::ProgramBuilder() : table_(std::make_shared<AtomTable>()) {}

ProgramBuilder& ProgramBuilder::add_rule(std::span<const Atom> head,
                                         std::span<const std::pair<Atom, bool>> body) {
    Rule r;
    for (const auto& a : head) {
        auto id = table_->intern(a);
        if (std::find(r.head.begin(), r.head.end(), id) == r.head.end()) r.head.push_back(id);
    }
    for (const auto& [a, neg] : body) r.body.push_back({table_->intern(a), neg});
    rules_.push_back(std::move(r));
    return *this;
}

ProgramBuilder& ProgramBuilder::add_rule_ids(std::vector<AtomId> head, std::vector<Literal> body) {
    Rule r;
    for (auto id : head) {
        if (id >= table_->size()) throw std::out_of_range("unknown atom id");
        if (std::find(r.head.begin(), r.head.end(), id) == r.head.end()) r.head.push_back(id);
    }
    for (auto l : body)
        if (l.atom >= table_->size()) throw std::out_of_range("unknown atom id");
    r.body = std::move(body);
    rules_.push_back(std::move(r));
    return *this;
}

GroundProgram ProgramBuilder::build() && {
    return GroundProgram(std::move(table_), std::move(rules_));
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& msg)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg)
    , line_(line)
    , column_(column) {}

namespace {

enum class Tok { End, Ident, Var, Int, Minus, LParen, RParen, Comma, Bar, Dot, If };

struct Token {
    Tok         kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t col  = 1;
};

bool is_ident_char(int c) { return std::isalnum(c) || c == '_'; }

class Lexer {
public:
    explicit Lexer(std::istream& in) : in_(in) { advance(); }

    const Token& peek() const { return tok_; }
    Token        take() {
        Token t = std::move(tok_);
        advance();
        return t;
    }

private:
    int get() {
        int c = in_.get();
        if (c == '\n') {
            ++line_;
            col_ = 1;
        }
        else if (c != EOF) {
            ++col_;
        }
        return c;
    }

    void advance() {
        int c = in_.peek();
        for (;;) {
            if (c == '%') {
                while (c != EOF && c != '\n') {
                    get();
                    c = in_.peek();
                }
            }
            else if (c != EOF && std::isspace(c)) {
                get();
                c = in_.peek();
            }
            else {
                break;
            }
        }
        tok_ = Token{};
        tok_.line = line_;
        tok_.col  = col_;
        if (c == EOF) return;
        if (std::islower(c) || std::isupper(c) || c == '_') {
            tok_.kind = (std::islower(c) ? Tok::Ident : Tok::Var);
            while (c != EOF && is_ident_char(c)) {
                tok_.text.push_back(static_cast<char>(get()));
                c = in_.peek();
            }
            return;
        }
        if (std::isdigit(c)) {
            tok_.kind = Tok::Int;
            while (c != EOF && std::isdigit(c)) {
                tok_.text.push_back(static_cast<char>(get()));
                c = in_.peek();
            }
            if (c != EOF && (std::isalpha(c) || c == '_'))
                throw ParseError(line_, col_, "malformed number");
            return;
        }
        get();
        switch (c) {
            case '-': tok_.kind = Tok::Minus; return;
            case '(': tok_.kind = Tok::LParen; return;
            case ')': tok_.kind = Tok::RParen; return;
            case ',': tok_.kind = Tok::Comma; return;
            case '|': tok_.kind = Tok::Bar; return;
            case '.': tok_.kind = Tok::Dot; return;
            case ':':
                if (in_.peek() == '-') {
                    get();
                    tok_.kind = Tok::If;
                    return;
                }
                throw ParseError(tok_.line, tok_.col, "expected ':-'");
            default: {
                std::string what = (c >= 32 && c < 127) ? std::string("'") + static_cast<char>(c) + "'"
                                                         : "byte " + std::to_string(c);
                throw ParseError(tok_.line, tok_.col, "unexpected character " + what);
            }
        }
    }

    std::istream& in_;
    Token         tok_;
    std::size_t   line_ = 1;
    std::size_t   col_  = 1;
};

class Parser {
public:
    explicit Parser(std::istream& in) : lex_(in) {}

    GroundProgram run() && {
        while (lex_.peek().kind != Tok::End) statement();
        return std::move(builder_).build();
    }

private:
    [[noreturn]] static void fail(const Token& t, const std::string& msg) {
        if (t.kind == Tok::Var)
            throw NonGroundError(t.line, t.col, "variable '" + t.text + "' in ground program");
        throw ParseError(t.line, t.col, msg);
    }

    Token expect(Tok kind, const char* what) {
        if (lex_.peek().kind != kind) fail(lex_.peek(), std::string("expected ") + what);
        return lex_.take();
    }

    static bool starts_atom(const Token& t) { return t.kind == Tok::Ident || t.kind == Tok::Minus; }

    void statement() {
        head_.clear();
        body_.clear();
        const Token& t = lex_.peek();
        if (starts_atom(t)) {
            head_.push_back(atom());
            for (;;) {
                const Token& sep = lex_.peek();
                if (sep.kind == Tok::Bar || (sep.kind == Tok::Ident && sep.text == "v")) {
                    lex_.take();
                    head_.push_back(atom());
                }
                else {
                    break;
                }
            }
        }
        else if (t.kind != Tok::If) {
            fail(t, "expected rule head or ':-'");
        }
        if (lex_.peek().kind == Tok::If) {
            lex_.take();
            body_.push_back(literal());
            while (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                body_.push_back(literal());
            }
        }
        expect(Tok::Dot, "'.' at end of rule");
        builder_.add_rule(head_, body_);
    }

    std::pair<Atom, bool> literal() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Ident && t.text == "not") {
            Token notTok = lex_.take();
            if (starts_atom(lex_.peek())) return {atom(), true};
            // 'not' used as a plain atom name
            return {atom_rest(std::move(notTok), ""), false};
        }
        return {atom(), false};
    }

    Atom atom() {
        std::string prefix;
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            prefix = "-";
        }
        const Token& t = lex_.peek();
        if (t.kind != Tok::Ident) fail(t, "expected predicate name");
        return atom_rest(lex_.take(), prefix);
    }

    Atom atom_rest(Token name, const std::string& prefix) {
        Atom a;
        a.predicate = prefix + name.text;
        if (lex_.peek().kind == Tok::LParen) {
            lex_.take();
            a.args.push_back(term());
            while (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                a.args.push_back(term());
            }
            expect(Tok::RParen, "')'");
        }
        return a;
    }

    std::string term() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Ident || t.kind == Tok::Int) return lex_.take().text;
        if (t.kind == Tok::Minus) {
            lex_.take();
            return "-" + expect(Tok::Int, "integer after '-'").text;
        }
        fail(t, "expected constant");
    }

    Lexer                              lex_;
    ProgramBuilder                     builder_;
    std::vector<Atom>                  head_;
    std::vector<std::pair<Atom, bool>> body_;
};

} // namespace

GroundProgram parse_ground_program(std::istream& in) { return Parser(in).run(); }

GroundProgram parse_ground_program(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_ground_program(in);
}

GroundProgram read_program_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open instance '" + path + "'");
    return parse_ground_program(in);
}

std::string print_rule(const GroundProgram& p, const Rule& r) {
    std::string s;
    const auto& tab = p.atoms();
    for (std::size_t i = 0; i != r.head.size(); ++i) {
        if (i) s += " | ";
        s += tab.name(r.head[i]);
    }
    if (!r.body.empty()) {
        s += r.head.empty() ? ":- " : " :- ";
        for (std::size_t i = 0; i != r.body.size(); ++i) {
            if (i) s += ", ";
            if (r.body[i].negated) s += "not ";
            s += tab.name(r.body[i].atom);
        }
    }
    s += '.';
    return s;
}

void print_program(std::ostream& out, const GroundProgram& p) {
    bool first = true;
    for (const auto& r : p.rules()) {
        if (!first) out << '\n';
        first = false;
        out << print_rule(p, r);
    }
}

std::string print_program(const GroundProgram& p) {
    std::ostringstream out;
    print_program(out, p);
    return out.str();
}

} // namespace measp
