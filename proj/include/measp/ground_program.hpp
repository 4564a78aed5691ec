// Ground disjunctive programs: atoms, rules, parser and printer.
//
// Surface syntax (one statement per rule, each terminated by '.'):
//
//   a | b :- c, not d.     disjunctive rule ('v' may replace '|')
//   p(1,x).                fact
//   :- a, b.               constraint
//   % comment to end of line
//
// Only ground programs are accepted: an identifier starting with an
// uppercase letter or '_' is a variable and is rejected.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace measp {

using AtomId = std::uint32_t;

struct Atom {
    std::string              predicate; // may carry a leading '-' for classical negation
    std::vector<std::string> args;

    [[nodiscard]] std::string str() const;
    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Literal {
    AtomId atom    = 0;
    bool   negated = false;
    friend bool operator==(const Literal&, const Literal&) = default;
};

struct Rule {
    std::vector<AtomId>  head; // pairwise distinct, source order
    std::vector<Literal> body; // source order

    [[nodiscard]] bool is_fact() const { return head.size() == 1 && body.empty(); }
    [[nodiscard]] bool is_constraint() const { return head.empty(); }
    [[nodiscard]] bool is_normal() const { return head.size() == 1; }
    [[nodiscard]] bool is_disjunctive() const { return head.size() >= 2; }
    [[nodiscard]] bool is_disjunctive_fact() const { return head.size() >= 2 && body.empty(); }
    [[nodiscard]] bool has_negation() const;
    [[nodiscard]] bool is_horn() const { return head.size() <= 1 && !has_negation(); }

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// Bijection between ground atoms and dense ids, in first-occurrence order.
class AtomTable {
public:
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] const Atom& operator[](AtomId id) const { return atoms_.at(id); }
    [[nodiscard]] const std::string& name(AtomId id) const { return names_.at(id); }
    [[nodiscard]] std::span<const Atom> atoms() const { return atoms_; }
    /// Id of the atom with the given textual form, or -1 if absent.
    [[nodiscard]] std::int64_t find(std::string_view text) const;

    AtomId intern(Atom atom);

    friend bool operator==(const AtomTable& a, const AtomTable& b) { return a.atoms_ == b.atoms_; }

private:
    std::vector<Atom>                       atoms_;
    std::vector<std::string>                names_;
    std::unordered_map<std::string, AtomId> index_;
};

/// Immutable ground program.
///
/// Programs built by ProgramBuilder (and by the parser) have an atom table
/// covering exactly the atoms that occur in their rules. Programs derived
/// from another one (e.g. a reduct) share the parent's table so that ids
/// keep their meaning; their table may then contain atoms no rule mentions.
class GroundProgram {
public:
    GroundProgram();
    GroundProgram(std::shared_ptr<const AtomTable> atoms, std::vector<Rule> rules);

    [[nodiscard]] std::span<const Rule> rules() const { return rules_; }
    [[nodiscard]] std::size_t num_rules() const { return rules_.size(); }
    [[nodiscard]] std::size_t num_atoms() const { return atoms_->size(); }
    [[nodiscard]] const AtomTable& atoms() const { return *atoms_; }
    [[nodiscard]] const std::shared_ptr<const AtomTable>& atom_table() const { return atoms_; }
    [[nodiscard]] bool has_disjunction() const;

    friend bool operator==(const GroundProgram& a, const GroundProgram& b) {
        return a.rules_ == b.rules_ && *a.atoms_ == *b.atoms_;
    }

private:
    std::shared_ptr<const AtomTable> atoms_;
    std::vector<Rule>                rules_;
};

/// Incremental construction with atom interning in first-occurrence order.
class ProgramBuilder {
public:
    ProgramBuilder();
    /// Adds a rule; duplicate head atoms are dropped. Atoms are interned head first, then body.
    ProgramBuilder& add_rule(std::span<const Atom> head, std::span<const std::pair<Atom, bool>> body);
    /// Adds a rule over atoms already interned in this builder.
    ProgramBuilder& add_rule_ids(std::vector<AtomId> head, std::vector<Literal> body);
    AtomId          intern(Atom atom) { return table_->intern(std::move(atom)); }
    [[nodiscard]] std::size_t num_rules() const { return rules_.size(); }
    GroundProgram   build() &&;

private:
    std::shared_ptr<AtomTable> table_;
    std::vector<Rule>          rules_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& msg);
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Raised when a variable (uppercase identifier) occurs in the input.
class NonGroundError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Single-pass parser; reads the stream once and never seeks.
GroundProgram parse_ground_program(std::istream& in);
GroundProgram parse_ground_program(std::string_view text);
GroundProgram read_program_file(const std::string& path);

void        print_program(std::ostream& out, const GroundProgram& p);
std::string print_program(const GroundProgram& p);
std::string print_rule(const GroundProgram& p, const Rule& r);

} // namespace measp
