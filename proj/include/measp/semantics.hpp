// Reference answer-set semantics for ground disjunctive programs.
//
// Everything here is brute force and meant as ground truth: answer sets
// are found by testing interpretations against the reduct, and
// minimality is checked by searching the proper subsets of a candidate.
#pragma once

#include <measp/ground_program.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace measp {

/// Set of true atoms over a program's atom table.
class Interpretation {
public:
    Interpretation() = default;
    /// Throws std::out_of_range if an id is not below num_atoms.
    Interpretation(std::size_t num_atoms, std::vector<AtomId> true_atoms);
    static Interpretation from_names(const GroundProgram& p, std::initializer_list<std::string_view> names);

    [[nodiscard]] std::size_t num_atoms() const { return num_atoms_; }
    [[nodiscard]] bool contains(AtomId a) const { return a < bits_.size() && bits_[a]; }
    /// Sorted ascending.
    [[nodiscard]] const std::vector<AtomId>& true_atoms() const { return ids_; }
    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] std::vector<std::string> names(const GroundProgram& p) const;

    friend bool operator==(const Interpretation& a, const Interpretation& b) { return a.ids_ == b.ids_; }
    friend bool operator<(const Interpretation& a, const Interpretation& b) { return a.ids_ < b.ids_; }

private:
    std::size_t         num_atoms_ = 0;
    std::vector<AtomId> ids_;
    std::vector<bool>   bits_;
};

class OracleScaleExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an enumeration is cancelled through its stop callback.
class OracleInterrupted : public std::runtime_error {
public:
    OracleInterrupted() : std::runtime_error("oracle interrupted") {}
};

inline constexpr std::size_t kDefaultOracleMaxAtoms = 24;

[[nodiscard]] bool body_true(const Rule& r, const Interpretation& i);
[[nodiscard]] bool head_true(const Rule& r, const Interpretation& i);
[[nodiscard]] bool rule_satisfied(const Rule& r, const Interpretation& i);
[[nodiscard]] bool is_model(const GroundProgram& p, const Interpretation& i);

/// Gelfond-Lifschitz reduct. The result shares p's atom table.
[[nodiscard]] GroundProgram reduct(const GroundProgram& p, const Interpretation& i);

[[nodiscard]] bool is_answer_set(const GroundProgram& p, const Interpretation& i);

struct EnumerateOptions {
    std::size_t           max_atoms = kDefaultOracleMaxAtoms;
    std::size_t           limit     = SIZE_MAX;
    /// Polled periodically; returning true aborts with OracleInterrupted.
    std::function<bool()> should_stop;
};

/// All answer sets (up to limit) in lexicographic order of their sorted id sequences.
[[nodiscard]] std::vector<Interpretation> enumerate_answer_sets(const GroundProgram& p,
                                                                const EnumerateOptions& opts);
[[nodiscard]] std::vector<Interpretation> enumerate_answer_sets(const GroundProgram& p,
                                                                std::size_t max_atoms = kDefaultOracleMaxAtoms,
                                                                std::size_t limit     = SIZE_MAX);

} // namespace measp
