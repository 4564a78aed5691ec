// Running engines under resource limits, and the per-instance
// multi-engine solve path.
#pragma once

#include <measp/features.hpp>
#include <measp/learn.hpp>
#include <measp/selection.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace measp {

struct Limits {
    double        cpu_seconds  = 600.0;
    std::uint64_t memory_bytes = 2ULL << 30;

    void validate() const;
};

enum class EngineKind { External, BuiltinOracle };

/// How an engine's output is mapped to an Answer.
struct AnswerRule {
    std::string answer_prefix       = "ANSWER";
    std::string inconsistent_prefix = "INCONSISTENT";
    /// Also accept the SAT-competition exit codes 10 / 20.
    bool        exit_codes = false;
};

struct EngineSpec {
    std::string name;
    EngineKind  kind = EngineKind::External;
    /// External only; `{instance}` is replaced by the instance path.
    std::string command;
    bool        handles_disjunctive = false;
    AnswerRule  answer_rule;
    /// Per-engine CPU cap; runs use the smaller of this and the caller's limit.
    std::optional<double> cpu_limit;
    // builtin-oracle only
    std::size_t max_atoms = 24;
    /// Admission condition over base quantities and features. Instances
    /// that fail it are reported with `off_speciality` status without solving.
    std::optional<Condition> require;
    RunStatus                off_speciality = RunStatus::Timeout;

    void validate() const;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Engine registry file:
///
///   [engine clasp]
///   kind = external
///   command = clasp --outf=0 {instance}
///   disjunctive = false
///   answer = ANSWER
///   inconsistent = INCONSISTENT
///   exit_codes = true
///   cpu_limit = 60
///
///   [engine oracle]
///   kind = builtin-oracle
///   disjunctive = true
///   max_atoms = 24
///   require = frac_constraints >= 0.2
///   off_speciality = timeout
class EngineRegistry {
public:
    EngineRegistry() = default;
    static EngineRegistry parse(std::string_view text);
    static EngineRegistry load(const std::string& path);
    /// Registry containing only the builtin `oracle`.
    static EngineRegistry builtin();

    void add(EngineSpec spec);
    [[nodiscard]] const EngineSpec& get(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const;
    [[nodiscard]] const std::vector<EngineSpec>& engines() const { return engines_; }
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::map<std::string, bool> disjunctive_flags() const;

private:
    std::vector<EngineSpec> engines_;
};

struct RunResult {
    RunOutcome    outcome;
    double        wall_seconds = 0.0;
    std::string   diagnostic; // reason for error/memout, if any
    /// Builtin oracle: the answer set found, by atom name.
    std::optional<std::vector<std::string>> witness;
};

/// Runs one engine on one instance file. Safe to call concurrently.
[[nodiscard]] RunResult run_engine(const EngineSpec& e, const std::string& instance_path, const Limits& l);

/// Builtin oracle on an already parsed program.
[[nodiscard]] RunResult run_builtin(const EngineSpec& e, const GroundProgram& p, const Limits& l);

struct SolveOptions {
    bool fallback = false;
    /// Historical solved counts for ordering fallback attempts; pool order otherwise.
    std::map<std::string, std::size_t> solved_counts;
    /// Manifest matching the model; the canonical one when null.
    const FeatureManifest* manifest = nullptr;
};

struct SolveAttempt {
    std::string engine;
    RunResult   result;
};

struct SolveResult {
    std::optional<std::string> chosen; // first engine run; empty if none was run
    RunOutcome                 outcome;
    double                     feature_seconds  = 0.0;
    double                     classify_seconds = 0.0;
    /// Feature + classification + engine CPU time over all attempts.
    double                     total_seconds = 0.0;
    std::vector<SolveAttempt>  attempts;
    std::optional<std::vector<std::string>> witness;
};

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] SolveResult solve(const std::string& instance_path, const InductiveModel& model, const EnginePool& pool,
                                const EngineRegistry& registry, const Limits& l, const SolveOptions& opts = {});

/// Current thread's CPU time in seconds.
double thread_cpu_seconds();

} // namespace measp
