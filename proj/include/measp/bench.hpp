// Benchmark harness, report tables, plot data (cactus, PCA) and
// synthetic instance/matrix generators.
#pragma once

#include <measp/engine.hpp>
#include <measp/features.hpp>
#include <measp/selection.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace measp {

// ---------------------------------------------------------------- bench

struct BenchPlan {
    std::string   registry_path; // unused when a registry is passed directly
    std::string   instances_dir;
    Limits        limits;
    std::size_t   workers = 1;
    std::string   out_csv;
    std::uint64_t seed    = 1; // shuffles execution order only
    /// Engines to run, in output order; empty means the whole registry.
    std::vector<std::string> engines;
    /// Cross-check every answer against the reference enumeration for
    /// instances within oracle scale.
    bool   sanity_check       = false;
    double checkpoint_seconds = 5.0;

    void validate() const;
};

struct BenchSummary {
    PerformanceMatrix        matrix;
    std::size_t              executed = 0;
    std::size_t              skipped  = 0; // cells taken from an existing CSV
    std::vector<std::string> sanity_failures;
};

/// Instance files (*.gasp, *.lp, *.asp) below `dir`, sorted by relative
/// path. The family is the first directory component ("default" for
/// top-level files); programs with a disjunctive rule are Beyond-NP.
[[nodiscard]] std::vector<InstanceInfo> discover_instances(const std::string& dir);

/// Runs the solver x instance grid, resuming from plan.out_csv if it exists.
BenchSummary bench(const BenchPlan& plan, const EngineRegistry& registry);
BenchSummary bench(const BenchPlan& plan);

// ---------------------------------------------------------------- report

struct SolverRow {
    std::string name;
    std::size_t solved             = 0;
    double      time               = 0.0;
    std::size_t solved_np          = 0;
    double      time_np            = 0.0;
    std::size_t solved_beyond_np   = 0;
    double      time_beyond_np     = 0.0;
    std::size_t unique             = 0;

    friend bool operator==(const SolverRow&, const SolverRow&) = default;
};

/// One multi-engine solve invocation, as recorded by `measp solve --out`.
struct SolveRecord {
    std::string instance;
    std::string chosen; // empty when no engine was run
    RunOutcome  outcome;
    double      feature_seconds  = 0.0;
    double      classify_seconds = 0.0;
};

inline constexpr const char* kSolveCsvHeader =
    "instance,chosen,status,cpu_seconds,feature_seconds,classify_seconds";
void write_solve_csv(std::ostream& out, std::span<const SolveRecord> rows);
std::vector<SolveRecord> read_solve_csv(std::istream& in);

struct Report {
    std::vector<SolverRow>             solvers; // matrix order
    SolverRow                          sota;    // over the pool (all solvers if none given)
    std::optional<SolverRow>           multi_engine;
    std::map<std::string, std::size_t> calls; // chosen engine -> invocations
};

/// Aggregates a matrix. Solve records must refer to instances of `m`.
[[nodiscard]] Report make_report(const PerformanceMatrix& m, const std::optional<EnginePool>& pool = std::nullopt,
                                 std::span<const SolveRecord> results = {});

inline constexpr const char* kReportCsvHeader =
    "row,solved,time,solved_np,time_np,solved_beyond_np,time_beyond_np,unique";
void write_report_csv(std::ostream& out, const Report& r);
void write_report_text(std::ostream& out, const Report& r);
void write_calls_csv(std::ostream& out, const Report& r);

struct CactusSeries {
    std::string                          name;
    std::vector<std::pair<double, std::size_t>> points; // (time, #solved within time)
};

/// One series per solver plus "sota" over the pool (all solvers if none given).
[[nodiscard]] std::vector<CactusSeries> cactus(const PerformanceMatrix& m,
                                               const std::optional<EnginePool>& pool = std::nullopt);
void write_cactus_csv(std::ostream& out, std::span<const CactusSeries> series);

// ---------------------------------------------------------------- pca

struct PcaResult {
    std::vector<std::array<double, 2>> coords;
    std::array<double, 2>              explained{}; // top-2 eigenvalues
    double                             total_variance = 0.0;
    std::array<std::vector<double>, 2> components;
};

/// Projection on the top-2 principal components of the standardized data
/// (population statistics, so duplicating every row changes nothing; constant
/// columns become zero). Power iteration with
/// deflation; each component's largest-magnitude entry is made positive.
[[nodiscard]] PcaResult pca_project(std::span<const std::vector<double>> rows, double tolerance = 1e-9);
[[nodiscard]] PcaResult pca_project(std::span<const FeatureVector> rows, double tolerance = 1e-9);

// ---------------------------------------------------------------- synthetic data

namespace synth {

/// Normal rules with three body literals, each negated with probability 1/2.
[[nodiscard]] GroundProgram random_normal(std::size_t atoms, std::size_t rules, std::uint64_t seed);
/// Each pigeon picks a hole disjunctively; no two pigeons share a hole.
[[nodiscard]] GroundProgram pigeonhole(std::size_t pigeons, std::size_t holes);
/// Mostly facts plus a few positive definite rules.
[[nodiscard]] GroundProgram fact_heavy(std::size_t atoms, std::uint64_t seed);
/// Guesses through even negative loops, filtered by many constraints.
[[nodiscard]] GroundProgram constraint_heavy(std::size_t atoms, std::uint64_t seed);

/// Fourteen NP solvers whose solved/unique aggregates equal the
/// competition table they mimic (clasp 445/26, cmodels 333/6, ...).
[[nodiscard]] PerformanceMatrix competition_matrix(std::uint64_t seed = 1);

struct CompetitionRow {
    const char* solver;
    std::size_t solved;
    std::size_t unique;
};
[[nodiscard]] std::span<const CompetitionRow> competition_rows();

/// Random matrix: each cell solved with probability p_solved.
[[nodiscard]] PerformanceMatrix random_matrix(std::size_t solvers, std::size_t instances, double p_solved,
                                              std::uint64_t seed);

} // namespace synth

} // namespace measp
