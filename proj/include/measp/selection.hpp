// Recorded solver performance and engine-pool selection policies.
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace measp {

enum class RunStatus { Solved, Timeout, Memout, Error };
enum class Answer { Unknown, AnswerSetFound, Inconsistent };
enum class ComplexityClass { NP, BeyondNP };

const char*     to_string(RunStatus s);
const char*     to_string(ComplexityClass c);
RunStatus       parse_run_status(std::string_view s);
ComplexityClass parse_complexity_class(std::string_view s);

struct RunOutcome {
    RunStatus status = RunStatus::Error;
    /// Consumed CPU time for solved runs. For timeouts the CSV records the
    /// CPU limit; for memout/error whatever was measured.
    double    cpu_seconds = 0.0;
    Answer    answer      = Answer::Unknown;

    [[nodiscard]] bool solved() const { return status == RunStatus::Solved; }
    friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

struct InstanceInfo {
    std::string     name;
    std::string     family;
    ComplexityClass cls = ComplexityClass::NP;
    friend bool operator==(const InstanceInfo&, const InstanceInfo&) = default;
};

/// One row of the performance CSV.
struct PerformanceRecord {
    std::string  solver;
    InstanceInfo instance;
    RunOutcome   outcome;
};

inline constexpr const char* kPerformanceCsvHeader = "solver,instance,family,class,status,cpu_seconds";

void write_performance_csv(std::ostream& out, std::span<const PerformanceRecord> rows);
/// Accepts partial grids (used to resume a benchmark).
std::vector<PerformanceRecord> read_performance_csv(std::istream& in);

/// Dense solver x instance grid of run outcomes.
class PerformanceMatrix {
public:
    PerformanceMatrix() = default;
    PerformanceMatrix(std::vector<std::string> solvers, std::vector<InstanceInfo> instances);

    /// Throws if any cell is missing or given twice.
    static PerformanceMatrix from_records(std::span<const PerformanceRecord> rows);
    static PerformanceMatrix load_csv(std::istream& in);
    static PerformanceMatrix load_csv_file(const std::string& path);

    [[nodiscard]] const std::vector<std::string>& solvers() const { return solvers_; }
    [[nodiscard]] const std::vector<InstanceInfo>& instances() const { return instances_; }
    [[nodiscard]] std::size_t num_solvers() const { return solvers_.size(); }
    [[nodiscard]] std::size_t num_instances() const { return instances_.size(); }
    [[nodiscard]] std::optional<std::size_t> solver_index(std::string_view name) const;

    [[nodiscard]] const RunOutcome& at(std::size_t solver, std::size_t instance) const;
    void set(std::size_t solver, std::size_t instance, RunOutcome o);

    [[nodiscard]] std::size_t solved_count(std::size_t solver) const;
    /// Summed CPU time over the solver's solved instances.
    [[nodiscard]] double total_time(std::size_t solver) const;
    /// Sub-matrix over the named solvers (in the given order).
    [[nodiscard]] PerformanceMatrix restrict_to(std::span<const std::string> solvers) const;

    [[nodiscard]] std::vector<PerformanceRecord> records() const;

private:
    std::vector<std::string>  solvers_;
    std::vector<InstanceInfo> instances_;
    std::vector<RunOutcome>   cells_; // row-major by solver
    std::vector<bool>         present_;
};

struct PoolEngine {
    std::string name;
    bool        handles_disjunctive = false;
    friend bool operator==(const PoolEngine&, const PoolEngine&) = default;
};

/// Ordered, non-empty, duplicate-free list of engines.
class EnginePool {
public:
    EnginePool() = default;
    explicit EnginePool(std::vector<PoolEngine> engines);
    static EnginePool from_names(std::span<const std::string> names);

    [[nodiscard]] const std::vector<PoolEngine>& engines() const { return engines_; }
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] bool contains(std::string_view name) const;
    [[nodiscard]] std::size_t size() const { return engines_.size(); }
    [[nodiscard]] bool empty() const { return engines_.empty(); }
    /// Sets the disjunctive capability flag from a name -> flag map.
    void annotate(const std::map<std::string, bool>& handles_disjunctive);

    friend bool operator==(const EnginePool&, const EnginePool&) = default;

private:
    std::vector<PoolEngine> engines_;
};

class SelectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Instances solved by exactly this solver and no other, per solver.
[[nodiscard]] std::map<std::string, std::size_t> unique_counts(const PerformanceMatrix& m);

/// Solvers with at least `threshold` unique instances, by descending solved count.
[[nodiscard]] EnginePool select_by_uniqueness(const PerformanceMatrix& m, std::size_t threshold = 5);

/// Survivors after removing dominated solvers, in matrix order.
[[nodiscard]] std::vector<std::string> remove_dominated(const PerformanceMatrix& m);

/// Greedy pool construction over the non-dominated solvers: candidates in order of
/// (solved desc, time asc, name); a candidate joins if it solves an instance no member
/// solves and every member keeps at least `distinguishability` unique instances.
[[nodiscard]] EnginePool greedy_pool(const PerformanceMatrix& m, std::size_t distinguishability);

/// Warning text if Beyond-NP instances exist but no pool engine handles disjunction.
[[nodiscard]] std::optional<std::string> beyond_np_warning(const PerformanceMatrix& m, const EnginePool& pool);

struct BestOutcome {
    std::optional<std::string> solver; // empty when unsolved by the pool
    RunOutcome                 outcome;
};

struct SotaResult {
    std::vector<BestOutcome> per_instance;
    std::size_t              solved     = 0;
    double                   total_time = 0.0;
};

/// Per-instance best pool member (minimum CPU time among solved; ties by name).
[[nodiscard]] SotaResult sota(const PerformanceMatrix& m, const EnginePool& pool);

} // namespace measp
