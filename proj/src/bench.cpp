#include <measp/bench.hpp>
#include <measp/io.hpp>
#include <measp/semantics.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace measp {

namespace fs = std::filesystem;

void BenchPlan::validate() const {
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    if (instances_dir.empty() || !fs::is_directory(instances_dir))
        throw std::invalid_argument("instance directory '" + instances_dir + "' does not exist");
    if (out_csv.empty()) throw std::invalid_argument("no output CSV given");
    limits.validate();
}

std::vector<InstanceInfo> discover_instances(const std::string& dir) {
    static const std::set<std::string> kExtensions = {".gasp", ".lp", ".asp"};
    std::vector<std::pair<std::string, fs::path>> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || !kExtensions.count(entry.path().extension().string())) continue;
        files.emplace_back(fs::relative(entry.path(), dir).generic_string(), entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<InstanceInfo> out;
    for (const auto& [rel, path] : files) {
        InstanceInfo info;
        info.name   = rel;
        auto slash  = rel.find('/');
        info.family = slash == std::string::npos ? "default" : rel.substr(0, slash);
        GroundProgram p;
        try {
            p = read_program_file(path.string());
        }
        catch (const ParseError& e) {
            throw std::runtime_error("instance '" + rel + "': " + e.what());
        }
        info.cls = p.has_disjunction() ? ComplexityClass::BeyondNP : ComplexityClass::NP;
        out.push_back(std::move(info));
    }
    return out;
}

namespace {

struct Cell {
    std::size_t solver, instance;
};

void write_checkpoint(const std::string& path, const std::vector<std::string>& solvers,
                      const std::vector<InstanceInfo>& instances, const std::vector<std::optional<RunOutcome>>& cells) {
    std::vector<PerformanceRecord> rows;
    for (std::size_t s = 0; s != solvers.size(); ++s)
        for (std::size_t i = 0; i != instances.size(); ++i)
            if (const auto& c = cells[s * instances.size() + i]) rows.push_back({solvers[s], instances[i], *c});
    write_file_atomic(path, [&](std::ostream& out) { write_performance_csv(out, rows); });
}

} // namespace

BenchSummary bench(const BenchPlan& plan, const EngineRegistry& registry) {
    plan.validate();
    std::vector<std::string> solvers = plan.engines.empty() ? registry.names() : plan.engines;
    if (solvers.empty()) throw std::invalid_argument("no engines to benchmark");
    for (const auto& s : solvers) (void)registry.get(s);
    const auto instances = discover_instances(plan.instances_dir);
    if (instances.empty()) throw std::invalid_argument("no instances found in '" + plan.instances_dir + "'");

    const std::size_t nI = instances.size();
    std::vector<std::optional<RunOutcome>> cells(solvers.size() * nI);
    BenchSummary summary;

    if (fs::exists(plan.out_csv)) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i != nI; ++i) index[instances[i].name] = i;
        std::ifstream in(plan.out_csv);
        for (const auto& r : read_performance_csv(in)) {
            auto s = std::find(solvers.begin(), solvers.end(), r.solver);
            auto i = index.find(r.instance.name);
            if (s == solvers.end() || i == index.end()) continue;
            auto& c = cells[static_cast<std::size_t>(s - solvers.begin()) * nI + i->second];
            if (!c) ++summary.skipped;
            c = r.outcome;
        }
    }

    std::vector<Cell> todo;
    for (std::size_t s = 0; s != solvers.size(); ++s)
        for (std::size_t i = 0; i != nI; ++i)
            if (!cells[s * nI + i]) todo.push_back({s, i});
    std::mt19937_64 rng(plan.seed);
    for (std::size_t k = todo.size(); k > 1; --k) std::swap(todo[k - 1], todo[rng() % k]);

    std::mutex               mu;
    std::atomic<std::size_t> next{0};
    std::exception_ptr       failure;
    auto lastCheckpoint = std::chrono::steady_clock::now();

    auto worker = [&] {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= todo.size()) return;
            const auto  cell = todo[k];
            const auto& spec = registry.get(solvers[cell.solver]);
            const auto  path = (fs::path(plan.instances_dir) / instances[cell.instance].name).string();
            try {
                auto run = run_engine(spec, path, plan.limits);
                std::optional<std::string> mismatch;
                if (plan.sanity_check && run.outcome.solved()) {
                    auto p = read_program_file(path);
                    if (p.num_atoms() <= kDefaultOracleMaxAtoms) {
                        bool hasAnswer = !enumerate_answer_sets(p, kDefaultOracleMaxAtoms, 1).empty();
                        bool claims    = run.outcome.answer == Answer::AnswerSetFound;
                        if (hasAnswer != claims)
                            mismatch = spec.name + " on " + instances[cell.instance].name + ": reported " +
                                       (claims ? "an answer set" : "inconsistent") + ", reference says " +
                                       (hasAnswer ? "consistent" : "inconsistent");
                    }
                }
                std::lock_guard lock(mu);
                cells[cell.solver * nI + cell.instance] = run.outcome;
                ++summary.executed;
                if (mismatch) summary.sanity_failures.push_back(*mismatch);
                auto now = std::chrono::steady_clock::now();
                if (std::chrono::duration<double>(now - lastCheckpoint).count() >= plan.checkpoint_seconds) {
                    write_checkpoint(plan.out_csv, solvers, instances, cells);
                    lastCheckpoint = now;
                }
            }
            catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next.store(todo.size());
                return;
            }
        }
    };

    const std::size_t nThreads = std::min(plan.workers, std::max<std::size_t>(todo.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nThreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    write_checkpoint(plan.out_csv, solvers, instances, cells);
    if (failure) std::rethrow_exception(failure);

    summary.matrix = PerformanceMatrix(solvers, instances);
    for (std::size_t s = 0; s != solvers.size(); ++s)
        for (std::size_t i = 0; i != nI; ++i) summary.matrix.set(s, i, *cells[s * nI + i]);
    std::sort(summary.sanity_failures.begin(), summary.sanity_failures.end());
    return summary;
}

BenchSummary bench(const BenchPlan& plan) { return bench(plan, EngineRegistry::load(plan.registry_path)); }

} // namespace measp
