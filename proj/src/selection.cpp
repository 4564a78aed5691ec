#include <measp/selection.hpp>
#include <measp/io.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

namespace measp {

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Solved: return "solved";
        case RunStatus::Timeout: return "timeout";
        case RunStatus::Memout: return "memout";
        case RunStatus::Error: return "error";
    }
    return "error";
}

const char* to_string(ComplexityClass c) { return c == ComplexityClass::NP ? "NP" : "BeyondNP"; }

RunStatus parse_run_status(std::string_view s) {
    if (s == "solved") return RunStatus::Solved;
    if (s == "timeout") return RunStatus::Timeout;
    if (s == "memout") return RunStatus::Memout;
    if (s == "error") return RunStatus::Error;
    throw std::invalid_argument("unknown run status '" + std::string(s) + "'");
}

ComplexityClass parse_complexity_class(std::string_view s) {
    if (s == "NP") return ComplexityClass::NP;
    if (s == "BeyondNP") return ComplexityClass::BeyondNP;
    throw std::invalid_argument("unknown complexity class '" + std::string(s) + "'");
}

void write_performance_csv(std::ostream& out, std::span<const PerformanceRecord> rows) {
    out << kPerformanceCsvHeader << '\n';
    for (const auto& r : rows) {
        check_csv_field(r.solver);
        check_csv_field(r.instance.name);
        check_csv_field(r.instance.family);
        out << r.solver << ',' << r.instance.name << ',' << r.instance.family << ',' << to_string(r.instance.cls)
            << ',' << to_string(r.outcome.status) << ',' << format_double(r.outcome.cpu_seconds) << '\n';
    }
}

std::vector<PerformanceRecord> read_performance_csv(std::istream& in) {
    std::vector<PerformanceRecord> rows;
    std::string line;
    if (!read_line(in, line)) throw std::runtime_error("performance CSV is empty");
    if (line != kPerformanceCsvHeader)
        throw std::runtime_error(std::string("performance CSV header must be '") + kPerformanceCsvHeader + "'");
    std::size_t lineNo = 1;
    while (read_line(in, line)) {
        ++lineNo;
        auto cells = split_csv_line(line);
        auto where = [&] { return "performance CSV line " + std::to_string(lineNo) + ": "; };
        if (cells.size() != 6) throw std::runtime_error(where() + "expected 6 fields");
        try {
            PerformanceRecord r;
            r.solver          = cells[0];
            r.instance.name   = cells[1];
            r.instance.family = cells[2];
            r.instance.cls    = parse_complexity_class(cells[3]);
            r.outcome.status  = parse_run_status(cells[4]);
            r.outcome.cpu_seconds = parse_double(cells[5]);
            if (r.solver.empty() || r.instance.name.empty() || r.instance.family.empty())
                throw std::invalid_argument("empty solver, instance or family");
            if (!(r.outcome.cpu_seconds >= 0)) throw std::invalid_argument("negative cpu_seconds");
            rows.push_back(std::move(r));
        }
        catch (const std::invalid_argument& e) {
            throw std::runtime_error(where() + e.what());
        }
    }
    return rows;
}

PerformanceMatrix::PerformanceMatrix(std::vector<std::string> solvers, std::vector<InstanceInfo> instances)
    : solvers_(std::move(solvers))
    , instances_(std::move(instances))
    , cells_(solvers_.size() * instances_.size())
    , present_(solvers_.size() * instances_.size(), false) {
    std::set<std::string> seen;
    for (const auto& s : solvers_)
        if (!seen.insert(s).second) throw std::invalid_argument("duplicate solver '" + s + "'");
    seen.clear();
    for (const auto& i : instances_) {
        if (!seen.insert(i.name).second) throw std::invalid_argument("duplicate instance '" + i.name + "'");
        if (i.family.empty()) throw std::invalid_argument("instance '" + i.name + "' has no family");
    }
}

PerformanceMatrix PerformanceMatrix::from_records(std::span<const PerformanceRecord> rows) {
    std::vector<std::string>                     solvers;
    std::vector<InstanceInfo>                    instances;
    std::unordered_map<std::string, std::size_t> sIdx, iIdx;
    for (const auto& r : rows) {
        if (sIdx.try_emplace(r.solver, solvers.size()).second) solvers.push_back(r.solver);
        auto [it, added] = iIdx.try_emplace(r.instance.name, instances.size());
        if (added) instances.push_back(r.instance);
        else if (!(instances[it->second] == r.instance))
            throw std::runtime_error("instance '" + r.instance.name + "' has inconsistent family/class tags");
    }
    PerformanceMatrix m(std::move(solvers), std::move(instances));
    for (const auto& r : rows) {
        auto s = sIdx[r.solver], i = iIdx[r.instance.name];
        if (m.present_[s * m.num_instances() + i])
            throw std::runtime_error("duplicate cell (" + r.solver + ", " + r.instance.name + ")");
        m.set(s, i, r.outcome);
    }
    for (std::size_t s = 0; s != m.num_solvers(); ++s)
        for (std::size_t i = 0; i != m.num_instances(); ++i)
            if (!m.present_[s * m.num_instances() + i])
                throw std::runtime_error("missing cell (" + m.solvers_[s] + ", " + m.instances_[i].name + ")");
    return m;
}

PerformanceMatrix PerformanceMatrix::load_csv(std::istream& in) {
    auto rows = read_performance_csv(in);
    return from_records(rows);
}

PerformanceMatrix PerformanceMatrix::load_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open performance CSV '" + path + "'");
    return load_csv(in);
}

std::optional<std::size_t> PerformanceMatrix::solver_index(std::string_view name) const {
    for (std::size_t s = 0; s != solvers_.size(); ++s)
        if (solvers_[s] == name) return s;
    return std::nullopt;
}

const RunOutcome& PerformanceMatrix::at(std::size_t solver, std::size_t instance) const {
    if (solver >= solvers_.size() || instance >= instances_.size()) throw std::out_of_range("matrix cell");
    return cells_[solver * instances_.size() + instance];
}

void PerformanceMatrix::set(std::size_t solver, std::size_t instance, RunOutcome o) {
    if (solver >= solvers_.size() || instance >= instances_.size()) throw std::out_of_range("matrix cell");
    cells_[solver * instances_.size() + instance]   = o;
    present_[solver * instances_.size() + instance] = true;
}

std::size_t PerformanceMatrix::solved_count(std::size_t solver) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i != instances_.size(); ++i) n += at(solver, i).solved();
    return n;
}

double PerformanceMatrix::total_time(std::size_t solver) const {
    double t = 0;
    for (std::size_t i = 0; i != instances_.size(); ++i)
        if (at(solver, i).solved()) t += at(solver, i).cpu_seconds;
    return t;
}

PerformanceMatrix PerformanceMatrix::restrict_to(std::span<const std::string> solvers) const {
    std::vector<std::size_t> idx;
    for (const auto& s : solvers) {
        auto k = solver_index(s);
        if (!k) throw std::invalid_argument("solver '" + s + "' not in performance matrix");
        idx.push_back(*k);
    }
    PerformanceMatrix out(std::vector<std::string>(solvers.begin(), solvers.end()), instances_);
    for (std::size_t s = 0; s != idx.size(); ++s)
        for (std::size_t i = 0; i != instances_.size(); ++i) out.set(s, i, at(idx[s], i));
    return out;
}

std::vector<PerformanceRecord> PerformanceMatrix::records() const {
    std::vector<PerformanceRecord> rows;
    rows.reserve(cells_.size());
    for (std::size_t s = 0; s != solvers_.size(); ++s)
        for (std::size_t i = 0; i != instances_.size(); ++i) rows.push_back({solvers_[s], instances_[i], at(s, i)});
    return rows;
}

EnginePool::EnginePool(std::vector<PoolEngine> engines) : engines_(std::move(engines)) {
    if (engines_.empty()) throw std::invalid_argument("engine pool is empty");
    std::set<std::string> seen;
    for (const auto& e : engines_) {
        if (e.name.empty()) throw std::invalid_argument("engine pool entry without a name");
        if (!seen.insert(e.name).second) throw std::invalid_argument("duplicate engine '" + e.name + "' in pool");
    }
}

EnginePool EnginePool::from_names(std::span<const std::string> names) {
    std::vector<PoolEngine> es;
    for (const auto& n : names) es.push_back({n, false});
    return EnginePool(std::move(es));
}

std::vector<std::string> EnginePool::names() const {
    std::vector<std::string> out;
    for (const auto& e : engines_) out.push_back(e.name);
    return out;
}

bool EnginePool::contains(std::string_view name) const {
    return std::any_of(engines_.begin(), engines_.end(), [&](const PoolEngine& e) { return e.name == name; });
}

void EnginePool::annotate(const std::map<std::string, bool>& handles_disjunctive) {
    for (auto& e : engines_)
        if (auto it = handles_disjunctive.find(e.name); it != handles_disjunctive.end())
            e.handles_disjunctive = it->second;
}

namespace {

// Number of instances solved by exactly one member of `members`, and each member's share.
std::size_t unique_within(const PerformanceMatrix& m, std::span<const std::size_t> members,
                          std::vector<std::size_t>* perMember = nullptr) {
    if (perMember) perMember->assign(members.size(), 0);
    std::size_t total = 0;
    for (std::size_t i = 0; i != m.num_instances(); ++i) {
        std::size_t count = 0, who = 0;
        for (std::size_t k = 0; k != members.size(); ++k) {
            if (m.at(members[k], i).solved()) {
                ++count;
                who = k;
            }
        }
        if (count == 1) {
            ++total;
            if (perMember) ++(*perMember)[who];
        }
    }
    return total;
}

} // namespace

std::map<std::string, std::size_t> unique_counts(const PerformanceMatrix& m) {
    std::vector<std::size_t> all(m.num_solvers());
    for (std::size_t s = 0; s != all.size(); ++s) all[s] = s;
    std::vector<std::size_t> per;
    unique_within(m, all, &per);
    std::map<std::string, std::size_t> out;
    for (std::size_t s = 0; s != all.size(); ++s) out[m.solvers()[s]] = per[s];
    return out;
}

EnginePool select_by_uniqueness(const PerformanceMatrix& m, std::size_t threshold) {
    if (threshold < 1) throw std::invalid_argument("uniqueness threshold must be at least 1");
    auto uc = unique_counts(m);
    std::vector<std::size_t> chosen;
    for (std::size_t s = 0; s != m.num_solvers(); ++s)
        if (uc[m.solvers()[s]] >= threshold) chosen.push_back(s);
    if (chosen.empty())
        throw SelectionError("no solver solves at least " + std::to_string(threshold) +
                             " instances uniquely; consider the extended policy (dominance pruning + greedy pool)");
    std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        auto sa = m.solved_count(a), sb = m.solved_count(b);
        if (sa != sb) return sa > sb;
        return m.solvers()[a] < m.solvers()[b];
    });
    std::vector<PoolEngine> es;
    for (auto s : chosen) es.push_back({m.solvers()[s], false});
    return EnginePool(std::move(es));
}

std::vector<std::string> remove_dominated(const PerformanceMatrix& m) {
    const auto n = m.num_solvers();
    std::vector<std::vector<bool>> solved(n, std::vector<bool>(m.num_instances()));
    std::vector<double>            time(n);
    for (std::size_t s = 0; s != n; ++s) {
        for (std::size_t i = 0; i != m.num_instances(); ++i) solved[s][i] = m.at(s, i).solved();
        time[s] = m.total_time(s);
    }
    auto subset = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = 0; i != m.num_instances(); ++i)
            if (solved[a][i] && !solved[b][i]) return false;
        return true;
    };
    std::vector<std::string> out;
    for (std::size_t s = 0; s != n; ++s) {
        bool dominated = false;
        for (std::size_t t = 0; t != n && !dominated; ++t) {
            if (t == s || !subset(s, t)) continue;
            if (!subset(t, s)) dominated = true; // strict subset
            else dominated = std::tie(time[t], m.solvers()[t]) < std::tie(time[s], m.solvers()[s]);
        }
        if (!dominated) out.push_back(m.solvers()[s]);
    }
    return out;
}

EnginePool greedy_pool(const PerformanceMatrix& m, std::size_t distinguishability) {
    if (distinguishability < 1) throw std::invalid_argument("distinguishability must be at least 1");
    std::vector<std::size_t> order;
    for (const auto& name : remove_dominated(m)) order.push_back(*m.solver_index(name));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto sa = m.solved_count(a), sb = m.solved_count(b);
        if (sa != sb) return sa > sb;
        auto ta = m.total_time(a), tb = m.total_time(b);
        if (ta != tb) return ta < tb;
        return m.solvers()[a] < m.solvers()[b];
    });
    std::vector<std::size_t> pool;
    std::vector<std::size_t> per;
    for (auto e : order) {
        auto candidate = pool;
        candidate.push_back(e);
        (void)unique_within(m, candidate, &per);
        // e must solve something no member solves, and nobody may drop below the threshold
        if (per.back() == 0) continue;
        if (std::any_of(per.begin(), per.end(), [&](std::size_t k) { return k < distinguishability; })) continue;
        pool = std::move(candidate);
    }
    // nobody is distinguishable on its own: fall back to the strongest solver
    if (pool.empty() && !order.empty()) pool.push_back(order.front());
    std::vector<PoolEngine> es;
    for (auto s : pool) es.push_back({m.solvers()[s], false});
    return EnginePool(std::move(es));
}

std::optional<std::string> beyond_np_warning(const PerformanceMatrix& m, const EnginePool& pool) {
    bool beyond = std::any_of(m.instances().begin(), m.instances().end(),
                              [](const InstanceInfo& i) { return i.cls == ComplexityClass::BeyondNP; });
    if (!beyond) return std::nullopt;
    bool capable = std::any_of(pool.engines().begin(), pool.engines().end(),
                               [](const PoolEngine& e) { return e.handles_disjunctive; });
    if (capable) return std::nullopt;
    return "performance data contains BeyondNP instances but no pool engine handles disjunctive programs";
}

SotaResult sota(const PerformanceMatrix& m, const EnginePool& pool) {
    std::vector<std::size_t> members;
    for (const auto& e : pool.engines()) {
        auto k = m.solver_index(e.name);
        if (!k) throw std::invalid_argument("pool engine '" + e.name + "' not in performance matrix");
        members.push_back(*k);
    }
    SotaResult res;
    res.per_instance.resize(m.num_instances());
    for (std::size_t i = 0; i != m.num_instances(); ++i) {
        BestOutcome best;
        best.outcome.status = RunStatus::Timeout;
        for (auto s : members) {
            const auto& o = m.at(s, i);
            if (!o.solved()) continue;
            if (!best.solver || o.cpu_seconds < best.outcome.cpu_seconds ||
                (o.cpu_seconds == best.outcome.cpu_seconds && m.solvers()[s] < *best.solver)) {
                best.solver  = m.solvers()[s];
                best.outcome = o;
            }
        }
        if (best.solver) {
            ++res.solved;
            res.total_time += best.outcome.cpu_seconds;
        }
        res.per_instance[i] = std::move(best);
    }
    return res;
}

} // namespace measp
