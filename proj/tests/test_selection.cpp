#include "support.hpp"

#include <measp/bench.hpp>
#include <measp/selection.hpp>

#include <doctest.h>

#include <set>
#include <sstream>

using namespace measp;
using measp::testing::make_matrix;

namespace {

using SolvedSets = std::vector<std::set<std::size_t>>;

PerformanceMatrix from_sets(const std::vector<std::string>& names, std::size_t n, const SolvedSets& sets,
                            const std::vector<double>& times = {}) {
    return make_matrix(names, n, [&](std::size_t s, std::size_t i) -> std::optional<double> {
        if (!sets[s].count(i)) return std::nullopt;
        return times.empty() ? 1.0 : times[s];
    });
}

std::set<std::size_t> union_solved(const PerformanceMatrix& m, const std::vector<std::string>& names) {
    std::set<std::size_t> u;
    for (const auto& n : names)
        for (std::size_t i = 0; i != m.num_instances(); ++i)
            if (m.at(*m.solver_index(n), i).solved()) u.insert(i);
    return u;
}

} // namespace

TEST_SUITE("selection") {

TEST_CASE("performance CSV round trip and validation") {
    auto m = synth::random_matrix(4, 30, 0.5, 3);
    std::stringstream io;
    write_performance_csv(io, m.records());
    CHECK(io.str().rfind(std::string(kPerformanceCsvHeader) + "\n", 0) == 0);
    auto back = PerformanceMatrix::load_csv(io);
    CHECK(back.records().size() == m.records().size());
    for (std::size_t s = 0; s != 4; ++s)
        for (std::size_t i = 0; i != 30; ++i) {
            // the answer kind is not part of the schema
            CHECK(back.at(s, i).status == m.at(s, i).status);
            CHECK(back.at(s, i).cpu_seconds == m.at(s, i).cpu_seconds);
        }

    auto rows = m.records();
    rows.pop_back();
    CHECK_THROWS((void)PerformanceMatrix::from_records(rows));
    rows.push_back(rows.front());
    CHECK_THROWS((void)PerformanceMatrix::from_records(rows));
    std::istringstream bad("solver,instance,family,class,status,cpu_seconds\nx,i,f,NP,crashed,1\n");
    CHECK_THROWS((void)PerformanceMatrix::load_csv(bad));
}

TEST_CASE("unique counts") {
    auto one = from_sets({"a"}, 5, {{0, 1, 3}});
    CHECK(unique_counts(one) == std::map<std::string, std::size_t>{{"a", 3}});
    auto same = from_sets({"a", "b"}, 4, {{0, 1}, {0, 1}});
    CHECK(unique_counts(same) == std::map<std::string, std::size_t>{{"a", 0}, {"b", 0}});
    auto mixed = from_sets({"a", "b", "c"}, 6, {{0, 1, 2}, {2, 3}, {5}});
    CHECK(unique_counts(mixed) == std::map<std::string, std::size_t>{{"a", 2}, {"b", 1}, {"c", 1}});
}

TEST_CASE("competition-shaped matrix") {
    auto m  = synth::competition_matrix(1);
    auto uc = unique_counts(m);
    for (const auto& row : synth::competition_rows()) {
        CAPTURE(row.solver);
        CHECK(m.solved_count(*m.solver_index(row.solver)) == row.solved);
        CHECK(uc[row.solver] == row.unique);
    }
    CHECK(select_by_uniqueness(m, 5).names() == std::vector<std::string>{"clasp", "idp", "cmodels", "dlv"});
    CHECK(select_by_uniqueness(m).names() == std::vector<std::string>{"clasp", "idp", "cmodels", "dlv"});
    CHECK(select_by_uniqueness(m, 1).names() == std::vector<std::string>{"clasp", "idp", "cmodels", "sup", "dlv"});
}

TEST_CASE("select by uniqueness errors and invariance") {
    auto overlap = from_sets({"a", "b"}, 3, {{0, 1, 2}, {0, 1, 2}});
    CHECK_THROWS_AS((void)select_by_uniqueness(overlap, 1), SelectionError);
    CHECK_THROWS((void)select_by_uniqueness(overlap, 0));

    auto m      = synth::random_matrix(6, 60, 0.3, 5);
    auto scaled = m;
    for (std::size_t s = 0; s != m.num_solvers(); ++s)
        for (std::size_t i = 0; i != m.num_instances(); ++i) {
            auto o = m.at(s, i);
            o.cpu_seconds *= 7.5;
            scaled.set(s, i, o);
        }
    CHECK(select_by_uniqueness(m, 1) == select_by_uniqueness(scaled, 1));
}

TEST_CASE("dominance") {
    CHECK(remove_dominated(from_sets({"s", "t"}, 2, {{0, 1}, {0}})) == std::vector<std::string>{"s"});
    CHECK(remove_dominated(from_sets({"slow", "fast"}, 2, {{0, 1}, {0, 1}}, {10, 5})) ==
          std::vector<std::string>{"fast"});
    CHECK(remove_dominated(from_sets({"b", "a"}, 2, {{0, 1}, {0, 1}}, {5, 5})) == std::vector<std::string>{"a"});
    CHECK(remove_dominated(from_sets({"x", "y", "z"}, 3, {{0, 1}, {1, 2}, {0, 2}})) ==
          std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("dominance never loses coverage") {
    for (std::uint64_t seed = 1; seed != 30; ++seed) {
        auto m    = synth::random_matrix(6, 40, 0.4, seed);
        auto keep = remove_dominated(m);
        CHECK(sota(m, EnginePool::from_names(keep)).solved == sota(m, EnginePool::from_names(m.solvers())).solved);
    }
}

TEST_CASE("greedy pool") {
    CHECK(greedy_pool(from_sets({"a", "b", "c"}, 6, {{0, 1}, {2, 3}, {4}}), 1).names() ==
          std::vector<std::string>{"a", "b", "c"});
    CHECK(greedy_pool(from_sets({"a", "b", "c"}, 6, {{0}, {0, 1, 2}, {0, 1}}), 1).names() ==
          std::vector<std::string>{"b"});
    CHECK(greedy_pool(from_sets({"a", "b"}, 6, {{0, 1, 2}, {2, 3}}), 2).names() == std::vector<std::string>{"a"});
    CHECK_THROWS((void)greedy_pool(from_sets({"a"}, 1, {{0}}), 0));
}

TEST_CASE("greedy pool over 25 configuration variants") {
    // 25 variants share a common base; five of them solve two extra instances each.
    const std::size_t common = 80, n = common + 10;
    std::vector<std::string> names;
    for (int v = 0; v != 25; ++v) names.push_back("variant" + std::to_string(v));
    const std::vector<std::size_t> specialists{3, 7, 12, 18, 21};
    std::mt19937_64 rng(17);
    std::vector<std::vector<std::optional<double>>> t(25, std::vector<std::optional<double>>(n));
    for (std::size_t v = 0; v != 25; ++v) {
        auto spec = std::find(specialists.begin(), specialists.end(), v);
        for (std::size_t i = 0; i != common; ++i)
            if (spec != specialists.end() || rng() % 10 < 8) t[v][i] = 1.0 + static_cast<double>(rng() % 1000) / 10;
        if (spec != specialists.end()) {
            auto k = static_cast<std::size_t>(spec - specialists.begin());
            t[v][common + 2 * k] = t[v][common + 2 * k + 1] = 50.0;
        }
    }
    auto m = make_matrix(names, n, [&](std::size_t s, std::size_t i) { return t[s][i]; });

    std::size_t totalUnique = 0;
    for (const auto& [_, c] : unique_counts(m)) totalUnique += c;
    CHECK(totalUnique == 10);

    auto pool = greedy_pool(m, 1);
    CHECK(pool.size() <= 5);
    CHECK(union_solved(m, pool.names()) == union_solved(m, names));
    // every member stays distinguishable inside the pool
    auto sub = m.restrict_to(pool.names());
    for (const auto& [_, c] : unique_counts(sub)) CHECK(c >= 1);
}

TEST_CASE("sota") {
    auto m = from_sets({"a", "b"}, 9, {{0, 1, 2}, {3, 4, 5, 6}});
    CHECK(sota(m, EnginePool::from_names(std::vector<std::string>{"a", "b"})).solved == 7);

    auto single = sota(m, EnginePool::from_names(std::vector<std::string>{"a"}));
    CHECK(single.solved == m.solved_count(0));
    CHECK(single.total_time == m.total_time(0));
    for (std::size_t i = 0; i != 9; ++i) CHECK(single.per_instance[i].outcome.solved() == m.at(0, i).solved());

    auto timed = make_matrix({"a", "b"}, 2, [](std::size_t s, std::size_t i) -> std::optional<double> {
        return s == 0 ? 3.0 + static_cast<double>(i) : 4.0;
    });
    auto r = sota(timed, EnginePool::from_names(std::vector<std::string>{"a", "b"}));
    CHECK(r.per_instance[0].solver == "a");
    CHECK(r.per_instance[1].solver == "a"); // 4 vs 4: name order
    CHECK(r.total_time == 7.0);
}

TEST_CASE("sota matches the set union and is monotone") {
    for (std::uint64_t seed = 1; seed != 40; ++seed) {
        auto m = synth::random_matrix(5, 50, 0.35, seed);
        std::vector<std::string> pool;
        std::size_t              prev = 0, best = 0;
        for (const auto& s : m.solvers()) {
            pool.push_back(s);
            auto r = sota(m, EnginePool::from_names(pool));
            CHECK(r.solved == union_solved(m, pool).size());
            best = std::max(best, m.solved_count(*m.solver_index(s)));
            CHECK(r.solved >= best);
            CHECK(r.solved >= prev);
            prev = r.solved;
        }
        std::size_t sum = 0;
        for (const auto& [_, c] : unique_counts(m)) sum += c;
        CHECK(sum <= m.num_instances());
    }
}

TEST_CASE("engine pools") {
    CHECK_THROWS((void)EnginePool::from_names(std::vector<std::string>{}));
    CHECK_THROWS((void)EnginePool::from_names(std::vector<std::string>{"a", "a"}));
    auto p = EnginePool::from_names(std::vector<std::string>{"a", "b"});
    p.annotate({{"b", true}});
    CHECK_FALSE(p.engines()[0].handles_disjunctive);
    CHECK(p.engines()[1].handles_disjunctive);

    std::vector<InstanceInfo> inst{{"x", "f", ComplexityClass::BeyondNP}};
    PerformanceMatrix m({"a", "b"}, inst);
    m.set(0, 0, {RunStatus::Timeout, 600, Answer::Unknown});
    m.set(1, 0, {RunStatus::Timeout, 600, Answer::Unknown});
    CHECK(beyond_np_warning(m, EnginePool::from_names(std::vector<std::string>{"a"})).has_value());
    CHECK_FALSE(beyond_np_warning(m, p).has_value());
}

}
