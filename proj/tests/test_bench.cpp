#include "support.hpp"

#include <measp/bench.hpp>
#include <measp/semantics.hpp>

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace measp;
using measp::testing::TempDir;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// CSV rows without the trailing timing column.
std::vector<std::string> without_times(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) out.push_back(line.substr(0, line.rfind(',')));
    return out;
}

void tiny_instances(const TempDir& tmp) {
    tmp.write("inst/a.gasp", "a.");
    tmp.write("inst/graphs/b.gasp", "a :- not b. b :- not a.");
    tmp.write("inst/graphs/c.lp", "a | b. :- a.");
    tmp.write("inst/notes.txt", "ignored");
}

BenchPlan plan_for(const TempDir& tmp, const std::string& out) {
    BenchPlan p;
    p.instances_dir = (tmp.path() / "inst").string();
    p.out_csv       = (tmp.path() / out).string();
    p.limits        = {10, 1ULL << 30};
    return p;
}

} // namespace

TEST_SUITE("bench-cli") {

TEST_CASE("instance discovery") {
    TempDir tmp;
    tiny_instances(tmp);
    auto inst = discover_instances((tmp.path() / "inst").string());
    REQUIRE(inst.size() == 3);
    CHECK(inst[0] == InstanceInfo{"a.gasp", "default", ComplexityClass::NP});
    CHECK(inst[1] == InstanceInfo{"graphs/b.gasp", "graphs", ComplexityClass::NP});
    CHECK(inst[2] == InstanceInfo{"graphs/c.lp", "graphs", ComplexityClass::BeyondNP});
}

TEST_CASE("bench grid, timeouts and resume") {
    TempDir tmp;
    tiny_instances(tmp);
    auto reg = EngineRegistry::parse("[engine oracle]\nkind = builtin-oracle\ndisjunctive = true\n");
    auto plan = plan_for(tmp, "perf.csv");

    auto first = bench(plan, reg);
    CHECK(first.executed == 3);
    CHECK(first.matrix.solved_count(0) == 3);
    auto csv = read_text(plan.out_csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind(std::string(kPerformanceCsvHeader) + "\n", 0) == 0);

    SUBCASE("a second engine with a tiny limit times out") {
        // big enough that exhaustive search cannot finish in a millisecond
        tmp.write("inst/php.gasp", print_program(synth::pigeonhole(5, 4)));
        auto reg2 = EngineRegistry::parse("[engine oracle]\nkind = builtin-oracle\ndisjunctive = true\n"
                                          "[engine quick]\nkind = builtin-oracle\ncpu_limit = 0.001\n");
        auto p2   = plan_for(tmp, "perf2.csv");
        p2.engines = {"quick"};
        auto r    = bench(p2, reg2);
        auto php  = std::find_if(r.matrix.instances().begin(), r.matrix.instances().end(),
                                 [](const InstanceInfo& i) { return i.name == "php.gasp"; });
        auto k    = static_cast<std::size_t>(php - r.matrix.instances().begin());
        CHECK(r.matrix.at(0, k).status == RunStatus::Timeout);
        CHECK(r.matrix.at(0, k).cpu_seconds == 0.001);
    }
    SUBCASE("rerun after deleting a row executes only that cell") {
        std::istringstream in(csv);
        std::string        out, line;
        int                n = 0;
        while (std::getline(in, line))
            if (n++ != 2) out += line + "\n";
        std::ofstream(plan.out_csv) << out;
        auto again = bench(plan, reg);
        CHECK(again.executed == 1);
        CHECK(again.skipped == 2);
        CHECK(without_times(read_text(plan.out_csv)) == without_times(csv));
        auto none = bench(plan, reg);
        CHECK(none.executed == 0);
    }
    SUBCASE("same plan and seed give the same grid") {
        for (std::size_t workers : {1u, 4u}) {
            auto p    = plan_for(tmp, "again" + std::to_string(workers) + ".csv");
            p.workers = workers;
            p.seed    = 99;
            (void)bench(p, reg);
            CHECK(without_times(read_text(p.out_csv)) == without_times(csv));
        }
    }
    SUBCASE("sanity check catches a lying engine") {
        tmp.write("liar.sh", "echo ANSWER\n");
        auto liar = EngineRegistry::parse("[engine liar]\ncommand = /bin/sh " + (tmp.path() / "liar.sh").string() +
                                          " {instance}\n");
        auto p         = plan_for(tmp, "liar.csv");
        p.sanity_check = true;
        auto r         = bench(p, liar);
        REQUIRE(r.sanity_failures.size() == 0);
        tmp.write("inst/bad.gasp", "a | b. :- a. :- b.");
        p.out_csv = (tmp.path() / "liar2.csv").string();
        CHECK(bench(p, liar).sanity_failures.size() == 1);
    }
    SUBCASE("plan validation") {
        auto bad    = plan;
        bad.workers = 0;
        CHECK_THROWS((void)bench(bad, reg));
        bad               = plan;
        bad.instances_dir = (tmp.path() / "nowhere").string();
        CHECK_THROWS((void)bench(bad, reg));
        bad         = plan;
        bad.engines = {"missing"};
        CHECK_THROWS((void)bench(bad, reg));
        bad               = plan;
        bad.registry_path = (tmp.path() / "none.ini").string();
        CHECK_THROWS_AS((void)bench(bad), RegistryError);
    }
}

TEST_CASE("report aggregates") {
    auto m = synth::random_matrix(3, 40, 0.5, 4);
    auto r = make_report(m);
    REQUIRE(r.solvers.size() == 3);
    auto uc = unique_counts(m);
    for (std::size_t s = 0; s != 3; ++s) {
        CHECK(r.solvers[s].name == m.solvers()[s]);
        CHECK(r.solvers[s].solved == m.solved_count(s));
        CHECK(r.solvers[s].time == doctest::Approx(m.total_time(s)));
        CHECK(r.solvers[s].solved_np + r.solvers[s].solved_beyond_np == r.solvers[s].solved);
        CHECK(r.solvers[s].unique == uc[m.solvers()[s]]);
    }
    CHECK(r.sota.solved == sota(m, EnginePool::from_names(m.solvers())).solved);

    auto one = m.restrict_to(std::vector<std::string>{m.solvers()[0]});
    auto r1  = make_report(one);
    CHECK(r1.sota.solved == r1.solvers[0].solved);
    CHECK(r1.sota.time == doctest::Approx(r1.solvers[0].time));
    auto series = cactus(one);
    REQUIRE(series.size() == 2);
    CHECK(series[0].points.back().second == one.solved_count(0));
    double maxTime = 0;
    for (std::size_t i = 0; i != one.num_instances(); ++i)
        if (one.at(0, i).solved()) maxTime = std::max(maxTime, one.at(0, i).cpu_seconds);
    CHECK(series[0].points.back().first == maxTime);

    std::ostringstream csv, text;
    write_report_csv(csv, r);
    write_report_text(text, r);
    CHECK(csv.str().rfind(std::string(kReportCsvHeader) + "\n", 0) == 0);
    CHECK(text.str().find("sota") != std::string::npos);
}

TEST_CASE("competition report reproduces the solved column") {
    auto m = synth::competition_matrix(1);
    auto r = make_report(m);
    for (const auto& row : synth::competition_rows()) {
        auto it = std::find_if(r.solvers.begin(), r.solvers.end(), [&](const SolverRow& x) { return x.name == row.solver; });
        REQUIRE(it != r.solvers.end());
        CHECK(it->solved == row.solved);
        CHECK(it->unique == row.unique);
    }
}

TEST_CASE("multi-engine rows and call counts") {
    auto m = synth::random_matrix(2, 10, 0.5, 8);
    std::vector<SolveRecord> results;
    for (std::size_t i = 0; i != 10; ++i) {
        SolveRecord rec;
        rec.instance = m.instances()[i].name;
        rec.chosen   = i == 9 ? "" : m.solvers()[i % 2];
        rec.outcome  = i == 9 ? RunOutcome{RunStatus::Timeout, 600, Answer::Unknown} : m.at(i % 2, i);
        results.push_back(rec);
    }
    auto r = make_report(m, std::nullopt, results);
    REQUIRE(r.multi_engine.has_value());
    std::size_t calls = 0;
    for (const auto& [_, c] : r.calls) calls += c;
    CHECK(calls == results.size());
    std::size_t solved = 0;
    for (const auto& rec : results) solved += rec.outcome.solved();
    CHECK(r.multi_engine->solved == solved);

    std::stringstream io;
    write_solve_csv(io, results);
    CHECK(io.str().rfind(std::string(kSolveCsvHeader) + "\n", 0) == 0);
    auto back = read_solve_csv(io);
    REQUIRE(back.size() == results.size());
    for (std::size_t i = 0; i != back.size(); ++i) {
        CHECK(back[i].instance == results[i].instance);
        CHECK(back[i].chosen == results[i].chosen);
        CHECK(back[i].outcome.status == results[i].outcome.status);
    }
    std::vector<SolveRecord> stray{{"nope", "x", {}, 0, 0}};
    CHECK_THROWS((void)make_report(m, std::nullopt, stray));
}

TEST_CASE("cactus series") {
    for (std::uint64_t seed = 1; seed != 25; ++seed) {
        auto m      = synth::random_matrix(4, 60, 0.4, seed);
        auto series = cactus(m);
        REQUIRE(series.size() == 5);
        CHECK(series.back().name == "sota");
        for (const auto& s : series)
            for (std::size_t k = 1; k < s.points.size(); ++k) {
                CHECK(s.points[k].first >= s.points[k - 1].first);
                CHECK(s.points[k].second >= s.points[k - 1].second);
            }
        // sota solves at least as many as any engine within every time bound
        auto count_within = [](const CactusSeries& s, double t) {
            std::size_t n = 0;
            for (const auto& [time, solved] : s.points)
                if (time <= t) n = solved;
            return n;
        };
        for (std::size_t e = 0; e != 4; ++e)
            for (const auto& [t, _] : series[e].points) CHECK(count_within(series.back(), t) >= count_within(series[e], t));
    }
    std::ostringstream out;
    auto               s = cactus(synth::random_matrix(2, 5, 0.5, 1));
    write_cactus_csv(out, s);
    CHECK(out.str().rfind("series,time,solved\n", 0) == 0);
}

TEST_CASE("pca") {
    SUBCASE("rank-1 data") {
        std::vector<std::vector<double>> rows;
        for (int i = 0; i != 30; ++i) {
            double t = i * 0.37 - 3;
            rows.push_back({t, 2 * t + 1, -t, 5, 0.5 * t});
        }
        auto r = pca_project(std::span<const std::vector<double>>(rows));
        CHECK(r.explained[1] <= 1e-6 * r.total_variance);
        CHECK(r.explained[0] == doctest::Approx(r.total_variance).epsilon(1e-9));
    }
    SUBCASE("planted 2-D structure in 52 dimensions") {
        std::mt19937_64                  rng(31);
        std::normal_distribution<double> g;
        std::vector<std::vector<double>> rows;
        for (int i = 0; i != 200; ++i) {
            std::vector<double> v(52, 0.0);
            double              a = g(rng), b = g(rng);
            v[3]  = 3 * a;
            v[17] = 2 * a + 0.5 * b;
            rows.push_back(v);
        }
        // closed form for the 2x2 correlation matrix [[1, rho], [rho, 1]]
        double m3 = 0, m17 = 0;
        for (const auto& v : rows) {
            m3 += v[3];
            m17 += v[17];
        }
        m3 /= 200;
        m17 /= 200;
        double s33 = 0, s77 = 0, s37 = 0;
        for (const auto& v : rows) {
            s33 += (v[3] - m3) * (v[3] - m3);
            s77 += (v[17] - m17) * (v[17] - m17);
            s37 += (v[3] - m3) * (v[17] - m17);
        }
        double rho = s37 / std::sqrt(s33 * s77);
        auto   r   = pca_project(std::span<const std::vector<double>>(rows));
        CHECK(std::abs(r.explained[0] - (1 + std::abs(rho))) <= 1e-6);
        CHECK(std::abs(r.explained[1] - (1 - std::abs(rho))) <= 1e-6);
        CHECK(r.total_variance == doctest::Approx(2.0));
        CHECK(r.coords.size() == 200);
    }
    SUBCASE("duplicated dataset and sign convention") {
        std::mt19937_64                  rng(32);
        std::normal_distribution<double> g;
        std::vector<std::vector<double>> rows;
        for (int i = 0; i != 20; ++i) rows.push_back({g(rng), g(rng), g(rng) + 0.3 * i});
        auto twice = rows;
        twice.insert(twice.end(), rows.begin(), rows.end());
        auto a = pca_project(std::span<const std::vector<double>>(rows));
        auto b = pca_project(std::span<const std::vector<double>>(twice));
        for (std::size_t i = 0; i != rows.size(); ++i)
            for (std::size_t k = 0; k != 2; ++k) {
                CHECK(b.coords[i][k] == doctest::Approx(b.coords[i + rows.size()][k]));
                CHECK(std::abs(b.coords[i][k]) == doctest::Approx(std::abs(a.coords[i][k])).epsilon(1e-6));
            }
        for (const auto& c : a.components) {
            auto big = std::max_element(c.begin(), c.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
            CHECK(*big > 0);
        }
    }
    SUBCASE("too few rows") {
        std::vector<std::vector<double>> rows{{1, 2}, {3, 4}};
        CHECK_THROWS((void)pca_project(std::span<const std::vector<double>>(rows)));
    }
}

TEST_CASE("synthetic generators") {
    CHECK(print_program(synth::random_normal(10, 20, 5)) == print_program(synth::random_normal(10, 20, 5)));
    auto rn = synth::random_normal(10, 20, 5);
    CHECK(rn.num_rules() == 20);
    for (const auto& r : rn.rules()) {
        CHECK(r.head.size() == 1);
        CHECK(r.body.size() == 3);
    }
    auto php = synth::pigeonhole(3, 2);
    CHECK(php.has_disjunction());
    CHECK(enumerate_answer_sets(php).empty());
    CHECK(enumerate_answer_sets(synth::pigeonhole(2, 2)).size() == 2);
    auto fh = extract_features(synth::fact_heavy(40, 2));
    auto ch = extract_features(synth::constraint_heavy(40, 2));
    const auto& man = FeatureManifest::canonical();
    auto at = [&](const FeatureVector& v, const char* n) { return v.values[static_cast<std::size_t>(man.index_of(n))]; };
    CHECK(at(fh, "facts_per_rule") >= 0.5);
    CHECK(at(fh, "frac_constraints") == 0);
    CHECK(at(ch, "frac_constraints") >= 0.3);
    CHECK(at(ch, "facts_per_rule") == 0);
}

}
