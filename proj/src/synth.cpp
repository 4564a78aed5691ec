#include <measp/bench.hpp>

#include <algorithm>
#include <cstdio>
#include <random>

namespace measp::synth {

namespace {

std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Atom atom(std::string pred, std::size_t i) { return {std::move(pred), {std::to_string(i)}}; }

// k distinct values below n (k <= n), in draw order.
std::vector<std::size_t> distinct(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> out;
    while (out.size() < k) {
        auto x = below(rng, n);
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    return out;
}

} // namespace

GroundProgram random_normal(std::size_t atoms, std::size_t rules, std::uint64_t seed) {
    if (atoms < 3) throw std::invalid_argument("random_normal needs at least 3 atoms");
    std::mt19937_64 rng(seed);
    ProgramBuilder b;
    std::vector<AtomId> ids;
    for (std::size_t i = 0; i != atoms; ++i) ids.push_back(b.intern(atom("x", i)));
    for (std::size_t r = 0; r != rules; ++r) {
        std::vector<Literal> body;
        for (auto j : distinct(rng, atoms, 3)) body.push_back({ids[j], (rng() & 1) != 0});
        b.add_rule_ids({ids[below(rng, atoms)]}, std::move(body));
    }
    return std::move(b).build();
}

GroundProgram pigeonhole(std::size_t pigeons, std::size_t holes) {
    if (pigeons == 0 || holes == 0) throw std::invalid_argument("pigeonhole needs pigeons and holes");
    ProgramBuilder b;
    auto at = [&](std::size_t p, std::size_t h) { return b.intern({"p", {std::to_string(p), std::to_string(h)}}); };
    for (std::size_t p = 0; p != pigeons; ++p) {
        std::vector<AtomId> head;
        for (std::size_t h = 0; h != holes; ++h) head.push_back(at(p, h));
        b.add_rule_ids(std::move(head), {});
    }
    for (std::size_t h = 0; h != holes; ++h)
        for (std::size_t p = 0; p != pigeons; ++p)
            for (std::size_t q = p + 1; q < pigeons; ++q)
                b.add_rule_ids({}, {{at(p, h), false}, {at(q, h), false}});
    return std::move(b).build();
}

GroundProgram fact_heavy(std::size_t atoms, std::uint64_t seed) {
    if (atoms < 2) throw std::invalid_argument("fact_heavy needs at least 2 atoms");
    std::mt19937_64 rng(seed);
    ProgramBuilder b;
    std::vector<AtomId> ids;
    for (std::size_t i = 0; i != atoms; ++i) ids.push_back(b.intern(atom("f", i)));
    const std::size_t facts = std::max<std::size_t>(1, (atoms * (55 + below(rng, 25))) / 100);
    for (std::size_t i = 0; i != facts; ++i) b.add_rule_ids({ids[i]}, {});
    for (std::size_t i = facts; i < atoms; ++i) {
        std::size_t len = 1 + below(rng, 2);
        std::vector<Literal> body;
        for (auto j : distinct(rng, i, std::min(len, i))) body.push_back({ids[j], false});
        b.add_rule_ids({ids[i]}, std::move(body));
    }
    return std::move(b).build();
}

GroundProgram constraint_heavy(std::size_t atoms, std::uint64_t seed) {
    if (atoms < 4) throw std::invalid_argument("constraint_heavy needs at least 4 atoms");
    std::mt19937_64 rng(seed);
    ProgramBuilder b;
    const std::size_t pairs = atoms / 2;
    std::vector<AtomId> in, out;
    for (std::size_t i = 0; i != pairs; ++i) {
        in.push_back(b.intern(atom("in", i)));
        out.push_back(b.intern(atom("out", i)));
    }
    for (std::size_t i = 0; i != pairs; ++i) {
        b.add_rule_ids({in[i]}, {{out[i], true}});
        b.add_rule_ids({out[i]}, {{in[i], true}});
    }
    const std::size_t constraints = 2 * pairs + below(rng, pairs + 1);
    for (std::size_t c = 0; c != constraints; ++c) {
        auto two = distinct(rng, pairs, 2);
        b.add_rule_ids({}, {{in[two[0]], false}, {in[two[1]], false}});
    }
    return std::move(b).build();
}

std::span<const CompetitionRow> competition_rows() {
    static constexpr CompetitionRow rows[] = {
        {"clasp", 445, 26},           {"cmodels", 333, 6},          {"dlv", 241, 37},
        {"idp", 419, 15},             {"lp2diffgz3", 254, 0},       {"lp2difflgz3", 242, 0},
        {"lp2difflz3", 248, 0},       {"lp2diffz3", 307, 0},        {"lp2sat2gminisat", 328, 0},
        {"lp2sat2lgminisat", 322, 0}, {"lp2sat2lminisat", 324, 0},  {"lp2sat2minisat", 336, 0},
        {"smodels", 134, 0},          {"sup", 311, 1},
    };
    return rows;
}

PerformanceMatrix competition_matrix(std::uint64_t seed) {
    // A shared block of instances solved by clasp and at least one other
    // solver; every other solver solves a suffix of it (idp a prefix, so the
    // first instances are never unique to clasp). Unique instances and a few
    // unsolved ones are appended.
    constexpr std::size_t kShared   = 419;
    constexpr std::size_t kUnsolved = 15;
    const auto rows = competition_rows();
    std::size_t uniqueTotal = 0;
    for (const auto& r : rows) uniqueTotal += r.unique;
    const std::size_t n = kShared + uniqueTotal + kUnsolved;

    std::vector<std::string>  solvers;
    for (const auto& r : rows) solvers.emplace_back(r.solver);
    std::vector<InstanceInfo> instances;
    for (std::size_t i = 0; i != n; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "np-%04zu", i);
        instances.push_back({name, "family" + std::to_string(i % 14), ComplexityClass::NP});
    }
    PerformanceMatrix m(solvers, instances);
    std::mt19937_64   rng(seed);
    for (std::size_t s = 0; s != solvers.size(); ++s)
        for (std::size_t i = 0; i != n; ++i) m.set(s, i, {RunStatus::Timeout, 600.0, Answer::Unknown});

    auto solve = [&](std::size_t s, std::size_t i) {
        double t = 0.05 + 599.0 * uniform01(rng) * uniform01(rng);
        m.set(s, i, {RunStatus::Solved, t, rng() & 1 ? Answer::AnswerSetFound : Answer::Inconsistent});
    };
    std::size_t nextUnique = kShared;
    for (std::size_t s = 0; s != rows.size(); ++s) {
        const std::size_t shared = rows[s].solved - rows[s].unique;
        if (solvers[s] == "idp")
            for (std::size_t i = 0; i != shared; ++i) solve(s, i);
        else
            for (std::size_t i = kShared - shared; i != kShared; ++i) solve(s, i);
        for (std::size_t u = 0; u != rows[s].unique; ++u) solve(s, nextUnique++);
    }
    return m;
}

PerformanceMatrix random_matrix(std::size_t solvers, std::size_t instances, double p_solved, std::uint64_t seed) {
    std::mt19937_64           rng(seed);
    std::vector<std::string>  names;
    for (std::size_t s = 0; s != solvers; ++s) names.push_back("s" + std::to_string(s));
    std::vector<InstanceInfo> insts;
    for (std::size_t i = 0; i != instances; ++i)
        insts.push_back({"i" + std::to_string(i), "family" + std::to_string(i % 3),
                         i % 4 == 3 ? ComplexityClass::BeyondNP : ComplexityClass::NP});
    PerformanceMatrix m(names, insts);
    for (std::size_t s = 0; s != solvers; ++s)
        for (std::size_t i = 0; i != instances; ++i) {
            if (uniform01(rng) < p_solved) m.set(s, i, {RunStatus::Solved, 0.01 + 100 * uniform01(rng), Answer::AnswerSetFound});
            else m.set(s, i, {RunStatus::Timeout, 600.0, Answer::Unknown});
        }
    return m;
}

} // namespace measp::synth
