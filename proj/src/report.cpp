#include <measp/bench.hpp>
#include <measp/io.hpp>

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace measp {

namespace {

void add(SolverRow& row, ComplexityClass cls, const RunOutcome& o) {
    if (!o.solved()) return;
    ++row.solved;
    row.time += o.cpu_seconds;
    if (cls == ComplexityClass::NP) {
        ++row.solved_np;
        row.time_np += o.cpu_seconds;
    }
    else {
        ++row.solved_beyond_np;
        row.time_beyond_np += o.cpu_seconds;
    }
}

void write_row(std::ostream& out, const SolverRow& r) {
    out << r.name << ',' << r.solved << ',' << format_double(r.time) << ',' << r.solved_np << ','
        << format_double(r.time_np) << ',' << r.solved_beyond_np << ',' << format_double(r.time_beyond_np) << ','
        << r.unique << '\n';
}

} // namespace

void write_solve_csv(std::ostream& out, std::span<const SolveRecord> rows) {
    out << kSolveCsvHeader << '\n';
    for (const auto& r : rows) {
        check_csv_field(r.instance);
        check_csv_field(r.chosen);
        out << r.instance << ',' << r.chosen << ',' << to_string(r.outcome.status) << ','
            << format_double(r.outcome.cpu_seconds) << ',' << format_double(r.feature_seconds) << ','
            << format_double(r.classify_seconds) << '\n';
    }
}

std::vector<SolveRecord> read_solve_csv(std::istream& in) {
    std::vector<SolveRecord> rows;
    std::string line;
    if (!read_line(in, line) || line != kSolveCsvHeader)
        throw std::runtime_error(std::string("solve CSV header must be '") + kSolveCsvHeader + "'");
    std::size_t lineNo = 1;
    while (read_line(in, line)) {
        ++lineNo;
        auto cells = split_csv_line(line);
        try {
            if (cells.size() != 6) throw std::invalid_argument("expected 6 fields");
            SolveRecord r;
            r.instance            = cells[0];
            r.chosen              = cells[1];
            r.outcome.status      = parse_run_status(cells[2]);
            r.outcome.cpu_seconds = parse_double(cells[3]);
            r.feature_seconds     = parse_double(cells[4]);
            r.classify_seconds    = parse_double(cells[5]);
            rows.push_back(std::move(r));
        }
        catch (const std::invalid_argument& e) {
            throw std::runtime_error("solve CSV line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return rows;
}

Report make_report(const PerformanceMatrix& m, const std::optional<EnginePool>& pool,
                   std::span<const SolveRecord> results) {
    Report r;
    const auto uniq = unique_counts(m);
    for (std::size_t s = 0; s != m.num_solvers(); ++s) {
        SolverRow row;
        row.name = m.solvers()[s];
        for (std::size_t i = 0; i != m.num_instances(); ++i) add(row, m.instances()[i].cls, m.at(s, i));
        auto u     = uniq.find(row.name);
        row.unique = u == uniq.end() ? 0 : u->second;
        r.solvers.push_back(std::move(row));
    }

    const EnginePool p = pool ? *pool : EnginePool::from_names(m.solvers());
    const auto best    = sota(m, p);
    r.sota.name        = "sota";
    for (std::size_t i = 0; i != m.num_instances(); ++i) add(r.sota, m.instances()[i].cls, best.per_instance[i].outcome);

    if (!results.empty()) {
        std::unordered_map<std::string, ComplexityClass> cls;
        for (const auto& inst : m.instances()) cls.emplace(inst.name, inst.cls);
        SolverRow me;
        me.name = "me-asp";
        for (const auto& rec : results) {
            auto c = cls.find(rec.instance);
            if (c == cls.end()) throw std::invalid_argument("solve result for unknown instance '" + rec.instance + "'");
            add(me, c->second, rec.outcome);
            ++r.calls[rec.chosen.empty() ? std::string("(none)") : rec.chosen];
        }
        r.multi_engine = std::move(me);
    }
    return r;
}

void write_report_csv(std::ostream& out, const Report& r) {
    out << kReportCsvHeader << '\n';
    for (const auto& row : r.solvers) write_row(out, row);
    write_row(out, r.sota);
    if (r.multi_engine) write_row(out, *r.multi_engine);
}

void write_report_text(std::ostream& out, const Report& r) {
    std::size_t w = 6;
    for (const auto& row : r.solvers) w = std::max(w, row.name.size());
    auto line = [&](const SolverRow& row, bool unique) {
        out << std::left << std::setw(static_cast<int>(w)) << row.name << std::right << std::fixed
            << std::setprecision(2) << std::setw(8) << row.solved_np << std::setw(12) << row.time_np << std::setw(8)
            << row.solved_beyond_np << std::setw(12) << row.time_beyond_np << std::setw(8) << row.solved
            << std::setw(12) << row.time;
        if (unique) out << std::setw(8) << row.unique;
        out << '\n';
    };
    out << std::left << std::setw(static_cast<int>(w)) << "solver" << std::right << std::setw(8) << "NP"
        << std::setw(12) << "time" << std::setw(8) << "BNP" << std::setw(12) << "time" << std::setw(8) << "all"
        << std::setw(12) << "time" << std::setw(8) << "unique" << '\n';
    for (const auto& row : r.solvers) line(row, true);
    line(r.sota, false);
    if (r.multi_engine) line(*r.multi_engine, false);
    out.unsetf(std::ios::floatfield);
}

void write_calls_csv(std::ostream& out, const Report& r) {
    out << "engine,calls\n";
    for (const auto& [engine, n] : r.calls) out << engine << ',' << n << '\n';
}

std::vector<CactusSeries> cactus(const PerformanceMatrix& m, const std::optional<EnginePool>& pool) {
    auto series = [](std::string name, std::vector<double> times) {
        std::sort(times.begin(), times.end());
        CactusSeries s{std::move(name), {}};
        for (std::size_t k = 0; k != times.size(); ++k) s.points.emplace_back(times[k], k + 1);
        return s;
    };
    std::vector<CactusSeries> out;
    for (std::size_t s = 0; s != m.num_solvers(); ++s) {
        std::vector<double> t;
        for (std::size_t i = 0; i != m.num_instances(); ++i)
            if (m.at(s, i).solved()) t.push_back(m.at(s, i).cpu_seconds);
        out.push_back(series(m.solvers()[s], std::move(t)));
    }
    const EnginePool p = pool ? *pool : EnginePool::from_names(m.solvers());
    std::vector<double> t;
    for (const auto& b : sota(m, p).per_instance)
        if (b.solver) t.push_back(b.outcome.cpu_seconds);
    out.push_back(series("sota", std::move(t)));
    return out;
}

void write_cactus_csv(std::ostream& out, std::span<const CactusSeries> series) {
    out << "series,time,solved\n";
    for (const auto& s : series)
        for (const auto& [t, n] : s.points) out << s.name << ',' << format_double(t) << ',' << n << '\n';
}

} // namespace measp
