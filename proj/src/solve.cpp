#include <measp/engine.hpp>

#include <algorithm>
#include <cmath>

namespace measp {

namespace {

double to_micros(double s) { return std::round(s * 1e6) / 1e6; }

RunResult run_on(const EngineSpec& e, const std::string& path, const GroundProgram& p, const Limits& l) {
    if (e.kind == EngineKind::BuiltinOracle) return run_builtin(e, p, l);
    return run_engine(e, path, l);
}

// The registry describes the actual engine; the pool annotation is only a fallback.
bool handles_disjunctive(const EngineRegistry& registry, const PoolEngine& e) {
    return registry.contains(e.name) ? registry.get(e.name).handles_disjunctive : e.handles_disjunctive;
}

} // namespace

SolveResult solve(const std::string& instance_path, const InductiveModel& model, const EnginePool& pool,
                  const EngineRegistry& registry, const Limits& l, const SolveOptions& opts) {
    l.validate();
    if (pool.empty()) throw SolveError("engine pool is empty");
    for (const auto& label : model.labels())
        if (!pool.contains(label)) throw SolveError("model label '" + label + "' is not in the engine pool");
    const FeatureManifest& manifest = opts.manifest ? *opts.manifest : FeatureManifest::canonical();
    if (manifest.version() != model.manifest_version())
        throw VersionMismatch("model expects manifest '" + model.manifest_version() + "', features use '" +
                              manifest.version() + "'");

    SolveResult res;
    const double t0 = thread_cpu_seconds();
    GroundProgram p;
    try {
        p = read_program_file(instance_path);
    }
    catch (const ParseError& e) {
        throw SolveError(instance_path + ": " + e.what());
    }
    const FeatureVector v = extract_features(p, manifest);
    res.feature_seconds   = to_micros(thread_cpu_seconds() - t0);

    std::vector<std::string> candidates;
    const bool disjunctive = p.has_disjunction();
    for (const auto& e : pool.engines()) {
        if (std::find(model.labels().begin(), model.labels().end(), e.name) == model.labels().end()) continue;
        if (disjunctive && !handles_disjunctive(registry, e)) continue;
        candidates.push_back(e.name);
    }
    if (candidates.empty()) {
        if (disjunctive) throw SolveError("no engine in the pool handles disjunctive programs");
        throw SolveError("no model label is available in the engine pool");
    }

    auto timeout = [&] {
        res.outcome       = {RunStatus::Timeout, l.cpu_seconds, Answer::Unknown};
        res.total_seconds = std::max(l.cpu_seconds, res.feature_seconds + res.classify_seconds);
        return res;
    };
    if (res.feature_seconds >= l.cpu_seconds) return timeout();

    const double t1       = thread_cpu_seconds();
    const auto   predicted = predict_among(model, v, candidates);
    res.classify_seconds  = to_micros(thread_cpu_seconds() - t1);

    double budget = l.cpu_seconds - res.feature_seconds - res.classify_seconds;
    if (budget <= 0) return timeout();

    std::vector<std::string> order{predicted.label};
    if (opts.fallback) {
        std::vector<std::string> rest;
        for (const auto& e : pool.engines())
            if (e.name != predicted.label && (!disjunctive || handles_disjunctive(registry, e)))
                rest.push_back(e.name);
        std::stable_sort(rest.begin(), rest.end(), [&](const std::string& a, const std::string& b) {
            auto ca = opts.solved_counts.find(a), cb = opts.solved_counts.find(b);
            std::size_t na = ca == opts.solved_counts.end() ? 0 : ca->second;
            std::size_t nb = cb == opts.solved_counts.end() ? 0 : cb->second;
            return na > nb;
        });
        order.insert(order.end(), rest.begin(), rest.end());
    }

    res.chosen       = predicted.label;
    double engineCpu = 0;
    for (const auto& name : order) {
        if (budget <= 0) break;
        Limits sub       = l;
        sub.cpu_seconds  = budget;
        auto run         = run_on(registry.get(name), instance_path, p, sub);
        double charged   = run.outcome.status == RunStatus::Timeout ? budget : run.outcome.cpu_seconds;
        engineCpu       += charged;
        budget          -= charged;
        res.outcome      = run.outcome;
        if (run.witness) res.witness = run.witness;
        res.attempts.push_back({name, std::move(run)});
        if (res.outcome.status != RunStatus::Error) break;
    }
    res.total_seconds = to_micros(res.feature_seconds + res.classify_seconds + engineCpu);
    if (res.outcome.status == RunStatus::Timeout) {
        res.outcome.cpu_seconds = l.cpu_seconds;
    }
    else if (res.outcome.solved()) {
        if (res.total_seconds > l.cpu_seconds) {
            res.outcome = {RunStatus::Timeout, l.cpu_seconds, Answer::Unknown};
        }
        else {
            res.outcome.cpu_seconds = res.total_seconds;
        }
    }
    else {
        res.outcome.cpu_seconds = res.total_seconds;
    }
    return res;
}

} // namespace measp
