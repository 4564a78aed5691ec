#include <measp/bench.hpp>
#include <measp/engine.hpp>
#include <measp/features.hpp>
#include <measp/learn.hpp>
#include <measp/selection.hpp>
#include <measp/semantics.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace measp;

namespace {

PerformanceMatrix matrix_from_text(const std::string& csv) {
    std::istringstream in(csv);
    return PerformanceMatrix::load_csv(in);
}

std::vector<std::vector<std::string>> answer_sets(const std::string& program, std::size_t max_atoms,
                                                  std::optional<std::size_t> limit) {
    auto p = parse_ground_program(program);
    std::vector<std::vector<std::string>> out;
    for (const auto& i : enumerate_answer_sets(p, max_atoms, limit.value_or(SIZE_MAX))) out.push_back(i.names(p));
    return out;
}

Interpretation interpretation(const GroundProgram& p, const std::vector<std::string>& names) {
    std::vector<AtomId> ids;
    for (const auto& n : names) {
        auto parsed = parse_ground_program(n + ".");
        const auto& atom = parsed.atom_table()->name(parsed.rules().front().head.front());
        auto id = p.atom_table()->find(atom);
        if (id < 0) throw py::key_error("atom '" + n + "' does not occur in the program");
        ids.push_back(static_cast<AtomId>(id));
    }
    return Interpretation(p.num_atoms(), std::move(ids));
}

py::dict outcome_dict(const RunOutcome& o) {
    py::dict d;
    d["status"]      = to_string(o.status);
    d["cpu_seconds"] = o.cpu_seconds;
    d["answer"]      = o.answer == Answer::AnswerSetFound ? "answer-set-found"
                       : o.answer == Answer::Inconsistent ? "inconsistent"
                                                           : "unknown";
    return d;
}

LabeledDataset dataset(const std::string& matrix_csv, const std::string& features_csv,
                       const std::optional<std::vector<std::string>>& pool) {
    auto m = matrix_from_text(matrix_csv);
    if (pool) m = m.restrict_to(*pool);
    std::istringstream in(features_csv);
    auto t = read_feature_csv(in, FeatureManifest::canonical());
    std::map<std::string, FeatureVector> fm;
    for (std::size_t i = 0; i != t.instances.size(); ++i) fm[t.instances[i]] = t.rows[i];
    return build_training_set(m, fm);
}

std::string json_text(const std::optional<py::dict>& params) {
    if (!params) return "{}";
    auto dumps = py::module_::import("json").attr("dumps");
    return py::cast<std::string>(dumps(*params));
}

} // namespace

PYBIND11_MODULE(_measp, m) {
    m.doc() = "Ground ASP programs, features, engine selection and multi-engine solving";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<OracleScaleExceeded>(m, "OracleScaleExceeded", PyExc_RuntimeError);
    py::register_exception<SelectionError>(m, "SelectionError", PyExc_RuntimeError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);
    py::register_exception<SolveError>(m, "SolveError", PyExc_RuntimeError);
    py::register_exception<RegistryError>(m, "RegistryError", PyExc_RuntimeError);

    m.def("normalize_program", [](const std::string& text) { return print_program(parse_ground_program(text)); },
          "Parse a ground program and print it back in canonical form.");
    m.def("answer_sets", &answer_sets, py::arg("program"), py::arg("max_atoms") = kDefaultOracleMaxAtoms,
          py::arg("limit") = py::none(), "Answer sets by brute force, in lexicographic order.");
    m.def(
        "is_answer_set",
        [](const std::string& program, const std::vector<std::string>& atoms) {
            auto p = parse_ground_program(program);
            return is_answer_set(p, interpretation(p, atoms));
        },
        py::arg("program"), py::arg("atoms"));
    m.def(
        "reduct",
        [](const std::string& program, const std::vector<std::string>& atoms) {
            auto p = parse_ground_program(program);
            return print_program(reduct(p, interpretation(p, atoms)));
        },
        py::arg("program"), py::arg("atoms"));

    m.def("feature_names", [] { return FeatureManifest::canonical().names(); });
    m.def("manifest_version", [] { return FeatureManifest::canonical().version(); });
    m.def(
        "features",
        [](const std::string& program) {
            const auto& man = FeatureManifest::canonical();
            auto        v   = extract_features(parse_ground_program(program), man);
            py::dict    d;
            auto        names = man.names();
            for (std::size_t i = 0; i != names.size(); ++i) d[py::str(names[i])] = v.values[i];
            return d;
        },
        py::arg("program"), "Feature name -> value for one program.");
    m.def(
        "features_csv",
        [](const std::vector<std::string>& names, const std::vector<std::string>& programs) {
            if (names.size() != programs.size()) throw py::value_error("names and programs differ in length");
            const auto& man = FeatureManifest::canonical();
            std::vector<FeatureVector> rows;
            for (const auto& p : programs) rows.push_back(extract_features(parse_ground_program(p), man));
            std::ostringstream out;
            write_feature_csv(out, man, names, rows);
            return out.str();
        },
        py::arg("names"), py::arg("programs"));

    m.def("unique_counts", [](const std::string& csv) { return unique_counts(matrix_from_text(csv)); },
          py::arg("matrix_csv"));
    m.def(
        "select_by_uniqueness",
        [](const std::string& csv, std::size_t threshold) {
            return select_by_uniqueness(matrix_from_text(csv), threshold).names();
        },
        py::arg("matrix_csv"), py::arg("threshold") = 5);
    m.def(
        "greedy_pool",
        [](const std::string& csv, std::size_t d) { return greedy_pool(matrix_from_text(csv), d).names(); },
        py::arg("matrix_csv"), py::arg("distinguishability"));
    m.def(
        "sota",
        [](const std::string& csv, const std::vector<std::string>& pool) {
            auto r = sota(matrix_from_text(csv), EnginePool::from_names(pool));
            return py::make_tuple(r.solved, r.total_time);
        },
        py::arg("matrix_csv"), py::arg("pool"), "(solved, total time) of the per-instance best pool member.");

    m.def(
        "train",
        [](const std::string& matrix_csv, const std::string& features_csv, const std::string& algorithm,
           const std::optional<py::dict>& params, const std::optional<std::vector<std::string>>& pool) {
            auto d = dataset(matrix_csv, features_csv, pool);
            return save_model(train(algorithm, nlohmann::json::parse(json_text(params)), d));
        },
        py::arg("matrix_csv"), py::arg("features_csv"), py::arg("algorithm") = "nn", py::arg("params") = py::none(),
        py::arg("pool") = py::none(), "Train on uniquely solved instances; returns the model file text.");
    m.def(
        "cross_validate",
        [](const std::string& matrix_csv, const std::string& features_csv, const std::string& algorithm,
           const std::optional<py::dict>& params, std::size_t folds, std::size_t repeats, std::uint64_t seed) {
            auto d = dataset(matrix_csv, features_csv, std::nullopt);
            auto a = params_from_json(algorithm, nlohmann::json::parse(json_text(params)));
            return stratified_cv(a, d, folds, repeats, seed).to_json().dump();
        },
        py::arg("matrix_csv"), py::arg("features_csv"), py::arg("algorithm") = "nn", py::arg("params") = py::none(),
        py::arg("folds") = 10, py::arg("repeats") = 10, py::arg("seed") = 1, "CV report as JSON text.");
    m.def(
        "predict",
        [](const std::string& model, const std::string& program) {
            return predict(load_model(model), extract_features(parse_ground_program(program))).label;
        },
        py::arg("model"), py::arg("program"));

    m.def(
        "run_engine",
        [](const std::string& registry, const std::string& engine, const std::string& path, double cpu,
           std::uint64_t mem) {
            auto reg = registry.empty() ? EngineRegistry::builtin() : EngineRegistry::parse(registry);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_engine(reg.get(engine), path, {cpu, mem});
            }
            auto d = outcome_dict(r.outcome);
            d["diagnostic"] = r.diagnostic;
            d["witness"]    = r.witness ? py::cast(*r.witness) : py::none();
            return d;
        },
        py::arg("registry"), py::arg("engine"), py::arg("path"), py::arg("cpu_seconds") = 600.0,
        py::arg("memory_bytes") = 2ULL << 30, "Registry text (empty: builtin oracle only).");
    m.def(
        "solve",
        [](const std::string& path, const std::string& model, const std::optional<std::vector<std::string>>& pool,
           const std::string& registry, double cpu, std::uint64_t mem, bool fallback) {
            auto reg = registry.empty() ? EngineRegistry::builtin() : EngineRegistry::parse(registry);
            auto mdl = load_model(model);
            auto p   = EnginePool::from_names(pool ? *pool : mdl.labels());
            p.annotate(reg.disjunctive_flags());
            SolveOptions opts;
            opts.fallback = fallback;
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve(path, mdl, p, reg, {cpu, mem}, opts);
            }
            auto d                = outcome_dict(r.outcome);
            d["chosen"]           = r.chosen ? py::cast(*r.chosen) : py::none();
            d["feature_seconds"]  = r.feature_seconds;
            d["classify_seconds"] = r.classify_seconds;
            d["total_seconds"]    = r.total_seconds;
            d["witness"]          = r.witness ? py::cast(*r.witness) : py::none();
            return d;
        },
        py::arg("path"), py::arg("model"), py::arg("pool") = py::none(), py::arg("registry") = "",
        py::arg("cpu_seconds") = 600.0, py::arg("memory_bytes") = 2ULL << 30, py::arg("fallback") = false);

    m.def(
        "report_csv",
        [](const std::string& matrix_csv, const std::optional<std::vector<std::string>>& pool) {
            std::optional<EnginePool> p;
            if (pool) p = EnginePool::from_names(*pool);
            std::ostringstream out;
            write_report_csv(out, make_report(matrix_from_text(matrix_csv), p));
            return out.str();
        },
        py::arg("matrix_csv"), py::arg("pool") = py::none());
    m.def(
        "pca",
        [](const std::vector<std::vector<double>>& rows) {
            auto r = pca_project(std::span<const std::vector<double>>(rows));
            py::dict d;
            d["coords"]         = r.coords;
            d["explained"]      = r.explained;
            d["total_variance"] = r.total_variance;
            return d;
        },
        py::arg("rows"));
    m.def(
        "competition_matrix_csv",
        [](std::uint64_t seed) {
            auto rows = synth::competition_matrix(seed).records();
            std::ostringstream out;
            write_performance_csv(out, rows);
            return out.str();
        },
        py::arg("seed") = 1);
    m.def(
        "generate",
        [](const std::string& kind, std::size_t atoms, std::uint64_t seed) {
            GroundProgram p;
            if (kind == "random-normal") p = synth::random_normal(atoms, 2 * atoms, seed);
            else if (kind == "fact-heavy") p = synth::fact_heavy(atoms, seed);
            else if (kind == "constraint-heavy") p = synth::constraint_heavy(atoms, seed);
            else if (kind == "pigeonhole") p = synth::pigeonhole(atoms, atoms - 1);
            else throw py::value_error("unknown kind '" + kind + "'");
            return print_program(p);
        },
        py::arg("kind"), py::arg("atoms") = 12, py::arg("seed") = 1);
}
