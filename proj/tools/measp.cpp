// measp: command-line front end.
#include <measp/bench.hpp>
#include <measp/engine.hpp>
#include <measp/features.hpp>
#include <measp/io.hpp>
#include <measp/learn.hpp>
#include <measp/selection.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace measp;

namespace {

struct Common {
    std::string   engines;
    std::string   instances;
    double        cpu_limit = 600.0;
    std::uint64_t mem_limit = 2ULL << 30;
    std::size_t   workers   = 1;
    std::uint64_t seed      = 1;
    std::string   manifest;
    std::string   model;
    std::string   out;
    bool          fallback = false;
};

Limits limits(const Common& c) { return {c.cpu_limit, c.mem_limit}; }

const FeatureManifest& manifest(const Common& c) {
    static FeatureManifest custom;
    if (c.manifest.empty()) return FeatureManifest::canonical();
    custom = FeatureManifest::load(c.manifest);
    return custom;
}

EngineRegistry registry(const Common& c) {
    return c.engines.empty() ? EngineRegistry::builtin() : EngineRegistry::load(c.engines);
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    if (path.empty() || path == "-") writer(std::cout);
    else write_file_atomic(path, writer);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    while (read_line(in, line))
        if (line.front() != '#') out.push_back(line);
    return out;
}

FeatureTable load_features(const std::string& path, const FeatureManifest& m) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read features '" + path + "'");
    return read_feature_csv(in, m);
}

std::map<std::string, FeatureVector> feature_map(const FeatureTable& t) {
    std::map<std::string, FeatureVector> out;
    for (std::size_t i = 0; i != t.instances.size(); ++i) out[t.instances[i]] = t.rows[i];
    return out;
}

PerformanceMatrix load_matrix(const std::string& path, const std::string& poolFile) {
    auto m = PerformanceMatrix::load_csv_file(path);
    if (poolFile.empty()) return m;
    auto names = read_lines(poolFile);
    return m.restrict_to(names);
}

AlgorithmParams algorithm(const std::string& tag, const std::string& params) {
    return params_from_json(tag, params.empty() ? nlohmann::json::object() : nlohmann::json::parse(params));
}

// Instances given as files, or discovered below --instances.
std::vector<std::pair<std::string, std::string>> instance_list(const std::vector<std::string>& files,
                                                               const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> out; // (name, path)
    for (const auto& f : files) out.emplace_back(f, f);
    if (!dir.empty())
        for (const auto& info : discover_instances(dir)) out.emplace_back(info.name, (fs::path(dir) / info.name).string());
    return out;
}

std::string stdin_to_scratch() {
    auto path = (fs::path(scratch_dir()) / ("measp-stdin-" + std::to_string(::getpid()) + ".gasp")).string();
    std::ofstream out(path);
    out << std::cin.rdbuf();
    return path;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-engine answer set programming toolkit"};
    app.set_config("--config", "", "INI/TOML file with default flag values; command-line flags override");
    app.require_subcommand(1);
    Common c;

    auto addLimits = [&](CLI::App* s) {
        s->add_option("--cpu-limit", c.cpu_limit, "CPU seconds per run")->check(CLI::PositiveNumber);
        s->add_option("--mem-limit", c.mem_limit, "Memory bytes per run")->check(CLI::PositiveNumber);
    };

    // features
    auto* feat = app.add_subcommand("features", "Extract the feature vector of ground programs");
    std::vector<std::string> files;
    feat->add_option("files", files, "Ground program files");
    feat->add_option("--instances", c.instances, "Directory of instances");
    feat->add_option("--manifest", c.manifest, "Feature manifest (default: the shipped one)");
    feat->add_option("--out", c.out, "Output CSV (default: stdout)");

    // bench
    auto* be = app.add_subcommand("bench", "Run every engine on every instance");
    std::vector<std::string> only;
    bool   sanity = false;
    double checkpoint = 5.0;
    be->add_option("--engines", c.engines, "Engine registry file (default: builtin oracle)");
    be->add_option("--instances", c.instances, "Directory of instances")->required();
    addLimits(be);
    be->add_option("--workers", c.workers, "Concurrent runs")->check(CLI::PositiveNumber);
    be->add_option("--seed", c.seed, "Execution order seed");
    be->add_option("--out", c.out, "Performance CSV; existing rows are kept")->required();
    be->add_option("--only", only, "Subset of registry engines")->delimiter(',');
    be->add_flag("--sanity-check", sanity, "Check answers against the reference enumeration");
    be->add_option("--checkpoint", checkpoint, "Seconds between checkpoints");

    // select-engines
    auto* sel = app.add_subcommand("select-engines", "Choose the engine pool from a performance CSV");
    std::string matrixFile, poolFile, resultsFile;
    std::size_t threshold = 5;
    std::optional<std::size_t> greedy;
    sel->add_option("--matrix", matrixFile, "Performance CSV")->required();
    sel->add_option("--threshold", threshold, "Minimum uniquely solved instances");
    sel->add_option("--greedy", greedy, "Use the greedy policy with this distinguishability");
    sel->add_option("--engines", c.engines, "Registry, for disjunctive capability warnings");
    sel->add_option("--out", c.out, "Pool file, one engine per line (default: stdout)");

    // train
    auto* tr = app.add_subcommand("train", "Train an engine-selection model");
    std::string featuresFile, alg = "nn", params;
    std::vector<std::string> families;
    tr->add_option("--matrix", matrixFile, "Performance CSV")->required();
    tr->add_option("--features", featuresFile, "Features CSV")->required();
    tr->add_option("--algorithm", alg, "nn, tree or mlr")->check(CLI::IsMember({"nn", "tree", "mlr"}));
    tr->add_option("--params", params, "Algorithm parameters as JSON");
    tr->add_option("--pool", poolFile, "Restrict to the engines of this pool file");
    tr->add_option("--families", families, "Train on these problem families only")->delimiter(',');
    tr->add_option("--manifest", c.manifest, "Feature manifest");
    tr->add_option("--model", c.model, "Output model file");
    tr->add_option("--out", c.out, "Output model file (alias of --model)");

    // cv
    auto* cv = app.add_subcommand("cv", "Stratified repeated cross-validation");
    std::size_t folds = 10, repeats = 10;
    cv->add_option("--matrix", matrixFile, "Performance CSV")->required();
    cv->add_option("--features", featuresFile, "Features CSV")->required();
    cv->add_option("--algorithm", alg, "nn, tree or mlr")->check(CLI::IsMember({"nn", "tree", "mlr"}));
    cv->add_option("--params", params, "Algorithm parameters as JSON");
    cv->add_option("--pool", poolFile, "Restrict to the engines of this pool file");
    cv->add_option("--families", families, "Use these problem families only")->delimiter(',');
    cv->add_option("--folds", folds, "Folds")->check(CLI::Range(2, 1000));
    cv->add_option("--repeats", repeats, "Repeats")->check(CLI::PositiveNumber);
    cv->add_option("--seed", c.seed, "Seed");
    cv->add_option("--manifest", c.manifest, "Feature manifest");
    cv->add_option("--out", c.out, "JSON report (default: stdout)");

    // solve
    auto* so = app.add_subcommand("solve", "Solve instances with the predicted engine");
    std::string engineName;
    so->add_option("files", files, "Ground program files ('-' reads stdin)");
    so->add_option("--instances", c.instances, "Directory of instances");
    so->add_option("--model", c.model, "Model file");
    so->add_option("--pool", poolFile, "Pool file (default: the model's labels)");
    so->add_option("--engines", c.engines, "Engine registry file (default: builtin oracle)");
    so->add_option("--engine", engineName, "Run this engine directly, without a model");
    so->add_option("--matrix", matrixFile, "Performance CSV giving the fallback order");
    so->add_option("--manifest", c.manifest, "Feature manifest matching the model");
    addLimits(so);
    so->add_flag("--fallback", c.fallback, "Try other engines if the chosen one fails");
    so->add_option("--out", c.out, "Solve results CSV");

    // report
    auto* rep = app.add_subcommand("report", "Summary tables and plot data");
    std::string cactusFile, callsFile;
    bool csvTable = false;
    rep->add_option("--matrix", matrixFile, "Performance CSV")->required();
    rep->add_option("--pool", poolFile, "Pool file for the sota row");
    rep->add_option("--results", resultsFile, "Solve results CSV of the multi-engine system");
    rep->add_option("--out", c.out, "Table CSV");
    rep->add_option("--cactus", cactusFile, "Cactus CSV");
    rep->add_option("--calls", callsFile, "Engine call counts CSV");
    rep->add_flag("--csv", csvTable, "Print the table as CSV");

    // pca
    auto* pc = app.add_subcommand("pca", "Two-dimensional PCA projection of feature vectors");
    pc->add_option("--features", featuresFile, "Features CSV")->required();
    pc->add_option("--manifest", c.manifest, "Feature manifest");
    pc->add_option("--out", c.out, "Coordinates CSV (default: stdout)");

    // gen
    auto* gen = app.add_subcommand("gen", "Synthetic instances and matrices");
    std::string kind;
    std::size_t count = 10, atoms = 12, rules = 0, holes = 0;
    gen->add_option("--kind", kind, "random-normal, pigeonhole, fact-heavy, constraint-heavy, competition-matrix, random-matrix")
        ->required()
        ->check(CLI::IsMember({"random-normal", "pigeonhole", "fact-heavy", "constraint-heavy", "competition-matrix",
                               "random-matrix"}));
    gen->add_option("--count", count, "Programs (or matrix instances)");
    gen->add_option("--atoms", atoms, "Atoms per program (pigeons for pigeonhole; solvers for random-matrix)");
    gen->add_option("--rules", rules, "Rules per random-normal program (default 2x atoms)");
    gen->add_option("--holes", holes, "Pigeonhole holes (default pigeons - 1)");
    gen->add_option("--seed", c.seed, "Seed");
    gen->add_option("--out", c.out, "Output directory (programs) or CSV (matrices)")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*feat) {
            const auto& m    = manifest(c);
            auto        list = instance_list(files, c.instances);
            if (list.empty()) throw std::invalid_argument("no instances given");
            std::vector<std::string>   names;
            std::vector<FeatureVector> rows;
            for (const auto& [name, path] : list) {
                names.push_back(name);
                rows.push_back(extract_features(read_program_file(path), m));
            }
            emit(c.out, [&](std::ostream& out) { write_feature_csv(out, m, names, rows); });
            return 0;
        }
        if (*be) {
            BenchPlan plan;
            plan.registry_path      = c.engines;
            plan.instances_dir      = c.instances;
            plan.limits             = limits(c);
            plan.workers            = c.workers;
            plan.out_csv            = c.out;
            plan.seed               = c.seed;
            plan.engines            = only;
            plan.sanity_check       = sanity;
            plan.checkpoint_seconds = checkpoint;
            auto s = bench(plan, registry(c));
            std::cerr << "executed " << s.executed << " runs, reused " << s.skipped << '\n';
            for (const auto& f : s.sanity_failures) std::cerr << "sanity check failed: " << f << '\n';
            return s.sanity_failures.empty() ? 0 : 2;
        }
        if (*sel) {
            auto m    = PerformanceMatrix::load_csv_file(matrixFile);
            auto pool = greedy ? greedy_pool(m, *greedy) : select_by_uniqueness(m, threshold);
            if (!c.engines.empty()) pool.annotate(EngineRegistry::load(c.engines).disjunctive_flags());
            if (auto w = beyond_np_warning(m, pool)) std::cerr << "warning: " << *w << '\n';
            emit(c.out, [&](std::ostream& out) {
                for (const auto& n : pool.names()) out << n << '\n';
            });
            return 0;
        }
        if (*tr || *cv) {
            const auto& man  = manifest(c);
            auto        m    = load_matrix(matrixFile, poolFile);
            auto        fm   = feature_map(load_features(featuresFile, man));
            auto        data = build_training_set(m, fm, families.empty() ? std::nullopt
                                                                             : std::optional(families));
            auto a = algorithm(alg, params);
            if (*tr) {
                std::string path = c.model.empty() ? c.out : c.model;
                if (path.empty()) throw std::invalid_argument("train needs --model or --out");
                auto model = train(a, data);
                save_model_file(model, path);
                std::cerr << "trained " << alg << " on " << data.size() << " patterns, "
                          << model.labels().size() << " labels\n";
            }
            else {
                auto r = stratified_cv(a, data, folds, repeats, c.seed);
                emit(c.out, [&](std::ostream& out) { out << r.to_json().dump(1) << '\n'; });
                if (r.folds != r.folds_requested)
                    std::cerr << "note: folds reduced to " << r.folds << " by the smallest class\n";
            }
            return 0;
        }
        if (*so) {
            auto reg  = registry(c);
            auto list = instance_list({}, c.instances);
            struct Scratch {
                std::vector<std::string> paths;
                ~Scratch() {
                    std::error_code ec;
                    for (const auto& p : paths) fs::remove(p, ec);
                }
            } scratch;
            for (const auto& f : files) {
                if (f == "-") scratch.paths.push_back(stdin_to_scratch());
                list.emplace_back(f, f == "-" ? scratch.paths.back() : f);
            }
            if (list.empty()) throw std::invalid_argument("no instances given");
            std::optional<InductiveModel> model;
            EnginePool                    pool;
            if (engineName.empty()) {
                if (c.model.empty()) throw std::invalid_argument("solve needs --model or --engine");
                model = load_model_file(c.model);
                pool  = poolFile.empty() ? EnginePool::from_names(model->labels())
                                         : EnginePool::from_names(read_lines(poolFile));
                pool.annotate(reg.disjunctive_flags());
            }
            SolveOptions opts;
            opts.fallback = c.fallback;
            if (!c.manifest.empty()) opts.manifest = &manifest(c);
            if (!matrixFile.empty()) {
                auto m = PerformanceMatrix::load_csv_file(matrixFile);
                for (std::size_t s = 0; s != m.num_solvers(); ++s) opts.solved_counts[m.solvers()[s]] = m.solved_count(s);
            }
            std::vector<SolveRecord> records;
            Answer                   last = Answer::Unknown;
            for (const auto& [name, path] : list) {
                SolveRecord rec;
                rec.instance = name;
                std::optional<std::vector<std::string>> witness;
                if (!engineName.empty()) {
                    auto r     = run_engine(reg.get(engineName), path, limits(c));
                    rec.chosen = engineName;
                    rec.outcome = r.outcome;
                    witness     = r.witness;
                    if (!r.diagnostic.empty()) std::cerr << name << ": " << r.diagnostic << '\n';
                }
                else {
                    auto r              = solve(path, *model, pool, reg, limits(c), opts);
                    rec.chosen          = r.chosen.value_or("");
                    rec.outcome         = r.outcome;
                    rec.feature_seconds = r.feature_seconds;
                    rec.classify_seconds = r.classify_seconds;
                    witness             = r.witness;
                    for (const auto& a : r.attempts)
                        if (!a.result.diagnostic.empty()) std::cerr << name << ": " << a.engine << ": " << a.result.diagnostic << '\n';
                }
                last = rec.outcome.solved() ? rec.outcome.answer : Answer::Unknown;
                if (list.size() > 1) std::cout << name << ": ";
                if (last == Answer::AnswerSetFound) {
                    std::cout << "ANSWER\n";
                    if (witness) {
                        for (std::size_t k = 0; k != witness->size(); ++k) std::cout << (k ? " " : "") << (*witness)[k];
                        std::cout << '\n';
                    }
                }
                else if (last == Answer::Inconsistent) std::cout << "INCONSISTENT\n";
                else std::cout << "UNKNOWN " << to_string(rec.outcome.status) << '\n';
                if (!rec.chosen.empty()) std::cerr << name << ": engine " << rec.chosen << ", "
                                                   << format_double(rec.outcome.cpu_seconds) << "s\n";
                records.push_back(std::move(rec));
            }
            if (!c.out.empty()) write_file_atomic(c.out, [&](std::ostream& out) { write_solve_csv(out, records); });
            if (list.size() == 1) return last == Answer::AnswerSetFound ? 10 : last == Answer::Inconsistent ? 20 : 0;
            return 0;
        }
        if (*rep) {
            auto m = PerformanceMatrix::load_csv_file(matrixFile);
            std::optional<EnginePool> pool;
            if (!poolFile.empty()) pool = EnginePool::from_names(read_lines(poolFile));
            std::vector<SolveRecord> results;
            if (!resultsFile.empty()) {
                std::ifstream in(resultsFile);
                if (!in) throw std::runtime_error("cannot read '" + resultsFile + "'");
                results = read_solve_csv(in);
            }
            auto r = make_report(m, pool, results);
            if (csvTable) write_report_csv(std::cout, r);
            else write_report_text(std::cout, r);
            if (!c.out.empty()) write_file_atomic(c.out, [&](std::ostream& out) { write_report_csv(out, r); });
            if (!cactusFile.empty()) {
                auto series = cactus(m, pool);
                write_file_atomic(cactusFile, [&](std::ostream& out) { write_cactus_csv(out, series); });
            }
            if (!callsFile.empty()) write_file_atomic(callsFile, [&](std::ostream& out) { write_calls_csv(out, r); });
            return 0;
        }
        if (*pc) {
            auto t = load_features(featuresFile, manifest(c));
            auto r = pca_project(std::span<const FeatureVector>(t.rows));
            std::cerr << "explained variance: " << format_double(r.explained[0]) << ' ' << format_double(r.explained[1])
                      << " of " << format_double(r.total_variance) << '\n';
            emit(c.out, [&](std::ostream& out) {
                out << "instance,pc1,pc2\n";
                for (std::size_t i = 0; i != t.instances.size(); ++i)
                    out << t.instances[i] << ',' << format_double(r.coords[i][0]) << ','
                        << format_double(r.coords[i][1]) << '\n';
            });
            return 0;
        }
        if (*gen) {
            if (kind == "competition-matrix" || kind == "random-matrix") {
                auto m = kind == "competition-matrix" ? synth::competition_matrix(c.seed)
                                                 : synth::random_matrix(atoms, count, 0.5, c.seed);
                auto rows = m.records();
                write_file_atomic(c.out, [&](std::ostream& out) { write_performance_csv(out, rows); });
                return 0;
            }
            fs::create_directories(c.out);
            for (std::size_t i = 0; i != count; ++i) {
                std::uint64_t s = c.seed * 1000003ULL + i;
                GroundProgram p;
                if (kind == "random-normal") p = synth::random_normal(atoms, rules ? rules : 2 * atoms, s);
                else if (kind == "pigeonhole") p = synth::pigeonhole(atoms + i, holes ? holes : atoms + i - 1);
                else if (kind == "fact-heavy") p = synth::fact_heavy(atoms, s);
                else p = synth::constraint_heavy(atoms, s);
                char name[64];
                std::snprintf(name, sizeof name, "%s-%04zu.gasp", kind.c_str(), i);
                auto text = print_program(p);
                write_file_atomic((fs::path(c.out) / name).string(), [&](std::ostream& out) { out << text << '\n'; });
            }
            return 0;
        }
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
