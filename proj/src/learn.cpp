#include <measp/io.hpp>
#include <measp/learn.hpp>

#include <algorithm>
#include <random>
#include <set>

namespace measp {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat        = "measp-model";
constexpr int         kModelFormatVersion = 1;

std::size_t argmax_first(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Fisher-Yates with a fixed reduction so results do not depend on the
// standard library's distribution implementations.
template <class T>
void shuffle_portable(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::vector<std::vector<double>> scaled_rows(const Scaler& s, const LabeledDataset& d) {
    std::vector<std::vector<double>> x;
    x.reserve(d.size());
    for (const auto& p : d.patterns) x.push_back(s.apply(p.values));
    return x;
}

} // namespace

std::vector<std::string> LabeledDataset::distinct_labels() const {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

void LabeledDataset::validate(bool for_training) const {
    if (patterns.size() != labels.size()) throw std::invalid_argument("dataset: pattern and label counts differ");
    if (!instances.empty() && instances.size() != patterns.size())
        throw std::invalid_argument("dataset: instance names do not match patterns");
    for (const auto& p : patterns)
        if (p.manifest_version != manifest_version)
            throw VersionMismatch("dataset mixes manifests '" + manifest_version + "' and '" + p.manifest_version + "'");
    if (for_training) {
        if (patterns.empty()) throw std::invalid_argument("dataset is empty");
        if (distinct_labels().size() < 2)
            throw std::invalid_argument("degenerate dataset: training needs at least two distinct labels");
    }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> idx) const {
    LabeledDataset out;
    out.manifest_version = manifest_version;
    for (auto i : idx) {
        out.patterns.push_back(patterns.at(i));
        out.labels.push_back(labels.at(i));
        if (!instances.empty()) out.instances.push_back(instances.at(i));
    }
    return out;
}

LabeledDataset build_training_set(const PerformanceMatrix& m, const std::map<std::string, FeatureVector>& features,
                                  const std::optional<std::vector<std::string>>& families) {
    LabeledDataset d;
    std::set<std::string> allowed;
    if (families) allowed.insert(families->begin(), families->end());
    for (std::size_t i = 0; i != m.num_instances(); ++i) {
        const auto& inst = m.instances()[i];
        if (families && !allowed.count(inst.family)) continue;
        std::size_t solvedBy = 0, who = 0;
        for (std::size_t s = 0; s != m.num_solvers(); ++s) {
            if (m.at(s, i).solved()) {
                ++solvedBy;
                who = s;
            }
        }
        if (solvedBy != 1) continue;
        auto f = features.find(inst.name);
        if (f == features.end()) continue;
        if (d.patterns.empty()) d.manifest_version = f->second.manifest_version;
        d.patterns.push_back(f->second);
        d.labels.push_back(m.solvers()[who]);
        d.instances.push_back(inst.name);
    }
    if (d.patterns.empty()) throw std::runtime_error("no uniquely solved instances");
    d.validate(false);
    return d;
}

InductiveModel::InductiveModel(std::shared_ptr<const Classifier> c, Scaler scaler, std::vector<std::string> labels)
    : tag_(c ? c->tag() : std::string()), classifier_(std::move(c)), scaler_(std::move(scaler)), labels_(std::move(labels)) {
    if (!classifier_) throw std::invalid_argument("model without classifier");
    if (!std::is_sorted(labels_.begin(), labels_.end()) ||
        std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
        throw std::invalid_argument("model labels must be sorted and distinct");
}

InductiveModel train(const std::string& tag, const json& params, const LabeledDataset& d) {
    d.validate(true);
    auto labels = d.distinct_labels();
    std::vector<std::size_t> y;
    y.reserve(d.size());
    for (const auto& l : d.labels)
        y.push_back(static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin()));
    Scaler scaler = Scaler::fit(d.patterns);
    auto   c      = make_classifier(tag, params);
    c->fit(scaled_rows(scaler, d), y, labels.size());
    return InductiveModel(std::move(c), std::move(scaler), std::move(labels));
}

InductiveModel train(const AlgorithmParams& algorithm, const LabeledDataset& d) {
    return train(algorithm_tag(algorithm), params_to_json(algorithm), d);
}

Prediction predict(const InductiveModel& m, const FeatureVector& v) {
    auto       x = m.scaler().apply(v);
    Prediction p;
    p.scores = m.classifier().scores(x.values);
    p.label  = m.labels()[argmax_first(p.scores)];
    return p;
}

Prediction predict_among(const InductiveModel& m, const FeatureVector& v, std::span<const std::string> allowed) {
    Prediction  p    = predict(m, v);
    std::size_t best = SIZE_MAX;
    for (std::size_t k = 0; k != m.labels().size(); ++k) {
        if (std::find(allowed.begin(), allowed.end(), m.labels()[k]) == allowed.end()) continue;
        if (best == SIZE_MAX || p.scores[k] > p.scores[best]) best = k;
    }
    if (best == SIZE_MAX) throw ModelError("none of the allowed engines is a model label");
    p.label = m.labels()[best];
    return p;
}

std::string save_model(const InductiveModel& m) {
    const auto& s = m.scaler();
    json j;
    j["format"]           = kModelFormat;
    j["format_version"]   = kModelFormatVersion;
    j["manifest_version"] = m.manifest_version();
    j["algorithm"]        = m.algorithm();
    j["params"]           = m.classifier().params();
    j["labels"]           = m.labels();
    j["scaler"]           = {{"mean", s.mean()}, {"stddev", s.stddev()}, {"constant", s.constant()}};
    j["state"]            = m.classifier().state();
    return j.dump(1) + "\n";
}

InductiveModel load_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    }
    catch (const json::exception& e) {
        throw ModelError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", std::string()) != kModelFormat) throw ModelError("not a measp model file");
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw ModelError("unsupported model format version " + j.at("format_version").dump());
        auto        version = j.at("manifest_version").get<std::string>();
        const auto& sj      = j.at("scaler");
        Scaler      scaler(version, sj.at("mean").get<std::vector<double>>(), sj.at("stddev").get<std::vector<double>>(),
                           sj.at("constant").get<std::vector<bool>>());
        auto c = make_classifier(j.at("algorithm").get<std::string>(), j.at("params"));
        c->load_state(j.at("state"));
        return InductiveModel(std::move(c), std::move(scaler), j.at("labels").get<std::vector<std::string>>());
    }
    catch (const json::exception& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    }
    catch (const std::invalid_argument& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    }
}

void save_model_file(const InductiveModel& m, const std::string& path) {
    auto text = save_model(m);
    write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

InductiveModel load_model_file(const std::string& path) { return load_model(read_file(path)); }

json CvReport::to_json() const {
    return {{"algorithm", algorithm},       {"seed", seed},
            {"repeats", repeats},           {"folds_requested", folds_requested},
            {"folds", folds},               {"fold_accuracy", fold_accuracy},
            {"repeat_accuracy", repeat_accuracy}, {"mean_accuracy", mean_accuracy}};
}

std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least two folds");
    std::map<std::string, std::vector<std::size_t>> byClass;
    for (std::size_t i = 0; i != labels.size(); ++i) byClass[labels[i]].push_back(i);
    std::mt19937_64          rng(seed);
    std::vector<std::size_t> fold(labels.size(), 0);
    std::size_t              next = 0; // continues across classes to balance fold sizes
    for (auto& [label, members] : byClass) {
        shuffle_portable(members, rng);
        for (auto i : members) fold[i] = next++ % folds;
    }
    return fold;
}

CvReport stratified_cv(const AlgorithmParams& algorithm, const LabeledDataset& d, std::size_t folds,
                       std::size_t repeats, std::uint64_t seed) {
    d.validate(true);
    if (repeats < 1) throw std::invalid_argument("need at least one repeat");
    if (d.size() < folds)
        throw std::invalid_argument("dataset of " + std::to_string(d.size()) + " patterns is smaller than " +
                                    std::to_string(folds) + " folds");
    std::map<std::string, std::size_t> hist;
    for (const auto& l : d.labels) ++hist[l];
    std::size_t minClass = SIZE_MAX;
    for (const auto& [l, n] : hist) minClass = std::min(minClass, n);

    CvReport r;
    r.algorithm       = algorithm_tag(algorithm);
    r.seed            = seed;
    r.repeats         = repeats;
    r.folds_requested = folds;
    r.folds           = std::min(folds, minClass);
    if (r.folds < 2)
        throw std::invalid_argument("a class has fewer than two patterns; stratified cross-validation impossible");

    std::size_t totalCorrect = 0;
    for (std::size_t rep = 0; rep != repeats; ++rep) {
        auto assignment = stratified_folds(d.labels, r.folds, splitmix64(seed + rep));
        std::vector<double> acc;
        std::size_t         correct = 0;
        for (std::size_t f = 0; f != r.folds; ++f) {
            std::vector<std::size_t> trainIdx, testIdx;
            for (std::size_t i = 0; i != d.size(); ++i) (assignment[i] == f ? testIdx : trainIdx).push_back(i);
            auto        model = train(algorithm, d.subset(trainIdx));
            std::size_t ok    = 0;
            for (auto i : testIdx) ok += predict(model, d.patterns[i]).label == d.labels[i];
            acc.push_back(static_cast<double>(ok) / static_cast<double>(testIdx.size()));
            correct += ok;
        }
        r.fold_accuracy.push_back(std::move(acc));
        r.repeat_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(d.size()));
        totalCorrect += correct;
    }
    r.mean_accuracy = static_cast<double>(totalCorrect) / static_cast<double>(d.size() * repeats);
    return r;
}

} // namespace measp
