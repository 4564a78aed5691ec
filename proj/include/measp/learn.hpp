// Engine-selection models: training sets from performance data,
// multinomial classifiers, stratified repeated cross-validation, and
// model persistence.
#pragma once

#include <measp/features.hpp>
#include <measp/selection.hpp>

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace measp {

struct LabeledDataset {
    std::string                manifest_version;
    std::vector<FeatureVector> patterns;
    std::vector<std::string>   labels;
    std::vector<std::string>   instances; // provenance, parallel to patterns

    [[nodiscard]] std::size_t size() const { return patterns.size(); }
    /// Sorted, distinct.
    [[nodiscard]] std::vector<std::string> distinct_labels() const;
    /// Throws on length or version mismatches; training also needs two labels.
    void validate(bool for_training) const;
    [[nodiscard]] LabeledDataset subset(std::span<const std::size_t> idx) const;
};

/// Uniquely solved instances of `m`, labelled with their solver. When
/// `families` is given, only instances of those problem families are used.
/// Instances without a feature vector are skipped.
[[nodiscard]] LabeledDataset build_training_set(const PerformanceMatrix& m,
                                                const std::map<std::string, FeatureVector>& features,
                                                const std::optional<std::vector<std::string>>& families = std::nullopt);

struct NearestNeighborParams {
    std::size_t k = 1;
};

struct TreeParams {
    std::size_t min_leaf = 2;
    double      prune_cf = 0.25;
    bool        prune    = true;
};

struct LogisticParams {
    double      ridge     = 1e-8;
    std::size_t epochs    = 1000;
    double      step      = 1.0; // initial step; backtracking shrinks it
    double      tolerance = 1e-6;
};

using AlgorithmParams = std::variant<NearestNeighborParams, TreeParams, LogisticParams>;

[[nodiscard]] std::string     algorithm_tag(const AlgorithmParams& p);
[[nodiscard]] nlohmann::json  params_to_json(const AlgorithmParams& p);
[[nodiscard]] AlgorithmParams params_from_json(const std::string& tag, const nlohmann::json& j);

/// A trainable multinomial classifier over z-scored feature rows.
/// Class indices refer to the model's alphabetically sorted label list;
/// score ties are resolved towards the lowest index.
class Classifier {
public:
    virtual ~Classifier() = default;
    [[nodiscard]] virtual std::string tag() const = 0;
    virtual void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                     std::size_t num_classes) = 0;
    /// One score per class; larger is better.
    [[nodiscard]] virtual std::vector<double> scores(std::span<const double> x) const = 0;
    [[nodiscard]] virtual nlohmann::json params() const = 0;
    [[nodiscard]] virtual nlohmann::json state() const = 0;
    virtual void load_state(const nlohmann::json& state) = 0;
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const nlohmann::json& params)>;

/// Makes an additional classifier available to train() and load_model() under `tag`.
void register_classifier(const std::string& tag, ClassifierFactory factory);
[[nodiscard]] std::unique_ptr<Classifier> make_classifier(const std::string& tag, const nlohmann::json& params);
[[nodiscard]] std::unique_ptr<Classifier> make_classifier(const AlgorithmParams& p);
/// Depth of a trained tree classifier (0 for a single leaf).
[[nodiscard]] std::size_t tree_depth(const Classifier& c);

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Prediction {
    std::string         label;
    std::vector<double> scores; // parallel to InductiveModel::labels()
};

class InductiveModel {
public:
    InductiveModel(std::shared_ptr<const Classifier> c, Scaler scaler, std::vector<std::string> labels);

    [[nodiscard]] const std::string& algorithm() const { return tag_; }
    [[nodiscard]] const Classifier& classifier() const { return *classifier_; }
    [[nodiscard]] const Scaler& scaler() const { return scaler_; }
    [[nodiscard]] const std::string& manifest_version() const { return scaler_.manifest_version(); }
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }

private:
    std::string                       tag_;
    std::shared_ptr<const Classifier> classifier_;
    Scaler                            scaler_;
    std::vector<std::string>          labels_;
};

[[nodiscard]] InductiveModel train(const AlgorithmParams& algorithm, const LabeledDataset& d);
[[nodiscard]] InductiveModel train(const std::string& tag, const nlohmann::json& params, const LabeledDataset& d);

[[nodiscard]] Prediction predict(const InductiveModel& m, const FeatureVector& v);
/// Best label among `allowed` (which must intersect the model's labels).
[[nodiscard]] Prediction predict_among(const InductiveModel& m, const FeatureVector& v,
                                       std::span<const std::string> allowed);

[[nodiscard]] std::string    save_model(const InductiveModel& m);
[[nodiscard]] InductiveModel load_model(std::string_view text);
void                         save_model_file(const InductiveModel& m, const std::string& path);
[[nodiscard]] InductiveModel load_model_file(const std::string& path);

struct CvReport {
    std::string                      algorithm;
    std::uint64_t                    seed              = 0;
    std::size_t                      repeats           = 0;
    std::size_t                      folds_requested   = 0;
    std::size_t                      folds             = 0; // reduced when a class is smaller
    std::vector<std::vector<double>> fold_accuracy;         // [repeat][fold]
    std::vector<double>              repeat_accuracy;       // correct / patterns per repeat
    double                           mean_accuracy = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
    friend bool operator==(const CvReport&, const CvReport&) = default;
};

/// Fold assignment for one repeat: fold index per pattern.
[[nodiscard]] std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds,
                                                        std::uint64_t seed);

[[nodiscard]] CvReport stratified_cv(const AlgorithmParams& algorithm, const LabeledDataset& d,
                                     std::size_t folds = 10, std::size_t repeats = 10, std::uint64_t seed = 1);

namespace detail {

/// Mean logistic loss with ridge penalty (bias, the last weight, unpenalized).
/// Rows of `x` exclude the bias column; targets are +1/-1.
double logistic_loss(std::span<const double> w, const std::vector<std::vector<double>>& x,
                     std::span<const double> target, double ridge);
std::vector<double> logistic_gradient(std::span<const double> w, const std::vector<std::vector<double>>& x,
                                      std::span<const double> target, double ridge);

/// Quinlan's upper-bound error increment for a leaf with n cases and e errors.
double pessimistic_extra_errors(double n, double e, double cf);

} // namespace detail

} // namespace measp
