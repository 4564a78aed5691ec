// Cheap syntactic features of ground programs.
//
// Extraction is one linear pass over the rules collecting a handful of
// base counts (BaseQuantities); every feature is then a manifest formula
// over those counts, so the feature set can be versioned as data.
#pragma once

#include <measp/formula.hpp>
#include <measp/ground_program.hpp>

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace measp {

struct BaseQuantities {
    double rules         = 0; // r
    double atoms         = 0; // a
    double unary         = 0; // exactly one body literal
    double binary        = 0; // exactly two body literals
    double ternary       = 0; // exactly three body literals
    double horn          = 0; // |H| <= 1 and no default negation
    double facts         = 0;
    double disj_facts    = 0;
    double normal        = 0; // |H| == 1
    double constraints   = 0; // |H| == 0

    static constexpr std::size_t kCount = 10;
    /// Names as used in manifest formulas.
    static constexpr std::array<std::string_view, kCount> kNames = {
        "r", "a", "n_unary", "n_binary", "n_ternary", "n_horn", "n_facts", "n_disj_facts", "n_normal", "n_constraints"};

    [[nodiscard]] std::array<double, kCount> values() const {
        return {rules, atoms, unary, binary, ternary, horn, facts, disj_facts, normal, constraints};
    }
    friend bool operator==(const BaseQuantities&, const BaseQuantities&) = default;
};

/// Observer invoked once per visited rule; used to verify the single-pass contract.
using RuleObserver = std::function<void(const Rule&)>;

[[nodiscard]] BaseQuantities extract_base_quantities(const GroundProgram& p, const RuleObserver& observe = {});

enum class FeatureKind { Count, Ratio, Fraction };

class FeatureManifest {
public:
    struct Entry {
        std::string name;
        FeatureKind kind = FeatureKind::Ratio;
        Formula     formula;
    };

    static constexpr std::size_t kCanonicalSize = 52;

    /// The shipped 52-feature manifest.
    static const FeatureManifest& canonical();
    static FeatureManifest parse(std::string_view text);
    static FeatureManifest load(const std::string& path);

    [[nodiscard]] const std::string& version() const { return version_; }
    [[nodiscard]] std::span<const Entry> entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::vector<std::string> names() const;
    /// Index of a feature by name, or -1.
    [[nodiscard]] std::ptrdiff_t index_of(std::string_view name) const;
    /// Resolver over base quantities followed by all features (for conditions).
    [[nodiscard]] SymbolResolver resolver() const;

private:
    std::string        version_;
    std::vector<Entry> entries_;
};

struct FeatureVector {
    std::string         manifest_version;
    std::vector<double> values;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

[[nodiscard]] FeatureVector compute_features(const BaseQuantities& q, const FeatureManifest& m);
[[nodiscard]] FeatureVector extract_features(const GroundProgram& p,
                                             const FeatureManifest& m = FeatureManifest::canonical());
/// Base quantities followed by feature values, matching FeatureManifest::resolver().
[[nodiscard]] std::vector<double> condition_slots(const BaseQuantities& q, const FeatureVector& v);

struct FiveNumberSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    friend bool operator==(const FiveNumberSummary&, const FiveNumberSummary&) = default;
};

/// Quartiles by linear interpolation at h = (n-1)p on the sorted sample.
[[nodiscard]] FiveNumberSummary five_number_summary(std::span<const double> xs);

class VersionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-feature z-scoring with population standard deviation.
class Scaler {
public:
    Scaler() = default;
    Scaler(std::string version, std::vector<double> mean, std::vector<double> stddev, std::vector<bool> constant);

    static Scaler fit(std::span<const FeatureVector> dataset);

    [[nodiscard]] FeatureVector apply(const FeatureVector& v) const;
    [[nodiscard]] std::vector<double> apply(std::span<const double> values) const;

    [[nodiscard]] const std::string& manifest_version() const { return version_; }
    [[nodiscard]] const std::vector<double>& mean() const { return mean_; }
    [[nodiscard]] const std::vector<double>& stddev() const { return stddev_; }
    [[nodiscard]] const std::vector<bool>& constant() const { return constant_; }

    friend bool operator==(const Scaler&, const Scaler&) = default;

private:
    std::string         version_;
    std::vector<double> mean_;
    std::vector<double> stddev_;   // > 0; 1 for constant features
    std::vector<bool>   constant_;
};

/// Features CSV: header `instance,<manifest names...>`.
struct FeatureTable {
    std::string                manifest_version;
    std::vector<std::string>   names;
    std::vector<std::string>   instances;
    std::vector<FeatureVector> rows;
};

void         write_feature_csv(std::ostream& out, const FeatureManifest& m, std::span<const std::string> instances,
                               std::span<const FeatureVector> rows);
FeatureTable read_feature_csv(std::istream& in, const FeatureManifest& m);

} // namespace measp
