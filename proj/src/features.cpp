#include <measp/features.hpp>
#include <measp/io.hpp>

#include "canonical_manifest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace measp {

BaseQuantities extract_base_quantities(const GroundProgram& p, const RuleObserver& observe) {
    BaseQuantities q;
    // The atom table of a parsed program covers exactly the occurring atoms;
    // derived programs may carry unused entries, so count occurrences.
    std::vector<bool> seen(p.num_atoms(), false);
    std::size_t       distinct = 0;
    auto              mark     = [&](AtomId a) {
        if (!seen[a]) {
            seen[a] = true;
            ++distinct;
        }
    };
    for (const auto& r : p.rules()) {
        if (observe) observe(r);
        q.rules += 1;
        for (auto h : r.head) mark(h);
        for (const auto& l : r.body) mark(l.atom);
        switch (r.body.size()) {
            case 1: q.unary += 1; break;
            case 2: q.binary += 1; break;
            case 3: q.ternary += 1; break;
            default: break;
        }
        if (r.is_horn()) q.horn += 1;
        if (r.is_fact()) q.facts += 1;
        if (r.is_disjunctive_fact()) q.disj_facts += 1;
        if (r.is_normal()) q.normal += 1;
        if (r.is_constraint()) q.constraints += 1;
    }
    q.atoms = static_cast<double>(distinct);
    return q;
}

namespace {

FeatureKind parse_kind(std::string_view s) {
    if (s == "count") return FeatureKind::Count;
    if (s == "ratio") return FeatureKind::Ratio;
    if (s == "fraction") return FeatureKind::Fraction;
    throw FormulaError("unknown feature kind '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<std::size_t> base_slot(std::string_view name) {
    for (std::size_t i = 0; i != BaseQuantities::kCount; ++i)
        if (BaseQuantities::kNames[i] == name) return i;
    return std::nullopt;
}

} // namespace

FeatureManifest FeatureManifest::parse(std::string_view text) {
    FeatureManifest m;
    std::unordered_set<std::string> names;
    std::size_t lineNo = 0;
    std::size_t start  = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineNo;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto where = [&] { return "manifest line " + std::to_string(lineNo) + ": "; };
        if (line.starts_with("version:")) {
            if (!m.version_.empty()) throw FormulaError(where() + "duplicate version header");
            m.version_ = std::string(trim(line.substr(8)));
            if (m.version_.empty()) throw FormulaError(where() + "empty version");
            continue;
        }
        if (!line.starts_with("feature ")) throw FormulaError(where() + "expected 'feature' or 'version:'");
        if (m.version_.empty()) throw FormulaError(where() + "version header must precede features");
        line.remove_prefix(8);
        auto colon = line.find(':');
        auto eq    = line.find('=');
        if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon)
            throw FormulaError(where() + "expected '<name> : <kind> = <expression>'");
        std::string name(trim(line.substr(0, colon)));
        if (name.empty() || name.find_first_of(" \t,") != std::string::npos)
            throw FormulaError(where() + "invalid feature name");
        if (!names.insert(name).second) throw FormulaError(where() + "duplicate feature '" + name + "'");
        Entry e;
        e.name = name;
        e.kind = parse_kind(trim(line.substr(colon + 1, eq - colon - 1)));
        // Earlier features shadow base quantities of the same name.
        const auto& entries = m.entries_;
        SymbolResolver resolve = [&entries](std::string_view n) -> std::optional<std::size_t> {
            for (std::size_t i = entries.size(); i-- > 0;)
                if (entries[i].name == n) return BaseQuantities::kCount + i;
            return base_slot(n);
        };
        e.formula = Formula::compile(trim(line.substr(eq + 1)), resolve);
        m.entries_.push_back(std::move(e));
    }
    if (m.version_.empty()) throw FormulaError("manifest has no version header");
    if (m.entries_.empty()) throw FormulaError("manifest defines no features");
    return m;
}

FeatureManifest FeatureManifest::load(const std::string& path) { return parse(read_file(path)); }

const FeatureManifest& FeatureManifest::canonical() {
    static const FeatureManifest m = [] {
        auto parsed = parse(detail::kCanonicalManifestText);
        if (parsed.size() != kCanonicalSize) throw FormulaError("canonical manifest must define 52 features");
        return parsed;
    }();
    return m;
}

std::vector<std::string> FeatureManifest::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

std::ptrdiff_t FeatureManifest::index_of(std::string_view name) const {
    for (std::size_t i = 0; i != entries_.size(); ++i)
        if (entries_[i].name == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

SymbolResolver FeatureManifest::resolver() const {
    auto names = this->names();
    return [names = std::move(names)](std::string_view n) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i != names.size(); ++i)
            if (names[i] == n) return BaseQuantities::kCount + i;
        return base_slot(n);
    };
}

FeatureVector compute_features(const BaseQuantities& q, const FeatureManifest& m) {
    std::vector<double> slots(BaseQuantities::kCount + m.size());
    auto base = q.values();
    std::copy(base.begin(), base.end(), slots.begin());
    FeatureVector v;
    v.manifest_version = m.version();
    v.values.reserve(m.size());
    for (std::size_t i = 0; i != m.size(); ++i) {
        double x = m.entries()[i].formula.evaluate(slots);
        if (!std::isfinite(x)) x = 0.0;
        slots[BaseQuantities::kCount + i] = x;
        v.values.push_back(x);
    }
    return v;
}

FeatureVector extract_features(const GroundProgram& p, const FeatureManifest& m) {
    return compute_features(extract_base_quantities(p), m);
}

std::vector<double> condition_slots(const BaseQuantities& q, const FeatureVector& v) {
    auto base = q.values();
    std::vector<double> slots(base.begin(), base.end());
    slots.insert(slots.end(), v.values.begin(), v.values.end());
    return slots;
}

FiveNumberSummary five_number_summary(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("five-number summary of an empty sample");
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    auto at = [&](double p) {
        double      h  = static_cast<double>(s.size() - 1) * p;
        auto        lo = static_cast<std::size_t>(std::floor(h));
        if (lo + 1 >= s.size()) return s.back();
        return s[lo] + (h - static_cast<double>(lo)) * (s[lo + 1] - s[lo]);
    };
    return {s.front(), at(0.25), at(0.5), at(0.75), s.back()};
}

Scaler::Scaler(std::string version, std::vector<double> mean, std::vector<double> stddev, std::vector<bool> constant)
    : version_(std::move(version)), mean_(std::move(mean)), stddev_(std::move(stddev)), constant_(std::move(constant)) {
    if (mean_.size() != stddev_.size() || mean_.size() != constant_.size())
        throw std::invalid_argument("scaler parameter lengths differ");
    for (double sd : stddev_)
        if (!(sd > 0)) throw std::invalid_argument("scaler standard deviations must be positive");
}

Scaler Scaler::fit(std::span<const FeatureVector> dataset) {
    if (dataset.empty()) throw std::invalid_argument("cannot fit a scaler on an empty dataset");
    const auto& version = dataset.front().manifest_version;
    const auto  dim     = dataset.front().values.size();
    std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
    std::vector<bool>   constant(dim, false);
    for (const auto& v : dataset) {
        if (v.manifest_version != version)
            throw VersionMismatch("feature vectors from manifests '" + version + "' and '" + v.manifest_version + "'");
        if (v.values.size() != dim) throw std::invalid_argument("feature vectors of different length");
        for (std::size_t j = 0; j != dim; ++j) mean[j] += v.values[j];
    }
    const double n = static_cast<double>(dataset.size());
    for (auto& m : mean) m /= n;
    for (const auto& v : dataset)
        for (std::size_t j = 0; j != dim; ++j) sd[j] += (v.values[j] - mean[j]) * (v.values[j] - mean[j]);
    for (std::size_t j = 0; j != dim; ++j) {
        sd[j] = std::sqrt(sd[j] / n);
        // relative threshold keeps round-off in the mean from looking like spread
        if (!(sd[j] > 1e-12 * std::max(1.0, std::abs(mean[j])))) {
            sd[j]       = 1.0;
            constant[j] = true;
        }
    }
    return Scaler(version, std::move(mean), std::move(sd), std::move(constant));
}

std::vector<double> Scaler::apply(std::span<const double> values) const {
    if (values.size() != mean_.size()) throw std::invalid_argument("feature vector length does not match scaler");
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j != values.size(); ++j)
        out[j] = constant_[j] ? 0.0 : (values[j] - mean_[j]) / stddev_[j];
    return out;
}

FeatureVector Scaler::apply(const FeatureVector& v) const {
    if (v.manifest_version != version_)
        throw VersionMismatch("scaler fitted on '" + version_ + "', vector from '" + v.manifest_version + "'");
    return {v.manifest_version, apply(v.values)};
}

void write_feature_csv(std::ostream& out, const FeatureManifest& m, std::span<const std::string> instances,
                       std::span<const FeatureVector> rows) {
    if (instances.size() != rows.size()) throw std::invalid_argument("instance and feature counts differ");
    out << "instance";
    for (const auto& e : m.entries()) out << ',' << e.name;
    out << '\n';
    for (std::size_t i = 0; i != rows.size(); ++i) {
        check_csv_field(instances[i]);
        if (rows[i].manifest_version != m.version())
            throw VersionMismatch("row for '" + instances[i] + "' uses manifest '" + rows[i].manifest_version + "'");
        out << instances[i];
        for (double x : rows[i].values) out << ',' << format_double(x);
        out << '\n';
    }
}

FeatureTable read_feature_csv(std::istream& in, const FeatureManifest& m) {
    FeatureTable t;
    t.manifest_version = m.version();
    std::string line;
    if (!read_line(in, line)) throw std::runtime_error("features CSV is empty");
    auto header = split_csv_line(line);
    if (header.empty() || header.front() != "instance") throw std::runtime_error("features CSV must start with 'instance'");
    t.names.assign(header.begin() + 1, header.end());
    if (t.names != m.names())
        throw VersionMismatch("features CSV columns do not match manifest '" + m.version() + "'");
    std::size_t row = 1;
    while (read_line(in, line)) {
        ++row;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("features CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(header.size()));
        FeatureVector v{m.version(), {}};
        v.values.reserve(m.size());
        for (std::size_t j = 1; j != cells.size(); ++j) v.values.push_back(parse_double(cells[j]));
        t.instances.push_back(cells.front());
        t.rows.push_back(std::move(v));
    }
    return t;
}

} // namespace measp
