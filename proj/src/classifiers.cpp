#include <measp/learn.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace measp {

using nlohmann::json;

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0;
    for (std::size_t j = 0; j != a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
    return d;
}

// ---------------------------------------------------------------- nn

class NearestNeighbor final : public Classifier {
public:
    explicit NearestNeighbor(NearestNeighborParams p) : p_(p) {
        if (p_.k < 1) throw std::invalid_argument("nn: k must be positive");
    }

    std::string tag() const override { return "nn"; }

    void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
             std::size_t num_classes) override {
        x_ = x;
        y_ = y;
        classes_ = num_classes;
    }

    std::vector<double> scores(std::span<const double> q) const override {
        struct Cand {
            double      d;
            std::size_t label;
            std::size_t index;
        };
        std::vector<Cand> cands;
        cands.reserve(x_.size());
        for (std::size_t i = 0; i != x_.size(); ++i) cands.push_back({squared_distance(q, x_[i]), y_[i], i});
        const auto k  = std::min(p_.k, cands.size());
        auto       by = [](const Cand& a, const Cand& b) {
            if (a.d != b.d) return a.d < b.d;
            if (a.label != b.label) return a.label < b.label;
            return a.index < b.index;
        };
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(), by);
        std::vector<double> votes(classes_, 0.0);
        for (std::size_t i = 0; i != k; ++i) votes[cands[i].label] += 1.0 / static_cast<double>(k);
        return votes;
    }

    json params() const override { return {{"k", p_.k}}; }
    json state() const override { return {{"x", x_}, {"y", y_}, {"classes", classes_}}; }
    void load_state(const json& s) override {
        x_       = s.at("x").get<std::vector<std::vector<double>>>();
        y_       = s.at("y").get<std::vector<std::size_t>>();
        classes_ = s.at("classes").get<std::size_t>();
        if (x_.size() != y_.size()) throw ModelError("nn: pattern and label counts differ");
    }

private:
    NearestNeighborParams            p_;
    std::vector<std::vector<double>> x_;
    std::vector<std::size_t>         y_;
    std::size_t                      classes_ = 0;
};

// ---------------------------------------------------------------- tree

double entropy(std::span<const double> counts, double total) {
    double h = 0;
    for (double c : counts)
        if (c > 0) h -= (c / total) * std::log2(c / total);
    return h;
}

class DecisionTree final : public Classifier {
public:
    explicit DecisionTree(TreeParams p) : p_(p) {
        if (p_.min_leaf < 1) throw std::invalid_argument("tree: min-leaf must be positive");
        if (!(p_.prune_cf > 0 && p_.prune_cf < 1)) throw std::invalid_argument("tree: prune-cf must be in (0,1)");
    }

    std::string tag() const override { return "tree"; }

    void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
             std::size_t num_classes) override {
        classes_ = num_classes;
        nodes_.clear();
        std::vector<std::size_t> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        grow(x, y, idx);
        if (p_.prune) prune(0);
        compact();
    }

    std::vector<double> scores(std::span<const double> q) const override {
        std::size_t n = 0;
        while (!nodes_[n].leaf) n = q[nodes_[n].feature] <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
        const auto& c     = nodes_[n].counts;
        double      total = std::accumulate(c.begin(), c.end(), 0.0);
        std::vector<double> s(classes_, 0.0);
        for (std::size_t k = 0; k != classes_; ++k) s[k] = total > 0 ? c[k] / total : 0.0;
        return s;
    }

    [[nodiscard]] std::size_t depth() const { return depth_of(0); }

    json params() const override {
        return {{"min_leaf", p_.min_leaf}, {"prune_cf", p_.prune_cf}, {"prune", p_.prune}};
    }

    json state() const override {
        json nodes = json::array();
        for (const auto& n : nodes_) {
            if (n.leaf) nodes.push_back({{"counts", n.counts}});
            else
                nodes.push_back({{"counts", n.counts},
                                 {"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right}});
        }
        return {{"classes", classes_}, {"nodes", nodes}};
    }

    void load_state(const json& s) override {
        classes_ = s.at("classes").get<std::size_t>();
        nodes_.clear();
        for (const auto& j : s.at("nodes")) {
            Node n;
            n.counts = j.at("counts").get<std::vector<double>>();
            if (n.counts.size() != classes_) throw ModelError("tree: class count mismatch in node");
            n.leaf = !j.contains("feature");
            if (!n.leaf) {
                n.feature   = j.at("feature").get<std::size_t>();
                n.threshold = j.at("threshold").get<double>();
                n.left      = j.at("left").get<std::size_t>();
                n.right     = j.at("right").get<std::size_t>();
            }
            nodes_.push_back(std::move(n));
        }
        if (nodes_.empty()) throw ModelError("tree: no nodes");
        for (const auto& n : nodes_)
            if (!n.leaf && (n.left >= nodes_.size() || n.right >= nodes_.size()))
                throw ModelError("tree: dangling child index");
    }

private:
    struct Node {
        bool                leaf = true;
        std::size_t         feature = 0;
        double              threshold = 0;
        std::size_t         left = 0, right = 0;
        std::vector<double> counts;
    };

    struct Split {
        std::size_t feature   = 0;
        double      threshold = 0;
        double      gain      = 0;
        double      ratio     = 0;
    };

    std::vector<double> class_counts(const std::vector<std::size_t>& y, const std::vector<std::size_t>& idx) const {
        std::vector<double> c(classes_, 0.0);
        for (auto i : idx) c[y[i]] += 1;
        return c;
    }

    // Best threshold of one feature by information gain; nullopt if no valid cut.
    std::optional<Split> best_cut(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                                  const std::vector<std::size_t>& idx, std::size_t f, double baseEntropy) const {
        std::vector<std::size_t> order = idx;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (x[a][f] != x[b][f]) return x[a][f] < x[b][f];
            return a < b;
        });
        const double        n = static_cast<double>(order.size());
        std::vector<double> left(classes_, 0.0), right(classes_, 0.0);
        for (auto i : order) right[y[i]] += 1;
        std::optional<Split> best;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            left[y[order[k]]] += 1;
            right[y[order[k]]] -= 1;
            const double lo = x[order[k]][f], hi = x[order[k + 1]][f];
            if (!(lo < hi)) continue;
            const double nl = static_cast<double>(k + 1), nr = n - nl;
            if (nl < static_cast<double>(p_.min_leaf) || nr < static_cast<double>(p_.min_leaf)) continue;
            double gain  = baseEntropy - (nl / n) * entropy(left, nl) - (nr / n) * entropy(right, nr);
            if (best && !(gain > best->gain + 1e-12)) continue;
            double info  = -(nl / n) * std::log2(nl / n) - (nr / n) * std::log2(nr / n);
            double cut   = lo + (hi - lo) / 2;
            if (!(cut < hi)) cut = lo; // adjacent doubles
            best = Split{f, cut, gain, info > 0 ? gain / info : 0.0};
        }
        return best;
    }

    std::size_t grow(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                     const std::vector<std::size_t>& idx) {
        const std::size_t id = nodes_.size();
        nodes_.push_back(Node{});
        nodes_[id].counts = class_counts(y, idx);
        const auto& counts = nodes_[id].counts;
        const double n = static_cast<double>(idx.size());
        bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
        if (pure || idx.size() < 2 * p_.min_leaf) return id;

        const double       base = entropy(counts, n);
        std::vector<Split> cuts;
        const std::size_t  dim = x[idx.front()].size();
        for (std::size_t f = 0; f != dim; ++f)
            if (auto s = best_cut(x, y, idx, f, base)) cuts.push_back(*s);
        if (cuts.empty()) return id;

        // Gain ratio among cuts with at least average gain. When no cut has
        // positive gain (e.g. XOR-like data) the first valid cut is taken.
        double avg = 0;
        for (const auto& c : cuts) avg += c.gain;
        avg /= static_cast<double>(cuts.size());
        const Split* chosen = nullptr;
        for (const auto& c : cuts) {
            if (c.gain <= 1e-12 || c.gain + 1e-12 < avg) continue;
            if (!chosen || c.ratio > chosen->ratio + 1e-12) chosen = &c;
        }
        if (!chosen) chosen = &cuts.front();
        const Split split = *chosen;

        std::vector<std::size_t> li, ri;
        for (auto i : idx) (x[i][split.feature] <= split.threshold ? li : ri).push_back(i);
        std::size_t l = grow(x, y, li);
        std::size_t r = grow(x, y, ri);
        nodes_[id].leaf      = false;
        nodes_[id].feature   = split.feature;
        nodes_[id].threshold = split.threshold;
        nodes_[id].left      = l;
        nodes_[id].right     = r;
        return id;
    }

    double leaf_estimate(const Node& n) const {
        double total = std::accumulate(n.counts.begin(), n.counts.end(), 0.0);
        double err   = total - *std::max_element(n.counts.begin(), n.counts.end());
        return err + detail::pessimistic_extra_errors(total, err, p_.prune_cf);
    }

    // Returns the estimated errors of the (possibly pruned) subtree.
    double prune(std::size_t id) {
        if (nodes_[id].leaf) return leaf_estimate(nodes_[id]);
        double sub  = prune(nodes_[id].left) + prune(nodes_[id].right);
        double leaf = leaf_estimate(nodes_[id]);
        if (leaf <= sub + 0.1) {
            nodes_[id].leaf = true;
            return leaf;
        }
        return sub;
    }

    // Drop nodes orphaned by pruning; keeps preorder numbering.
    void compact() {
        std::vector<Node> out;
        std::function<std::size_t(std::size_t)> copy = [&](std::size_t id) -> std::size_t {
            std::size_t nid = out.size();
            out.push_back(nodes_[id]);
            if (!nodes_[id].leaf) {
                std::size_t l = copy(nodes_[id].left);
                std::size_t r = copy(nodes_[id].right);
                out[nid].left  = l;
                out[nid].right = r;
            }
            else {
                out[nid].left = out[nid].right = 0;
                out[nid].feature                = 0;
                out[nid].threshold              = 0;
            }
            return nid;
        };
        copy(0);
        nodes_ = std::move(out);
    }

    std::size_t depth_of(std::size_t id) const {
        if (nodes_[id].leaf) return 0;
        return 1 + std::max(depth_of(nodes_[id].left), depth_of(nodes_[id].right));
    }

    TreeParams        p_;
    std::size_t       classes_ = 0;
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------- mlr

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

double dot_bias(std::span<const double> w, std::span<const double> x) {
    double z = w.back();
    for (std::size_t j = 0; j != x.size(); ++j) z += w[j] * x[j];
    return z;
}

class LogisticRegression final : public Classifier {
public:
    explicit LogisticRegression(LogisticParams p) : p_(p) {
        if (!(p_.ridge >= 0)) throw std::invalid_argument("mlr: ridge must be non-negative");
        if (p_.epochs < 1) throw std::invalid_argument("mlr: epochs must be positive");
        if (!(p_.step > 0)) throw std::invalid_argument("mlr: step must be positive");
    }

    std::string tag() const override { return "mlr"; }

    void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
             std::size_t num_classes) override {
        const std::size_t dim = x.empty() ? 0 : x.front().size();
        weights_.assign(num_classes, std::vector<double>(dim + 1, 0.0));
        std::vector<double> target(x.size());
        for (std::size_t c = 0; c != num_classes; ++c) {
            for (std::size_t i = 0; i != x.size(); ++i) target[i] = y[i] == c ? 1.0 : -1.0;
            descend(weights_[c], x, target);
        }
    }

    std::vector<double> scores(std::span<const double> q) const override {
        std::vector<double> s;
        s.reserve(weights_.size());
        for (const auto& w : weights_) s.push_back(sigmoid(dot_bias(w, q)));
        return s;
    }

    json params() const override {
        return {{"ridge", p_.ridge}, {"epochs", p_.epochs}, {"step", p_.step}, {"tolerance", p_.tolerance}};
    }
    json state() const override { return {{"weights", weights_}}; }
    void load_state(const json& s) override {
        weights_ = s.at("weights").get<std::vector<std::vector<double>>>();
        for (const auto& w : weights_)
            if (w.size() != weights_.front().size()) throw ModelError("mlr: ragged weight matrix");
    }

private:
    void descend(std::vector<double>& w, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& target) const {
        double step = p_.step;
        double loss = detail::logistic_loss(w, x, target, p_.ridge);
        for (std::size_t epoch = 0; epoch != p_.epochs; ++epoch) {
            auto   g     = detail::logistic_gradient(w, x, target, p_.ridge);
            double gmax  = 0, gsq = 0;
            for (double v : g) {
                gmax = std::max(gmax, std::abs(v));
                gsq += v * v;
            }
            if (gmax < p_.tolerance) return;
            // Armijo backtracking
            std::vector<double> trial(w.size());
            for (;;) {
                for (std::size_t j = 0; j != w.size(); ++j) trial[j] = w[j] - step * g[j];
                double next = detail::logistic_loss(trial, x, target, p_.ridge);
                if (next <= loss - 0.5 * step * gsq) {
                    w    = trial;
                    loss = next;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
                if (step < 1e-20) return;
            }
        }
    }

    LogisticParams                   p_;
    std::vector<std::vector<double>> weights_;
};

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::unordered_map<std::string, ClassifierFactory>& registry() {
    static std::unordered_map<std::string, ClassifierFactory> r = {
        {"nn", [](const json& p) { return make_classifier(params_from_json("nn", p)); }},
        {"tree", [](const json& p) { return make_classifier(params_from_json("tree", p)); }},
        {"mlr", [](const json& p) { return make_classifier(params_from_json("mlr", p)); }},
    };
    return r;
}

} // namespace

namespace detail {

double logistic_loss(std::span<const double> w, const std::vector<std::vector<double>>& x,
                     std::span<const double> target, double ridge) {
    double loss = 0;
    for (std::size_t i = 0; i != x.size(); ++i) loss += softplus_neg(target[i] * dot_bias(w, x[i]));
    loss /= static_cast<double>(std::max<std::size_t>(x.size(), 1));
    double reg = 0;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) reg += w[j] * w[j];
    return loss + 0.5 * ridge * reg;
}

std::vector<double> logistic_gradient(std::span<const double> w, const std::vector<std::vector<double>>& x,
                                      std::span<const double> target, double ridge) {
    std::vector<double> g(w.size(), 0.0);
    for (std::size_t i = 0; i != x.size(); ++i) {
        double coef = -target[i] * sigmoid(-target[i] * dot_bias(w, x[i]));
        for (std::size_t j = 0; j != x[i].size(); ++j) g[j] += coef * x[i][j];
        g.back() += coef;
    }
    const double n = static_cast<double>(std::max<std::size_t>(x.size(), 1));
    for (auto& v : g) v /= n;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) g[j] += ridge * w[j];
    return g;
}

double pessimistic_extra_errors(double n, double e, double cf) {
    static constexpr double val[] = {0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00};
    static constexpr double dev[] = {4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00};
    if (n <= 0) return 0;
    std::size_t i = 0;
    while (i + 1 < std::size(val) && cf > val[i]) ++i;
    double z = i == 0 ? dev[0] : dev[i - 1] + (dev[i] - dev[i - 1]) * (cf - val[i - 1]) / (val[i] - val[i - 1]);
    double coeff = z * z;
    if (e < 1e-6) return n * (1 - std::exp(std::log(cf) / n));
    if (e < 0.9999) {
        double v = n * (1 - std::exp(std::log(cf) / n));
        return v + e * (pessimistic_extra_errors(n, 1.0, cf) - v);
    }
    if (e + 0.5 >= n) return 0.67 * (n - e);
    double pr = (e + 0.5 + coeff / 2 + std::sqrt(coeff * ((e + 0.5) * (1 - (e + 0.5) / n) + coeff / 4))) / (n + coeff);
    return n * pr - e;
}

} // namespace detail

std::string algorithm_tag(const AlgorithmParams& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NearestNeighborParams>) return "nn";
            else if constexpr (std::is_same_v<T, TreeParams>) return "tree";
            else return "mlr";
        },
        p);
}

json params_to_json(const AlgorithmParams& p) { return make_classifier(p)->params(); }

AlgorithmParams params_from_json(const std::string& tag, const json& j) {
    if (tag == "nn") {
        NearestNeighborParams p;
        p.k = j.value("k", p.k);
        return p;
    }
    if (tag == "tree") {
        TreeParams p;
        p.min_leaf = j.value("min_leaf", p.min_leaf);
        p.prune_cf = j.value("prune_cf", p.prune_cf);
        p.prune    = j.value("prune", p.prune);
        return p;
    }
    if (tag == "mlr") {
        LogisticParams p;
        p.ridge     = j.value("ridge", p.ridge);
        p.epochs    = j.value("epochs", p.epochs);
        p.step      = j.value("step", p.step);
        p.tolerance = j.value("tolerance", p.tolerance);
        return p;
    }
    throw ModelError("unknown algorithm '" + tag + "'");
}

std::unique_ptr<Classifier> make_classifier(const AlgorithmParams& p) {
    return std::visit(
        [](const auto& v) -> std::unique_ptr<Classifier> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NearestNeighborParams>) return std::make_unique<NearestNeighbor>(v);
            else if constexpr (std::is_same_v<T, TreeParams>) return std::make_unique<DecisionTree>(v);
            else return std::make_unique<LogisticRegression>(v);
        },
        p);
}

std::unique_ptr<Classifier> make_classifier(const std::string& tag, const json& params) {
    ClassifierFactory f;
    {
        std::lock_guard lock(registry_mutex());
        auto it = registry().find(tag);
        if (it == registry().end()) throw ModelError("unknown algorithm '" + tag + "'");
        f = it->second;
    }
    return f(params);
}

void register_classifier(const std::string& tag, ClassifierFactory factory) {
    std::lock_guard lock(registry_mutex());
    registry()[tag] = std::move(factory);
}

std::size_t tree_depth(const Classifier& c) {
    auto* t = dynamic_cast<const DecisionTree*>(&c);
    if (!t) throw std::invalid_argument("not a tree model");
    return t->depth();
}

} // namespace measp
