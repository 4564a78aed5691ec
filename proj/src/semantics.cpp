#include <measp/semantics.hpp>

#include <algorithm>
#include <bit>

namespace measp {

Interpretation::Interpretation(std::size_t num_atoms, std::vector<AtomId> true_atoms)
    : num_atoms_(num_atoms), ids_(std::move(true_atoms)), bits_(num_atoms, false) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    for (auto a : ids_) {
        if (a >= num_atoms) throw std::out_of_range("interpretation refers to unknown atom id " + std::to_string(a));
        bits_[a] = true;
    }
}

Interpretation Interpretation::from_names(const GroundProgram& p, std::initializer_list<std::string_view> names) {
    std::vector<AtomId> ids;
    for (auto n : names) {
        auto id = p.atoms().find(n);
        if (id < 0) throw std::out_of_range("unknown atom '" + std::string(n) + "'");
        ids.push_back(static_cast<AtomId>(id));
    }
    return Interpretation(p.num_atoms(), std::move(ids));
}

std::vector<std::string> Interpretation::names(const GroundProgram& p) const {
    std::vector<std::string> out;
    out.reserve(ids_.size());
    for (auto a : ids_) out.push_back(p.atoms().name(a));
    return out;
}

bool body_true(const Rule& r, const Interpretation& i) {
    return std::all_of(r.body.begin(), r.body.end(),
                       [&](const Literal& l) { return i.contains(l.atom) != l.negated; });
}

bool head_true(const Rule& r, const Interpretation& i) {
    return std::any_of(r.head.begin(), r.head.end(), [&](AtomId a) { return i.contains(a); });
}

bool rule_satisfied(const Rule& r, const Interpretation& i) { return head_true(r, i) || !body_true(r, i); }

bool is_model(const GroundProgram& p, const Interpretation& i) {
    return std::all_of(p.rules().begin(), p.rules().end(), [&](const Rule& r) { return rule_satisfied(r, i); });
}

GroundProgram reduct(const GroundProgram& p, const Interpretation& i) {
    std::vector<Rule> out;
    for (const auto& r : p.rules()) {
        bool negTrue = std::none_of(r.body.begin(), r.body.end(),
                                    [&](const Literal& l) { return l.negated && i.contains(l.atom); });
        if (!negTrue) continue;
        Rule pr;
        pr.head = r.head;
        for (const auto& l : r.body)
            if (!l.negated) pr.body.push_back(l);
        out.push_back(std::move(pr));
    }
    return GroundProgram(p.atom_table(), std::move(out));
}

namespace {

using Mask = std::uint64_t;

struct MaskRule {
    Mask head = 0;
    Mask pos  = 0;
    Mask neg  = 0;
};

// Does some proper subset of `cand` satisfy every rule? Rules must already
// be restricted to those whose positive body lies inside `cand`.
bool has_smaller_model(const std::vector<MaskRule>& rules, Mask cand) {
    if (cand == 0) return false;
    for (Mask sub = (cand - 1) & cand;; sub = (sub - 1) & cand) {
        bool ok = true;
        for (const auto& r : rules) {
            if ((r.head & sub) == 0 && (r.pos & ~sub) == 0) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
        if (sub == 0) return false;
    }
}

// Answer-set test on the mask encoding; `scratch` is reused across calls.
bool mask_is_answer_set(const std::vector<MaskRule>& rules, Mask cand, std::vector<MaskRule>& scratch) {
    scratch.clear();
    for (const auto& r : rules) {
        if (r.neg & cand) continue; // deleted by the reduct
        if (r.pos & ~cand) continue; // body false under cand and all its subsets
        if ((r.head & cand) == 0) return false;
        scratch.push_back(r);
    }
    return !has_smaller_model(scratch, cand);
}

} // namespace

bool is_answer_set(const GroundProgram& p, const Interpretation& i) {
    if (i.num_atoms() != p.num_atoms())
        throw std::invalid_argument("interpretation does not match the program's atom table");
    if (!is_model(reduct(p, i), i)) return false;
    // Minimality only concerns atoms of i, so encode them locally.
    const auto& trueAtoms = i.true_atoms();
    if (trueAtoms.size() > 62) throw OracleScaleExceeded("minimality check over more than 62 true atoms");
    std::vector<int> local(p.num_atoms(), -1);
    for (std::size_t k = 0; k != trueAtoms.size(); ++k) local[trueAtoms[k]] = static_cast<int>(k);
    const Mask full = trueAtoms.empty() ? 0 : (Mask(1) << trueAtoms.size()) - 1;

    std::vector<MaskRule> relevant;
    for (const auto& r : p.rules()) {
        MaskRule mr;
        bool     posOutside = false;
        bool     negInside  = false;
        for (auto h : r.head)
            if (local[h] >= 0) mr.head |= Mask(1) << local[h];
        for (const auto& l : r.body) {
            if (l.negated) {
                negInside = negInside || local[l.atom] >= 0;
            }
            else if (local[l.atom] >= 0) {
                mr.pos |= Mask(1) << local[l.atom];
            }
            else {
                posOutside = true;
            }
        }
        if (negInside || posOutside) continue;
        relevant.push_back(mr);
    }
    return !has_smaller_model(relevant, full);
}

std::vector<Interpretation> enumerate_answer_sets(const GroundProgram& p, const EnumerateOptions& opts) {
    const std::size_t n = p.num_atoms();
    if (opts.limit == 0) throw std::invalid_argument("enumeration limit must be at least 1");
    if (n > opts.max_atoms || n > 62)
        throw OracleScaleExceeded("oracle scale exceeded: " + std::to_string(n) + " atoms (max " +
                                  std::to_string(std::min<std::size_t>(opts.max_atoms, 62)) + ")");
    std::vector<MaskRule> rules;
    rules.reserve(p.num_rules());
    for (const auto& r : p.rules()) {
        MaskRule mr;
        for (auto h : r.head) mr.head |= Mask(1) << h;
        for (const auto& l : r.body) (l.negated ? mr.neg : mr.pos) |= Mask(1) << l.atom;
        rules.push_back(mr);
    }

    std::vector<Interpretation> found;
    std::vector<MaskRule>       scratch;
    std::uint64_t               visited = 0;

    // Depth-first over sorted id sequences yields lexicographic order:
    // {}, {0}, {0,1}, {0,1,2}, ..., {0,2}, ..., {1}, ...
    auto test = [&](Mask cand) {
        if ((++visited & 0xfff) == 0 && opts.should_stop && opts.should_stop()) throw OracleInterrupted();
        if (!mask_is_answer_set(rules, cand, scratch)) return;
        std::vector<AtomId> ids;
        for (Mask m = cand; m; m &= m - 1) ids.push_back(static_cast<AtomId>(std::countr_zero(m)));
        found.emplace_back(n, std::move(ids));
    };
    std::vector<AtomId> stack; // next atom to try at each depth
    Mask                cur = 0;
    test(cur);
    if (found.size() >= opts.limit || n == 0) return found;
    stack.push_back(0);
    while (!stack.empty()) {
        AtomId& next = stack.back();
        if (next >= n) {
            stack.pop_back();
            if (!stack.empty()) {
                // undo the atom added at the parent depth
                cur &= ~(Mask(1) << (stack.back() - 1));
            }
            continue;
        }
        AtomId a = next++;
        cur |= Mask(1) << a;
        test(cur);
        if (found.size() >= opts.limit) return found;
        stack.push_back(a + 1);
    }
    return found;
}

std::vector<Interpretation> enumerate_answer_sets(const GroundProgram& p, std::size_t max_atoms, std::size_t limit) {
    EnumerateOptions opts;
    opts.max_atoms = max_atoms;
    opts.limit     = limit;
    return enumerate_answer_sets(p, opts);
}

} // namespace measp
