#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <boost/functional/hash.hpp>

#include "core.hpp"
#include "lps.hpp"

namespace tvr::decide {

/// Pumps an unbounded amount of counter: `prefix` leads from the initial
/// configuration to an anchor, and `pump` returns to the anchor's state with
/// counters grown by a nonzero, nonnegative delta. Pumps containing a test
/// must keep counter 1 fixed.
struct UnboundedWitness {
    Trace prefix;
    Trace pump;
};

/// prefix reaches c, cycle returns to exactly c.
struct Lasso {
    Trace prefix;
    Trace cycle;
};

enum class Outcome {
    yes,
    no,
    unknown,
};

inline std::string to_string(Outcome o)
{
    switch (o) {
    case Outcome::yes:
        return "yes";
    case Outcome::no:
        return "no";
    case Outcome::unknown:
        break;
    }
    return "unknown";
}

struct Stats {
    std::size_t explored = 0;
    std::size_t peak_frontier = 0;

    void absorb(const Stats& other)
    {
        explored += other.explored;
        peak_frontier = std::max(peak_frontier, other.peak_frontier);
    }
};

/// The limits an exploration ran under.
struct Caps {
    Int norm = 0;
    Int steps = 0;
    /// Depth limit derived from a bound constant, when one was used.
    std::optional<Int> depth;
};

using Certificate = std::variant<std::monostate, Trace, CountedLps, UnboundedWitness, Lasso>;

/// reach: yes = reachable. bounded: yes = unbounded (the witness pumps).
/// terminates: yes = some infinite run exists.
struct Verdict {
    Outcome outcome = Outcome::unknown;
    Certificate certificate;
    Caps caps;
    /// Why the answer is conclusive, or which budget ran out.
    std::string evidence;
    Stats stats;
    /// Size of the reachable set when a bounded exploration closed.
    std::optional<std::size_t> reachable_size;
};

namespace detail {

using Key = std::vector<std::int64_t>; // state, counters...

struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return boost::hash_range(k.begin(), k.end()); }
};

inline constexpr std::int64_t explicit_limit = std::int64_t{1} << 40;

inline Key key_of(const Configuration& c)
{
    Key k{static_cast<std::int64_t>(c.state.value)};
    for (const Int& v : c.counters) {
        if (v > explicit_limit)
            throw UsageError("configuration too large for explicit exploration");
        k.push_back(static_cast<std::int64_t>(v));
    }
    return k;
}

inline Configuration configuration_of(const Key& k)
{
    IntVector counters(k.size() - 1);
    for (std::size_t i = 1; i < k.size(); ++i)
        counters[i - 1] = k[i];
    return Configuration{StateId{static_cast<std::uint32_t>(k[0])}, std::move(counters)};
}

/// Per-transition data in machine integers. Components beyond the explicit
/// limit are flagged: such a step either is disabled or leaves every cap.
struct FastTransition {
    std::uint32_t target;
    bool test;
    bool huge_up = false;
    bool huge_down = false;
    std::vector<std::int64_t> delta;
};

inline std::vector<FastTransition> fast_transitions(const Tvass& model)
{
    std::vector<FastTransition> out;
    for (const Transition& t : model.transitions()) {
        FastTransition f{t.target.value, t.action.is_test(), false, false, {}};
        if (!f.test)
            for (const Int& v : t.action.delta()) {
                if (v > 2 * explicit_limit) {
                    f.huge_up = true;
                    f.delta.push_back(0);
                } else if (v < -2 * explicit_limit) {
                    f.huge_down = true;
                    f.delta.push_back(0);
                } else {
                    f.delta.push_back(static_cast<std::int64_t>(v));
                }
            }
        out.push_back(std::move(f));
    }
    return out;
}

enum class Fired { disabled, pruned, ok };

/// Applies a transition to a key; `norm_cap` bounds every counter.
inline Fired fire_key(const FastTransition& f, const Key& from, std::int64_t norm_cap, Key& out)
{
    out = from;
    out[0] = f.target;
    if (f.test)
        return from[1] == 0 ? Fired::ok : Fired::disabled;
    if (f.huge_down)
        return Fired::disabled;
    bool over = f.huge_up;
    for (std::size_t i = 0; i < f.delta.size(); ++i) {
        out[i + 1] += f.delta[i];
        if (out[i + 1] < 0)
            return Fired::disabled;
        if (out[i + 1] > norm_cap)
            over = true;
    }
    return over ? Fired::pruned : Fired::ok;
}

struct Limits {
    std::int64_t norm = explicit_limit;
    std::size_t expansions = SIZE_MAX;
    std::size_t nodes = SIZE_MAX;
    std::optional<std::size_t> depth;
};

/// Breadth-first exploration of the configuration graph. Node indices are in
/// discovery order, so every tree path is a minimal-length run.
class Exploration {
public:
    struct Parent {
        std::size_t node;
        TransitionId via;
    };

    Exploration(const Tvass& model, const Configuration& from, Limits limits)
        : model_(model), fast_(fast_transitions(model)), limits_(limits)
    {
        add(key_of(from), Parent{0, TransitionId{}}, 0);
    }

    /// Runs until the queue empties, a limit is hit, or `stop(node)` holds for
    /// a newly discovered node. Returns the stopping node, if any.
    std::optional<std::size_t> run(const std::function<bool(std::size_t)>& stop)
    {
        if (stop && stop(0))
            return 0;
        Key next;
        while (cursor_ < nodes_.size()) {
            peak_frontier_ = std::max(peak_frontier_, nodes_.size() - cursor_);
            if (expanded_ >= limits_.expansions || nodes_.size() >= limits_.nodes) {
                budget_hit_ = true;
                return std::nullopt;
            }
            const std::size_t at = cursor_++;
            if (limits_.depth && depth_[at] >= *limits_.depth) {
                depth_cut_ = true;
                continue;
            }
            ++expanded_;
            const StateId q{static_cast<std::uint32_t>(nodes_[at][0])};
            for (TransitionId t : model_.outgoing(q)) {
                switch (fire_key(fast_[t.value], nodes_[at], limits_.norm, next)) {
                case Fired::disabled:
                    break;
                case Fired::pruned:
                    norm_cut_ = true;
                    break;
                case Fired::ok:
                    if (index_.find(next) == index_.end()) {
                        const std::size_t id = add(next, Parent{at, t}, depth_[at] + 1);
                        if (stop && stop(id))
                            return id;
                    }
                    break;
                }
            }
        }
        return std::nullopt;
    }

    /// The queue emptied (possibly with pruned or depth-cut successors).
    [[nodiscard]] bool closed() const { return cursor_ == nodes_.size() && !budget_hit_; }
    /// Closed with nothing pruned: the explored set is the whole reachable set.
    [[nodiscard]] bool complete() const { return closed() && !norm_cut_ && !depth_cut_; }
    [[nodiscard]] bool norm_cut() const { return norm_cut_; }
    [[nodiscard]] bool depth_cut() const { return depth_cut_; }
    [[nodiscard]] bool budget_hit() const { return budget_hit_; }

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const Key& key(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] Configuration configuration(std::size_t i) const { return configuration_of(nodes_[i]); }
    [[nodiscard]] const Parent& parent(std::size_t i) const { return parents_[i]; }
    [[nodiscard]] std::size_t depth(std::size_t i) const { return depth_[i]; }

    [[nodiscard]] std::optional<std::size_t> find(const Key& k) const
    {
        auto it = index_.find(k);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    [[nodiscard]] Trace trace_to(std::size_t i) const
    {
        Trace out;
        while (i != 0) {
            out.push_back(parents_[i].via);
            i = parents_[i].node;
        }
        return Trace(out.rbegin(), out.rend());
    }

    [[nodiscard]] Stats stats() const { return Stats{nodes_.size(), peak_frontier_}; }

    /// Successor indices inside the explored set.
    [[nodiscard]] std::vector<std::pair<TransitionId, std::size_t>> successors(std::size_t i) const
    {
        std::vector<std::pair<TransitionId, std::size_t>> out;
        Key next;
        const StateId q{static_cast<std::uint32_t>(nodes_[i][0])};
        for (TransitionId t : model_.outgoing(q))
            if (fire_key(fast_[t.value], nodes_[i], limits_.norm, next) == Fired::ok)
                if (auto j = find(next))
                    out.emplace_back(t, *j);
        return out;
    }

private:
    std::size_t add(const Key& k, Parent p, std::size_t depth)
    {
        const std::size_t id = nodes_.size();
        nodes_.push_back(k);
        parents_.push_back(p);
        depth_.push_back(depth);
        index_.emplace(k, id);
        return id;
    }

    const Tvass& model_;
    std::vector<FastTransition> fast_;
    Limits limits_;
    std::vector<Key> nodes_;
    std::vector<Parent> parents_;
    std::vector<std::size_t> depth_;
    std::unordered_map<Key, std::size_t, KeyHash> index_;
    std::size_t cursor_ = 0;
    std::size_t expanded_ = 0;
    std::size_t peak_frontier_ = 0;
    bool norm_cut_ = false;
    bool depth_cut_ = false;
    bool budget_hit_ = false;
};

inline std::int64_t to_limit(const Int& v)
{
    if (v < 0)
        return 0;
    return v > explicit_limit ? explicit_limit : static_cast<std::int64_t>(v);
}

inline std::size_t to_count(const Int& v)
{
    if (v < 0)
        return 0;
    if (v > Int(SIZE_MAX >> 1))
        return SIZE_MAX >> 1;
    return static_cast<std::size_t>(v);
}

inline void check_configuration(const Tvass& model, const Configuration& c)
{
    if (c.state.value >= model.state_count())
        throw UsageError("unknown state index " + std::to_string(c.state.value));
    if (c.counters.size() != model.dimension())
        throw UsageError("configuration has " + std::to_string(c.counters.size()) + " counters, expected " +
                         std::to_string(model.dimension()));
    if (!c.counters.is_nonnegative())
        throw UsageError("configuration counters must be nonnegative");
}

inline void require_dimension_two(const Tvass& model, const char* what)
{
    if (model.dimension() != 2)
        throw UsageError(std::string(what) + " expects a 2-dimensional model");
}

} // namespace detail

/// Ground-truth breadth-first search. No is returned only when the explored
/// set closed with no successor pruned by the norm cap.
inline Verdict oracle_reach(const Tvass& model, const Configuration& from, const Configuration& to, const Int& cap_norm,
                            const Int& cap_steps)
{
    detail::check_configuration(model, from);
    detail::check_configuration(model, to);
    Verdict v;
    v.caps = Caps{cap_norm, cap_steps, std::nullopt};
    if (to.counters.norm() > cap_norm) {
        v.evidence = "target lies outside the norm cap";
        return v;
    }
    const detail::Key target = detail::key_of(to);
    detail::Limits limits;
    limits.norm = detail::to_limit(cap_norm);
    limits.expansions = detail::to_count(cap_steps);
    detail::Exploration ex(model, from, limits);
    const auto hit = ex.run([&](std::size_t i) { return ex.key(i) == target; });
    v.stats = ex.stats();
    if (hit) {
        v.outcome = Outcome::yes;
        v.certificate = ex.trace_to(*hit);
        v.evidence = "minimal run found";
    } else if (ex.complete()) {
        v.outcome = Outcome::no;
        v.evidence = "reachable set closed with " + std::to_string(ex.size()) + " configurations inside the norm cap";
    } else {
        v.evidence = ex.budget_hit() ? "step cap exhausted" : "successors pruned by the norm cap";
    }
    return v;
}

/// (|Q|+‖x‖+‖y‖+‖Σ‖)^(c·|Q|³)
inline Int shortpath_bound(const Tvass& model, const IntVector& x, const IntVector& y, std::size_t c)
{
    const std::size_t q = model.state_count();
    return power(Int(q) + x.norm() + y.norm() + model.action_norm(), c * q * q * q);
}

/// (1+‖x‖)·(|Q|+‖Σ‖)^(c·|Q|³)
inline Int boundedness_bound(const Tvass& model, const IntVector& x, std::size_t c)
{
    const std::size_t q = model.state_count();
    return (1 + x.norm()) * power(Int(q) + model.action_norm(), c * q * q * q);
}

namespace detail {

inline void check_ids(const Tvass& model, const Trace& pi, const char* what)
{
    for (TransitionId t : pi)
        if (t.value >= model.transitions().size())
            throw CertificateError(std::string(what) + " names unknown transition index " + std::to_string(t.value));
}

inline std::optional<Configuration> replay_end(const Tvass& model, const Configuration& from, const Trace& pi)
{
    try {
        return apply_trace(model, from, pi);
    } catch (const UsageError&) {
        return std::nullopt; // the trace does not chain from `from`
    }
}

} // namespace detail

/// Trace certificates replay directly; counted schemes replay their expansion.
/// Structurally malformed certificates throw CertificateError.
inline bool check_certificate(const Tvass& model, const Configuration& from, const Configuration& to, const Trace& cert)
{
    detail::check_ids(model, cert, "trace");
    auto end = detail::replay_end(model, from, cert);
    return end && *end == to;
}

inline bool check_certificate(const Tvass& model, const Configuration& from, const Configuration& to,
                              const CountedLps& cert)
{
    const LinearPathScheme& L = cert.scheme;
    if (L.alpha.size() != L.beta.size() + 1)
        throw CertificateError("scheme needs one more path than cycles");
    if (cert.counts.size() != L.beta.size())
        throw CertificateError("one count per cycle expected");
    for (const Int& n : cert.counts)
        if (n < 0)
            throw CertificateError("negative cycle count");
    for (const Trace& a : L.alpha)
        detail::check_ids(model, a, "path");
    for (const Trace& b : L.beta) {
        detail::check_ids(model, b, "cycle");
        if (b.empty())
            throw CertificateError("empty cycle");
        auto ends = path_endpoints(model, b);
        if (!ends || ends->first != ends->second)
            throw CertificateError("a starred segment is not a cycle");
    }
    const Trace skeleton = L.skeleton();
    if (skeleton.empty())
        return from == to;
    auto ends = path_endpoints(model, skeleton);
    if (!ends || ends->first != from.state)
        return false;
    auto end = eval_counts(model, cert, from.counters);
    return end && *end == to;
}

/// Greedy left-to-right compression of a run. At each position the longest
/// adjacent repetition (n ≥ 2 copies of a cycle, maximal coverage, shortest
/// cycle on ties) becomes a starred cycle; otherwise the shortest vertical
/// loop starting there (same state, counter 1 zero at both ends) is starred
/// once; otherwise the step joins the current path.
inline CountedLps extract_lps(const Tvass& model, const Run& run)
{
    const Trace& pi = run.trace;
    const std::size_t n = pi.size();
    CountedLps out;
    out.scheme.alpha.emplace_back();
    auto cycle_at = [&](std::size_t i, std::size_t len) {
        return model.transition(pi[i]).source == model.transition(pi[i + len - 1]).target;
    };
    auto star = [&](std::size_t i, std::size_t len, std::size_t copies) {
        out.scheme.beta.emplace_back(pi.begin() + static_cast<std::ptrdiff_t>(i),
                                     pi.begin() + static_cast<std::ptrdiff_t>(i + len));
        out.counts.emplace_back(copies);
        out.scheme.alpha.emplace_back();
    };

    std::size_t i = 0;
    while (i < n) {
        std::size_t best_len = 0, best_copies = 0;
        for (std::size_t len = 1; 2 * len <= n - i; ++len) {
            if (!cycle_at(i, len))
                continue;
            std::size_t copies = 1;
            while (i + (copies + 1) * len <= n &&
                   std::equal(pi.begin() + static_cast<std::ptrdiff_t>(i), pi.begin() + static_cast<std::ptrdiff_t>(i + len),
                              pi.begin() + static_cast<std::ptrdiff_t>(i + copies * len)))
                ++copies;
            if (copies >= 2 && copies * len > best_copies * best_len) {
                best_len = len;
                best_copies = copies;
            }
        }
        if (best_copies >= 2) {
            star(i, best_len, best_copies);
            i += best_len * best_copies;
            continue;
        }
        const Configuration& start = run.configurations[i];
        std::size_t loop = 0;
        if (start.counters[0] == 0)
            for (std::size_t j = i + 1; j <= n; ++j)
                if (run.configurations[j].state == start.state && run.configurations[j].counters[0] == 0) {
                    loop = j - i;
                    break;
                }
        if (loop > 0) {
            star(i, loop, 1);
            i += loop;
            continue;
        }
        out.scheme.alpha.back().push_back(pi[i]);
        ++i;
    }
    return out;
}

struct ReachOptions {
    Int cap_norm = 64;
    Int cap_steps = 1'000'000;
    /// Constant for the short-path bound; absent disables the bounded layer.
    std::optional<std::size_t> c;
    /// Configurations the bounded layer may store.
    std::size_t node_budget = 2'000'000;
};

namespace detail {

inline Verdict certify_trace(const Tvass& model, const Configuration& from, const Configuration& to, Verdict v,
                             const Trace& pi)
{
    auto run = replay(model, from, pi);
    if (!run)
        throw std::logic_error("reach: witness trace does not replay");
    CountedLps cert = extract_lps(model, *run);
    if (!check_certificate(model, from, to, cert))
        throw std::logic_error("reach: extracted scheme does not check");
    v.outcome = Outcome::yes;
    v.certificate = std::move(cert);
    return v;
}

} // namespace detail

/// Forward oracle, then the oracle on the reversed model from the target
/// (a closed backward set is as sound a No as a closed forward one), then,
/// with a bound constant, a depth- and norm-bounded search justified by the
/// short-path bound. Yes answers carry a checked counted scheme.
inline Verdict reach(const Tvass& model, const Configuration& from, const Configuration& to, const ReachOptions& opts = {})
{
    detail::require_dimension_two(model, "reach");
    Verdict forward = oracle_reach(model, from, to, opts.cap_norm, opts.cap_steps);
    if (forward.outcome == Outcome::yes)
        return detail::certify_trace(model, from, to, forward, std::get<Trace>(forward.certificate));
    if (forward.outcome == Outcome::no)
        return forward;

    const Tvass backward_model = reverse(model);
    Verdict backward = oracle_reach(backward_model, to, from, opts.cap_norm, opts.cap_steps);
    Stats stats = forward.stats;
    stats.absorb(backward.stats);
    if (backward.outcome == Outcome::yes) {
        Verdict v = forward;
        v.stats = stats;
        v.evidence = "run found from the target in the reversed model";
        return detail::certify_trace(model, from, to, v, mirror(std::get<Trace>(backward.certificate)));
    }
    if (backward.outcome == Outcome::no) {
        backward.stats = stats;
        backward.evidence = "backward " + backward.evidence;
        return backward;
    }

    Verdict v = forward;
    v.stats = stats;
    v.evidence = "forward: " + forward.evidence + "; backward: " + backward.evidence;
    if (!opts.c)
        return v;

    const Int bound = shortpath_bound(model, from.counters, to.counters, *opts.c);
    const Int norm = from.counters.norm() + to.counters.norm() + bound * model.action_norm();
    detail::Limits limits;
    limits.norm = detail::to_limit(norm);
    limits.depth = detail::to_count(bound);
    limits.nodes = opts.node_budget;
    const detail::Key target = detail::key_of(to);
    detail::Exploration ex(model, from, limits);
    const auto hit = ex.run([&](std::size_t i) { return ex.key(i) == target; });
    v.stats.absorb(ex.stats());
    v.caps.depth = bound;
    if (hit) {
        v.evidence = "run found within the short-path bound";
        return detail::certify_trace(model, from, to, v, ex.trace_to(*hit));
    }
    // Pruning is justified by the bound only when the norm cap was not clamped.
    if (ex.closed() && Int(limits.norm) == norm) {
        v.outcome = Outcome::no;
        v.evidence = "no run within the short-path bound " + bound.str() + " (constant c = " + std::to_string(*opts.c) +
                     ", not proven sufficient)";
        return v;
    }
    v.evidence += "; short-path layer exhausted its budget of " + std::to_string(opts.node_budget) + " configurations";
    return v;
}

enum class FactorKind {
    /// test-free segment
    segment,
    /// a single zero-test step
    test,
    /// same state, counter 1 zero at both ends
    vertical_loop,
};

struct Factor {
    FactorKind kind;
    /// configuration indices in the run
    std::size_t begin;
    std::size_t end;
    Trace trace;
};

/// Cuts a run at zero-level configurations (counter 1 = 0). From a zero-level
/// configuration in state q the run jumps to the last zero-level visit of q,
/// giving a vertical loop; between such blocks lies either one test step or a
/// test-free segment. Each state anchors at most one block, so there are at
/// most 2|Q|+1 factors. Empty factors are omitted.
inline std::vector<Factor> vloop_decompose(const Tvass& model, const Run& run)
{
    detail::require_dimension_two(model, "vloop_decompose");
    const std::size_t n = run.trace.size();
    auto slice = [&](std::size_t a, std::size_t b) {
        return Trace(run.trace.begin() + static_cast<std::ptrdiff_t>(a), run.trace.begin() + static_cast<std::ptrdiff_t>(b));
    };
    std::vector<Factor> out;
    if (n == 0)
        return out;
    if (!contains_test(model, run.trace)) {
        out.push_back(Factor{FactorKind::segment, 0, n, run.trace});
        return out;
    }
    auto zero = [&](std::size_t i) { return run.configurations[i].counters[0] == 0; };
    std::vector<std::size_t> last_zero(model.state_count(), SIZE_MAX);
    for (std::size_t i = 0; i <= n; ++i)
        if (zero(i))
            last_zero[run.configurations[i].state.value] = i;

    std::size_t pos = 0;
    while (pos < n) {
        if (zero(pos)) {
            const std::size_t last = last_zero[run.configurations[pos].state.value];
            if (last > pos) {
                out.push_back(Factor{FactorKind::vertical_loop, pos, last, slice(pos, last)});
                pos = last;
                continue;
            }
            if (model.transition(run.trace[pos]).action.is_test()) {
                out.push_back(Factor{FactorKind::test, pos, pos + 1, slice(pos, pos + 1)});
                ++pos;
                continue;
            }
        }
        std::size_t end = pos + 1;
        while (end < n && !zero(end))
            ++end;
        out.push_back(Factor{FactorKind::segment, pos, end, slice(pos, end)});
        pos = end;
    }
    return out;
}

struct DxResult {
    std::vector<std::size_t> members;
    std::vector<std::size_t> non_members;
    std::vector<std::size_t> undecided;
    /// Every d ≤ cap_d was decided.
    [[nodiscard]] bool complete() const { return undecided.empty(); }
};

/// D_x = {d | q(0,x) →* q(0,x+d)} restricted to d ≤ cap_d. One forward
/// exploration settles members; values it cannot settle are tried by the
/// backward oracle.
inline DxResult compute_Dx(const Tvass& model, StateId q, std::size_t x, std::size_t cap_d, const Int& cap_norm,
                           const Int& cap_steps = 1'000'000)
{
    detail::require_dimension_two(model, "compute_Dx");
    auto config = [&](std::size_t c2) {
        return Configuration{q, IntVector{0, static_cast<long long>(c2)}};
    };
    detail::Limits limits;
    limits.norm = detail::to_limit(cap_norm);
    limits.expansions = detail::to_count(cap_steps);
    detail::Exploration ex(model, config(x), limits);
    ex.run({});
    const Tvass backward = reverse(model);
    DxResult out;
    for (std::size_t d = 0; d <= cap_d; ++d) {
        const Configuration target = config(x + d);
        if (Int(x + d) <= cap_norm && ex.find(detail::key_of(target))) {
            out.members.push_back(d);
            continue;
        }
        if (ex.complete()) {
            out.non_members.push_back(d);
            continue;
        }
        const Verdict v = oracle_reach(backward, target, config(x), cap_norm, cap_steps);
        if (v.outcome == Outcome::yes)
            out.members.push_back(d);
        else if (v.outcome == Outcome::no)
            out.non_members.push_back(d);
        else
            out.undecided.push_back(d);
    }
    return out;
}

/// Smallest t ≤ x_max with D_t = D_{t+1} = ⋯ = D_{x_max} on [0, cap_d], all
/// decided. Only a conjecture: stabilization beyond x_max is not checked.
inline std::optional<std::size_t> conjectured_threshold(const Tvass& model, StateId q, std::size_t x_max,
                                                        std::size_t cap_d, const Int& cap_norm)
{
    std::vector<DxResult> sets;
    for (std::size_t x = 0; x <= x_max; ++x)
        sets.push_back(compute_Dx(model, q, x, cap_d, cap_norm));
    if (!sets.back().complete())
        return std::nullopt;
    std::size_t t = x_max;
    while (t > 0 && sets[t - 1].complete() && sets[t - 1].members == sets[x_max].members)
        --t;
    return t;
}

struct IncreasingCycle {
    std::size_t h;
    Trace beta;
    Int m;
};

struct CycleSearchCaps {
    std::size_t max_h = 16;
    Int cap_norm = 64;
    Int cap_steps = 200'000;
};

/// Smallest h ≤ max_h with a run q(0,h) →β q(0,h+m), m > 0; β is minimal for that h.
inline std::optional<IncreasingCycle> find_increasing_cycle(const Tvass& model, StateId q, const CycleSearchCaps& caps = {})
{
    detail::require_dimension_two(model, "find_increasing_cycle");
    for (std::size_t h = 0; h <= caps.max_h; ++h) {
        const auto start = static_cast<std::int64_t>(h);
        detail::Limits limits;
        limits.norm = detail::to_limit(caps.cap_norm);
        limits.expansions = detail::to_count(caps.cap_steps);
        detail::Exploration ex(model, Configuration{q, IntVector{0, start}}, limits);
        const auto hit = ex.run([&](std::size_t i) {
            const detail::Key& k = ex.key(i);
            return k[0] == q.value && k[1] == 0 && k[2] > start;
        });
        if (hit)
            return IncreasingCycle{h, ex.trace_to(*hit), Int(ex.key(*hit)[2] - start)};
    }
    return std::nullopt;
}

/// The pump keeps its state, grows the counters by the same nonzero
/// nonnegative delta (with counter 1 fixed if it tests), and stays enabled for
/// three rounds.
inline bool check_unbounded_witness(const Tvass& model, const Configuration& from, const UnboundedWitness& w)
{
    detail::check_ids(model, w.prefix, "prefix");
    detail::check_ids(model, w.pump, "pump");
    if (w.pump.empty())
        throw CertificateError("empty pump");
    auto anchor = detail::replay_end(model, from, w.prefix);
    if (!anchor)
        return false;
    const bool tests = contains_test(model, w.pump);
    Configuration at = *anchor;
    std::optional<IntVector> delta;
    for (int round = 0; round < 3; ++round) {
        auto next = detail::replay_end(model, at, w.pump);
        if (!next || next->state != at.state)
            return false;
        IntVector d = next->counters - at.counters;
        if (delta && d != *delta)
            return false;
        // a nonzero nonnegative delta makes the counter sum grow every round;
        // the maximum norm may stay put for a while
        if (!d.is_nonnegative() || d.is_zero() || (tests && d[0] != 0))
            return false;
        delta = d;
        at = std::move(*next);
    }
    return true;
}

inline bool check_lasso(const Tvass& model, const Configuration& from, const Lasso& l)
{
    detail::check_ids(model, l.prefix, "prefix");
    detail::check_ids(model, l.cycle, "cycle");
    if (l.cycle.empty())
        throw CertificateError("empty lasso cycle");
    auto c = detail::replay_end(model, from, l.prefix);
    if (!c)
        return false;
    auto back = detail::replay_end(model, *c, l.cycle);
    return back && *back == *c;
}

struct BoundOptions {
    Int cap_norm = 64;
    /// Constant for the boundedness bound, which then replaces cap_norm.
    std::optional<std::size_t> c;
    std::size_t node_budget = 200'000;
};

namespace detail {

/// Looks along the tree path of `node` for an ancestor in the same state that
/// it pumps over.
inline std::optional<UnboundedWitness> pump_above(const Tvass& model, const Exploration& ex, std::size_t node)
{
    const Key& here = ex.key(node);
    bool tests = false;
    std::size_t child = node;
    while (child != 0) {
        const auto& p = ex.parent(child);
        tests = tests || model.transition(p.via).action.is_test();
        const Key& anc = ex.key(p.node);
        child = p.node;
        if (anc[0] != here[0])
            continue;
        const std::int64_t d1 = here[1] - anc[1];
        const std::int64_t d2 = here[2] - anc[2];
        const bool grows = (d1 == 0 && d2 > 0) || (!tests && d1 > 0 && d2 >= 0);
        if (!grows)
            continue;
        Trace full = ex.trace_to(node);
        const std::size_t cut = ex.depth(child);
        return UnboundedWitness{Trace(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(cut)),
                                Trace(full.begin() + static_cast<std::ptrdiff_t>(cut), full.end())};
    }
    return std::nullopt;
}

struct BoundedRun {
    Verdict verdict;
    std::unique_ptr<Exploration> exploration;
};

inline BoundedRun bounded_exploration(const Tvass& model, const Configuration& from, const BoundOptions& opts)
{
    require_dimension_two(model, "bounded");
    check_configuration(model, from);
    BoundedRun out;
    Verdict& v = out.verdict;
    Int norm = opts.cap_norm;
    if (opts.c)
        norm = boundedness_bound(model, from.counters, *opts.c);
    v.caps = Caps{norm, Int(opts.node_budget), std::nullopt};
    Limits limits;
    limits.norm = to_limit(norm);
    limits.nodes = opts.node_budget;
    out.exploration = std::make_unique<Exploration>(model, from, limits);
    Exploration& ex = *out.exploration;
    std::optional<UnboundedWitness> witness;
    ex.run([&](std::size_t i) {
        witness = pump_above(model, ex, i);
        return witness.has_value();
    });
    v.stats = ex.stats();
    if (witness) {
        if (!check_unbounded_witness(model, from, *witness))
            throw std::logic_error("bounded: pump witness does not check");
        v.outcome = Outcome::yes;
        v.evidence = "pump found";
        v.certificate = std::move(*witness);
    } else if (ex.complete()) {
        v.outcome = Outcome::no;
        v.reachable_size = ex.size();
        v.evidence = "reachable set closed with " + std::to_string(ex.size()) + " configurations";
    } else if (ex.budget_hit()) {
        v.evidence = "configuration budget of " + std::to_string(opts.node_budget) + " exhausted";
    } else {
        v.evidence = opts.c ? "a configuration exceeds the bound " + norm.str() + " but no pump was found"
                            : "successors pruned by the norm cap";
    }
    return out;
}

} // namespace detail

/// yes = unbounded with a checked pump, no = the reachable set closed.
inline Verdict bounded(const Tvass& model, const Configuration& from, const BoundOptions& opts = {})
{
    return detail::bounded_exploration(model, from, opts).verdict;
}

/// yes = an infinite run exists. Unbounded systems have one by pumping; for
/// bounded ones the enumerated reachable set is searched for a cycle.
inline Verdict terminates(const Tvass& model, const Configuration& from, const BoundOptions& opts = {})
{
    detail::BoundedRun b = detail::bounded_exploration(model, from, opts);
    if (b.verdict.outcome != Outcome::no)
        return b.verdict;
    const detail::Exploration& ex = *b.exploration;
    Verdict v = b.verdict;

    // iterative depth-first search with colors over the finite step graph
    enum : char { white, grey, black };
    std::vector<char> color(ex.size(), white);
    struct Frame {
        std::size_t node;
        std::vector<std::pair<TransitionId, std::size_t>> succ;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    stack.push_back(Frame{0, ex.successors(0)});
    color[0] = grey;
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next == f.succ.size()) {
            color[f.node] = black;
            stack.pop_back();
            continue;
        }
        const std::size_t j = f.succ[f.next++].second;
        if (color[j] == grey) {
            Lasso l;
            l.prefix = ex.trace_to(j);
            std::size_t from_frame = 0;
            while (stack[from_frame].node != j)
                ++from_frame;
            for (std::size_t k = from_frame; k < stack.size(); ++k)
                l.cycle.push_back(stack[k].succ[stack[k].next - 1].first);
            v.outcome = Outcome::yes;
            v.evidence = "reachable configuration repeats";
            v.certificate = std::move(l);
            return v;
        }
        if (color[j] == white) {
            color[j] = grey;
            stack.push_back(Frame{j, ex.successors(j)});
        }
    }
    v.outcome = Outcome::no;
    v.evidence = "no cycle among " + std::to_string(ex.size()) + " reachable configurations";
    return v;
}

} // namespace tvr::decide
