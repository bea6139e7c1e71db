#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace tvr::woca {

/// A one-counter automaton with unit actions and per-transition weights in {-1,0,1}.
class Woca {
public:
    Woca(Tvass base, std::vector<int> weights) : base_(std::move(base)), weights_(std::move(weights))
    {
        if (base_.dimension() != 1)
            throw ModelError("a weighted one-counter automaton has exactly one counter");
        if (base_.action_norm() > 1)
            throw ModelError("weighted one-counter automata use actions in {-1,0,1}");
        if (weights_.size() != base_.transitions().size())
            throw ModelError("one weight per transition expected");
        for (int w : weights_)
            if (w < -1 || w > 1)
                throw ModelError("weights must lie in {-1,0,1}");
    }

    [[nodiscard]] const Tvass& base() const { return base_; }
    [[nodiscard]] int weight(TransitionId t) const { return weights_.at(t.value); }
    [[nodiscard]] const std::vector<int>& weights() const { return weights_; }

private:
    Tvass base_;
    std::vector<int> weights_;
};

/// λ(π)
inline Int weight(const Woca& w, const Trace& pi)
{
    Int total = 0;
    for (TransitionId t : pi)
        total += w.weight(t);
    return total;
}

/// Result of splitting a 2-dimensional model into a weighted one-counter automaton.
class Conversion {
public:
    Conversion(Woca woca, std::vector<Trace> chains, std::vector<StateId> state_map, std::size_t original_states)
        : woca_(std::move(woca)), chains_(std::move(chains)), state_map_(std::move(state_map)),
          original_states_(original_states)
    {
        for (std::size_t i = 0; i < chains_.size(); ++i)
            for (std::size_t pos = 0; pos < chains_[i].size(); ++pos)
                owner_[chains_[i][pos].value] = {TransitionId{static_cast<std::uint32_t>(i)}, pos};
    }

    [[nodiscard]] const Woca& woca() const { return woca_; }
    [[nodiscard]] StateId state(StateId original) const { return state_map_.at(original.value); }
    [[nodiscard]] const Trace& chain(TransitionId original) const { return chains_.at(original.value); }

    /// Whether a converted state stands for a state of the original model.
    [[nodiscard]] std::optional<StateId> original_state(StateId converted) const
    {
        for (std::size_t i = 0; i < state_map_.size(); ++i)
            if (state_map_[i] == converted)
                return StateId{static_cast<std::uint32_t>(i)};
        return std::nullopt;
    }

    [[nodiscard]] Trace to_woca(const Trace& original) const
    {
        Trace out;
        for (TransitionId t : original) {
            const Trace& c = chain(t);
            out.insert(out.end(), c.begin(), c.end());
        }
        return out;
    }

    /// Inverse of to_woca; the trace must consist of complete chains.
    [[nodiscard]] Trace to_original(const Trace& converted) const
    {
        Trace out;
        std::size_t i = 0;
        while (i < converted.size()) {
            auto it = owner_.find(converted[i].value);
            if (it == owner_.end() || it->second.second != 0)
                throw UsageError("converted trace does not start a transition chain at position " + std::to_string(i));
            const TransitionId original = it->second.first;
            const Trace& c = chain(original);
            if (i + c.size() > converted.size() || !std::equal(c.begin(), c.end(), converted.begin() + static_cast<std::ptrdiff_t>(i)))
                throw UsageError("converted trace cuts a transition chain at position " + std::to_string(i));
            out.push_back(original);
            i += c.size();
        }
        return out;
    }

private:
    Woca woca_;
    std::vector<Trace> chains_;
    std::vector<StateId> state_map_;
    std::size_t original_states_;
    std::unordered_map<std::uint32_t, std::pair<TransitionId, std::size_t>> owner_;
};

/// Counter 1 becomes the automaton counter and counter 2 becomes the weight.
/// An addition (a,b) turns into |a| counter steps followed by |b| weight steps
/// through fresh intermediate states (a single step when a = b = 0); tests map
/// to single weight-0 tests. A chain of length 1 keeps the original id.
inline Conversion tvass_to_woca(const Tvass& model)
{
    if (model.dimension() != 2)
        throw UsageError("tvass_to_woca expects a 2-dimensional model");
    std::vector<std::string> states = model.state_names();
    std::vector<TransitionSpec> specs;
    std::vector<int> weights;
    std::vector<std::vector<std::string>> chain_names(model.transitions().size());

    for (std::size_t ti = 0; ti < model.transitions().size(); ++ti) {
        const Transition& t = model.transitions()[ti];
        const std::string& src = model.state_name(t.source);
        const std::string& dst = model.state_name(t.target);
        if (t.action.is_test()) {
            specs.push_back(TransitionSpec{t.name, src, Action::test(), dst});
            weights.push_back(0);
            chain_names[ti].push_back(t.name);
            continue;
        }
        const Int& a = t.action.delta()[0];
        const Int& b = t.action.delta()[1];
        // (counter step, weight) pairs
        std::vector<std::pair<int, int>> units;
        for (Int i = 0; i < abs_value(a); ++i)
            units.emplace_back(a > 0 ? 1 : -1, 0);
        for (Int i = 0; i < abs_value(b); ++i)
            units.emplace_back(0, b > 0 ? 1 : -1);
        if (units.empty())
            units.emplace_back(0, 0);
        if (units.size() == 1) {
            specs.push_back(TransitionSpec{t.name, src, Action::add(IntVector{units[0].first}), dst});
            weights.push_back(units[0].second);
            chain_names[ti].push_back(t.name);
            continue;
        }
        std::string from = src;
        for (std::size_t u = 0; u < units.size(); ++u) {
            std::string to = dst;
            if (u + 1 < units.size()) {
                to = t.name + "@" + std::to_string(u + 1);
                states.push_back(to);
            }
            const std::string id = t.name + "." + std::to_string(u + 1);
            specs.push_back(TransitionSpec{id, from, Action::add(IntVector{units[u].first}), to});
            weights.push_back(units[u].second);
            chain_names[ti].push_back(id);
            from = to;
        }
    }
    Tvass base(1, states, specs, true);
    std::vector<Trace> chains;
    chains.reserve(chain_names.size());
    for (const auto& names : chain_names)
        chains.push_back(base.trace(names));
    std::vector<StateId> state_map;
    for (std::size_t i = 0; i < model.state_count(); ++i)
        state_map.push_back(StateId{static_cast<std::uint32_t>(i)});
    return Conversion(Woca(std::move(base), std::move(weights)), std::move(chains), std::move(state_map),
                      model.state_count());
}

namespace detail {

inline void require_unit_oca(const Tvass& oca)
{
    if (oca.dimension() != 1)
        throw UsageError("expected a one-counter automaton");
    if (oca.action_norm() > 1)
        throw UsageError("expected unit counter actions");
}

inline Trace slice(const Trace& pi, std::size_t from, std::size_t to)
{
    return Trace(pi.begin() + static_cast<std::ptrdiff_t>(from), pi.begin() + static_cast<std::ptrdiff_t>(to));
}

/// Replays a run that must go from p(0) to some q(0); returns the counter values.
inline Run replay_zero_run(const Tvass& oca, StateId p, const Trace& pi)
{
    auto run = replay(oca, Configuration{p, IntVector{0}}, pi);
    if (!run)
        throw UsageError("trace is not a run from counter 0");
    if (run->configurations.back().counters[0] != 0)
        throw UsageError("run does not end at counter 0");
    return *run;
}

inline std::int64_t counter_at(const Run& run, std::size_t i)
{
    return static_cast<std::int64_t>(run.configurations[i].counters[0]);
}

/// Search key for the bounded searches below.
struct Node {
    std::uint32_t state;
    std::int64_t counter;
    std::int64_t weight;
    friend bool operator==(const Node&, const Node&) = default;
};

struct NodeHash {
    std::size_t operator()(const Node& n) const noexcept
    {
        std::size_t seed = n.state;
        boost::hash_combine(seed, n.counter);
        boost::hash_combine(seed, n.weight);
        return seed;
    }
};

struct Parent {
    std::size_t parent;
    TransitionId via;
};

inline Trace unwind(const std::vector<Parent>& parents, std::size_t node)
{
    Trace out;
    while (parents[node].parent != node) {
        out.push_back(parents[node].via);
        node = parents[node].parent;
    }
    return Trace(out.rbegin(), out.rend());
}

inline std::int64_t clamp_to_i64(const Int& v, std::int64_t hard_max)
{
    if (v > hard_max)
        return hard_max;
    return static_cast<std::int64_t>(v);
}

} // namespace detail

/// α β₁⋯β_m γ θ_m⋯θ₁ η
struct HillFactorization {
    Trace alpha;
    std::vector<Trace> beta;  // β₁..β_m
    Trace gamma;
    std::vector<Trace> theta; // θ₁..θ_m
    Trace eta;
    StateId r;
    StateId s;
    std::vector<std::int64_t> levels; // counter values at the r-anchors
    bool low_case = false;

    [[nodiscard]] Trace pumped(std::span<const std::size_t> n) const
    {
        Trace out = alpha;
        for (std::size_t i = 0; i < beta.size(); ++i)
            for (std::size_t c = 0; c < n[i]; ++c)
                out.insert(out.end(), beta[i].begin(), beta[i].end());
        out.insert(out.end(), gamma.begin(), gamma.end());
        for (std::size_t i = theta.size(); i-- > 0;)
            for (std::size_t c = 0; c < n[i]; ++c)
                out.insert(out.end(), theta[i].begin(), theta[i].end());
        out.insert(out.end(), eta.begin(), eta.end());
        return out;
    }

    [[nodiscard]] Trace concatenated() const
    {
        std::vector<std::size_t> ones(beta.size(), 1);
        return pumped(ones);
    }
};

/// Checks that every pumping with exponents in [0, max_exponent] replays from p(0) to q(0).
inline bool validate_pumping(const Tvass& oca, StateId p, StateId q, const HillFactorization& f, std::size_t max_exponent = 3)
{
    const std::size_t m = f.beta.size();
    std::vector<std::size_t> n(m, 0);
    while (true) {
        auto end = apply_trace(oca, Configuration{p, IntVector{0}}, f.pumped(n));
        if (!end || end->state != q || end->counters[0] != 0)
            return false;
        std::size_t i = 0;
        while (i < m && n[i] == max_exponent)
            n[i++] = 0;
        if (i == m)
            return true;
        ++n[i];
    }
}

/// Factorizes a run p(0) →π q(0) with |π| ≥ m²|Q|³ into m pumpable cycle pairs.
/// Either the counter stays below m|Q|² (a configuration repeats m+1 times) or
/// the run climbs a hill whose level crossings yield the pairs.
inline HillFactorization hill_cut(const Tvass& oca, StateId p, const Trace& pi, std::size_t m)
{
    detail::require_unit_oca(oca);
    if (m == 0)
        throw UsageError("hill_cut: m must be positive");
    const std::size_t states = oca.state_count();
    const std::size_t required = m * m * states * states * states;
    if (pi.size() < required || pi.empty())
        throw UsageError("hill_cut: trace length " + std::to_string(pi.size()) + " is below m^2|Q|^3 = " +
                         std::to_string(std::max<std::size_t>(required, 1)));
    const Run run = detail::replay_zero_run(oca, p, pi);
    const std::size_t n = pi.size();
    const auto height = static_cast<std::int64_t>(m * states * states);

    HillFactorization f;
    std::size_t peak = n + 1;
    for (std::size_t i = 0; i <= n; ++i)
        if (detail::counter_at(run, i) >= height) {
            peak = i;
            break;
        }

    if (peak > n) {
        f.low_case = true;
        std::unordered_map<Configuration, std::vector<std::size_t>> seen;
        for (std::size_t i = 0; i <= n; ++i) {
            auto& positions = seen[run.configurations[i]];
            positions.push_back(i);
            if (positions.size() == m + 1) {
                f.r = f.s = run.configurations[i].state;
                f.alpha = detail::slice(pi, 0, positions[0]);
                for (std::size_t l = 1; l <= m; ++l) {
                    f.beta.push_back(detail::slice(pi, positions[l - 1], positions[l]));
                    f.theta.emplace_back();
                    f.levels.push_back(detail::counter_at(run, i));
                }
                f.levels.push_back(detail::counter_at(run, i));
                f.eta = detail::slice(pi, positions[m], n);
                return f;
            }
        }
        throw std::logic_error("hill_cut: pigeonhole failed in the low case");
    }

    // Level crossings around the peak: i_l is the last visit of level l before
    // the peak, j_l the first one after it.
    const auto levels = static_cast<std::size_t>(height) + 1;
    std::vector<std::size_t> up(levels), down(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        std::size_t i = peak;
        while (detail::counter_at(run, i) != static_cast<std::int64_t>(l))
            --i;
        up[l] = i;
        std::size_t j = peak;
        while (detail::counter_at(run, j) != static_cast<std::int64_t>(l))
            ++j;
        down[l] = j;
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> pairs;
    for (std::size_t l = 0; l < levels; ++l) {
        auto& ls = pairs[{run.configurations[up[l]].state.value, run.configurations[down[l]].state.value}];
        ls.push_back(l);
        if (ls.size() == m + 1) {
            f.r = run.configurations[up[ls[0]]].state;
            f.s = run.configurations[down[ls[0]]].state;
            f.alpha = detail::slice(pi, 0, up[ls[0]]);
            for (std::size_t h = 1; h <= m; ++h) {
                f.beta.push_back(detail::slice(pi, up[ls[h - 1]], up[ls[h]]));
                f.theta.push_back(detail::slice(pi, down[ls[h]], down[ls[h - 1]]));
            }
            f.gamma = detail::slice(pi, up[ls[m]], down[ls[m]]);
            f.eta = detail::slice(pi, down[ls[0]], n);
            for (std::size_t l : ls)
                f.levels.push_back(static_cast<std::int64_t>(l));
            return f;
        }
    }
    throw std::logic_error("hill_cut: pigeonhole failed in the hill case");
}

/// p(0) →α r(x) →β r(x+d) →γ s(x+d) →θ s(x) →η q(0)
struct ShortCycleFactorization {
    StateId r;
    StateId s;
    std::int64_t x = 0;
    std::int64_t d = 0;
    Trace alpha, beta, gamma, theta, eta;

    [[nodiscard]] Trace pumped(std::size_t n) const
    {
        Trace out = alpha;
        for (std::size_t c = 0; c < n; ++c)
            out.insert(out.end(), beta.begin(), beta.end());
        out.insert(out.end(), gamma.begin(), gamma.end());
        for (std::size_t c = 0; c < n; ++c)
            out.insert(out.end(), theta.begin(), theta.end());
        out.insert(out.end(), eta.begin(), eta.end());
        return out;
    }
};

/// Checks the pumped run passes through r(x), r(x+nd), s(x+nd), s(x) and ends in q(0).
inline bool validate_pumping(const Tvass& oca, StateId p, StateId q, const ShortCycleFactorization& f,
                             std::size_t max_exponent = 3)
{
    for (std::size_t n = 0; n <= max_exponent; ++n) {
        const auto nd = static_cast<long long>(n) * f.d;
        auto at = apply_trace(oca, Configuration{p, IntVector{0}}, f.alpha);
        if (!at || *at != Configuration{f.r, IntVector{f.x}})
            return false;
        at = apply_trace(oca, *at, repeat(f.beta, n));
        if (!at || *at != Configuration{f.r, IntVector{f.x + nd}})
            return false;
        at = apply_trace(oca, *at, f.gamma);
        if (!at || *at != Configuration{f.s, IntVector{f.x + nd}})
            return false;
        at = apply_trace(oca, *at, repeat(f.theta, n));
        if (!at || *at != Configuration{f.s, IntVector{f.x}})
            return false;
        at = apply_trace(oca, *at, f.eta);
        if (!at || *at != Configuration{q, IntVector{0}})
            return false;
    }
    return true;
}

/// Extracts one short pumpable cycle pair from a run p(0) →π q(0) with |π| ≥ 2|Q|³,
/// keeping x+d ≤ 2|Q|² and |βθ| ≤ 2|Q|³.
inline ShortCycleFactorization cut_short_cycles(const Tvass& oca, StateId p, const Trace& pi)
{
    detail::require_unit_oca(oca);
    const std::size_t states = oca.state_count();
    const std::size_t required = 2 * states * states * states;
    if (pi.size() < required)
        throw UsageError("cut_short_cycles: trace length " + std::to_string(pi.size()) + " is below 2|Q|^3 = " +
                         std::to_string(required));
    const Run run = detail::replay_zero_run(oca, p, pi);
    const std::size_t n = pi.size();
    const auto sq = static_cast<std::int64_t>(states * states);
    ShortCycleFactorization f;

    // A configuration repeating while the counter stays below 2|Q|².
    std::unordered_map<Configuration, std::size_t> seen;
    for (std::size_t i = 0; i <= n; ++i) {
        if (detail::counter_at(run, i) >= 2 * sq) {
            seen.clear();
            continue;
        }
        auto [it, fresh] = seen.emplace(run.configurations[i], i);
        if (!fresh) {
            const std::size_t h = it->second;
            f.r = f.s = run.configurations[h].state;
            f.x = detail::counter_at(run, h);
            f.d = 0;
            f.alpha = detail::slice(pi, 0, h);
            f.beta = detail::slice(pi, h, i);
            f.eta = detail::slice(pi, i, n);
            return f;
        }
    }

    std::size_t peak = n + 1;
    for (std::size_t i = 0; i <= n; ++i)
        if (detail::counter_at(run, i) >= 2 * sq) {
            peak = i;
            break;
        }
    if (peak > n)
        throw std::logic_error("cut_short_cycles: no repeat and no high configuration");

    const auto levels = static_cast<std::size_t>(sq) + 1;
    std::vector<std::size_t> up(levels), down(levels);
    up[0] = peak;
    while (detail::counter_at(run, up[0]) != sq)
        --up[0];
    down[0] = peak;
    while (detail::counter_at(run, down[0]) != sq)
        ++down[0];
    for (std::size_t l = 1; l < levels; ++l) {
        const auto level = sq + static_cast<std::int64_t>(l);
        std::size_t i = up[0];
        while (detail::counter_at(run, i) != level)
            ++i;
        up[l] = i;
        std::size_t j = down[0];
        while (detail::counter_at(run, j) != level)
            --j;
        down[l] = j;
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> first_level;
    for (std::size_t l = 0; l < levels; ++l) {
        const std::pair key{run.configurations[up[l]].state.value, run.configurations[down[l]].state.value};
        auto [it, fresh] = first_level.emplace(key, l);
        if (fresh)
            continue;
        const std::size_t lo = it->second;
        const std::size_t hi = l;
        f.r = run.configurations[up[lo]].state;
        f.s = run.configurations[down[lo]].state;
        f.x = sq + static_cast<std::int64_t>(lo);
        f.d = static_cast<std::int64_t>(hi - lo);
        f.alpha = detail::slice(pi, 0, up[lo]);
        f.beta = detail::slice(pi, up[lo], up[hi]);
        f.gamma = detail::slice(pi, up[hi], down[hi]);
        f.theta = detail::slice(pi, down[hi], down[lo]);
        f.eta = detail::slice(pi, down[lo], n);
        return f;
    }
    throw std::logic_error("cut_short_cycles: pigeonhole failed");
}

/// A search outcome that may have stopped before its completeness bound.
struct SearchOutcome {
    std::optional<Trace> trace;
    /// An absent trace means "no run exists" only when complete.
    bool complete = false;
};

/// (|Q|+x+y)³: some run p(x) → q(y) is shorter than this whenever one exists.
inline Int short_run_bound(const Tvass& oca, const Int& x, const Int& y)
{
    return power(Int(oca.state_count()) + x + y, 3);
}

/// Breadth-first search for a minimal-length run p(x) → q(y).
inline SearchOutcome short_run(const Tvass& oca, StateId p, const Int& x, StateId q, const Int& y,
                               const std::optional<Int>& cap = std::nullopt)
{
    detail::require_unit_oca(oca);
    const Int bound = short_run_bound(oca, x, y);
    const Int depth_limit_big = (cap ? std::min<Int>(*cap, bound - 1) : Int(bound - 1));
    const std::int64_t depth_limit = detail::clamp_to_i64(depth_limit_big, std::int64_t{1} << 40);
    const auto target_counter = static_cast<std::int64_t>(y);

    std::vector<detail::Parent> parents;
    std::vector<detail::Node> nodes;
    std::unordered_map<detail::Node, std::size_t, detail::NodeHash> index;
    const detail::Node start{p.value, static_cast<std::int64_t>(x), 0};
    nodes.push_back(start);
    parents.push_back({0, TransitionId{}});
    index.emplace(start, 0);
    std::size_t layer_begin = 0;
    for (std::int64_t depth = 0;; ++depth) {
        const std::size_t layer_end = nodes.size();
        for (std::size_t i = layer_begin; i < layer_end; ++i)
            if (nodes[i].state == q.value && nodes[i].counter == target_counter)
                return {detail::unwind(parents, i), true};
        if (layer_begin == layer_end)
            return {std::nullopt, true};
        if (depth >= depth_limit)
            return {std::nullopt, !cap || *cap >= bound - 1};
        for (std::size_t i = layer_begin; i < layer_end; ++i) {
            const detail::Node node = nodes[i];
            for (TransitionId t : oca.outgoing(StateId{node.state})) {
                const Transition& tr = oca.transition(t);
                std::int64_t c = node.counter;
                if (tr.action.is_test()) {
                    if (c != 0)
                        continue;
                } else {
                    c += static_cast<std::int64_t>(tr.action.delta()[0]);
                    if (c < 0)
                        continue;
                }
                const detail::Node next{tr.target.value, c, 0};
                if (index.emplace(next, nodes.size()).second) {
                    nodes.push_back(next);
                    parents.push_back({i, t});
                }
            }
        }
        layer_begin = layer_end;
    }
}

/// 539|Q|⁹: a run p(0) → q(0) with nonzero weight of a given sign has a witness this short.
inline Int signed_run_bound(const Woca& w)
{
    return 539 * power(Int(w.base().state_count()), 9);
}

inline constexpr std::size_t default_node_budget = 200'000;

/// Minimal-length run p(0) → q(0) whose weight has the sign of `sign` (±1).
/// Layered search over (state, counter) keeping, per node, the best weight seen
/// so far; a node reached again without a strictly better weight is pruned,
/// which preserves minimal length.
inline SearchOutcome short_signed_run(const Woca& w, StateId p, StateId q, int sign,
                                      const std::optional<Int>& cap = std::nullopt,
                                      std::size_t node_budget = default_node_budget)
{
    if (sign != 1 && sign != -1)
        throw UsageError("short_signed_run: sign must be +1 or -1");
    const Tvass& oca = w.base();
    const Int bound = signed_run_bound(w);
    const Int limit = cap ? std::min<Int>(*cap, bound) : bound;
    if (limit < 1)
        throw UsageError("short_signed_run: cap must be at least 1");
    const bool has_sign = std::any_of(w.weights().begin(), w.weights().end(), [&](int x) { return x * sign > 0; });
    if (!has_sign)
        return {std::nullopt, true};
    const std::int64_t max_depth = detail::clamp_to_i64(limit, std::int64_t{1} << 40);

    struct Entry {
        std::uint32_t state;
        std::int64_t counter;
        std::int64_t score; // weight times sign
    };
    std::vector<Entry> entries{{p.value, 0, 0}};
    std::vector<detail::Parent> parents{{0, TransitionId{}}};
    std::unordered_map<detail::Node, std::int64_t, detail::NodeHash> best;
    best[{p.value, 0, 0}] = 0;
    std::vector<std::size_t> layer{0};

    for (std::int64_t depth = 0; depth < max_depth; ++depth) {
        std::unordered_map<detail::Node, std::size_t, detail::NodeHash> next_layer;
        for (std::size_t idx : layer) {
            const Entry e = entries[idx];
            for (TransitionId t : oca.outgoing(StateId{e.state})) {
                const Transition& tr = oca.transition(t);
                std::int64_t c = e.counter;
                if (tr.action.is_test()) {
                    if (c != 0)
                        continue;
                } else {
                    c += static_cast<std::int64_t>(tr.action.delta()[0]);
                    if (c < 0 || c > max_depth - depth)
                        continue;
                }
                const std::int64_t score = e.score + sign * w.weight(t);
                const detail::Node key{tr.target.value, c, 0};
                auto it = best.find(key);
                if (it != best.end() && it->second >= score)
                    continue;
                best[key] = score;
                auto slot = next_layer.find(key);
                if (slot != next_layer.end()) {
                    entries[slot->second] = {tr.target.value, c, score};
                    parents[slot->second] = {idx, t};
                } else {
                    next_layer.emplace(key, entries.size());
                    entries.push_back({tr.target.value, c, score});
                    parents.push_back({idx, t});
                }
            }
        }
        if (next_layer.empty())
            return {std::nullopt, true};
        layer.clear();
        std::optional<std::size_t> hit;
        for (const auto& [key, idx] : next_layer) {
            layer.push_back(idx);
            if (key.state == q.value && key.counter == 0 && entries[idx].score > 0)
                hit = hit ? std::min(*hit, idx) : idx;
        }
        if (hit)
            return {detail::unwind(parents, *hit), true};
        std::sort(layer.begin(), layer.end());
        if (entries.size() > node_budget)
            return {std::nullopt, false};
    }
    return {std::nullopt, limit >= bound};
}

/// Minimal-length run p(0) → q(0) with λ(π) ≡ target (mod m), searched over
/// (state, counter, weight mod m) up to length m²|Q|³ - 1.
inline std::optional<Trace> run_weight_mod(const Woca& w, StateId p, StateId q, const Int& target, const Int& modulus)
{
    if (modulus < 1)
        throw UsageError("run_weight_mod: modulus must be positive");
    const Tvass& oca = w.base();
    const Int length_bound = modulus * modulus * power(Int(oca.state_count()), 3);
    const std::int64_t max_depth = detail::clamp_to_i64(length_bound - 1, std::int64_t{1} << 40);
    const auto mod = static_cast<std::int64_t>(modulus);
    const auto want = static_cast<std::int64_t>(((target % modulus) + modulus) % modulus);

    std::vector<detail::Node> nodes{{p.value, 0, 0}};
    std::vector<detail::Parent> parents{{0, TransitionId{}}};
    std::unordered_map<detail::Node, std::size_t, detail::NodeHash> index{{nodes[0], 0}};
    std::size_t layer_begin = 0;
    for (std::int64_t depth = 0;; ++depth) {
        const std::size_t layer_end = nodes.size();
        for (std::size_t i = layer_begin; i < layer_end; ++i)
            if (nodes[i].state == q.value && nodes[i].counter == 0 && nodes[i].weight == want)
                return detail::unwind(parents, i);
        if (layer_begin == layer_end || depth >= max_depth)
            return std::nullopt;
        for (std::size_t i = layer_begin; i < layer_end; ++i) {
            const detail::Node node = nodes[i];
            for (TransitionId t : oca.outgoing(StateId{node.state})) {
                const Transition& tr = oca.transition(t);
                std::int64_t c = node.counter;
                if (tr.action.is_test()) {
                    if (c != 0)
                        continue;
                } else {
                    c += static_cast<std::int64_t>(tr.action.delta()[0]);
                    if (c < 0 || c > max_depth - depth)
                        continue;
                }
                const detail::Node next{tr.target.value, c, (((node.weight + w.weight(t)) % mod) + mod) % mod};
                if (index.emplace(next, nodes.size()).second) {
                    nodes.push_back(next);
                    parents.push_back({i, t});
                }
            }
        }
        layer_begin = layer_end;
    }
}

/// p(0) →^{α·βⁿ} q(0) with total weight w, β a cycle on q(0).
struct WeightCertificate {
    Trace alpha;
    Trace beta;
    Int n;
    Int w;
};

inline bool check_weight_certificate(const Woca& w, StateId p, StateId q, const WeightCertificate& cert)
{
    const Tvass& oca = w.base();
    const Configuration q0{q, IntVector{0}};
    if (!cert.beta.empty()) {
        auto loop = apply_trace(oca, q0, cert.beta);
        if (!loop || *loop != q0)
            return false;
    }
    auto end = apply_trace(oca, Configuration{p, IntVector{0}}, cert.alpha);
    if (!end || *end != q0)
        return false;
    return weight(w, cert.alpha) + cert.n * weight(w, cert.beta) == cert.w;
}

/// (2|Q|)^39
inline Int weight_certificate_bound(const Woca& w)
{
    return power(2 * Int(w.base().state_count()), 39);
}

namespace detail {

/// Minimal-length run p(0) → q(0) with λ ≡ target (mod m) whose weight gap to
/// `target` can be closed by an available cycle: zero gap, or a positive gap
/// with a positive cycle, or a negative gap with a negative cycle.
inline std::optional<Trace> compensable_run(const Woca& w, StateId p, StateId q, const Int& target, const Int& modulus,
                                            bool positive_cycle, bool negative_cycle, std::size_t node_budget)
{
    const Tvass& oca = w.base();
    const Int length_bound = modulus * modulus * power(Int(oca.state_count()), 3);
    const std::int64_t max_depth = clamp_to_i64(length_bound - 1, std::int64_t{1} << 40);
    const auto mod = static_cast<std::int64_t>(modulus);
    const auto goal = static_cast<std::int64_t>(target);
    const auto accepts = [&](const Node& n) {
        if (n.state != q.value || n.counter != 0 || (((goal - n.weight) % mod) + mod) % mod != 0)
            return false;
        return n.weight == goal || (goal > n.weight && positive_cycle) || (goal < n.weight && negative_cycle);
    };

    std::vector<Node> nodes{{p.value, 0, 0}};
    std::vector<Parent> parents{{0, TransitionId{}}};
    std::unordered_map<Node, std::size_t, NodeHash> index{{nodes[0], 0}};
    std::size_t layer_begin = 0;
    for (std::int64_t depth = 0;; ++depth) {
        const std::size_t layer_end = nodes.size();
        for (std::size_t i = layer_begin; i < layer_end; ++i)
            if (accepts(nodes[i]))
                return unwind(parents, i);
        if (layer_begin == layer_end || depth >= max_depth || nodes.size() > node_budget)
            return std::nullopt;
        for (std::size_t i = layer_begin; i < layer_end; ++i) {
            const Node node = nodes[i];
            for (TransitionId t : oca.outgoing(StateId{node.state})) {
                const Transition& tr = oca.transition(t);
                std::int64_t c = node.counter;
                if (tr.action.is_test()) {
                    if (c != 0)
                        continue;
                } else {
                    c += static_cast<std::int64_t>(tr.action.delta()[0]);
                    if (c < 0 || c > max_depth - depth)
                        continue;
                }
                const Node next{tr.target.value, c, node.weight + w.weight(t)};
                if (index.emplace(next, nodes.size()).second) {
                    nodes.push_back(next);
                    parents.push_back({i, t});
                }
            }
        }
        layer_begin = layer_end;
    }
}

} // namespace detail

/// Builds α, a cycle β on q(0) and n with p(0) →^{αβⁿ} q(0) of weight
/// `target`, assuming p(0) →*_target q(0) →* p(0). Nothing when q(0) and
/// p(0) are not mutually reachable; throws when a sub-search fails.
inline std::optional<WeightCertificate> lps_weight_certificate(const Woca& w, StateId p, StateId q, const Int& target,
                                                               std::size_t node_budget = default_node_budget)
{
    const Tvass& oca = w.base();
    if (!short_run(oca, p, 0, q, 0).trace || !short_run(oca, q, 0, p, 0).trace)
        return std::nullopt;

    const SearchOutcome up = short_signed_run(w, q, q, +1, std::nullopt, node_budget);
    const SearchOutcome down = short_signed_run(w, q, q, -1, std::nullopt, node_budget);
    const Trace beta = up.trace.value_or(Trace{});
    const Trace theta = down.trace.value_or(Trace{});
    const Int lb = weight(w, beta);
    const Int lt = weight(w, theta);

    Int modulus = 1;
    if (!beta.empty() && theta.empty())
        modulus = lb;
    else if (beta.empty() && !theta.empty())
        modulus = -lt;
    else if (!beta.empty() && !theta.empty())
        modulus = -lb * lt;

    auto alpha = detail::compensable_run(w, p, q, target, modulus, !beta.empty(), !theta.empty(), node_budget);
    if (!alpha)
        throw UsageError("lps_weight_certificate: no run p(0) -> q(0) with weight congruent to " + target.str() +
                         " mod " + modulus.str() + std::string(up.complete && down.complete ? "" : " (cycle searches incomplete)"));
    const Int gap = target - weight(w, *alpha);

    WeightCertificate cert{*alpha, Trace{}, 0, target};
    if (gap > 0) {
        if (theta.empty()) {
            cert.beta = beta;
            cert.n = gap / lb;
        } else {
            // gap = k·λβ·λθ with k < 0 here; iterate β (-k)·(-λθ)... written as k·λθ
            const Int k = gap / (lb * lt);
            cert.beta = beta;
            cert.n = k * lt;
        }
    } else if (gap < 0) {
        if (beta.empty()) {
            cert.beta = theta;
            cert.n = gap / lt;
        } else {
            const Int k = gap / (lb * lt);
            cert.beta = theta;
            cert.n = k * lb;
        }
    } else if (!beta.empty()) {
        cert.beta = beta;
    } else {
        cert.beta = theta;
    }
    if (!check_weight_certificate(w, p, q, cert))
        throw std::logic_error("lps_weight_certificate: constructed certificate does not check");
    return cert;
}

} // namespace tvr::woca
