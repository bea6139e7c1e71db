// Fixtures, random generators and reference oracles shared by the tests.
// The oracles here are deliberately naive and share no code with the
// explorers in the library.
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tvr/tvr.hpp"

namespace support {

using tvr::Configuration;
using tvr::Int;
using tvr::IntVector;
using tvr::Trace;
using tvr::Tvass;

inline Tvass ex_model()
{
    using tvr::Action;
    return Tvass(2, {"A", "B"},
                 {{"dAA", "A", Action::add(IntVector{-3, 4}), "A"},
                  {"dAB", "A", Action::test(), "B"},
                  {"dBB", "B", Action::add(IntVector{1, -1}), "B"},
                  {"dBA", "B", Action::add(IntVector{1, 0}), "A"}});
}

inline Configuration cfg(const Tvass& m, const std::string& state, std::initializer_list<long long> counters)
{
    return m.configuration(state, IntVector(counters));
}

/// A(0,x) →* A(0,y) on the example model, as stated in closed form.
inline bool ex_closed_form(long long x, long long y)
{
    if (x == y)
        return true;
    return x >= 2 && y >= x + 2 && (y != x + 3 || x >= 5) && (y != x + 5 || x >= 3);
}

using Plain = std::pair<std::uint32_t, std::vector<long long>>;

inline Plain plain(const Configuration& c)
{
    std::vector<long long> v;
    for (const Int& x : c.counters)
        v.push_back(static_cast<long long>(x));
    return {c.state.value, v};
}

struct Closure {
    std::set<Plain> seen;
    std::map<Plain, std::pair<Plain, tvr::TransitionId>> parent;
    /// every successor of every seen configuration was within the caps
    bool closed = true;
};

/// Straightforward search using only tvr::step. Successors above `norm_cap`
/// are dropped (and clear `closed`); so does exceeding `limit` configurations.
inline Closure closure(const Tvass& model, const Configuration& from, long long norm_cap, std::size_t limit = 100'000)
{
    Closure out;
    std::deque<Configuration> queue{from};
    out.seen.insert(plain(from));
    while (!queue.empty()) {
        if (out.seen.size() > limit) {
            out.closed = false;
            break;
        }
        const Configuration c = queue.front();
        queue.pop_front();
        for (tvr::TransitionId t : model.outgoing(c.state)) {
            auto next = tvr::step(model, c, t);
            if (!next)
                continue;
            if (next->counters.norm() > norm_cap) {
                out.closed = false;
                continue;
            }
            if (out.seen.insert(plain(*next)).second) {
                out.parent.emplace(plain(*next), std::pair{plain(c), t});
                queue.push_back(*next);
            }
        }
    }
    return out;
}

/// Length of a shortest run, if the capped search finds one.
inline std::optional<std::size_t> shortest(const Tvass& model, const Configuration& from, const Configuration& to,
                                           long long norm_cap)
{
    std::map<Plain, std::size_t> dist{{plain(from), 0}};
    std::deque<Configuration> queue{from};
    while (!queue.empty()) {
        const Configuration c = queue.front();
        queue.pop_front();
        if (c == to)
            return dist[plain(c)];
        for (tvr::TransitionId t : model.outgoing(c.state)) {
            auto next = tvr::step(model, c, t);
            if (!next || next->counters.norm() > norm_cap)
                continue;
            if (dist.emplace(plain(*next), dist[plain(c)] + 1).second)
                queue.push_back(*next);
        }
    }
    return std::nullopt;
}

/// Random 2-dimensional model with transitions drawn independently.
inline Tvass random_model(std::mt19937_64& rng, std::size_t states, long long max_norm, double test_p,
                          std::size_t transitions, std::size_t dim = 2)
{
    std::uniform_int_distribution<std::size_t> pick(0, states - 1);
    std::uniform_int_distribution<long long> comp(-max_norm, max_norm);
    std::bernoulli_distribution test(test_p);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < states; ++i)
        names.push_back("s" + std::to_string(i));
    std::vector<tvr::TransitionSpec> specs;
    for (std::size_t i = 0; i < transitions; ++i) {
        const std::string id = "u" + std::to_string(i);
        const std::string p = names[pick(rng)], q = names[pick(rng)];
        if (test(rng)) {
            specs.push_back({id, p, tvr::Action::test(), q});
        } else {
            IntVector d(dim);
            for (std::size_t k = 0; k < dim; ++k)
                d[k] = comp(rng);
            specs.push_back({id, p, tvr::Action::add(d), q});
        }
    }
    return Tvass(dim, names, specs);
}

/// A random walk along transitions (not necessarily feasible), starting at `from`.
inline Trace random_walk(std::mt19937_64& rng, const Tvass& model, tvr::StateId from, std::size_t length)
{
    Trace out;
    tvr::StateId at = from;
    for (std::size_t i = 0; i < length; ++i) {
        const auto& out_edges = model.outgoing(at);
        if (out_edges.empty())
            break;
        std::uniform_int_distribution<std::size_t> pick(0, out_edges.size() - 1);
        const tvr::TransitionId t = out_edges[pick(rng)];
        out.push_back(t);
        at = model.transition(t).target;
    }
    return out;
}

/// A random run of the given model from `c`: at each step a uniformly chosen
/// enabled transition.
inline tvr::Run random_run(std::mt19937_64& rng, const Tvass& model, const Configuration& c, std::size_t length)
{
    tvr::Run run;
    run.configurations.push_back(c);
    for (std::size_t i = 0; i < length; ++i) {
        std::vector<std::pair<tvr::TransitionId, Configuration>> enabled;
        for (tvr::TransitionId t : model.outgoing(run.configurations.back().state))
            if (auto next = tvr::step(model, run.configurations.back(), t))
                enabled.emplace_back(t, *next);
        if (enabled.empty())
            break;
        std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
        auto& [t, next] = enabled[pick(rng)];
        run.trace.push_back(t);
        run.configurations.push_back(next);
    }
    return run;
}

} // namespace support
