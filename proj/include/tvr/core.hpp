#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "vector.hpp"

namespace tvr {

struct StateId {
    std::uint32_t value = 0;
    auto operator<=>(const StateId&) const = default;
};

struct TransitionId {
    std::uint32_t value = 0;
    auto operator<=>(const TransitionId&) const = default;
};

struct ZeroTest {
    friend bool operator==(const ZeroTest&, const ZeroTest&) = default;
};

/// Either an addition vector or the zero-test on the first counter.
class Action {
public:
    Action(IntVector delta) : kind_(std::move(delta)) {} // NOLINT(google-explicit-constructor)
    Action(ZeroTest) : kind_(ZeroTest{}) {}              // NOLINT(google-explicit-constructor)

    static Action add(IntVector delta) { return Action(std::move(delta)); }
    static Action test() { return Action(ZeroTest{}); }

    [[nodiscard]] bool is_test() const { return std::holds_alternative<ZeroTest>(kind_); }
    [[nodiscard]] const IntVector& delta() const { return std::get<IntVector>(kind_); }

    friend bool operator==(const Action&, const Action&) = default;

private:
    std::variant<IntVector, ZeroTest> kind_;
};

struct Transition {
    std::string name;
    StateId source;
    Action action;
    StateId target;
};

/// Input record for building a model, endpoints given by state name.
struct TransitionSpec {
    std::string name;
    std::string source;
    Action action;
    std::string target;
};

using Trace = std::vector<TransitionId>;

struct Configuration {
    StateId state;
    IntVector counters;

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct Run {
    std::vector<Configuration> configurations;
    Trace trace;
};

/// A d-dimensional VASS whose first counter may be tested for zero. With
/// `testable == false` it is a plain d-VASS; with d == 1 it is a one-counter
/// automaton.
class Tvass {
public:
    Tvass(std::size_t dimension, std::vector<std::string> states, const std::vector<TransitionSpec>& transitions,
          bool testable = true)
        : dimension_(dimension), states_(std::move(states)), testable_(testable)
    {
        if (dimension_ == 0)
            throw ModelError("dimension must be positive");
        if (states_.empty())
            throw ModelError("a model needs at least one state");
        for (std::size_t i = 0; i < states_.size(); ++i) {
            if (!state_index_.emplace(states_[i], StateId{static_cast<std::uint32_t>(i)}).second)
                throw ModelError("duplicate state '" + states_[i] + "'");
        }
        transitions_.reserve(transitions.size());
        for (const TransitionSpec& spec : transitions) {
            if (spec.action.is_test()) {
                if (!testable_)
                    throw ModelError("zero-test transition '" + spec.name + "' in a model without tests");
            } else if (spec.action.delta().size() != dimension_) {
                throw ModelError("transition '" + spec.name + "' has " + std::to_string(spec.action.delta().size()) +
                                 " components, expected " + std::to_string(dimension_));
            }
            const TransitionId id{static_cast<std::uint32_t>(transitions_.size())};
            if (!transition_index_.emplace(spec.name, id).second)
                throw ModelError("duplicate transition id '" + spec.name + "'");
            transitions_.push_back(Transition{spec.name, lookup_state(spec.source), spec.action, lookup_state(spec.target)});
        }
        outgoing_.resize(states_.size());
        for (std::size_t i = 0; i < transitions_.size(); ++i)
            outgoing_[transitions_[i].source.value].push_back(TransitionId{static_cast<std::uint32_t>(i)});
    }

    [[nodiscard]] std::size_t dimension() const { return dimension_; }
    [[nodiscard]] bool testable() const { return testable_; }
    [[nodiscard]] std::size_t state_count() const { return states_.size(); }
    [[nodiscard]] const std::vector<std::string>& state_names() const { return states_; }
    [[nodiscard]] const std::string& state_name(StateId q) const { return states_.at(q.value); }
    [[nodiscard]] const std::vector<Transition>& transitions() const { return transitions_; }
    [[nodiscard]] const std::vector<TransitionId>& outgoing(StateId q) const { return outgoing_.at(q.value); }

    [[nodiscard]] const Transition& transition(TransitionId t) const
    {
        if (t.value >= transitions_.size())
            throw UsageError("unknown transition index " + std::to_string(t.value));
        return transitions_[t.value];
    }

    [[nodiscard]] std::optional<StateId> find_state(std::string_view name) const
    {
        auto it = state_index_.find(std::string(name));
        if (it == state_index_.end())
            return std::nullopt;
        return it->second;
    }

    [[nodiscard]] StateId state(std::string_view name) const
    {
        if (auto q = find_state(name))
            return *q;
        throw UsageError("unknown state '" + std::string(name) + "'");
    }

    [[nodiscard]] std::optional<TransitionId> find_transition(std::string_view name) const
    {
        auto it = transition_index_.find(std::string(name));
        if (it == transition_index_.end())
            return std::nullopt;
        return it->second;
    }

    [[nodiscard]] TransitionId transition_id(std::string_view name) const
    {
        if (auto t = find_transition(name))
            return *t;
        throw UsageError("unknown transition '" + std::string(name) + "'");
    }

    /// Trace from transition names.
    [[nodiscard]] Trace trace(const std::vector<std::string>& names) const
    {
        Trace out;
        out.reserve(names.size());
        for (const std::string& n : names)
            out.push_back(transition_id(n));
        return out;
    }

    [[nodiscard]] std::vector<std::string> names(const Trace& pi) const
    {
        std::vector<std::string> out;
        out.reserve(pi.size());
        for (TransitionId t : pi)
            out.push_back(transition(t).name);
        return out;
    }

    [[nodiscard]] Configuration configuration(std::string_view state_name, IntVector counters) const
    {
        if (counters.size() != dimension_)
            throw UsageError("configuration has " + std::to_string(counters.size()) + " counters, expected " +
                             std::to_string(dimension_));
        if (!counters.is_nonnegative())
            throw UsageError("configuration counters must be nonnegative");
        return Configuration{state(state_name), std::move(counters)};
    }

    /// Largest infinity norm of an addition action (0 if there are none).
    [[nodiscard]] Int action_norm() const
    {
        Int best = 0;
        for (const Transition& t : transitions_)
            if (!t.action.is_test())
                best = std::max(best, t.action.delta().norm());
        return best;
    }

    [[nodiscard]] bool has_tests() const
    {
        return std::any_of(transitions_.begin(), transitions_.end(), [](const Transition& t) { return t.action.is_test(); });
    }

    [[nodiscard]] std::string to_string(const Configuration& c) const
    {
        return state_name(c.state) + c.counters.to_string();
    }

    friend bool operator==(const Tvass& a, const Tvass& b)
    {
        if (a.dimension_ != b.dimension_ || a.testable_ != b.testable_ || a.states_ != b.states_ ||
            a.transitions_.size() != b.transitions_.size())
            return false;
        for (std::size_t i = 0; i < a.transitions_.size(); ++i) {
            const Transition& s = a.transitions_[i];
            const Transition& t = b.transitions_[i];
            if (s.name != t.name || s.source != t.source || s.target != t.target || !(s.action == t.action))
                return false;
        }
        return true;
    }

private:
    StateId lookup_state(const std::string& name) const
    {
        auto it = state_index_.find(name);
        if (it == state_index_.end())
            throw ModelError("undeclared state '" + name + "'");
        return it->second;
    }

    std::size_t dimension_;
    std::vector<std::string> states_;
    bool testable_;
    std::vector<Transition> transitions_;
    std::unordered_map<std::string, StateId> state_index_;
    std::unordered_map<std::string, TransitionId> transition_index_;
    std::vector<std::vector<TransitionId>> outgoing_;
};

/// Successor of `c` under `t`, or nothing when the step is disabled.
/// Throws UsageError when `t` does not leave `c.state`.
inline std::optional<Configuration> step(const Tvass& model, const Configuration& c, TransitionId t)
{
    const Transition& tr = model.transition(t);
    if (tr.source != c.state)
        throw UsageError("transition '" + tr.name + "' does not leave state '" + model.state_name(c.state) + "'");
    if (tr.action.is_test()) {
        if (c.counters[0] != 0)
            return std::nullopt;
        return Configuration{tr.target, c.counters};
    }
    IntVector next = c.counters + tr.action.delta();
    if (!next.is_nonnegative())
        return std::nullopt;
    return Configuration{tr.target, std::move(next)};
}

/// Successor under `t` without the source check; nothing if disabled.
inline std::optional<Configuration> fire(const Transition& tr, const Configuration& c)
{
    if (tr.action.is_test()) {
        if (c.counters[0] != 0)
            return std::nullopt;
        return Configuration{tr.target, c.counters};
    }
    IntVector next = c.counters + tr.action.delta();
    if (!next.is_nonnegative())
        return std::nullopt;
    return Configuration{tr.target, std::move(next)};
}

inline std::optional<Configuration> apply_trace(const Tvass& model, const Configuration& c, const Trace& pi)
{
    Configuration current = c;
    for (TransitionId t : pi) {
        auto next = step(model, current, t);
        if (!next)
            return std::nullopt;
        current = std::move(*next);
    }
    return current;
}

/// The run visited by `pi` from `c`, if every step is enabled.
inline std::optional<Run> replay(const Tvass& model, const Configuration& c, const Trace& pi)
{
    Run run;
    run.configurations.reserve(pi.size() + 1);
    run.configurations.push_back(c);
    for (TransitionId t : pi) {
        auto next = step(model, run.configurations.back(), t);
        if (!next)
            return std::nullopt;
        run.configurations.push_back(std::move(*next));
    }
    run.trace = pi;
    return run;
}

inline bool is_path(const Tvass& model, const Trace& pi, StateId from, StateId to)
{
    StateId at = from;
    for (TransitionId t : pi) {
        const Transition& tr = model.transition(t);
        if (tr.source != at)
            return false;
        at = tr.target;
    }
    return at == to;
}

/// Endpoints of a nonempty path, or nothing when `pi` does not chain.
inline std::optional<std::pair<StateId, StateId>> path_endpoints(const Tvass& model, const Trace& pi)
{
    if (pi.empty())
        return std::nullopt;
    const StateId from = model.transition(pi.front()).source;
    StateId at = from;
    for (TransitionId t : pi) {
        const Transition& tr = model.transition(t);
        if (tr.source != at)
            return std::nullopt;
        at = tr.target;
    }
    return std::pair{from, at};
}

inline bool contains_test(const Tvass& model, const Trace& pi)
{
    return std::any_of(pi.begin(), pi.end(), [&](TransitionId t) { return model.transition(t).action.is_test(); });
}

inline constexpr std::string_view reversal_suffix = "~";

/// Every transition (p,a,q) becomes (q,-a,p); tests keep their action. Ids
/// keep their index and gain a reversal suffix.
inline Tvass reverse(const Tvass& model)
{
    std::vector<TransitionSpec> specs;
    specs.reserve(model.transitions().size());
    for (const Transition& t : model.transitions()) {
        Action a = t.action.is_test() ? Action::test() : Action::add(-t.action.delta());
        specs.push_back(TransitionSpec{t.name + std::string(reversal_suffix), model.state_name(t.target), std::move(a),
                                       model.state_name(t.source)});
    }
    return Tvass(model.dimension(), model.state_names(), specs, model.testable());
}

/// The reversed trace in `reverse(model)`: order flipped, same indices.
inline Trace mirror(const Trace& pi)
{
    return Trace(pi.rbegin(), pi.rend());
}

inline Trace concat(std::initializer_list<std::reference_wrapper<const Trace>> parts)
{
    Trace out;
    for (const Trace& p : parts)
        out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline Trace repeat(const Trace& pi, std::size_t times)
{
    Trace out;
    out.reserve(pi.size() * times);
    for (std::size_t i = 0; i < times; ++i)
        out.insert(out.end(), pi.begin(), pi.end());
    return out;
}

} // namespace tvr

template <>
struct std::hash<tvr::Configuration> {
    std::size_t operator()(const tvr::Configuration& c) const noexcept
    {
        std::size_t seed = c.counters.hash();
        boost::hash_combine(seed, c.state.value);
        return seed;
    }
};
