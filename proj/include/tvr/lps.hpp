#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "smallsol.hpp"

namespace tvr {

/// α₀ β₁* α₁ ⋯ β_k* α_k
struct LinearPathScheme {
    std::vector<Trace> alpha; // k+1 connecting paths
    std::vector<Trace> beta;  // k cycles

    [[nodiscard]] std::size_t star_length() const { return beta.size(); }

    [[nodiscard]] std::size_t length() const
    {
        std::size_t n = 0;
        for (const Trace& a : alpha)
            n += a.size();
        for (const Trace& b : beta)
            n += b.size();
        return n;
    }

    /// α₀β₁α₁⋯β_kα_k
    [[nodiscard]] Trace skeleton() const
    {
        Trace out;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            if (j > 0)
                out.insert(out.end(), beta[j - 1].begin(), beta[j - 1].end());
            out.insert(out.end(), alpha[j].begin(), alpha[j].end());
        }
        return out;
    }

    friend bool operator==(const LinearPathScheme&, const LinearPathScheme&) = default;
};

struct CountedLps {
    LinearPathScheme scheme;
    std::vector<Int> counts;

    /// α₀ β₁^n₁ α₁ ⋯ β_k^n_k α_k
    [[nodiscard]] Trace expand() const
    {
        if (counts.size() != scheme.star_length())
            throw UsageError("counts length " + std::to_string(counts.size()) + " does not match star-length " +
                             std::to_string(scheme.star_length()));
        Trace out;
        for (std::size_t j = 0; j < scheme.alpha.size(); ++j) {
            if (j > 0) {
                const Trace& b = scheme.beta[j - 1];
                for (Int n = 0; n < counts[j - 1]; ++n)
                    out.insert(out.end(), b.begin(), b.end());
            }
            out.insert(out.end(), scheme.alpha[j].begin(), scheme.alpha[j].end());
        }
        return out;
    }

    friend bool operator==(const CountedLps&, const CountedLps&) = default;
};

/// Checks the structural invariants against a model: well-formed shape, every
/// β a cycle, and α₀β₁α₁⋯β_kα_k a path. Returns the path endpoints.
inline std::pair<StateId, StateId> check_scheme(const Tvass& model, const LinearPathScheme& L)
{
    if (L.alpha.size() != L.beta.size() + 1)
        throw UsageError("a linear path scheme needs one more path than cycles");
    for (std::size_t j = 0; j < L.beta.size(); ++j) {
        if (L.beta[j].empty())
            continue;
        auto ends = path_endpoints(model, L.beta[j]);
        if (!ends || ends->first != ends->second)
            throw UsageError("cycle " + std::to_string(j + 1) + " is not a cycle");
    }
    const Trace skeleton = L.skeleton();
    if (skeleton.empty())
        throw UsageError("empty scheme has no endpoints");
    auto ends = path_endpoints(model, skeleton);
    if (!ends)
        throw UsageError("the scheme skeleton is not a path");
    return *ends;
}

enum class DominanceOrder {
    /// componentwise ≥
    full,
    /// equality on counter 1, ≥ elsewhere
    first_exact,
};

/// Sum of the addition vectors along `pi`.
inline IntVector displacement(const Tvass& model, const Trace& pi)
{
    IntVector d(model.dimension());
    for (TransitionId t : pi) {
        const Transition& tr = model.transition(t);
        if (!tr.action.is_test())
            d += tr.action.delta();
    }
    return d;
}

/// Componentwise maximum of −displacement over all prefixes of `pi`
/// (including ε, so the result is ≥ 0).
inline IntVector min_prefix_vector(const Tvass& model, const Trace& pi)
{
    IntVector m(model.dimension());
    IntVector d(model.dimension());
    for (TransitionId t : pi) {
        const Transition& tr = model.transition(t);
        if (tr.action.is_test())
            continue;
        d += tr.action.delta();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (-d[i] > m[i])
                m[i] = -d[i];
    }
    return m;
}

inline DominanceOrder dominance_of(const Tvass& model, const Trace& pi)
{
    return contains_test(model, pi) ? DominanceOrder::first_exact : DominanceOrder::full;
}

inline bool dominates(DominanceOrder order, const IntVector& x, const IntVector& y)
{
    if (order == DominanceOrder::first_exact && x[0] != y[0])
        return false;
    return x.dominates(y);
}

/// min_prefix_vector of the mirrored trace in the reversed model.
inline IntVector reversed_min_prefix(const Tvass& model, const Trace& pi)
{
    IntVector m(model.dimension());
    IntVector d(model.dimension());
    for (auto it = pi.rbegin(); it != pi.rend(); ++it) {
        const Transition& tr = model.transition(*it);
        if (tr.action.is_test())
            continue;
        d -= tr.action.delta();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (-d[i] > m[i])
                m[i] = -d[i];
    }
    return m;
}

/// A path is feasible iff it can be replayed from its minimal start vector.
inline bool is_feasible(const Tvass& model, const Trace& pi)
{
    if (pi.empty())
        return true;
    auto ends = path_endpoints(model, pi);
    if (!ends)
        throw UsageError("is_feasible: trace is not a path");
    return apply_trace(model, Configuration{ends->first, min_prefix_vector(model, pi)}, pi).has_value();
}

/// Closed-form characterization of p(x) →π q(y) for a feasible path.
inline bool path_relation(const Tvass& model, const Trace& pi, const IntVector& x, const IntVector& y)
{
    if (!is_feasible(model, pi))
        throw UsageError("path_relation: path is not feasible");
    const DominanceOrder order = dominance_of(model, pi);
    return x.is_nonnegative() && y.is_nonnegative() && dominates(order, x, min_prefix_vector(model, pi)) &&
           y == x + displacement(model, pi);
}

/// Closed-form characterization of q(x) →β^n q(y) for a feasible cycle and n ≥ 1.
inline bool cycle_relation(const Tvass& model, const Trace& beta, const IntVector& x, const IntVector& y, const Int& n)
{
    if (n < 1)
        throw UsageError("cycle_relation: iteration count must be positive");
    if (!beta.empty()) {
        auto ends = path_endpoints(model, beta);
        if (!ends || ends->first != ends->second)
            throw UsageError("cycle_relation: trace is not a cycle");
    }
    if (!is_feasible(model, beta))
        throw UsageError("cycle_relation: cycle is not feasible");
    const DominanceOrder order = dominance_of(model, beta);
    return x.is_nonnegative() && y.is_nonnegative() && dominates(order, x, min_prefix_vector(model, beta)) &&
           dominates(order, y, reversed_min_prefix(model, beta)) && y == x + n * displacement(model, beta);
}

/// Which part of a scheme and which condition produced a system row.
struct RowTag {
    enum class Condition {
        path_entry,  // x_j ⪰_{α_j} m_{α_j}
        cycle_entry, // y_{j-1} ⪰_{β_j} m_{β_j}
        cycle_exit,  // x_j ⪰_{β_j} m_{β̄_j}
        target,      // y = y_k
    };
    Condition condition;
    std::size_t segment = 0;   // j
    std::size_t component = 0; // counter index, 0-based
    bool upper = false;        // the ≤ half of an equality

    [[nodiscard]] std::string describe() const
    {
        std::string what;
        switch (condition) {
        case Condition::path_entry: what = "entry of path alpha_" + std::to_string(segment); break;
        case Condition::cycle_entry: what = "entry of cycle beta_" + std::to_string(segment); break;
        case Condition::cycle_exit: what = "exit of cycle beta_" + std::to_string(segment); break;
        case Condition::target: what = "target equality"; break;
        }
        return what + ", counter " + std::to_string(component + 1) + (upper ? " (upper)" : "");
    }

    friend bool operator==(const RowTag&, const RowTag&) = default;
};

/// coeffs · n ≥ constant, over nonnegative unknowns n.
struct IneqRow {
    IntVector coeffs;
    Int constant;
    RowTag tag;
};

struct IneqSystem {
    std::size_t num_vars = 0;
    std::vector<IneqRow> rows;

    [[nodiscard]] bool satisfied_by(const std::vector<Int>& n) const
    {
        for (const IneqRow& r : rows) {
            Int v = 0;
            for (std::size_t j = 0; j < num_vars; ++j)
                v += r.coeffs[j] * n[j];
            if (v < r.constant)
                return false;
        }
        return true;
    }

    /// Rows that `n` violates.
    [[nodiscard]] std::vector<RowTag> violated_by(const std::vector<Int>& n) const
    {
        std::vector<RowTag> out;
        for (const IneqRow& r : rows) {
            Int v = 0;
            for (std::size_t j = 0; j < num_vars; ++j)
                v += r.coeffs[j] * n[j];
            if (v < r.constant)
                out.push_back(r.tag);
        }
        return out;
    }

    /// Drops the tags.
    [[nodiscard]] smallsol::InhomSystem to_inhom() const
    {
        smallsol::InhomSystem sys;
        sys.rhs = IntVector(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            sys.matrix.push_back(rows[i].coeffs);
            sys.rhs[i] = rows[i].constant;
        }
        return sys;
    }
};

namespace detail {

/// A vector whose components are affine in the unknowns n₁..n_k.
struct AffineVector {
    std::vector<IntVector> coeffs; // per component
    IntVector constant;

    AffineVector(const IntVector& c, std::size_t k) : coeffs(c.size(), IntVector(k)), constant(c) {}

    void add_constant(const IntVector& v) { constant += v; }

    void add_scaled_variable(std::size_t var, const IntVector& v)
    {
        for (std::size_t i = 0; i < v.size(); ++i)
            coeffs[i][var] += v[i];
    }
};

inline void emit_dominance(IneqSystem& sys, const AffineVector& lhs, const IntVector& bound, DominanceOrder order,
                           RowTag::Condition condition, std::size_t segment)
{
    for (std::size_t i = 0; i < bound.size(); ++i) {
        RowTag tag{condition, segment, i, false};
        sys.rows.push_back(IneqRow{lhs.coeffs[i], bound[i] - lhs.constant[i], tag});
        if (i == 0 && order == DominanceOrder::first_exact) {
            tag.upper = true;
            sys.rows.push_back(IneqRow{-lhs.coeffs[i], lhs.constant[i] - bound[i], tag});
        }
    }
}

} // namespace detail

/// The inequality system over (n₁..n_k) whose solutions are the iteration
/// counts that carry p(x) to q(y) along the scheme.
inline IneqSystem build_system(const Tvass& model, const LinearPathScheme& L, const IntVector& x, const IntVector& y)
{
    check_scheme(model, L);
    const std::size_t k = L.star_length();
    for (std::size_t j = 0; j <= k; ++j)
        if (!is_feasible(model, L.alpha[j]))
            throw UsageError("build_system: path alpha_" + std::to_string(j) + " is not feasible");
    for (std::size_t j = 1; j <= k; ++j)
        if (!is_feasible(model, L.beta[j - 1]))
            throw UsageError("build_system: cycle beta_" + std::to_string(j) + " is not feasible");

    using Cond = RowTag::Condition;
    IneqSystem sys;
    sys.num_vars = k;
    detail::AffineVector current(x, k); // x_0
    for (std::size_t j = 0; j <= k; ++j) {
        if (j > 0) {
            const Trace& beta = L.beta[j - 1];
            const DominanceOrder order = dominance_of(model, beta);
            // current is y_{j-1}
            detail::emit_dominance(sys, current, min_prefix_vector(model, beta), order, Cond::cycle_entry, j);
            current.add_scaled_variable(j - 1, displacement(model, beta));
            // current is x_j
            detail::emit_dominance(sys, current, reversed_min_prefix(model, beta), order, Cond::cycle_exit, j);
        }
        const Trace& alpha = L.alpha[j];
        detail::emit_dominance(sys, current, min_prefix_vector(model, alpha), dominance_of(model, alpha), Cond::path_entry, j);
        current.add_constant(displacement(model, alpha));
    }
    // y_k = y, as two opposite inequalities per component
    for (std::size_t i = 0; i < y.size(); ++i) {
        sys.rows.push_back(IneqRow{current.coeffs[i], y[i] - current.constant[i], RowTag{Cond::target, k, i, false}});
        sys.rows.push_back(IneqRow{-current.coeffs[i], current.constant[i] - y[i], RowTag{Cond::target, k, i, true}});
    }
    return sys;
}

/// Replays the concrete path of a counted scheme from p(x), p the scheme's source.
inline std::optional<Configuration> eval_counts(const Tvass& model, const CountedLps& cert, const IntVector& x)
{
    if (cert.counts.size() != cert.scheme.star_length())
        throw UsageError("counts length does not match star-length");
    for (const Int& n : cert.counts)
        if (n < 0)
            throw UsageError("negative iteration count");
    const auto ends = check_scheme(model, cert.scheme);
    return apply_trace(model, Configuration{ends.first, x}, cert.expand());
}

struct LpsReachResult {
    std::optional<std::vector<Int>> counts;
    /// False when some reduced system was only searched up to the budget.
    bool complete = true;
};

inline constexpr long long default_lps_search_budget = 24;

/// Searches counts n with p(x) →^{α₀β₁^n₁⋯} q(y). Each subset of cycles is
/// either dropped (count 0) or kept with count ≥ 1, in which case the system
/// of the reduced scheme is solved for n = 1 + n'. Witnesses are validated by
/// replay before they are returned.
inline LpsReachResult lps_reach(const Tvass& model, const LinearPathScheme& L, const IntVector& x, const IntVector& y,
                                const Int& budget = default_lps_search_budget)
{
    const auto ends = check_scheme(model, L);
    const std::size_t k = L.star_length();
    if (k > 20)
        throw UsageError("lps_reach: star-length too large for subset enumeration");
    LpsReachResult result;
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        // bit j set: cycle j+1 kept
        LinearPathScheme reduced;
        std::vector<std::size_t> kept;
        reduced.alpha.push_back(L.alpha[0]);
        for (std::size_t j = 0; j < k; ++j) {
            if (mask & (std::size_t{1} << j)) {
                kept.push_back(j);
                reduced.beta.push_back(L.beta[j]);
                reduced.alpha.push_back(L.alpha[j + 1]);
            } else {
                reduced.alpha.back().insert(reduced.alpha.back().end(), L.alpha[j + 1].begin(), L.alpha[j + 1].end());
            }
        }
        if (reduced.skeleton().empty()) {
            if (ends.first == ends.second && x == y) {
                result.counts = std::vector<Int>(k, Int(0));
                return result;
            }
            continue;
        }
        bool feasible = true;
        for (const Trace& a : reduced.alpha)
            feasible = feasible && is_feasible(model, a);
        if (!feasible)
            continue; // no run can follow a merged path that is infeasible

        IneqSystem sys = build_system(model, reduced, x, y);
        // substitute n = 1 + n'
        for (IneqRow& r : sys.rows)
            for (std::size_t j = 0; j < sys.num_vars; ++j)
                r.constant -= r.coeffs[j];
        const smallsol::SearchResult found = smallsol::find_small_solution(sys.to_inhom(), budget);
        if (found.status == smallsol::SearchStatus::inconclusive)
            result.complete = false;
        if (found.status != smallsol::SearchStatus::found)
            continue;
        std::vector<Int> counts(k, Int(0));
        for (std::size_t i = 0; i < kept.size(); ++i)
            counts[kept[i]] = 1 + (*found.solution)[i];
        auto end = eval_counts(model, CountedLps{L, counts}, x);
        if (!end || end->state != ends.second || end->counters != y)
            throw std::logic_error("lps_reach: system solution does not replay");
        result.counts = std::move(counts);
        return result;
    }
    return result;
}

} // namespace tvr
