#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "vector.hpp"

namespace tvr::smallsol {

/// M·x = 0 over N^k. Rows are the e equations.
struct HomSystem {
    std::vector<IntVector> matrix;

    [[nodiscard]] std::size_t variables() const { return matrix.empty() ? 0 : matrix.front().size(); }
};

/// M·x ≥ b over N^k.
struct InhomSystem {
    std::vector<IntVector> matrix;
    IntVector rhs;

    [[nodiscard]] std::size_t variables() const { return matrix.empty() ? 0 : matrix.front().size(); }
};

namespace detail {

inline Int row_weight(const IntVector& row)
{
    Int s = 0;
    for (const Int& v : row)
        s += abs_value(v);
    return s;
}

inline Int dot(const IntVector& row, const IntVector& x)
{
    Int s = 0;
    for (std::size_t j = 0; j < row.size(); ++j)
        s += row[j] * x[j];
    return s;
}

inline void check_shape(const std::vector<IntVector>& matrix, std::size_t k)
{
    for (const IntVector& row : matrix)
        if (row.size() != k)
            throw UsageError("matrix rows have inconsistent lengths");
}

/// Visits every x ∈ N^k with coordinate sum exactly `sum`, in increasing
/// lexicographic order. Stops early when `visit` returns true.
inline bool for_each_with_sum(std::size_t k, const Int& sum, const std::function<bool(const IntVector&)>& visit)
{
    IntVector x(k);
    if (k == 0)
        return sum == 0 && visit(x);
    std::function<bool(std::size_t, const Int&)> rec = [&](std::size_t j, const Int& remaining) -> bool {
        if (j + 1 == k) {
            x[j] = remaining;
            return visit(x);
        }
        for (Int v = 0; v <= remaining; ++v) {
            x[j] = v;
            if (rec(j + 1, remaining - v))
                return true;
        }
        return false;
    };
    return rec(0, sum);
}

} // namespace detail

/// max_i Σ_j |M_ij|
inline Int homogeneous_norm(const HomSystem& sys)
{
    Int m = 0;
    for (const IntVector& row : sys.matrix)
        m = std::max(m, detail::row_weight(row));
    return m;
}

/// (1+m)^k: every minimal solution has coordinate sum at most this.
inline Int pottier_bound(const HomSystem& sys)
{
    return power(1 + homogeneous_norm(sys), sys.variables());
}

inline bool satisfies(const HomSystem& sys, const IntVector& x)
{
    return std::all_of(sys.matrix.begin(), sys.matrix.end(), [&](const IntVector& row) { return detail::dot(row, x) == 0; });
}

inline bool satisfies(const InhomSystem& sys, const IntVector& x)
{
    if (!x.is_nonnegative())
        return false;
    for (std::size_t i = 0; i < sys.matrix.size(); ++i)
        if (detail::dot(sys.matrix[i], x) < sys.rhs[i])
            return false;
    return true;
}

inline constexpr long long default_enumeration_budget = 4096;

/// All nonzero minimal solutions of M·y = 0 over N^k, by exhaustive
/// enumeration of coordinate sums up to the generator bound. Ordered by
/// coordinate sum, then lexicographically.
inline std::vector<IntVector> minimal_homogeneous(const HomSystem& sys, const Int& budget = default_enumeration_budget)
{
    const std::size_t k = sys.variables();
    detail::check_shape(sys.matrix, k);
    const Int bound = pottier_bound(sys);
    if (bound > budget)
        throw BoundTooLarge("generator enumeration exceeds budget " + budget.str(), bound.str());
    std::vector<IntVector> minimal;
    for (Int s = 1; s <= bound; ++s) {
        detail::for_each_with_sum(k, s, [&](const IntVector& y) {
            if (!satisfies(sys, y))
                return false;
            const bool covered = std::any_of(minimal.begin(), minimal.end(), [&](const IntVector& g) { return y.dominates(g); });
            if (!covered)
                minimal.push_back(y);
            return false;
        });
    }
    return minimal;
}

/// Writes a solution of M·x = 0 as a sum of minimal solutions, by repeatedly
/// subtracting the first generator that fits.
inline std::vector<IntVector> decompose(const HomSystem& sys, const IntVector& x,
                                        const Int& budget = default_enumeration_budget)
{
    if (x.size() != sys.variables() || !x.is_nonnegative() || !satisfies(sys, x))
        throw UsageError("decompose: " + x.to_string() + " is not a nonnegative solution");
    const std::vector<IntVector> generators = minimal_homogeneous(sys, budget);
    std::vector<IntVector> parts;
    IntVector rest = x;
    while (!rest.is_zero()) {
        auto it = std::find_if(generators.begin(), generators.end(), [&](const IntVector& g) { return rest.dominates(g); });
        // a nonzero solution always dominates some minimal solution
        if (it == generators.end())
            throw std::logic_error("decompose: no generator below " + rest.to_string());
        rest -= *it;
        parts.push_back(*it);
    }
    return parts;
}

/// max_i (Σ_j |M_ij| + |b_i|)
inline Int inhomogeneous_norm(const InhomSystem& sys)
{
    Int m = 0;
    for (std::size_t i = 0; i < sys.matrix.size(); ++i)
        m = std::max(m, detail::row_weight(sys.matrix[i]) + abs_value(sys.rhs[i]));
    return m;
}

/// (2+m)^(k+1+e): if M·x ≥ b has a solution over N^k, it has one with at most
/// this coordinate sum.
inline Int corollary_bound(const InhomSystem& sys)
{
    return power(2 + inhomogeneous_norm(sys), sys.variables() + 1 + sys.matrix.size());
}

enum class SearchStatus {
    found,
    /// No solution exists at all.
    none,
    /// Nothing found up to the budget, which is below the completeness bound.
    inconclusive,
};

struct SearchResult {
    SearchStatus status;
    std::optional<IntVector> solution;
    /// Largest coordinate sum that was fully searched.
    Int searched_sum;
    Int bound;
};

namespace detail {

inline Int ceil_div(const Int& a, const Int& b) // b > 0
{
    Int q = a / b;
    if (q * b < a)
        ++q;
    return q;
}

/// a·x ≥ b
struct Cut {
    std::vector<Int> a;
    Int b;
    bool operator<(const Cut& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
};

/// Divides by the coefficient gcd and rounds the bound up, which keeps every
/// integer solution. Returns false for a row with no variables and b > 0.
inline bool normalize(Cut& c, bool& trivial)
{
    Int g = 0;
    for (const Int& v : c.a)
        g = boost::multiprecision::gcd(g, abs_value(v));
    trivial = g == 0;
    if (trivial)
        return c.b <= 0;
    if (g > 1) {
        for (Int& v : c.a)
            v /= g;
        c.b = ceil_div(c.b, g);
    }
    return true;
}

/// Fourier–Motzkin elimination over nonnegative integers with Chvátal–Gomory
/// rounding after every combination. A derived contradiction proves that no
/// integer solution exists; failing to derive one proves nothing.
inline bool refute(const InhomSystem& sys, std::size_t row_limit = 4000)
{
    const std::size_t k = sys.variables();
    std::set<Cut> rows;
    auto insert = [&](Cut c) {
        bool trivial = false;
        if (!normalize(c, trivial))
            return false;
        if (!trivial)
            rows.insert(std::move(c));
        return true;
    };
    for (std::size_t i = 0; i < sys.matrix.size(); ++i)
        if (!insert(Cut{sys.matrix[i].values(), sys.rhs[i]}))
            return true;
    for (std::size_t j = 0; j < k; ++j) {
        Cut c{std::vector<Int>(k, Int(0)), 0};
        c.a[j] = 1;
        insert(std::move(c));
    }
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<Cut> pos, neg;
        std::set<Cut> next;
        for (const Cut& c : rows) {
            if (c.a[j] > 0)
                pos.push_back(c);
            else if (c.a[j] < 0)
                neg.push_back(c);
            else
                next.insert(c);
        }
        rows = std::move(next);
        for (const Cut& p : pos)
            for (const Cut& n : neg) {
                const Int wp = -n.a[j], wn = p.a[j];
                Cut c{std::vector<Int>(k), wp * p.b + wn * n.b};
                for (std::size_t v = 0; v < k; ++v)
                    c.a[v] = wp * p.a[v] + wn * n.a[v];
                if (!insert(std::move(c)))
                    return true;
                if (rows.size() > row_limit)
                    return false;
            }
    }
    return false;
}

/// Depth-first enumeration of all x with coordinate sum `sum`, in increasing
/// lexicographic order, keeping row values incrementally.
template <class T>
class SumSearch {
public:
    SumSearch(const InhomSystem& sys)
        : k_(sys.variables()), e_(sys.matrix.size()), partial_(e_), x_(k_)
    {
        for (const IntVector& row : sys.matrix)
            for (const Int& v : row)
                matrix_.push_back(static_cast<T>(v));
        for (const Int& v : sys.rhs)
            rhs_.push_back(static_cast<T>(v));
    }

    std::optional<IntVector> run(const T& sum)
    {
        std::fill(partial_.begin(), partial_.end(), T(0));
        if (k_ == 0)
            return leaf_ok(0, T(0)) ? std::optional<IntVector>(IntVector(0)) : std::nullopt;
        if (!rec(0, sum))
            return std::nullopt;
        IntVector out(k_);
        for (std::size_t j = 0; j < k_; ++j)
            out[j] = Int(x_[j]);
        return out;
    }

private:
    const T& m(std::size_t i, std::size_t j) const { return matrix_[i * k_ + j]; }

    bool leaf_ok(std::size_t j, const T& value) const
    {
        for (std::size_t i = 0; i < e_; ++i) {
            T v = partial_[i];
            if (k_ > 0)
                v += m(i, j) * value;
            if (v < rhs_[i])
                return false;
        }
        return true;
    }

    bool rec(std::size_t j, const T& remaining)
    {
        if (j + 1 == k_) {
            x_[j] = remaining;
            return leaf_ok(j, remaining);
        }
        for (T v = 0; v <= remaining; ++v) {
            x_[j] = v;
            if (rec(j + 1, remaining - v))
                return true;
            for (std::size_t i = 0; i < e_; ++i)
                partial_[i] += m(i, j);
        }
        for (std::size_t i = 0; i < e_; ++i)
            partial_[i] -= m(i, j) * (remaining + 1);
        return false;
    }

    std::size_t k_, e_;
    std::vector<T> matrix_, rhs_, partial_, x_;
};

} // namespace detail

/// Iterative deepening over the coordinate sum. Returns the lexicographically
/// smallest solution of least coordinate sum. Systems refuted by rounding
/// elimination are reported as having no solution without enumeration.
inline SearchResult find_small_solution(const InhomSystem& sys, const std::optional<Int>& budget = std::nullopt)
{
    const std::size_t k = sys.variables();
    detail::check_shape(sys.matrix, k);
    if (sys.rhs.size() != sys.matrix.size())
        throw UsageError("right-hand side length does not match the number of rows");
    const Int bound = corollary_bound(sys);

    // A row with no variables is decided by its constant alone.
    for (std::size_t i = 0; i < sys.matrix.size(); ++i)
        if (sys.matrix[i].is_zero() && sys.rhs[i] > 0)
            return {SearchStatus::none, std::nullopt, bound, bound};

    const Int limit = budget ? std::min(*budget, bound) : bound;
    // Row values stay below (max entry + max rhs)·limit, so machine integers
    // suffice when that product is small.
    Int magnitude = inhomogeneous_norm(sys) * (limit + 1);
    const bool fast = magnitude < (Int(1) << 60);

    auto search = [&](auto& engine, auto to_t) -> std::optional<SearchResult> {
        for (Int s = 0; s <= limit; ++s) {
            if (auto hit = engine.run(to_t(s)))
                return SearchResult{SearchStatus::found, hit, s, bound};
            if (k == 0)
                return SearchResult{SearchStatus::none, std::nullopt, bound, bound};
            // Before a long enumeration, try to prove there is nothing to find.
            if (s == 64 && detail::refute(sys))
                return SearchResult{SearchStatus::none, std::nullopt, bound, bound};
        }
        return std::nullopt;
    };
    std::optional<SearchResult> r;
    if (fast) {
        detail::SumSearch<long long> engine(sys);
        r = search(engine, [](const Int& v) { return static_cast<long long>(v); });
    } else {
        detail::SumSearch<Int> engine(sys);
        r = search(engine, [](const Int& v) { return v; });
    }
    if (r)
        return *r;
    if (limit >= bound)
        return {SearchStatus::none, std::nullopt, bound, bound};
    return {SearchStatus::inconclusive, std::nullopt, limit, bound};
}

} // namespace tvr::smallsol
