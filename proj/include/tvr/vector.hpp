#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/functional/hash.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace tvr {

using Int = boost::multiprecision::cpp_int;

inline Int abs_value(const Int& v) { return v < 0 ? Int(-v) : v; }

inline Int power(Int base, std::size_t exponent)
{
    Int result = 1;
    while (exponent > 0) {
        if (exponent & 1U)
            result *= base;
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

/// Fixed-length vector of arbitrary-precision integers.
class IntVector {
public:
    IntVector() = default;
    explicit IntVector(std::size_t dimension) : values_(dimension, Int(0)) {}
    IntVector(std::initializer_list<long long> values)
    {
        values_.reserve(values.size());
        for (long long v : values)
            values_.emplace_back(v);
    }
    explicit IntVector(std::vector<Int> values) : values_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] bool empty() const { return values_.empty(); }

    Int& operator[](std::size_t i) { return values_[i]; }
    const Int& operator[](std::size_t i) const { return values_[i]; }

    [[nodiscard]] auto begin() const { return values_.begin(); }
    [[nodiscard]] auto end() const { return values_.end(); }
    [[nodiscard]] const std::vector<Int>& values() const { return values_; }

    /// Infinity norm.
    [[nodiscard]] Int norm() const
    {
        Int best = 0;
        for (const Int& v : values_)
            best = std::max(best, abs_value(v));
        return best;
    }

    [[nodiscard]] bool is_nonnegative() const
    {
        return std::all_of(values_.begin(), values_.end(), [](const Int& v) { return v >= 0; });
    }

    [[nodiscard]] bool is_zero() const
    {
        return std::all_of(values_.begin(), values_.end(), [](const Int& v) { return v == 0; });
    }

    IntVector& operator+=(const IntVector& other)
    {
        for (std::size_t i = 0; i < values_.size(); ++i)
            values_[i] += other.values_[i];
        return *this;
    }

    IntVector& operator-=(const IntVector& other)
    {
        for (std::size_t i = 0; i < values_.size(); ++i)
            values_[i] -= other.values_[i];
        return *this;
    }

    IntVector& operator*=(const Int& scalar)
    {
        for (Int& v : values_)
            v *= scalar;
        return *this;
    }

    friend IntVector operator+(IntVector a, const IntVector& b) { return a += b; }
    friend IntVector operator-(IntVector a, const IntVector& b) { return a -= b; }
    friend IntVector operator*(IntVector a, const Int& s) { return a *= s; }
    friend IntVector operator*(const Int& s, IntVector a) { return a *= s; }
    friend IntVector operator-(IntVector a)
    {
        for (Int& v : a.values_)
            v = -v;
        return a;
    }

    friend bool operator==(const IntVector&, const IntVector&) = default;

    /// Componentwise order.
    [[nodiscard]] bool dominates(const IntVector& other) const
    {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] < other.values_[i])
                return false;
        return true;
    }

    /// Lexicographic order, used for deterministic tie-breaking only.
    friend bool operator<(const IntVector& a, const IntVector& b) { return a.values_ < b.values_; }

    [[nodiscard]] std::string to_string() const
    {
        std::string out = "(";
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (i > 0)
                out += ",";
            out += values_[i].str();
        }
        return out + ")";
    }

    friend std::ostream& operator<<(std::ostream& os, const IntVector& v) { return os << v.to_string(); }

    [[nodiscard]] std::size_t hash() const
    {
        std::size_t seed = values_.size();
        for (const Int& v : values_)
            boost::hash_combine(seed, boost::multiprecision::hash_value(v));
        return seed;
    }

private:
    std::vector<Int> values_;
};

/// Componentwise maximum.
inline IntVector max_of(const IntVector& a, const IntVector& b)
{
    IntVector out = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (b[i] > out[i])
            out[i] = b[i];
    return out;
}

inline Int coordinate_sum(const IntVector& v)
{
    Int s = 0;
    for (const Int& x : v)
        s += x;
    return s;
}

} // namespace tvr

template <>
struct std::hash<tvr::IntVector> {
    std::size_t operator()(const tvr::IntVector& v) const noexcept { return v.hash(); }
};
