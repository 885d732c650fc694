#pragma once

// Prime-field symbols, symbol vectors and deterministic uniform sampling.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsa/errors.hpp"

namespace dsa {

/// Trial-division primality test; moduli in this library are small.
constexpr bool is_prime(std::uint64_t n) noexcept
{
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0 || n % 3 == 0) return false;
    for (std::uint64_t d = 5; d * d <= n; d += 6) {
        if (n % d == 0 || n % (d + 2) == 0) return false;
    }
    return true;
}

/// A validated prime modulus q. Constructing one is the only primality check
/// on the hot paths.
class Modulus {
public:
    static constexpr std::uint64_t kMax = std::numeric_limits<std::uint32_t>::max();

    explicit Modulus(std::uint64_t q) : q_(static_cast<std::uint32_t>(q))
    {
        if (q > kMax || !is_prime(q)) {
            throw InvalidModulus("modulus " + std::to_string(q) + " is not a prime below 2^32");
        }
    }

    constexpr std::uint32_t value() const noexcept { return q_; }
    friend constexpr bool operator==(Modulus, Modulus) noexcept = default;

private:
    std::uint32_t q_;
};

/// An element of F_q, always fully reduced.
class FieldElement {
public:
    FieldElement(std::uint64_t value, Modulus q)
        : value_(static_cast<std::uint32_t>(value % q.value())), q_(q) {}

    static FieldElement zero(Modulus q) { return FieldElement(0, q); }

    std::uint32_t value() const noexcept { return value_; }
    Modulus modulus() const noexcept { return q_; }

    friend bool operator==(const FieldElement&, const FieldElement&) noexcept = default;

private:
    std::uint32_t value_;
    Modulus q_;
};

namespace detail {

inline std::uint32_t add_mod(std::uint32_t a, std::uint32_t b, std::uint32_t q) noexcept
{
    const std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<std::uint32_t>(s >= q ? s - q : s);
}

inline std::uint32_t neg_mod(std::uint32_t a, std::uint32_t q) noexcept
{
    return a == 0 ? 0 : q - a;
}

} // namespace detail

inline FieldElement fe_add(const FieldElement& a, const FieldElement& b)
{
    if (a.modulus() != b.modulus()) {
        throw ModulusMismatch("cannot add elements of F_" + std::to_string(a.modulus().value()) +
                              " and F_" + std::to_string(b.modulus().value()));
    }
    return FieldElement(detail::add_mod(a.value(), b.value(), a.modulus().value()), a.modulus());
}

inline FieldElement fe_neg(const FieldElement& a)
{
    return FieldElement(detail::neg_mod(a.value(), a.modulus().value()), a.modulus());
}

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) { return fe_add(a, b); }
inline FieldElement operator-(const FieldElement& a) { return fe_neg(a); }
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) { return fe_add(a, fe_neg(b)); }

/// Length and modulus of a SymbolVector.
struct Shape {
    std::size_t length;
    Modulus q;

    friend bool operator==(const Shape&, const Shape&) noexcept = default;
};

/// A fixed-length sequence of F_q symbols (an input, key or message).
///
/// Symbols are stored as raw reduced residues; the length never changes after
/// construction.
class SymbolVector {
public:
    /// All-zero vector of the given shape.
    explicit SymbolVector(Shape shape) : q_(shape.q), symbols_(shape.length, 0)
    {
        if (shape.length == 0) throw ShapeMismatch("symbol vectors must have positive length");
    }

    /// Reduces every value modulo q.
    SymbolVector(std::vector<std::uint64_t> values, Modulus q) : q_(q), symbols_(values.size())
    {
        if (values.empty()) throw ShapeMismatch("symbol vectors must have positive length");
        std::transform(values.begin(), values.end(), symbols_.begin(),
                       [&](std::uint64_t v) { return static_cast<std::uint32_t>(v % q.value()); });
    }

    SymbolVector(std::initializer_list<std::uint64_t> values, Modulus q)
        : SymbolVector(std::vector<std::uint64_t>(values), q) {}

    std::size_t size() const noexcept { return symbols_.size(); }
    Modulus modulus() const noexcept { return q_; }
    Shape shape() const noexcept { return {symbols_.size(), q_}; }

    FieldElement at(std::size_t i) const { return FieldElement(symbols_.at(i), q_); }
    std::span<const std::uint32_t> raw() const noexcept { return symbols_; }

    friend bool operator==(const SymbolVector&, const SymbolVector&) noexcept = default;

private:
    friend SymbolVector vec_add(const SymbolVector&, const SymbolVector&);
    friend SymbolVector vec_neg(const SymbolVector&);
    friend SymbolVector vec_concat(std::span<const SymbolVector>);
    friend SymbolVector vec_slice(const SymbolVector&, std::size_t, std::size_t);

    SymbolVector(Modulus q, std::vector<std::uint32_t> reduced) : q_(q), symbols_(std::move(reduced)) {}

    Modulus q_;
    std::vector<std::uint32_t> symbols_;
};

inline void require_same_shape(const SymbolVector& a, const SymbolVector& b)
{
    if (a.modulus() != b.modulus()) {
        throw ShapeMismatch("symbol vectors over F_" + std::to_string(a.modulus().value()) + " and F_" +
                            std::to_string(b.modulus().value()));
    }
    if (a.size() != b.size()) {
        throw ShapeMismatch("symbol vectors of length " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
    }
}

inline SymbolVector vec_add(const SymbolVector& a, const SymbolVector& b)
{
    require_same_shape(a, b);
    const std::uint32_t q = a.q_.value();
    std::vector<std::uint32_t> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::add_mod(a.symbols_[i], b.symbols_[i], q);
    return SymbolVector(a.q_, std::move(out));
}

inline SymbolVector vec_neg(const SymbolVector& a)
{
    const std::uint32_t q = a.q_.value();
    std::vector<std::uint32_t> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::neg_mod(a.symbols_[i], q);
    return SymbolVector(a.q_, std::move(out));
}

inline SymbolVector vec_sub(const SymbolVector& a, const SymbolVector& b) { return vec_add(a, vec_neg(b)); }

/// Elementwise field sum. An empty sequence yields the zero vector of `shape`;
/// otherwise every vector must match `shape`.
inline SymbolVector vec_sum(std::span<const SymbolVector> vs, Shape shape)
{
    SymbolVector acc(shape);
    for (const auto& v : vs) acc = vec_add(acc, v);
    return acc;
}

/// Elementwise field sum of a nonempty sequence.
inline SymbolVector vec_sum(std::span<const SymbolVector> vs)
{
    if (vs.empty()) throw ShapeMismatch("vec_sum of an empty sequence needs an explicit shape");
    return vec_sum(vs, vs.front().shape());
}

/// Concatenation of equal-modulus vectors, in order.
inline SymbolVector vec_concat(std::span<const SymbolVector> parts)
{
    if (parts.empty()) throw ShapeMismatch("cannot concatenate zero vectors");
    std::vector<std::uint32_t> out;
    for (const auto& p : parts) {
        if (p.q_ != parts.front().q_) throw ShapeMismatch("concatenating vectors over different fields");
        out.insert(out.end(), p.symbols_.begin(), p.symbols_.end());
    }
    return SymbolVector(parts.front().q_, std::move(out));
}

inline SymbolVector vec_slice(const SymbolVector& v, std::size_t offset, std::size_t length)
{
    if (length == 0 || offset + length > v.size()) throw ShapeMismatch("slice out of range");
    return SymbolVector(v.q_,
                        std::vector<std::uint32_t>(v.symbols_.begin() + static_cast<std::ptrdiff_t>(offset),
                                                   v.symbols_.begin() + static_cast<std::ptrdiff_t>(offset + length)));
}

/// Seedable deterministic generator. Not cryptographically secure.
///
/// mt19937_64 has a standardized output sequence, and bounded draws use our
/// own rejection step, so a seed reproduces the same symbols on every
/// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, n), n >= 1, by rejection on the raw 64-bit output.
    std::uint64_t uniform_below(std::uint64_t n)
    {
        if (n == 0) throw Error("uniform_below(0)");
        constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
        // 2^64 mod n; accepted draws are [0, 2^64 - excess), a multiple of n.
        const std::uint64_t excess = (kMax % n + 1) % n;
        for (;;) {
            const std::uint64_t x = engine_();
            if (excess == 0 || x <= kMax - excess) return x % n;
        }
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

inline SymbolVector sample_uniform_vector(std::size_t length, Modulus q, Rng& rng)
{
    if (length == 0) throw ShapeMismatch("sample length must be positive");
    std::vector<std::uint64_t> values(length);
    for (auto& v : values) v = rng.uniform_below(q.value());
    return SymbolVector(std::move(values), q);
}

/// Checks primality and then samples; see Modulus for the validated overload.
inline SymbolVector sample_uniform_vector(std::size_t length, std::uint64_t q, Rng& rng)
{
    return sample_uniform_vector(length, Modulus(q), rng);
}

/// Uniform permutation of {0, ..., n-1} by Fisher-Yates.
inline std::vector<std::uint32_t> sample_permutation(std::size_t n, Rng& rng)
{
    std::vector<std::uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

} // namespace dsa
