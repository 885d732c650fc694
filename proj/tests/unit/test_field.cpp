#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "dsa/field.hpp"

using namespace dsa;

TEST(Modulus, AcceptsPrimes)
{
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 65537ULL, 4294967291ULL}) EXPECT_EQ(Modulus(q).value(), q);
}

TEST(Modulus, RejectsNonPrimesAndOversize)
{
    for (std::uint64_t q : {0ULL, 1ULL, 4ULL, 9ULL, 15ULL, 65535ULL, 4294967296ULL, 4294967311ULL}) {
        EXPECT_THROW(Modulus{q}, InvalidModulus) << q;
    }
}

TEST(FieldElement, SmallExamples)
{
    const Modulus q5(5);
    EXPECT_EQ((FieldElement(3, q5) + FieldElement(4, q5)).value(), 2u);
    EXPECT_EQ((-FieldElement(2, q5)).value(), 3u);
    EXPECT_EQ((-FieldElement(0, q5)).value(), 0u);
    EXPECT_EQ((FieldElement(1, q5) - FieldElement(3, q5)).value(), 3u);
    const Modulus q2(2);
    EXPECT_EQ((FieldElement(1, q2) + FieldElement(1, q2)).value(), 0u);
}

TEST(FieldElement, ReducesOnConstruction) { EXPECT_EQ(FieldElement(12, Modulus(5)).value(), 2u); }

TEST(FieldElement, ModulusMismatchThrows)
{
    EXPECT_THROW(FieldElement(1, Modulus(3)) + FieldElement(1, Modulus(5)), ModulusMismatch);
}

class FieldAxioms : public ::testing::TestWithParam<std::uint32_t> {};

TEST_P(FieldAxioms, ExhaustiveAdditiveGroup)
{
    const Modulus q(GetParam());
    const FieldElement zero = FieldElement::zero(q);
    for (std::uint32_t a = 0; a < q.value(); ++a) {
        const FieldElement x(a, q);
        EXPECT_EQ(x + zero, x);
        EXPECT_EQ(x + (-x), zero);
        EXPECT_EQ(-(-x), x);
        for (std::uint32_t b = 0; b < q.value(); ++b) {
            const FieldElement y(b, q);
            EXPECT_EQ(x + y, y + x);
            EXPECT_EQ((x + y).value(), (a + b) % q.value());
            for (std::uint32_t c = 0; c < q.value(); ++c) {
                const FieldElement z(c, q);
                EXPECT_EQ((x + y) + z, x + (y + z));
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(SmallPrimes, FieldAxioms, ::testing::Values(2u, 3u, 5u));

TEST(FieldAxiomsRandom, LargePrimes)
{
    Rng rng(99);
    for (std::uint64_t p : {65521ULL, 2147483647ULL, 4294967291ULL}) {
        const Modulus q(p);
        for (int i = 0; i < 2000; ++i) {
            const FieldElement x(rng.next(), q), y(rng.next(), q), z(rng.next(), q);
            EXPECT_EQ(x + y, y + x);
            EXPECT_EQ((x + y) + z, x + (y + z));
            EXPECT_EQ(x + (-x), FieldElement::zero(q));
            EXPECT_EQ((x + y).value(), (static_cast<std::uint64_t>(x.value()) + y.value()) % p);
        }
    }
}

TEST(SymbolVector, ArithmeticAndShapes)
{
    const Modulus q(5);
    const SymbolVector a({1, 2, 3}, q), b({4, 4, 4}, q);
    EXPECT_EQ(vec_add(a, b), SymbolVector({0, 1, 2}, q));
    EXPECT_EQ(vec_neg(a), SymbolVector({4, 3, 2}, q));
    EXPECT_EQ(vec_sub(a, b), SymbolVector({2, 3, 4}, q));
    EXPECT_THROW(vec_add(a, SymbolVector({1, 2}, q)), ShapeMismatch);
    EXPECT_THROW(vec_add(a, SymbolVector({1, 2, 0}, Modulus(7))), ShapeMismatch);
}

TEST(SymbolVector, SumEmptyAndOrderIndependent)
{
    const Modulus q(7);
    EXPECT_EQ(vec_sum({}, Shape{3, q}), SymbolVector(Shape{3, q}));
    EXPECT_THROW(vec_sum(std::span<const SymbolVector>{}), ShapeMismatch);
    Rng rng(5);
    std::vector<SymbolVector> vs;
    for (int i = 0; i < 6; ++i) vs.push_back(sample_uniform_vector(4, q, rng));
    const SymbolVector s = vec_sum(vs);
    std::sort(vs.begin(), vs.end(), [](const auto& x, const auto& y) {
        return std::lexicographical_compare(x.raw().begin(), x.raw().end(), y.raw().begin(), y.raw().end());
    });
    EXPECT_EQ(vec_sum(vs), s);
    std::reverse(vs.begin(), vs.end());
    EXPECT_EQ(vec_sum(vs), s);
}

TEST(SymbolVector, ConcatAndSlice)
{
    const Modulus q(3);
    const std::vector<SymbolVector> parts{SymbolVector({1, 2}, q), SymbolVector({0}, q)};
    const SymbolVector c = vec_concat(parts);
    EXPECT_EQ(c, SymbolVector({1, 2, 0}, q));
    EXPECT_EQ(vec_slice(c, 1, 2), SymbolVector({2, 0}, q));
    EXPECT_THROW(vec_slice(c, 2, 2), ShapeMismatch);
}

TEST(Rng, DeterministicPerSeed)
{
    Rng a(42), b(42), c(43);
    const auto x = sample_uniform_vector(32, Modulus(11), a);
    EXPECT_EQ(x, sample_uniform_vector(32, Modulus(11), b));
    EXPECT_NE(x, sample_uniform_vector(32, Modulus(11), c));
}

TEST(Rng, UniformOverBinaryField)
{
    Rng rng(2024);
    const auto v = sample_uniform_vector(100000, Modulus(2), rng);
    const auto ones = std::count(v.raw().begin(), v.raw().end(), 1u);
    EXPECT_GE(ones, 49000);
    EXPECT_LE(ones, 51000);
}

TEST(Rng, StaysInRangeAndCoversField)
{
    Rng rng(3);
    std::map<std::uint32_t, int> seen;
    const auto draws = sample_uniform_vector(20000, Modulus(13), rng);
    for (auto x : draws.raw()) {
        ASSERT_LT(x, 13u);
        ++seen[x];
    }
    EXPECT_EQ(seen.size(), 13u);
    for (const auto& [x, n] : seen) EXPECT_NEAR(n, 20000 / 13, 200) << x;
}

TEST(Rng, PermutationsAreUniform)
{
    Rng rng(8);
    std::map<std::vector<std::uint32_t>, int> counts;
    for (int i = 0; i < 60000; ++i) ++counts[sample_permutation(3, rng)];
    ASSERT_EQ(counts.size(), 6u);
    for (const auto& [p, n] : counts) EXPECT_NEAR(n, 10000, 400);
}
