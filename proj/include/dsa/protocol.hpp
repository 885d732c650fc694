#pragma once

// Dealer key derivation, message encoding and sum recovery for the optimal
// zero-sum-key scheme and the K-round baseline, plus the feasibility region
// and the rate triples both schemes achieve.
//
// Users are indexed 0..K-1 throughout the library; serialized output is
// 1-based.

#include <boost/rational.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsa/errors.hpp"
#include "dsa/field.hpp"

namespace dsa {

using Rational = boost::rational<std::int64_t>;

enum class Scheme { Optimal, Baseline };

inline std::string_view to_string(Scheme s) noexcept
{
    return s == Scheme::Optimal ? "optimal" : "baseline";
}

inline Scheme parse_scheme(std::string_view name)
{
    if (name == "optimal") return Scheme::Optimal;
    if (name == "baseline") return Scheme::Baseline;
    throw Error("unknown scheme '" + std::string(name) + "' (expected optimal or baseline)");
}

enum class Feasibility { Feasible, Infeasible };

/// Secure aggregation is possible iff K >= 3 and T <= K-3.
constexpr Feasibility feasibility_check(int users, int threshold) noexcept
{
    return (users >= 3 && threshold >= 0 && threshold <= users - 3) ? Feasibility::Feasible
                                                                     : Feasibility::Infeasible;
}

/// Opt-in for constructing configurations outside the feasible region. Only
/// the leakage demonstration should use it.
enum class DemoOverride : bool { Off = false, On = true };

class ProtocolConfig {
public:
    ProtocolConfig(int users, int threshold, int length, Modulus q, Scheme scheme,
                   DemoOverride override = DemoOverride::Off)
        : users_(users), threshold_(threshold), length_(length), q_(q), scheme_(scheme),
          override_(override == DemoOverride::On)
    {
        if (users < 2) throw Infeasible("at least two users are required, got K=" + std::to_string(users));
        if (threshold < 0 || threshold > users - 1) {
            throw Infeasible("collusion threshold T=" + std::to_string(threshold) + " out of range for K=" +
                             std::to_string(users));
        }
        if (length < 1) throw ShapeMismatch("input length must be positive");
        if (!override_ && !feasible()) {
            throw Infeasible("K=" + std::to_string(users) + ", T=" + std::to_string(threshold) +
                             " lies outside the feasible region K >= 3, T <= K-3");
        }
    }

    int users() const noexcept { return users_; }
    int threshold() const noexcept { return threshold_; }
    int length() const noexcept { return length_; }
    Modulus q() const noexcept { return q_; }
    Scheme scheme() const noexcept { return scheme_; }
    bool override_set() const noexcept { return override_; }
    bool feasible() const noexcept { return feasibility_check(users_, threshold_) == Feasibility::Feasible; }

    Shape input_shape() const noexcept { return {static_cast<std::size_t>(length_), q_}; }

    /// Symbols in one individual key.
    std::size_t key_length() const noexcept
    {
        return scheme_ == Scheme::Optimal ? length_ : static_cast<std::size_t>(users_ - 1) * length_;
    }

    /// Symbols each user transmits over the whole protocol.
    std::size_t transmitted_length() const noexcept { return key_length(); }

    ProtocolConfig with_scheme(Scheme s) const
    {
        return ProtocolConfig(users_, threshold_, length_, q_, s, override_ ? DemoOverride::On : DemoOverride::Off);
    }

private:
    int users_;
    int threshold_;
    int length_;
    Modulus q_;
    Scheme scheme_;
    bool override_;
};

/// The dealer's master randomness.
///
/// Optimal: K-1 seed vectors N_1..N_{K-1}. Baseline: K rounds of K-2 seed
/// vectors, stored round-major, plus one permutation of the K-1 round-key slots
/// per round. permutations[r][j] is the slot assigned to the j-th sender of
/// round r, senders listed in increasing user order.
struct SourceKey {
    Scheme scheme;
    std::vector<SymbolVector> seeds;
    std::vector<std::vector<std::uint32_t>> permutations;

    /// Uniform symbols the dealer actually draws.
    std::size_t independent_symbols() const noexcept
    {
        std::size_t n = 0;
        for (const auto& s : seeds) n += s.size();
        return n;
    }

    /// Source-key size in symbols under the rate accounting: the seeds for the
    /// optimal scheme, every round key (including each round's dependent
    /// zero-sum key) for the baseline.
    std::size_t rate_symbols(const ProtocolConfig& cfg) const noexcept
    {
        if (scheme == Scheme::Optimal) return independent_symbols();
        const auto k = static_cast<std::size_t>(cfg.users());
        return k * (k - 1) * static_cast<std::size_t>(cfg.length());
    }
};

/// Individual keys Z_1..Z_K. For the baseline, Z_k is the concatenation of the
/// round keys user k uses, ordered by round.
struct KeyAssignment {
    std::vector<SymbolVector> keys;
};

struct MessageRecord {
    /// 0 for the single broadcast round of the optimal scheme; the aggregator's
    /// index for baseline rounds.
    int round;
    int sender;
    /// Empty for broadcasts; the round aggregator for baseline unicasts.
    std::optional<int> recipient;
    SymbolVector payload;

    friend bool operator==(const MessageRecord&, const MessageRecord&) = default;
};

struct Transcript {
    std::vector<MessageRecord> messages;
    std::vector<SymbolVector> recovered;

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct RateReport {
    Rational communication;   // R_X
    Rational individual_key;  // R_Z
    Rational source_key;      // R_ZSigma

    friend bool operator==(const RateReport&, const RateReport&) = default;
};

namespace detail {

inline void require_feasible(const ProtocolConfig& cfg)
{
    if (!cfg.feasible() && !cfg.override_set()) {
        throw Infeasible("configuration outside the feasible region K >= 3, T <= K-3");
    }
}

/// Position of `user` among the senders of `round` (everyone but the aggregator).
inline std::size_t sender_slot(int round, int user) noexcept
{
    return static_cast<std::size_t>(user < round ? user : user - 1);
}

inline void check_inputs(const ProtocolConfig& cfg, const std::vector<SymbolVector>& inputs)
{
    if (inputs.size() != static_cast<std::size_t>(cfg.users())) {
        throw ShapeMismatch("expected " + std::to_string(cfg.users()) + " inputs, got " +
                            std::to_string(inputs.size()));
    }
    for (const auto& w : inputs) {
        if (w.shape() != cfg.input_shape()) throw ShapeMismatch("input shape does not match configuration");
    }
}

} // namespace detail

inline SourceKey generate_source_key(const ProtocolConfig& cfg, Rng& rng)
{
    detail::require_feasible(cfg);
    const int users = cfg.users();
    SourceKey src{cfg.scheme(), {}, {}};
    if (cfg.scheme() == Scheme::Optimal) {
        for (int j = 0; j + 1 < users; ++j) src.seeds.push_back(sample_uniform_vector(cfg.length(), cfg.q(), rng));
        return src;
    }
    for (int round = 0; round < users; ++round) {
        for (int j = 0; j + 2 < users; ++j) src.seeds.push_back(sample_uniform_vector(cfg.length(), cfg.q(), rng));
        src.permutations.push_back(sample_permutation(static_cast<std::size_t>(users - 1), rng));
    }
    return src;
}

inline void check_source_key(const SourceKey& src, const ProtocolConfig& cfg)
{
    const auto users = static_cast<std::size_t>(cfg.users());
    const bool optimal = cfg.scheme() == Scheme::Optimal;
    const std::size_t seeds = optimal ? users - 1 : users * (users - 2);
    const std::size_t perms = optimal ? 0 : users;
    if (src.scheme != cfg.scheme() || src.seeds.size() != seeds || src.permutations.size() != perms) {
        throw ShapeMismatch("source key layout does not match configuration");
    }
    for (const auto& s : src.seeds) {
        if (s.shape() != cfg.input_shape()) throw ShapeMismatch("source key seed has wrong shape");
    }
    for (const auto& p : src.permutations) {
        if (p.size() != users - 1) throw ShapeMismatch("baseline permutation has wrong size");
        std::vector<bool> seen(users - 1, false);
        for (auto slot : p) {
            if (slot >= users - 1 || seen[slot]) throw ShapeMismatch("baseline permutation is not a permutation");
            seen[slot] = true;
        }
    }
}

/// The K-1 zero-sum round keys of a baseline round: K-2 seeds followed by
/// minus their sum.
inline std::vector<SymbolVector> baseline_round_keys(const SourceKey& src, const ProtocolConfig& cfg, int round)
{
    const auto per_round = static_cast<std::size_t>(cfg.users() - 2);
    const auto first = src.seeds.begin() + static_cast<std::ptrdiff_t>(per_round * static_cast<std::size_t>(round));
    std::vector<SymbolVector> keys(first, first + static_cast<std::ptrdiff_t>(per_round));
    keys.push_back(vec_neg(vec_sum(keys, cfg.input_shape())));
    return keys;
}

inline KeyAssignment derive_individual_keys(const SourceKey& src, const ProtocolConfig& cfg)
{
    check_source_key(src, cfg);
    const int users = cfg.users();
    KeyAssignment out;
    if (cfg.scheme() == Scheme::Optimal) {
        out.keys = src.seeds;
        out.keys.push_back(vec_neg(vec_sum(src.seeds, cfg.input_shape())));
        return out;
    }
    std::vector<std::vector<SymbolVector>> rounds;
    for (int round = 0; round < users; ++round) rounds.push_back(baseline_round_keys(src, cfg, round));
    for (int user = 0; user < users; ++user) {
        std::vector<SymbolVector> parts;
        for (int round = 0; round < users; ++round) {
            if (round == user) continue;
            const auto slot = src.permutations[static_cast<std::size_t>(round)][detail::sender_slot(round, user)];
            parts.push_back(rounds[static_cast<std::size_t>(round)][slot]);
        }
        out.keys.push_back(vec_concat(parts));
    }
    return out;
}

/// Round-r part of a baseline individual key.
inline SymbolVector baseline_round_key(const SymbolVector& key, const ProtocolConfig& cfg, int user, int round)
{
    if (round == user) throw ShapeMismatch("a user holds no key for the round it aggregates");
    const auto length = static_cast<std::size_t>(cfg.length());
    return vec_slice(key, detail::sender_slot(user, round) * length, length);
}

/// X_k = W_k + Z_k.
inline SymbolVector encode_message(const SymbolVector& input, const SymbolVector& key)
{
    return vec_add(input, key);
}

/// Sum of the other users' messages plus the user's own input and key.
inline SymbolVector recover_sum(int user, const std::map<int, SymbolVector>& received, const SymbolVector& input,
                                const SymbolVector& key, int users)
{
    std::vector<SymbolVector> terms;
    for (int i = 0; i < users; ++i) {
        if (i == user) continue;
        const auto it = received.find(i);
        if (it == received.end()) {
            throw MissingMessage("user " + std::to_string(user + 1) + " has no message from user " +
                                 std::to_string(i + 1));
        }
        terms.push_back(it->second);
    }
    if (received.size() != terms.size()) {
        throw ShapeMismatch("received set contains messages from unexpected senders");
    }
    terms.push_back(input);
    terms.push_back(key);
    return vec_sum(terms);
}

inline Transcript optimal_execute(const ProtocolConfig& cfg, const std::vector<SymbolVector>& inputs,
                                  const SourceKey& src)
{
    detail::require_feasible(cfg);
    detail::check_inputs(cfg, inputs);
    if (cfg.scheme() != Scheme::Optimal) throw Error("optimal_execute needs the optimal scheme");
    const auto keys = derive_individual_keys(src, cfg).keys;
    const int users = cfg.users();

    Transcript t;
    for (int k = 0; k < users; ++k) {
        t.messages.push_back({0, k, std::nullopt, encode_message(inputs[k], keys[k])});
    }
    for (int k = 0; k < users; ++k) {
        std::map<int, SymbolVector> received;
        for (const auto& m : t.messages) {
            if (m.sender != k) received.emplace(m.sender, m.payload);
        }
        t.recovered.push_back(recover_sum(k, received, inputs[k], keys[k], users));
    }
    return t;
}

/// K rounds of centralized aggregation; in round r user r aggregates and every
/// other user sends W_i plus its round key.
inline Transcript baseline_execute(const ProtocolConfig& cfg, const std::vector<SymbolVector>& inputs,
                                   const SourceKey& src)
{
    detail::require_feasible(cfg);
    detail::check_inputs(cfg, inputs);
    if (cfg.scheme() != Scheme::Baseline) throw Error("baseline_execute needs the baseline scheme");
    const auto keys = derive_individual_keys(src, cfg).keys;
    const int users = cfg.users();

    Transcript t;
    for (int round = 0; round < users; ++round) {
        std::vector<SymbolVector> received;
        for (int i = 0; i < users; ++i) {
            if (i == round) continue;
            auto x = encode_message(inputs[i], baseline_round_key(keys[i], cfg, i, round));
            received.push_back(x);
            t.messages.push_back({round, i, round, std::move(x)});
        }
        received.push_back(inputs[round]);
        t.recovered.push_back(vec_sum(received));
    }
    return t;
}

inline Transcript execute(const ProtocolConfig& cfg, const std::vector<SymbolVector>& inputs, const SourceKey& src)
{
    return cfg.scheme() == Scheme::Optimal ? optimal_execute(cfg, inputs, src) : baseline_execute(cfg, inputs, src);
}

/// Everything `sender` transmitted, concatenated in round order.
inline SymbolVector transmission(const Transcript& t, int sender)
{
    std::vector<SymbolVector> parts;
    for (const auto& m : t.messages) {
        if (m.sender == sender) parts.push_back(m.payload);
    }
    return vec_concat(parts);
}

inline RateReport theoretical_rates(const ProtocolConfig& cfg)
{
    if (!cfg.feasible()) throw Infeasible("no rates exist outside the feasible region");
    const std::int64_t k = cfg.users();
    if (cfg.scheme() == Scheme::Optimal) return {Rational(1), Rational(1), Rational(k - 1)};
    return {Rational(k - 1), Rational(k - 1), Rational(k * (k - 1))};
}

} // namespace dsa
