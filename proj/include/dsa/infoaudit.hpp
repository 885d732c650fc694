#pragma once

// Exact entropies and conditional mutual informations over the finite uniform
// seed space of a protocol configuration.
//
// Every primitive random symbol (inputs, dealer seeds, baseline permutations)
// is enumerated; derived quantities are deterministic functions of an outcome.
// Probabilities stay integer counts over the outcome total, and only the final
// logarithm (base q) is floating point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dsa/errors.hpp"
#include "dsa/field.hpp"
#include "dsa/protocol.hpp"

namespace dsa {

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 24;
inline constexpr double kZeroTolerance = 1e-9;

/// One primitive uniform component of the seed space.
struct SeedComponent {
    std::string name;
    std::size_t symbols;  // digits contributed
    std::uint64_t radix;  // q for field symbols, (K-1)! for a permutation
};

/// The random variables of one outcome.
struct Realization {
    std::vector<SymbolVector> inputs;
    SourceKey source;
    std::vector<SymbolVector> keys;
};

/// A named deterministic function of an outcome producing `width` symbols.
struct DerivedVariable {
    std::string name;
    std::size_t width;
    std::function<void(const Realization&, std::vector<std::uint32_t>&)> eval;
};

using VarSet = std::vector<DerivedVariable>;

namespace detail {

inline std::uint64_t factorial(std::uint64_t n)
{
    std::uint64_t f = 1;
    for (std::uint64_t i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Permutation of {0..n-1} with lexicographic rank `index` (Lehmer code).
inline std::vector<std::uint32_t> permutation_from_rank(std::uint64_t index, std::size_t n)
{
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    std::vector<std::uint32_t> out;
    out.reserve(n);
    for (std::size_t i = n; i > 0; --i) {
        const std::uint64_t block = factorial(i - 1);
        const auto pick = static_cast<std::size_t>(index / block);
        index %= block;
        out.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

inline void append(std::vector<std::uint32_t>& out, const SymbolVector& v)
{
    const auto raw = v.raw();
    out.insert(out.end(), raw.begin(), raw.end());
}

inline std::string user_label(const char* prefix, int user) { return prefix + std::to_string(user + 1); }

struct TupleHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept
    {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
        for (auto x : v) {
            h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h *= 0xff51afd7ed558ccdULL;
        }
        return static_cast<std::size_t>(h ^ (h >> 33));
    }
};

} // namespace detail

/// Enumeration of every seed assignment of a configuration, each with
/// probability 1/outcome_count().
class SeedSpace {
public:
    explicit SeedSpace(const ProtocolConfig& cfg, std::uint64_t budget = kDefaultBudget) : cfg_(cfg), budget_(budget)
    {
        const int users = cfg.users();
        const std::uint64_t q = cfg.q().value();
        const auto length = static_cast<std::size_t>(cfg.length());
        for (int k = 0; k < users; ++k) layout_.push_back({detail::user_label("W", k), length, q});
        if (cfg.scheme() == Scheme::Optimal) {
            for (int j = 0; j + 1 < users; ++j) layout_.push_back({detail::user_label("N", j), length, q});
        } else {
            const std::uint64_t perms = detail::factorial(static_cast<std::uint64_t>(users - 1));
            for (int r = 0; r < users; ++r) {
                for (int j = 0; j + 2 < users; ++j) {
                    layout_.push_back({"N" + std::to_string(j + 1) + "^(" + std::to_string(r + 1) + ")", length, q});
                }
                layout_.push_back({"p^(" + std::to_string(r + 1) + ")", 1, perms});
            }
        }

        double log2_total = 0.0;
        std::uint64_t total = 1;
        bool overflow = false;
        for (const auto& c : layout_) {
            for (std::size_t i = 0; i < c.symbols; ++i) {
                log2_total += std::log2(static_cast<double>(c.radix));
                if (!overflow && total > budget / c.radix) overflow = true;
                if (!overflow) total *= c.radix;
            }
        }
        if (overflow || total > budget) {
            throw BudgetExceeded("seed space needs about 2^" + std::to_string(log2_total) +
                                     " outcomes, budget is " + std::to_string(budget),
                                 log2_total, budget);
        }
        outcomes_ = total;
    }

    const ProtocolConfig& config() const noexcept { return cfg_; }
    std::uint64_t outcome_count() const noexcept { return outcomes_; }
    std::uint64_t budget() const noexcept { return budget_; }
    const std::vector<SeedComponent>& layout() const noexcept { return layout_; }

    /// Decodes a mixed-radix outcome index (first layout digit least
    /// significant) into the realized inputs, source key and keys.
    Realization realize(std::uint64_t outcome) const
    {
        const Modulus q = cfg_.q();
        auto next_vector = [&](std::size_t length) {
            std::vector<std::uint64_t> v(length);
            for (auto& s : v) {
                s = outcome % q.value();
                outcome /= q.value();
            }
            return SymbolVector(std::move(v), q);
        };
        const int users = cfg_.users();
        const auto length = static_cast<std::size_t>(cfg_.length());

        Realization r{{}, SourceKey{cfg_.scheme(), {}, {}}, {}};
        for (int k = 0; k < users; ++k) r.inputs.push_back(next_vector(length));
        if (cfg_.scheme() == Scheme::Optimal) {
            for (int j = 0; j + 1 < users; ++j) r.source.seeds.push_back(next_vector(length));
        } else {
            const std::uint64_t perms = detail::factorial(static_cast<std::uint64_t>(users - 1));
            for (int round = 0; round < users; ++round) {
                for (int j = 0; j + 2 < users; ++j) r.source.seeds.push_back(next_vector(length));
                r.source.permutations.push_back(
                    detail::permutation_from_rank(outcome % perms, static_cast<std::size_t>(users - 1)));
                outcome /= perms;
            }
        }
        r.keys = derive_individual_keys(r.source, cfg_).keys;
        return r;
    }

    DerivedVariable input(int k) const
    {
        check_user(k);
        return {detail::user_label("W", k), input_width(),
                [k](const Realization& r, std::vector<std::uint32_t>& out) { detail::append(out, r.inputs[k]); }};
    }

    DerivedVariable key(int k) const
    {
        check_user(k);
        return {detail::user_label("Z", k), cfg_.key_length(),
                [k](const Realization& r, std::vector<std::uint32_t>& out) { detail::append(out, r.keys[k]); }};
    }

    /// Everything user k transmits (for the baseline, all K-1 round messages).
    DerivedVariable message(int k) const
    {
        check_user(k);
        const ProtocolConfig cfg = cfg_;
        return {detail::user_label("X", k), cfg_.transmitted_length(),
                [k, cfg](const Realization& r, std::vector<std::uint32_t>& out) {
                    if (cfg.scheme() == Scheme::Optimal) {
                        detail::append(out, encode_message(r.inputs[k], r.keys[k]));
                        return;
                    }
                    for (int round = 0; round < cfg.users(); ++round) {
                        if (round == k) continue;
                        detail::append(out,
                                       encode_message(r.inputs[k], baseline_round_key(r.keys[k], cfg, k, round)));
                    }
                }};
    }

    /// The part of sender's transmission that reaches `observer`: the
    /// broadcast X_i for the optimal scheme, the round-`observer` message for
    /// the baseline.
    DerivedVariable observed(int sender, int observer) const
    {
        check_user(sender);
        check_user(observer);
        if (sender == observer) throw Error("a user does not observe its own message");
        if (cfg_.scheme() == Scheme::Optimal) return message(sender);
        const ProtocolConfig cfg = cfg_;
        return {detail::user_label("X", sender) + "^(" + std::to_string(observer + 1) + ")", input_width(),
                [sender, observer, cfg](const Realization& r, std::vector<std::uint32_t>& out) {
                    detail::append(out, encode_message(r.inputs[sender],
                                                       baseline_round_key(r.keys[sender], cfg, sender, observer)));
                }};
    }

    /// Sum of the inputs of `users`.
    DerivedVariable partial_sum(std::vector<int> users) const
    {
        std::string name;
        for (int u : users) {
            check_user(u);
            name += (name.empty() ? "" : "+") + detail::user_label("W", u);
        }
        if (users.empty()) throw Error("partial_sum over no users");
        const Shape shape = cfg_.input_shape();
        return {name, input_width(), [users, shape](const Realization& r, std::vector<std::uint32_t>& out) {
                    SymbolVector acc(shape);
                    for (int u : users) acc = vec_add(acc, r.inputs[u]);
                    detail::append(out, acc);
                }};
    }

    DerivedVariable input_sum() const
    {
        std::vector<int> all(static_cast<std::size_t>(cfg_.users()));
        std::iota(all.begin(), all.end(), 0);
        auto v = partial_sum(all);
        v.name = "SumW";
        return v;
    }

    /// The dealer's randomness, including baseline permutation choices.
    DerivedVariable source_key() const
    {
        std::size_t width = 0;
        for (std::size_t i = static_cast<std::size_t>(cfg_.users()); i < layout_.size(); ++i) width += layout_[i].symbols;
        return {"ZSigma", width, [](const Realization& r, std::vector<std::uint32_t>& out) {
                    for (const auto& s : r.source.seeds) detail::append(out, s);
                    for (const auto& p : r.source.permutations) {
                        std::uint32_t rank = 0;
                        // Any injective encoding works for counting.
                        for (auto slot : p) rank = rank * static_cast<std::uint32_t>(p.size()) + slot;
                        out.push_back(rank);
                    }
                }};
    }

    static DerivedVariable constant()
    {
        return {"const", 0, [](const Realization&, std::vector<std::uint32_t>&) {}};
    }

    /// W_k, Z_k, X_k for every user and the input sum.
    std::vector<DerivedVariable> registered() const
    {
        std::vector<DerivedVariable> vars;
        for (int k = 0; k < cfg_.users(); ++k) vars.push_back(input(k));
        for (int k = 0; k < cfg_.users(); ++k) vars.push_back(key(k));
        for (int k = 0; k < cfg_.users(); ++k) vars.push_back(message(k));
        vars.push_back(input_sum());
        return vars;
    }

    /// Inputs and keys of `users`: the collusion view C_S.
    VarSet collection(const std::vector<int>& users) const
    {
        VarSet out;
        for (int u : users) {
            out.push_back(input(u));
            out.push_back(key(u));
        }
        return out;
    }

private:
    void check_user(int k) const
    {
        if (k < 0 || k >= cfg_.users()) throw Error("user index " + std::to_string(k + 1) + " out of range");
    }
    std::size_t input_width() const noexcept { return static_cast<std::size_t>(cfg_.length()); }

    ProtocolConfig cfg_;
    std::uint64_t budget_;
    std::vector<SeedComponent> layout_;
    std::uint64_t outcomes_ = 0;
};

/// Exact joint counts of a variable tuple, keyed by the concatenated symbol
/// values. Ordered, so equal tables compare and serialize identically.
class CountTable {
public:
    using Key = std::vector<std::uint32_t>;

    void add(const Key& key, std::uint64_t count) { cells_[key] += count; }

    void merge(const CountTable& other)
    {
        for (const auto& [k, n] : other.cells_) cells_[k] += n;
    }

    std::uint64_t total() const noexcept
    {
        std::uint64_t n = 0;
        for (const auto& [k, c] : cells_) n += c;
        return n;
    }

    const std::map<Key, std::uint64_t>& cells() const noexcept { return cells_; }

    /// Marginal over the symbol positions [first, first + count) of each key
    /// segment listed in `segments`.
    CountTable project(const std::vector<std::pair<std::size_t, std::size_t>>& segments) const
    {
        CountTable out;
        Key reduced;
        for (const auto& [k, n] : cells_) {
            reduced.clear();
            for (const auto& [first, count] : segments) {
                reduced.insert(reduced.end(), k.begin() + static_cast<std::ptrdiff_t>(first),
                               k.begin() + static_cast<std::ptrdiff_t>(first + count));
            }
            out.cells_[reduced] += n;
        }
        return out;
    }

    /// Entropy of the tabulated distribution, logarithm base `base`.
    double entropy(std::uint32_t base) const
    {
        const auto n = static_cast<long double>(total());
        if (n == 0) return 0.0;
        long double acc = 0;
        for (const auto& [k, c] : cells_) {
            const auto x = static_cast<long double>(c);
            acc += x * std::log(x);
        }
        const long double nats = std::log(n) - acc / n;
        return static_cast<double>(nats / std::log(static_cast<long double>(base)));
    }

    friend bool operator==(const CountTable&, const CountTable&) = default;

private:
    std::map<Key, std::uint64_t> cells_;
};

inline std::size_t total_width(const VarSet& vars)
{
    std::size_t w = 0;
    for (const auto& v : vars) w += v.width;
    return w;
}

/// Joint counts of `vars` over outcomes [first, last).
inline CountTable count_range(const SeedSpace& space, const VarSet& vars, std::uint64_t first, std::uint64_t last)
{
    std::unordered_map<CountTable::Key, std::uint64_t, detail::TupleHash> local;
    CountTable::Key key;
    const std::size_t width = total_width(vars);
    for (std::uint64_t o = first; o < last; ++o) {
        const Realization r = space.realize(o);
        key.clear();
        for (const auto& v : vars) v.eval(r, key);
        if (key.size() != width) throw Error("derived variable produced the wrong number of symbols");
        ++local[key];
    }
    CountTable out;
    for (const auto& [k, n] : local) out.add(k, n);
    return out;
}

/// Joint counts of `vars` over the whole space, split across `workers`
/// contiguous outcome ranges. The merged table does not depend on `workers`.
inline CountTable count_joint(const SeedSpace& space, const VarSet& vars, unsigned workers = 1)
{
    const std::uint64_t n = space.outcome_count();
    workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(n, 1)));
    if (workers == 1) return count_range(space, vars, 0, n);

    std::vector<CountTable> parts(workers);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t first = n * w / workers;
        const std::uint64_t last = n * (w + 1) / workers;
        threads.emplace_back([&, w, first, last] {
            try {
                parts[w] = count_range(space, vars, first, last);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    CountTable merged;
    for (const auto& p : parts) merged.merge(p);
    return merged;
}

/// H(vars) in q-ary units.
inline double entropy(const SeedSpace& space, const VarSet& vars, unsigned workers = 1)
{
    if (vars.empty()) throw Error("entropy of an empty variable set");
    return count_joint(space, vars, workers).entropy(space.config().q().value());
}

/// H(target | given) = H(target, given) - H(given).
inline double conditional_entropy(const SeedSpace& space, const VarSet& target, const VarSet& given,
                                  unsigned workers = 1)
{
    VarSet joint = given;
    joint.insert(joint.end(), target.begin(), target.end());
    const CountTable table = count_joint(space, joint, workers);
    const std::size_t gw = total_width(given);
    const CountTable marginal = table.project({{0, gw}});
    const std::uint32_t q = space.config().q().value();
    return table.entropy(q) - marginal.entropy(q);
}

enum class Relation { Equal, AtLeast };

struct AuditResult {
    std::string quantity;
    double value = 0.0;
    /// Set when exact integer counts prove the value is 0.
    bool exact_zero = false;
    double tolerance = kZeroTolerance;
    double expected = 0.0;
    Relation relation = Relation::Equal;
    bool passed = false;
    std::string note;
};

inline std::string join_names(const VarSet& vars)
{
    if (vars.empty()) return "-";
    std::string s;
    for (const auto& v : vars) s += (s.empty() ? "" : ",") + v.name;
    return s;
}

/// True iff, within every conditioning cell c, n(a,b,c) n(c) = n(a,c) n(b,c)
/// for every pair (a, b), including pairs that never occur together.
inline bool factorizes_exactly(const CountTable& abc, std::size_t a_width, std::size_t b_width, std::size_t c_width)
{
    const CountTable ac = abc.project({{0, a_width}, {a_width + b_width, c_width}});
    const CountTable bc = abc.project({{a_width, b_width}, {a_width + b_width, c_width}});
    const CountTable c = abc.project({{a_width + b_width, c_width}});

    auto slice = [](const CountTable::Key& k, std::size_t first, std::size_t count) {
        return CountTable::Key(k.begin() + static_cast<std::ptrdiff_t>(first),
                               k.begin() + static_cast<std::ptrdiff_t>(first + count));
    };
    auto concat = [](CountTable::Key a, const CountTable::Key& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };

    for (const auto& [key, n_abc] : abc.cells()) {
        const auto a = slice(key, 0, a_width);
        const auto b = slice(key, a_width, b_width);
        const auto cc = slice(key, a_width + b_width, c_width);
        const unsigned __int128 lhs = static_cast<unsigned __int128>(n_abc) * c.cells().at(cc);
        const unsigned __int128 rhs =
            static_cast<unsigned __int128>(ac.cells().at(concat(a, cc))) * bc.cells().at(concat(b, cc));
        if (lhs != rhs) return false;
    }
    // Every observed (a, b, c) factorizes; the support must also be the full
    // product of the a- and b-supports within each cell.
    std::map<CountTable::Key, std::uint64_t> a_support, b_support;
    for (const auto& [key, n] : ac.cells()) ++a_support[slice(key, a_width, c_width)];
    for (const auto& [key, n] : bc.cells()) ++b_support[slice(key, b_width, c_width)];
    std::uint64_t product = 0;
    for (const auto& [cell, na] : a_support) product += na * b_support.at(cell);
    return product == abc.cells().size();
}

/// I(A; B | C) from one exact joint count table, with exact-zero
/// certification by integer factorization.
inline AuditResult conditional_mutual_information(const SeedSpace& space, const VarSet& a, const VarSet& b,
                                                  const VarSet& c, unsigned workers = 1,
                                                  double tolerance = kZeroTolerance)
{
    if (a.empty() || b.empty()) throw Error("mutual information needs nonempty variable sets");
    VarSet joint = a;
    joint.insert(joint.end(), b.begin(), b.end());
    joint.insert(joint.end(), c.begin(), c.end());
    const std::size_t aw = total_width(a), bw = total_width(b), cw = total_width(c);
    const CountTable abc = count_joint(space, joint, workers);
    const std::uint32_t q = space.config().q().value();

    const double h_ac = abc.project({{0, aw}, {aw + bw, cw}}).entropy(q);
    const double h_bc = abc.project({{aw, bw + cw}}).entropy(q);
    const double h_c = abc.project({{aw + bw, cw}}).entropy(q);
    const double h_abc = abc.entropy(q);

    AuditResult r;
    r.quantity = "I(" + join_names(a) + " ; " + join_names(b) + " | " + join_names(c) + ")";
    r.exact_zero = factorizes_exactly(abc, aw, bw, cw);
    r.value = r.exact_zero ? 0.0 : h_ac + h_bc - h_abc - h_c;
    r.tolerance = tolerance;
    return r;
}

inline void grade(AuditResult& r)
{
    if (r.relation == Relation::Equal) {
        r.passed = (r.expected == 0.0 && r.exact_zero) || std::abs(r.value - r.expected) <= r.tolerance;
    } else {
        r.passed = r.value >= r.expected - r.tolerance;
    }
}

struct AuditOptions {
    std::uint64_t budget = kDefaultBudget;
    unsigned workers = 1;
    double tolerance = kZeroTolerance;
    /// Above this many users, collusion sets are sampled instead of enumerated.
    int exhaustive_user_limit = 6;
    std::size_t sampled_sets = 32;
    std::uint64_t sample_seed = 0;
};

/// All subsets of `pool` with at most `max_size` members, smallest first.
inline std::vector<std::vector<int>> subsets_up_to(const std::vector<int>& pool, int max_size)
{
    std::vector<std::vector<int>> out;
    const auto n = pool.size();
    for (int size = 0; size <= max_size && static_cast<std::size_t>(size) <= n; ++size) {
        std::vector<bool> mask(n, false);
        std::fill(mask.begin(), mask.begin() + size, true);
        do {
            std::vector<int> s;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask[i]) s.push_back(pool[i]);
            }
            out.push_back(std::move(s));
        } while (std::prev_permutation(mask.begin(), mask.end()));
    }
    return out;
}

/// Runs the recovery, security and key-structure audits of one configuration
/// against its exact seed space.
class Auditor {
public:
    explicit Auditor(const ProtocolConfig& cfg, AuditOptions options = {})
        : space_(cfg, options.budget), options_(options) {}

    const SeedSpace& space() const noexcept { return space_; }
    const ProtocolConfig& config() const noexcept { return space_.config(); }
    const AuditOptions& options() const noexcept { return options_; }

    /// I({X_i}_{i!=k}; {W_i}_{i!=k} | SumW, W_k, Z_k, C_T), observed by k.
    AuditResult audit_security(int observer, const std::vector<int>& colluders) const
    {
        check_collusion(observer, colluders);
        if (static_cast<int>(colluders.size()) > config().users() - 3 && !config().override_set()) {
            throw Infeasible("collusion set of size " + std::to_string(colluders.size()) +
                             " exceeds K-3 without the demonstration override");
        }
        VarSet seen, others;
        for (int i = 0; i < config().users(); ++i) {
            if (i == observer) continue;
            seen.push_back(space_.observed(i, observer));
            others.push_back(space_.input(i));
        }
        VarSet given{space_.input_sum(), space_.input(observer), space_.key(observer)};
        const VarSet ct = space_.collection(colluders);
        given.insert(given.end(), ct.begin(), ct.end());

        AuditResult r = cmi(seen, others, given);
        r.expected = 0.0;
        r.note = "security at user " + std::to_string(observer + 1) + " with colluders " + set_label(colluders);
        grade(r);
        return r;
    }

    /// H(SumW | {X_i}_{i!=k}, W_k, Z_k).
    AuditResult audit_recovery(int observer) const
    {
        VarSet given;
        for (int i = 0; i < config().users(); ++i) {
            if (i != observer) given.push_back(space_.observed(i, observer));
        }
        given.push_back(space_.input(observer));
        given.push_back(space_.key(observer));
        // H(S | G) = I(S; S | G); the CMI route certifies exact zeros.
        AuditResult r = cmi({space_.input_sum()}, {space_.input_sum()}, given);
        r.quantity = "H(SumW | " + join_names(given) + ")";
        r.expected = 0.0;
        r.note = "recovery at user " + std::to_string(observer + 1);
        grade(r);
        return r;
    }

    /// Key subset entropies, total key entropy, and the instantiated converse
    /// bounds/identities, each reported as "consistent with" (a finite check
    /// cannot prove a statement about all schemes).
    std::vector<AuditResult> audit_key_structure() const
    {
        const int users = config().users();
        const double length = config().length();
        std::vector<AuditResult> out;

        std::vector<int> everyone(static_cast<std::size_t>(users));
        std::iota(everyone.begin(), everyone.end(), 0);
        for (const auto& s : subsets_up_to(everyone, users - 1)) {
            if (s.empty()) continue;
            VarSet keys;
            for (int u : s) keys.push_back(space_.key(u));
            out.push_back(entropy_check("H(" + join_names(keys) + ")", keys, key_subset_entropy(s), Relation::Equal,
                                        "consistent with mutual independence of any K-1 keys"));
        }
        {
            VarSet keys;
            for (int u : everyone) keys.push_back(space_.key(u));
            const double expected = config().scheme() == Scheme::Optimal
                                        ? (users - 1) * length
                                        : static_cast<double>(users) * (users - 2) * length;
            out.push_back(entropy_check("H(" + join_names(keys) + ")", keys, expected, Relation::Equal,
                                        "joint key entropy equals the independent source-key symbols"));
        }

        // Message-entropy lower bound: H(X_k | {W_i, Z_i}_{i!=k}) >= L.
        for (int k = 0; k < users; ++k) {
            std::vector<int> rest;
            for (int i : everyone) {
                if (i != k) rest.push_back(i);
            }
            AuditResult r;
            const VarSet given = space_.collection(rest);
            r.quantity = "H(" + space_.message(k).name + " | " + join_names(given) + ")";
            r.value = conditional_entropy(space_, {space_.message(k)}, given, options_.workers);
            r.expected = length;
            r.relation = Relation::AtLeast;
            r.tolerance = options_.tolerance;
            r.note = "consistent with the message-entropy lower bound";
            grade(r);
            out.push_back(std::move(r));
        }

        // Message/input independence at any other user:
        // I(X_k; W_k | W_k', Z_k') = 0, with X_k as observed by k'.
        for (int k = 0; k < users; ++k) {
            for (int other = 0; other < users; ++other) {
                if (other == k) continue;
                AuditResult r = cmi({space_.observed(k, other)}, {space_.input(k)},
                                    {space_.input(other), space_.key(other)});
                r.expected = 0.0;
                r.note = "consistent with message/input independence at every other user";
                grade(r);
                out.push_back(std::move(r));
            }
        }

        for (int k = 0; k < users; ++k) {
            for (const auto& colluders : collusion_sets(k)) {
                std::vector<int> rest;  // complement of T within [K] \ {k}
                for (int i : everyone) {
                    if (i != k && std::find(colluders.begin(), colluders.end(), i) == colluders.end()) rest.push_back(i);
                }
                std::vector<int> known = colluders;
                known.push_back(k);
                const VarSet given = space_.collection(known);
                VarSet seen, inputs, rest_keys, known_keys;
                for (int i : rest) {
                    seen.push_back(space_.observed(i, k));
                    inputs.push_back(space_.input(i));
                    rest_keys.push_back(space_.key(i));
                }
                for (int i : known) known_keys.push_back(space_.key(i));

                // Joint message entropy: H({X_i}_rest | C_T, W_k, Z_k) >= |rest| L.
                AuditResult joint;
                joint.quantity = "H(" + join_names(seen) + " | " + join_names(given) + ")";
                joint.value = conditional_entropy(space_, seen, given, options_.workers);
                joint.expected = static_cast<double>(rest.size()) * length;
                joint.relation = Relation::AtLeast;
                joint.tolerance = options_.tolerance;
                joint.note = "consistent with the joint message-entropy lower bound";
                grade(joint);
                out.push_back(std::move(joint));

                // Only the sum is learnable: I({X_i}_rest; {W_i}_rest | C_T, W_k, Z_k) = L.
                AuditResult sum_only = cmi(seen, inputs, given);
                sum_only.expected = length;
                sum_only.note = "consistent with only the input sum being learnable";
                grade(sum_only);
                out.push_back(std::move(sum_only));

                // Conditional key entropy: H({Z_i}_rest | {Z_i}_{T+k}) >= (K-2-|T|) L.
                AuditResult keys;
                keys.quantity = "H(" + join_names(rest_keys) + " | " + join_names(known_keys) + ")";
                keys.value = conditional_entropy(space_, rest_keys, known_keys, options_.workers);
                keys.expected = static_cast<double>(users - 2 - static_cast<int>(colluders.size())) * length;
                keys.relation = Relation::AtLeast;
                keys.tolerance = options_.tolerance;
                keys.note = "consistent with the conditional key-entropy lower bound";
                grade(keys);
                out.push_back(std::move(keys));
            }
        }
        return out;
    }

    /// I(X_t; W_t | C_{T+k}) without conditioning on the input sum. With
    /// T = [K] \ {k, t} (the default) the observer learns W_t outright.
    AuditResult leakage_without_sum(int observer, int target, std::optional<std::vector<int>> colluders = {}) const
    {
        const int users = config().users();
        if (observer == target) throw InvalidCollusion("observer and target must differ");
        std::vector<int> t;
        if (colluders) {
            t = *colluders;
        } else {
            for (int i = 0; i < users; ++i) {
                if (i != observer && i != target) t.push_back(i);
            }
        }
        check_collusion(observer, t);
        if (std::find(t.begin(), t.end(), target) != t.end()) throw InvalidCollusion("target cannot collude");
        if (static_cast<int>(t.size()) > users - 3 && !config().override_set()) {
            throw Infeasible("leakage demonstration at |T| = " + std::to_string(t.size()) +
                             " requires the demonstration override");
        }
        std::vector<int> known = t;
        known.push_back(observer);
        AuditResult r = cmi({space_.observed(target, observer)}, {space_.input(target)}, space_.collection(known));
        r.expected = static_cast<int>(t.size()) == users - 2 ? config().length() : 0.0;
        r.note = "leakage of user " + std::to_string(target + 1) + "'s input to user " + std::to_string(observer + 1) +
                 " colluding with " + set_label(t) + ", input sum not conditioned";
        grade(r);
        return r;
    }

    /// Collusion sets for `observer` with |T| <= cfg.T: exhaustive up to
    /// exhaustive_user_limit users, otherwise a seeded sample (always
    /// including the empty set).
    std::vector<std::vector<int>> collusion_sets(int observer) const
    {
        std::vector<int> pool;
        for (int i = 0; i < config().users(); ++i) {
            if (i != observer) pool.push_back(i);
        }
        auto all = subsets_up_to(pool, config().threshold());
        if (config().users() <= options_.exhaustive_user_limit || all.size() <= options_.sampled_sets) return all;
        Rng rng(options_.sample_seed ^ (0x51ed2701ULL * static_cast<std::uint64_t>(observer + 1)));
        std::vector<std::vector<int>> sample{all.front()};
        std::vector<std::size_t> idx(all.size() - 1);
        std::iota(idx.begin(), idx.end(), std::size_t{1});
        for (std::size_t i = 0; i + 1 < options_.sampled_sets && !idx.empty(); ++i) {
            const auto pick = static_cast<std::size_t>(rng.uniform_below(idx.size()));
            sample.push_back(all[idx[pick]]);
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        return sample;
    }

    /// Recovery at every user, security at every (k, T) with |T| <= cfg.T,
    /// then the key-structure checks.
    std::vector<AuditResult> audit_all() const
    {
        std::vector<AuditResult> out;
        for (int k = 0; k < config().users(); ++k) out.push_back(audit_recovery(k));
        for (int k = 0; k < config().users(); ++k) {
            for (const auto& t : collusion_sets(k)) out.push_back(audit_security(k, t));
        }
        auto keys = audit_key_structure();
        out.insert(out.end(), std::make_move_iterator(keys.begin()), std::make_move_iterator(keys.end()));
        return out;
    }

    /// Expected H({Z_i}_{i in S}) for a proper key subset.
    double key_subset_entropy(const std::vector<int>& subset) const
    {
        const int users = config().users();
        const double length = config().length();
        if (config().scheme() == Scheme::Optimal) {
            return std::min<double>(static_cast<double>(subset.size()), users - 1) * length;
        }
        // Round r's keys are a uniform zero-sum (K-1)-tuple: any K-2 of them
        // are independent, all K-1 lose one vector.
        double h = 0;
        for (int round = 0; round < users; ++round) {
            const auto senders = static_cast<int>(
                std::count_if(subset.begin(), subset.end(), [round](int u) { return u != round; }));
            h += (senders == users - 1 ? users - 2 : senders) * length;
        }
        return h;
    }

private:
    static std::string set_label(const std::vector<int>& users)
    {
        std::string s = "{";
        for (std::size_t i = 0; i < users.size(); ++i) s += (i ? "," : "") + std::to_string(users[i] + 1);
        return s + "}";
    }

    void check_collusion(int observer, const std::vector<int>& colluders) const
    {
        const int users = config().users();
        if (observer < 0 || observer >= users) throw InvalidCollusion("observer out of range");
        std::vector<bool> seen(static_cast<std::size_t>(users), false);
        for (int c : colluders) {
            if (c < 0 || c >= users) throw InvalidCollusion("colluder out of range");
            if (c == observer) throw InvalidCollusion("the observer cannot be in its own collusion set");
            if (seen[static_cast<std::size_t>(c)]) throw InvalidCollusion("duplicate colluder");
            seen[static_cast<std::size_t>(c)] = true;
        }
    }

    AuditResult cmi(const VarSet& a, const VarSet& b, const VarSet& c) const
    {
        return conditional_mutual_information(space_, a, b, c, options_.workers, options_.tolerance);
    }

    AuditResult entropy_check(std::string quantity, const VarSet& vars, double expected, Relation rel,
                              std::string note) const
    {
        AuditResult r;
        r.quantity = std::move(quantity);
        r.value = entropy(space_, vars, options_.workers);
        r.expected = expected;
        r.relation = rel;
        r.tolerance = options_.tolerance;
        r.note = std::move(note);
        grade(r);
        return r;
    }

    SeedSpace space_;
    AuditOptions options_;
};

} // namespace dsa
