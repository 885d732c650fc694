#pragma once

// Test-only brute-force oracle for L = 1.
//
// Re-derives keys and messages with plain integer arithmetic (no library
// code) and evaluates I(A; B | C) as the direct sum
//   sum p(a,b,c) log_q [ p(a,b,c) p(c) / (p(a,c) p(b,c)) ],
// a different route from the library's entropy differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

struct World {
    int K = 0;
    int q = 0;
    std::vector<int> W;                  // inputs
    std::vector<std::vector<int>> Z;     // individual keys (baseline: one entry per round sent)
    std::vector<std::vector<int>> seen;  // seen[sender * K + observer]: symbols the observer receives
};

using Var = std::function<std::vector<int>(const World&)>;

inline int mod(long v, int q) { return static_cast<int>(((v % q) + q) % q); }

/// Every outcome of the optimal scheme: q^(K + K-1) worlds.
inline std::vector<World> optimal_worlds(int K, int q)
{
    std::vector<World> out;
    const int digits = 2 * K - 1;
    std::vector<int> d(static_cast<std::size_t>(digits), 0);
    for (;;) {
        World w;
        w.K = K;
        w.q = q;
        w.W.assign(d.begin(), d.begin() + K);
        long s = 0;
        for (int j = 0; j < K - 1; ++j) {
            w.Z.push_back({d[static_cast<std::size_t>(K + j)]});
            s += d[static_cast<std::size_t>(K + j)];
        }
        w.Z.push_back({mod(-s, q)});
        w.seen.assign(static_cast<std::size_t>(K * K), {});
        for (int i = 0; i < K; ++i) {
            for (int k = 0; k < K; ++k) {
                if (i != k) w.seen[static_cast<std::size_t>(i * K + k)] = {mod(w.W[i] + w.Z[i][0], q)};
            }
        }
        out.push_back(std::move(w));
        int pos = 0;
        while (pos < digits && ++d[static_cast<std::size_t>(pos)] == q) d[static_cast<std::size_t>(pos++)] = 0;
        if (pos == digits) break;
    }
    return out;
}

/// Every outcome of the K-round baseline: inputs, K(K-2) seeds and one
/// permutation of the K-1 round-key slots per round.
inline std::vector<World> baseline_worlds(int K, int q)
{
    std::vector<std::vector<int>> perms;
    std::vector<int> p(static_cast<std::size_t>(K - 1));
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    const int symbol_digits = K + K * (K - 2);
    std::vector<int> d(static_cast<std::size_t>(symbol_digits), 0);
    std::vector<int> pd(static_cast<std::size_t>(K), 0);
    std::vector<World> out;
    for (;;) {
        World w;
        w.K = K;
        w.q = q;
        w.W.assign(d.begin(), d.begin() + K);
        w.Z.assign(static_cast<std::size_t>(K), {});
        w.seen.assign(static_cast<std::size_t>(K * K), {});
        for (int r = 0; r < K; ++r) {
            std::vector<int> keys;
            long s = 0;
            for (int j = 0; j < K - 2; ++j) {
                const int n = d[static_cast<std::size_t>(K + r * (K - 2) + j)];
                keys.push_back(n);
                s += n;
            }
            keys.push_back(mod(-s, q));
            const auto& perm = perms[static_cast<std::size_t>(pd[static_cast<std::size_t>(r)])];
            int slot = 0;
            for (int i = 0; i < K; ++i) {
                if (i == r) continue;
                const int key = keys[static_cast<std::size_t>(perm[static_cast<std::size_t>(slot++)])];
                w.Z[static_cast<std::size_t>(i)].push_back(key);
                w.seen[static_cast<std::size_t>(i * K + r)] = {mod(w.W[i] + key, q)};
            }
        }
        out.push_back(std::move(w));

        int pos = 0;
        while (pos < symbol_digits && ++d[static_cast<std::size_t>(pos)] == q) d[static_cast<std::size_t>(pos++)] = 0;
        if (pos < symbol_digits) continue;
        int pp = 0;
        const int nperm = static_cast<int>(perms.size());
        while (pp < K && ++pd[static_cast<std::size_t>(pp)] == nperm) pd[static_cast<std::size_t>(pp++)] = 0;
        if (pp == K) break;
    }
    return out;
}

inline Var input(int i) { return [i](const World& w) { return std::vector<int>{w.W[static_cast<std::size_t>(i)]}; }; }
inline Var key(int i) { return [i](const World& w) { return w.Z[static_cast<std::size_t>(i)]; }; }
inline Var seen(int sender, int observer)
{
    return [=](const World& w) { return w.seen[static_cast<std::size_t>(sender * w.K + observer)]; };
}
inline Var sum_of(std::vector<int> users)
{
    return [users](const World& w) {
        long s = 0;
        for (int u : users) s += w.W[static_cast<std::size_t>(u)];
        return std::vector<int>{mod(s, w.q)};
    };
}

inline std::vector<int> eval(const std::vector<Var>& vars, const World& w)
{
    std::vector<int> out;
    for (const auto& v : vars) {
        const auto x = v(w);
        out.insert(out.end(), x.begin(), x.end());
    }
    out.push_back(-1);  // separator keeps tuples of different groups distinct
    return out;
}

inline double cmi(const std::vector<World>& worlds, const std::vector<Var>& a, const std::vector<Var>& b,
                  const std::vector<Var>& c)
{
    using Key = std::vector<int>;
    std::map<std::vector<Key>, double> pabc, pac, pbc, pc;
    const double unit = 1.0 / static_cast<double>(worlds.size());
    for (const auto& w : worlds) {
        const Key ka = eval(a, w), kb = eval(b, w), kc = eval(c, w);
        pabc[{ka, kb, kc}] += unit;
        pac[{ka, kc}] += unit;
        pbc[{kb, kc}] += unit;
        pc[{kc}] += unit;
    }
    const double lq = std::log(static_cast<double>(worlds.front().q));
    double total = 0;
    for (const auto& [k, p] : pabc) {
        const double ratio = p * pc.at({k[2]}) / (pac.at({k[0], k[2]}) * pbc.at({k[1], k[2]}));
        total += p * std::log(ratio) / lq;
    }
    return total;
}

/// H(A) = I(A; A).
inline double entropy(const std::vector<World>& worlds, const std::vector<Var>& a) { return cmi(worlds, a, a, {}); }

} // namespace oracle
