#pragma once

// Message-passing simulation of K users on orthogonal error-free channels:
// a trusted dealer unicasts the individual keys, users transmit, every user
// decodes the input sum. Also the passive collusion adversary and the
// parameter sweep harness.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsa/errors.hpp"
#include "dsa/field.hpp"
#include "dsa/protocol.hpp"

namespace dsa {

enum class DeliveryOrder { Forward, Reverse, Shuffled };

/// Orthogonal channels never interfere or corrupt; only the order in which
/// queued deliveries reach inboxes is configurable.
struct ChannelModel {
    DeliveryOrder order = DeliveryOrder::Forward;
    std::uint64_t shuffle_seed = 0;
};

struct NodeState {
    int user;
    SymbolVector input;
    std::optional<SymbolVector> key;
    std::map<int, SymbolVector> inbox;
    std::optional<SymbolVector> recovered;
};

/// Exact symbol counts and the rates they imply (counts divided by L).
struct MeasuredRates {
    std::size_t transmitted_per_user = 0;
    std::size_t key_symbols_per_user = 0;
    std::size_t source_symbols = 0;
    std::size_t independent_source_symbols = 0;
    std::size_t dealer_unicast_symbols = 0;
    RateReport rates;
    /// Dealer unicast total / L, i.e. K * R_Z.
    Rational dealer_overhead;
};

struct RunResult {
    ProtocolConfig config;
    std::vector<SymbolVector> inputs;
    SourceKey source;
    KeyAssignment keys;
    Transcript transcript;
    MeasuredRates measured;
};

namespace detail {

struct Delivery {
    int recipient;
    std::size_t record;  // index into the transcript's message list
};

inline void order_deliveries(std::vector<Delivery>& queue, const ChannelModel& channel)
{
    switch (channel.order) {
    case DeliveryOrder::Forward:
        break;
    case DeliveryOrder::Reverse:
        std::reverse(queue.begin(), queue.end());
        break;
    case DeliveryOrder::Shuffled: {
        Rng rng(channel.shuffle_seed);
        for (std::size_t i = queue.size(); i > 1; --i) {
            std::swap(queue[i - 1], queue[static_cast<std::size_t>(rng.uniform_below(i))]);
        }
        break;
    }
    }
}

} // namespace detail

/// One end-to-end execution. Inputs are sampled uniformly (before the dealer
/// draws the source key) when not supplied.
inline RunResult run_protocol(const ProtocolConfig& cfg, std::optional<std::vector<SymbolVector>> inputs, Rng& rng,
                              ChannelModel channel = {})
{
    if (!cfg.feasible() && !cfg.override_set()) throw Infeasible("cannot run an infeasible configuration");
    const int users = cfg.users();
    if (!inputs) {
        inputs.emplace();
        for (int k = 0; k < users; ++k) inputs->push_back(sample_uniform_vector(cfg.length(), cfg.q(), rng));
    }
    detail::check_inputs(cfg, *inputs);

    std::vector<NodeState> nodes;
    for (int k = 0; k < users; ++k) nodes.push_back({k, (*inputs)[k], std::nullopt, {}, std::nullopt});

    // Phase 1: the dealer draws Z_Sigma and unicasts Z_k privately.
    SourceKey source = generate_source_key(cfg, rng);
    KeyAssignment keys = derive_individual_keys(source, cfg);
    std::size_t dealer_symbols = 0;
    for (auto& node : nodes) {
        node.key = keys.keys[static_cast<std::size_t>(node.user)];
        dealer_symbols += node.key->size();
    }

    // Phase 2: transmissions. Each node encodes from its own input and key.
    Transcript transcript;
    std::vector<detail::Delivery> queue;
    std::vector<std::size_t> sent(static_cast<std::size_t>(users), 0);
    if (cfg.scheme() == Scheme::Optimal) {
        for (const auto& node : nodes) {
            transcript.messages.push_back({0, node.user, std::nullopt, encode_message(node.input, *node.key)});
        }
    } else {
        for (int round = 0; round < users; ++round) {
            for (const auto& node : nodes) {
                if (node.user == round) continue;
                transcript.messages.push_back(
                    {round, node.user, round,
                     encode_message(node.input, baseline_round_key(*node.key, cfg, node.user, round))});
            }
        }
    }
    for (std::size_t i = 0; i < transcript.messages.size(); ++i) {
        const auto& m = transcript.messages[i];
        sent[static_cast<std::size_t>(m.sender)] += m.payload.size();
        if (m.recipient) {
            queue.push_back({*m.recipient, i});
        } else {
            for (int k = 0; k < users; ++k) {
                if (k != m.sender) queue.push_back({k, i});
            }
        }
    }
    detail::order_deliveries(queue, channel);
    for (const auto& d : queue) {
        const auto& m = transcript.messages[d.record];
        auto& inbox = nodes[static_cast<std::size_t>(d.recipient)].inbox;
        if (!inbox.emplace(m.sender, m.payload).second) throw DecodeFailure("duplicate delivery");
    }

    // Phase 3: decode once all K-1 messages have arrived.
    const SymbolVector truth = vec_sum(*inputs);
    for (auto& node : nodes) {
        if (node.inbox.size() != static_cast<std::size_t>(users - 1)) {
            throw DecodeFailure("user " + std::to_string(node.user + 1) + " holds " + std::to_string(node.inbox.size()) +
                                " messages, expected " + std::to_string(users - 1));
        }
        if (cfg.scheme() == Scheme::Optimal) {
            node.recovered = recover_sum(node.user, node.inbox, node.input, *node.key, users);
        } else {
            std::vector<SymbolVector> terms;
            for (const auto& [sender, x] : node.inbox) terms.push_back(x);
            terms.push_back(node.input);
            node.recovered = vec_sum(terms);
        }
        if (*node.recovered != truth) {
            throw DecodeFailure("user " + std::to_string(node.user + 1) + " decoded a wrong input sum");
        }
        transcript.recovered.push_back(*node.recovered);
    }

    if (std::adjacent_find(sent.begin(), sent.end(), std::not_equal_to<>()) != sent.end()) {
        throw Error("users transmitted different numbers of symbols");
    }
    MeasuredRates m;
    m.transmitted_per_user = sent.front();
    m.key_symbols_per_user = keys.keys.front().size();
    m.source_symbols = source.rate_symbols(cfg);
    m.independent_source_symbols = source.independent_symbols();
    m.dealer_unicast_symbols = dealer_symbols;
    const auto length = static_cast<std::int64_t>(cfg.length());
    m.rates = {Rational(static_cast<std::int64_t>(m.transmitted_per_user), length),
               Rational(static_cast<std::int64_t>(m.key_symbols_per_user), length),
               Rational(static_cast<std::int64_t>(m.source_symbols), length)};
    m.dealer_overhead = Rational(static_cast<std::int64_t>(dealer_symbols), length);

    return {cfg, std::move(*inputs), std::move(source), std::move(keys), std::move(transcript), m};
}

/// What an honest-but-curious observer holds: its own input and key, the
/// messages it received, and the inputs and keys of its colluders.
struct AdversaryView {
    int observer;
    std::vector<int> colluders;
    SymbolVector own_input;
    SymbolVector own_key;
    std::map<int, SymbolVector> observed;
    std::map<int, std::pair<SymbolVector, SymbolVector>> collected;
};

inline AdversaryView collude(const RunResult& run, int observer, std::vector<int> colluders)
{
    const ProtocolConfig& cfg = run.config;
    const int users = cfg.users();
    if (observer < 0 || observer >= users) throw InvalidCollusion("observer out of range");
    std::sort(colluders.begin(), colluders.end());
    if (std::adjacent_find(colluders.begin(), colluders.end()) != colluders.end()) {
        throw InvalidCollusion("duplicate colluder");
    }
    for (int c : colluders) {
        if (c < 0 || c >= users) throw InvalidCollusion("colluder out of range");
        if (c == observer) throw InvalidCollusion("the observer cannot be in its own collusion set");
    }
    if (static_cast<int>(colluders.size()) > cfg.threshold() && !cfg.override_set()) {
        throw InvalidCollusion("collusion set of size " + std::to_string(colluders.size()) +
                               " exceeds the threshold T=" + std::to_string(cfg.threshold()));
    }

    AdversaryView view{observer, colluders, run.inputs[static_cast<std::size_t>(observer)],
                       run.keys.keys[static_cast<std::size_t>(observer)], {}, {}};
    for (const auto& m : run.transcript.messages) {
        if (m.sender == observer) continue;
        if (!m.recipient || *m.recipient == observer) view.observed.emplace(m.sender, m.payload);
    }
    for (int c : colluders) {
        view.collected.emplace(c, std::make_pair(run.inputs[static_cast<std::size_t>(c)],
                                                 run.keys.keys[static_cast<std::size_t>(c)]));
    }
    return view;
}

struct SweepPoint {
    int users;
    int threshold;
    int length;
    std::uint32_t q;
    Scheme scheme;
};

struct SweepRow {
    SweepPoint point;
    std::size_t trials = 0;
    std::size_t recoveries = 0;
    RateReport measured;
    RateReport theoretical;
    bool rates_match = false;
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

class SweepError : public Error {
public:
    using Error::Error;
};

inline std::string describe(const SweepPoint& p)
{
    return "K=" + std::to_string(p.users) + " T=" + std::to_string(p.threshold) + " L=" + std::to_string(p.length) +
           " q=" + std::to_string(p.q) + " scheme=" + std::string(to_string(p.scheme));
}

/// Runs `trials` executions per grid point, checks recovery on each and
/// cross-checks the measured rates against the theoretical ones.
inline SweepReport sweep(const std::vector<SweepPoint>& grid, std::size_t trials, Rng& rng)
{
    SweepReport report;
    if (trials == 0) return report;
    for (const auto& point : grid) {
        try {
            const ProtocolConfig cfg(point.users, point.threshold, point.length, Modulus(point.q), point.scheme);
            SweepRow row{point, trials, 0, {}, theoretical_rates(cfg), true};
            for (std::size_t t = 0; t < trials; ++t) {
                const RunResult run = run_protocol(cfg, std::nullopt, rng);
                const SymbolVector truth = vec_sum(run.inputs);
                const bool ok = std::all_of(run.transcript.recovered.begin(), run.transcript.recovered.end(),
                                            [&](const SymbolVector& s) { return s == truth; });
                if (!ok) throw DecodeFailure("recovered sum mismatch");
                ++row.recoveries;
                if (t == 0) row.measured = run.measured.rates;
                row.rates_match = row.rates_match && run.measured.rates == row.theoretical &&
                                  run.measured.rates == row.measured;
            }
            report.rows.push_back(row);
        } catch (const Error& e) {
            throw SweepError("grid point " + describe(point) + ": " + e.what());
        }
    }
    return report;
}

} // namespace dsa
