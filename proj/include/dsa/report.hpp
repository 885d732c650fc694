#pragma once

// JSON documents for transcripts, rates, audits and runs, and the JSON Lines
// transcript replay format.
//
// Symbols serialize as arrays of non-negative integers, rationals as
// {"num", "den"}, user and round indices 1-based.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsa/infoaudit.hpp"
#include "dsa/protocol.hpp"
#include "dsa/simnet.hpp"

namespace dsa {

using nlohmann::json;

inline json to_json(const Rational& r) { return {{"num", r.numerator()}, {"den", r.denominator()}}; }

inline Rational rational_from_json(const json& j) { return Rational(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>()); }

inline json to_json(const SymbolVector& v) { return json(std::vector<std::uint32_t>(v.raw().begin(), v.raw().end())); }

inline json to_json(const RateReport& r)
{
    return {{"R_X", to_json(r.communication)}, {"R_Z", to_json(r.individual_key)}, {"R_ZSigma", to_json(r.source_key)}};
}

inline json config_json(const ProtocolConfig& cfg)
{
    return {{"K", cfg.users()},
            {"T", cfg.threshold()},
            {"L", cfg.length()},
            {"q", cfg.q().value()},
            {"scheme", std::string(to_string(cfg.scheme()))},
            {"override", cfg.override_set()}};
}

inline json to_json(const MessageRecord& m)
{
    return {{"round", m.round + 1},
            {"sender", m.sender + 1},
            {"recipient", m.recipient ? json(*m.recipient + 1) : json(nullptr)},
            {"symbols", to_json(m.payload)}};
}

inline json transcript_json(const ProtocolConfig& cfg, const Transcript& t)
{
    json j = config_json(cfg);
    j["messages"] = json::array();
    for (const auto& m : t.messages) j["messages"].push_back(to_json(m));
    j["recovered"] = json::array();
    for (std::size_t k = 0; k < t.recovered.size(); ++k) {
        j["recovered"].push_back({{"user", k + 1}, {"symbols", to_json(t.recovered[k])}});
    }
    return j;
}

inline json to_json(const MeasuredRates& m)
{
    return {{"transmitted_per_user", m.transmitted_per_user},
            {"key_symbols_per_user", m.key_symbols_per_user},
            {"source_symbols", m.source_symbols},
            {"independent_source_symbols", m.independent_source_symbols},
            {"dealer_unicast_symbols", m.dealer_unicast_symbols},
            {"dealer_overhead", to_json(m.dealer_overhead)},
            {"rates", to_json(m.rates)}};
}

inline std::string_view to_string(Relation r) noexcept { return r == Relation::Equal ? "eq" : "ge"; }

inline json to_json(const AuditResult& r)
{
    return {{"quantity", r.quantity}, {"value", r.value},   {"exact_zero", r.exact_zero}, {"tolerance", r.tolerance},
            {"expected", r.expected}, {"relation", std::string(to_string(r.relation))},
            {"pass", r.passed},       {"note", r.note}};
}

inline json audit_json(const ProtocolConfig& cfg, const std::vector<AuditResult>& results)
{
    json j;
    j["config"] = config_json(cfg);
    j["results"] = json::array();
    bool all = true;
    for (const auto& r : results) {
        j["results"].push_back(to_json(r));
        all = all && r.passed;
    }
    j["passed"] = all;
    return j;
}

inline json to_json(const AdversaryView& v)
{
    json j{{"observer", v.observer + 1}, {"own_input", to_json(v.own_input)}, {"own_key", to_json(v.own_key)}};
    j["colluders"] = json::array();
    for (int c : v.colluders) j["colluders"].push_back(c + 1);
    j["observed"] = json::array();
    for (const auto& [sender, x] : v.observed) j["observed"].push_back({{"sender", sender + 1}, {"symbols", to_json(x)}});
    j["collected"] = json::array();
    for (const auto& [user, wz] : v.collected) {
        j["collected"].push_back({{"user", user + 1}, {"input", to_json(wz.first)}, {"key", to_json(wz.second)}});
    }
    return j;
}

inline json run_json(const RunResult& run, std::uint64_t seed, const std::vector<AdversaryView>& views = {})
{
    json j;
    j["config"] = config_json(run.config);
    j["config"]["seed"] = seed;
    j["inputs"] = json::array();
    for (const auto& w : run.inputs) j["inputs"].push_back(to_json(w));
    j["transcript"] = transcript_json(run.config, run.transcript);
    j["measured"] = to_json(run.measured);
    if (run.config.feasible()) {
        const RateReport theory = theoretical_rates(run.config);
        j["theoretical"] = to_json(theory);
        j["rates_match"] = run.measured.rates == theory;
    }
    if (!views.empty()) {
        j["views"] = json::array();
        for (const auto& v : views) j["views"].push_back(to_json(v));
    }
    return j;
}

inline json to_json(const SweepReport& report)
{
    json rows = json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"K", row.point.users},
                        {"T", row.point.threshold},
                        {"L", row.point.length},
                        {"q", row.point.q},
                        {"scheme", std::string(to_string(row.point.scheme))},
                        {"trials", row.trials},
                        {"recoveries", row.recoveries},
                        {"measured", to_json(row.measured)},
                        {"theoretical", to_json(row.theoretical)},
                        {"rates_match", row.rates_match}});
    }
    return {{"rows", rows}};
}

/// Header and message records of a replay file.
struct ReplayLog {
    int users = 0;
    int threshold = 0;
    int length = 0;
    std::uint32_t q = 0;
    Scheme scheme = Scheme::Optimal;
    std::uint64_t seed = 0;
    std::vector<MessageRecord> messages;
};

inline constexpr const char* kReplayFormat = "dsa-transcript-replay/1";

/// One JSON object per line: the header, then one record per message.
inline void write_replay(std::ostream& os, const RunResult& run, std::uint64_t seed)
{
    const auto& cfg = run.config;
    const json header{{"format", kReplayFormat},
                      {"K", cfg.users()},
                      {"T", cfg.threshold()},
                      {"L", cfg.length()},
                      {"q", cfg.q().value()},
                      {"scheme", std::string(to_string(cfg.scheme()))},
                      {"seed", seed}};
    os << header.dump() << '\n';
    for (const auto& m : run.transcript.messages) {
        os << json{{"round", m.round + 1}, {"sender", m.sender + 1}, {"symbols", to_json(m.payload)}}.dump() << '\n';
    }
}

inline ReplayLog read_replay(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw Error("empty replay file");
    const json header = json::parse(line);
    if (header.value("format", "") != kReplayFormat) throw Error("not a transcript replay file");
    ReplayLog log;
    log.users = header.at("K").get<int>();
    log.threshold = header.at("T").get<int>();
    log.length = header.at("L").get<int>();
    log.q = header.at("q").get<std::uint32_t>();
    log.scheme = parse_scheme(header.at("scheme").get<std::string>());
    log.seed = header.at("seed").get<std::uint64_t>();
    const Modulus q(log.q);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        const int round = rec.at("round").get<int>() - 1;
        const int sender = rec.at("sender").get<int>() - 1;
        std::optional<int> recipient;
        if (log.scheme == Scheme::Baseline) recipient = round;
        log.messages.push_back(
            {round, sender, recipient, SymbolVector(rec.at("symbols").get<std::vector<std::uint64_t>>(), q)});
    }
    return log;
}

/// Re-executes the logged configuration from its seed; true iff every message
/// record matches.
inline bool verify_replay(const ReplayLog& log)
{
    const ProtocolConfig cfg(log.users, log.threshold, log.length, Modulus(log.q), log.scheme);
    Rng rng(log.seed);
    const RunResult run = run_protocol(cfg, std::nullopt, rng);
    return run.transcript.messages == log.messages;
}

} // namespace dsa
