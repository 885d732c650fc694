// dsa: command-line harness for protocol runs, exact audits, rate tables,
// sweeps and the infeasibility demonstration.
//
// JSON goes to stdout (or --output), human-readable tables to stderr.
// Exit status: 0 all checks pass, 1 a check failed, 2 usage error,
// 3 enumeration budget exceeded, 4 other runtime error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsa/dsa.hpp"

namespace {

using dsa::json;

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;
constexpr int kExitRuntime = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string users = "3";
    int threshold = 0;
    int length = 1;
    std::uint64_t q = 2;
    std::string scheme = "optimal";
    std::uint64_t seed = 1;
    std::string output;
    std::uint64_t budget = dsa::kDefaultBudget;
    unsigned workers = 1;
    bool bits = false;
    bool deterministic = false;
    bool force = false;
    bool threshold_set = false;
};

/// "4", "3..6" or "3,4,5".
std::vector<int> parse_user_list(const std::string& text)
{
    std::vector<int> out;
    try {
        if (const auto dots = text.find(".."); dots != std::string::npos) {
            const int lo = std::stoi(text.substr(0, dots));
            const int hi = std::stoi(text.substr(dots + 2));
            if (hi < lo) throw UsageError("empty range " + text);
            for (int k = lo; k <= hi; ++k) out.push_back(k);
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
        throw UsageError("cannot parse user count '" + text + "'");
    }
    if (out.empty()) throw UsageError("no user count given");
    return out;
}

int single_user_count(const CommonOptions& o)
{
    const auto ks = parse_user_list(o.users);
    if (ks.size() != 1) throw UsageError("this command takes a single --k value");
    return ks.front();
}

std::vector<dsa::Scheme> parse_schemes(const std::string& s)
{
    if (s == "both") return {dsa::Scheme::Optimal, dsa::Scheme::Baseline};
    try {
        return {dsa::parse_scheme(s)};
    } catch (const dsa::Error& e) {
        throw UsageError(e.what());
    }
}

dsa::ProtocolConfig make_config(const CommonOptions& o, int users, dsa::Scheme scheme,
                                dsa::DemoOverride override = dsa::DemoOverride::Off)
{
    if (users < 3) {
        throw UsageError("K=" + std::to_string(users) +
                         " is infeasible: secure aggregation needs K >= 3 and T <= K-3");
    }
    try {
        return dsa::ProtocolConfig(users, o.threshold, o.length, dsa::Modulus(o.q), scheme, override);
    } catch (const dsa::Infeasible& e) {
        throw UsageError(e.what());
    } catch (const dsa::InvalidModulus& e) {
        throw UsageError(e.what());
    } catch (const dsa::ShapeMismatch& e) {
        throw UsageError(e.what());
    }
}

std::string rational_text(const dsa::Rational& r)
{
    return r.denominator() == 1 ? std::to_string(r.numerator())
                                : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string rates_text(const dsa::RateReport& r)
{
    return "(" + rational_text(r.communication) + ", " + rational_text(r.individual_key) + ", " +
           rational_text(r.source_key) + ")";
}

json envelope(const std::string& command, const CommonOptions& o)
{
    json j{{"tool", "dsa"}, {"format_version", 1}, {"command", command}};
    if (!o.deterministic) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        j["generated_at"] = buf;
    }
    return j;
}

void emit(const json& doc, const CommonOptions& o)
{
    const std::string text = doc.dump(2) + "\n";
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.output);
    if (!f) throw std::runtime_error("cannot open " + o.output);
    f << text;
}

/// Scales q-ary entropy values to bits when --bits is set.
json scaled(const dsa::AuditResult& r, const CommonOptions& o, std::uint32_t q)
{
    json j = dsa::to_json(r);
    const double factor = o.bits ? std::log2(static_cast<double>(q)) : 1.0;
    j["value"] = r.value * factor;
    j["expected"] = r.expected * factor;
    j["tolerance"] = r.tolerance * factor;
    return j;
}

void print_audit_table(const std::vector<dsa::AuditResult>& results, const CommonOptions& o, std::uint32_t q)
{
    const double factor = o.bits ? std::log2(static_cast<double>(q)) : 1.0;
    const char* unit = o.bits ? "bits" : "q-ary units";
    std::fprintf(stderr, "%-6s %-12s %-4s %-12s  %s\n", "status", "value", "rel", "expected", "quantity");
    for (const auto& r : results) {
        std::fprintf(stderr, "%-6s %-12.9f %-4s %-12.9f  %s%s\n", r.passed ? "PASS" : "FAIL", r.value * factor,
                     r.relation == dsa::Relation::Equal ? "==" : ">=", r.expected * factor, r.quantity.c_str(),
                     r.exact_zero ? "  [exact zero]" : "");
        std::fprintf(stderr, "       %s\n", r.note.c_str());
    }
    std::fprintf(stderr, "(entropies in %s)\n", unit);
}

/// Smaller parameters whose seed space fits the budget, if any.
std::string suggest_smaller(const CommonOptions& o, int users, dsa::Scheme scheme)
{
    auto fits = [&](int k, int l, std::uint64_t q) {
        try {
            dsa::SeedSpace(dsa::ProtocolConfig(k, std::min(o.threshold, k - 3), l, dsa::Modulus(q), scheme), o.budget);
            return true;
        } catch (const dsa::Error&) {
            return false;
        }
    };
    if (fits(users, 1, o.q)) return "--k " + std::to_string(users) + " --l 1 --q " + std::to_string(o.q);
    if (fits(users, 1, 2)) return "--k " + std::to_string(users) + " --l 1 --q 2";
    for (int k = users - 1; k >= 3; --k) {
        if (fits(k, 1, 2)) return "--k " + std::to_string(k) + " --l 1 --q 2";
    }
    return "raise --budget";
}

int cmd_rates(const CommonOptions& o, const std::string& schemes)
{
    const auto ks = parse_user_list(o.users);
    for (int k : ks) {
        if (k < 3) {
            throw UsageError("K=" + std::to_string(k) +
                             " is infeasible: secure aggregation needs K >= 3 users (and T <= K-3)");
        }
    }
    json doc = envelope("rates", o);
    doc["rows"] = json::array();
    bool all_match = true;
    std::fprintf(stderr, "%-4s %-9s %-18s %-18s %s\n", "K", "scheme", "theoretical", "measured", "match");
    for (int k : ks) {
        for (auto scheme : parse_schemes(schemes)) {
            CommonOptions local = o;
            local.threshold = 0;
            const auto cfg = make_config(local, k, scheme);
            dsa::Rng rng(o.seed);
            const auto run = dsa::run_protocol(cfg, std::nullopt, rng);
            const auto theory = dsa::theoretical_rates(cfg);
            const bool match = theory == run.measured.rates;
            all_match = all_match && match;
            std::fprintf(stderr, "%-4d %-9s %-18s %-18s %s\n", k, std::string(dsa::to_string(scheme)).c_str(),
                         rates_text(theory).c_str(), rates_text(run.measured.rates).c_str(), match ? "yes" : "NO");
            doc["rows"].push_back({{"K", k},
                                   {"scheme", std::string(dsa::to_string(scheme))},
                                   {"theoretical", dsa::to_json(theory)},
                                   {"measured", dsa::to_json(run.measured.rates)},
                                   {"dealer_overhead", dsa::to_json(run.measured.dealer_overhead)},
                                   {"match", match}});
        }
    }
    doc["passed"] = all_match;
    emit(doc, o);
    return all_match ? 0 : kExitCheckFailed;
}

int cmd_run(const CommonOptions& o, const std::string& order, int observer, const std::vector<int>& colluders,
            const std::string& replay_out)
{
    const int users = single_user_count(o);
    const auto cfg = make_config(o, users, parse_schemes(o.scheme).front());
    dsa::ChannelModel channel;
    if (order == "forward") {
        channel.order = dsa::DeliveryOrder::Forward;
    } else if (order == "reverse") {
        channel.order = dsa::DeliveryOrder::Reverse;
    } else if (order == "shuffled") {
        channel.order = dsa::DeliveryOrder::Shuffled;
        channel.shuffle_seed = o.seed;
    } else {
        throw UsageError("unknown delivery order '" + order + "'");
    }
    dsa::Rng rng(o.seed);
    const auto run = dsa::run_protocol(cfg, std::nullopt, rng, channel);

    std::vector<dsa::AdversaryView> views;
    if (observer > 0) {
        std::vector<int> t;
        for (int c : colluders) t.push_back(c - 1);
        try {
            views.push_back(dsa::collude(run, observer - 1, t));
        } catch (const dsa::InvalidCollusion& e) {
            throw UsageError(e.what());
        }
    }
    if (!replay_out.empty()) {
        std::ofstream f(replay_out);
        if (!f) throw std::runtime_error("cannot open " + replay_out);
        dsa::write_replay(f, run, o.seed);
    }

    json doc = envelope("run", o);
    doc.update(dsa::run_json(run, o.seed, views));
    const bool ok = doc.value("rates_match", false);
    std::fprintf(stderr, "K=%d T=%d L=%d q=%u scheme=%s seed=%llu\n", cfg.users(), cfg.threshold(), cfg.length(),
                 cfg.q().value(), std::string(dsa::to_string(cfg.scheme())).c_str(),
                 static_cast<unsigned long long>(o.seed));
    std::fprintf(stderr, "all %d users recovered the input sum\n", cfg.users());
    std::fprintf(stderr, "measured rates %s, theoretical %s\n", rates_text(run.measured.rates).c_str(),
                 rates_text(dsa::theoretical_rates(cfg)).c_str());
    emit(doc, o);
    return ok ? 0 : kExitCheckFailed;
}

int cmd_audit(const CommonOptions& o)
{
    const int users = single_user_count(o);
    const auto scheme = parse_schemes(o.scheme).front();
    const auto cfg = make_config(o, users, scheme);
    std::optional<dsa::Auditor> auditor;
    try {
        auditor.emplace(cfg, dsa::AuditOptions{o.budget, o.workers});
    } catch (const dsa::BudgetExceeded& e) {
        std::fprintf(stderr, "error: %s\nsuggestion: try %s\n", e.what(), suggest_smaller(o, users, scheme).c_str());
        json doc = envelope("audit", o);
        doc["config"] = dsa::config_json(cfg);
        doc["error"] = {{"kind", "BudgetExceeded"},
                        {"log2_required", e.log2_required()},
                        {"budget", e.budget()},
                        {"suggestion", suggest_smaller(o, users, scheme)}};
        doc["passed"] = false;
        emit(doc, o);
        return kExitBudget;
    }
    const auto results = auditor->audit_all();
    const auto q = cfg.q().value();
    json doc = envelope("audit", o);
    doc.update(dsa::audit_json(cfg, results));
    doc["config"]["outcomes"] = auditor->space().outcome_count();
    doc["unit"] = o.bits ? "bits" : "q-ary";
    for (std::size_t i = 0; i < results.size(); ++i) doc["results"][i] = scaled(results[i], o, q);
    print_audit_table(results, o, q);
    const bool ok = doc["passed"].get<bool>();
    std::fprintf(stderr, "%zu checks over %llu outcomes: %s\n", results.size(),
                 static_cast<unsigned long long>(auditor->space().outcome_count()), ok ? "ALL PASS" : "FAILURES");
    emit(doc, o);
    return ok ? 0 : kExitCheckFailed;
}

int cmd_sweep(const CommonOptions& o, const std::string& schemes, std::size_t trials)
{
    std::vector<dsa::SweepPoint> grid;
    for (int k : parse_user_list(o.users)) {
        if (k < 3) throw UsageError("K=" + std::to_string(k) + " is infeasible");
        for (auto s : parse_schemes(schemes)) {
            grid.push_back({k, o.threshold, o.length, static_cast<std::uint32_t>(o.q), s});
        }
    }
    dsa::Rng rng(o.seed);
    const auto report = dsa::sweep(grid, trials, rng);
    json doc = envelope("sweep", o);
    doc.update(dsa::to_json(report));
    bool ok = true;
    std::fprintf(stderr, "%-4s %-9s %-7s %-10s %-18s %s\n", "K", "scheme", "trials", "recovered", "rates", "match");
    for (const auto& row : report.rows) {
        ok = ok && row.rates_match && row.recoveries == row.trials;
        std::fprintf(stderr, "%-4d %-9s %-7zu %-10zu %-18s %s\n", row.point.users,
                     std::string(dsa::to_string(row.point.scheme)).c_str(), row.trials, row.recoveries,
                     rates_text(row.measured).c_str(), row.rates_match ? "yes" : "NO");
    }
    doc["passed"] = ok;
    emit(doc, o);
    return ok ? 0 : kExitCheckFailed;
}

int cmd_demo_infeasible(const CommonOptions& o)
{
    if (!o.force) {
        std::fprintf(stderr,
                     "refusing: this demonstration runs outside the feasible region (K >= 3 users, at most K-3 "
                     "colluders), where secure aggregation is impossible. Pass --force to run it anyway.\n");
        return kExitUsage;
    }
    const int users = single_user_count(o);
    if (users < 3) throw UsageError("the leakage demonstration needs K >= 3");
    CommonOptions local = o;
    if (!o.threshold_set) local.threshold = users - 2;
    if (local.threshold < 0 || local.threshold > users - 2) throw UsageError("--t must lie in [0, K-2]");
    const auto cfg = make_config(local, users, parse_schemes(o.scheme).front(), dsa::DemoOverride::On);
    std::optional<dsa::Auditor> auditor;
    try {
        auditor.emplace(cfg, dsa::AuditOptions{o.budget, o.workers});
    } catch (const dsa::BudgetExceeded& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBudget;
    }

    json doc = envelope("demo-infeasible", o);
    doc["config"] = dsa::config_json(cfg);
    doc["unit"] = o.bits ? "bits" : "q-ary";
    doc["pairs"] = json::array();
    const double factor = o.bits ? std::log2(static_cast<double>(o.q)) : 1.0;
    bool ok = true;
    std::fprintf(stderr, "%-8s %-8s %-12s %s\n", "observer", "target", "colluders", "leakage");
    for (int k = 0; k < users; ++k) {
        for (int target = 0; target < users; ++target) {
            if (target == k) continue;
            std::vector<int> pool;
            for (int i = 0; i < users; ++i) {
                if (i != k && i != target) pool.push_back(i);
            }
            for (const auto& t : dsa::subsets_up_to(pool, local.threshold)) {
                if (static_cast<int>(t.size()) != local.threshold) continue;
                const auto r = auditor->leakage_without_sum(k, target, t);
                ok = ok && r.passed;
                std::string label;
                for (int c : t) label += (label.empty() ? "" : ",") + std::to_string(c + 1);
                label = "{" + label + "}";
                std::fprintf(stderr, "%-8d %-8d %-12s %.9f\n", k + 1, target + 1, label.c_str(), r.value * factor);
                json colluders = json::array();
                for (int c : t) colluders.push_back(c + 1);
                doc["pairs"].push_back({{"observer", k + 1},
                                        {"target", target + 1},
                                        {"colluders", colluders},
                                        {"leakage", scaled(r, o, cfg.q().value())}});
            }
        }
    }
    doc["passed"] = ok;
    emit(doc, o);
    return ok ? 0 : kExitCheckFailed;
}

int cmd_replay(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open " + path);
    const auto log = dsa::read_replay(f);
    const bool ok = dsa::verify_replay(log);
    std::fprintf(stderr, "%zu message records %s the re-executed transcript\n", log.messages.size(),
                 ok ? "match" : "DO NOT match");
    return ok ? 0 : kExitCheckFailed;
}

void add_common(CLI::App* app, CommonOptions& o, bool with_audit_options)
{
    app->add_option("--k", o.users, "number of users K (rates/sweep accept 3..6 or 3,4,5)");
    app->add_option("--t", o.threshold, "collusion threshold T")->each([&o](const std::string&) {
        o.threshold_set = true;
    });
    app->add_option("--l", o.length, "input length L in symbols");
    app->add_option("--q", o.q, "prime field size q");
    app->add_option("--seed", o.seed, "RNG seed");
    app->add_option("--output,-o", o.output, "write JSON here instead of stdout");
    app->add_flag("--deterministic", o.deterministic, "omit timestamps so output bytes are reproducible");
    if (with_audit_options) {
        app->add_option("--budget", o.budget, "enumeration budget in outcomes (env DSA_AUDIT_BUDGET)");
        app->add_option("--workers", o.workers, "enumeration worker threads");
        app->add_flag("--bits", o.bits, "report entropies in bits instead of q-ary units");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Decentralized secure aggregation laboratory"};
    app.require_subcommand(1);

    CommonOptions o;
    if (const char* env = std::getenv("DSA_AUDIT_BUDGET")) {
        try {
            o.budget = std::stoull(env);
        } catch (const std::logic_error&) {
            std::fprintf(stderr, "error: DSA_AUDIT_BUDGET is not a number\n");
            return kExitUsage;
        }
    }

    std::string schemes = "both";
    std::string order = "forward";
    std::string replay_out, replay_in;
    int observer = 0;
    std::vector<int> colluders;
    std::size_t trials = 100;

    auto* run = app.add_subcommand("run", "run the protocol once and report transcript and measured rates");
    add_common(run, o, false);
    run->add_option("--scheme", o.scheme, "optimal or baseline");
    run->add_option("--order", order, "delivery order: forward, reverse or shuffled");
    run->add_option("--observer", observer, "include the adversary view of this user (1-based)");
    run->add_option("--colluders", colluders, "colluding users for --observer (1-based)")->delimiter(',');
    run->add_option("--replay-out", replay_out, "write a transcript replay file");

    auto* audit = app.add_subcommand("audit", "exact recovery, security and key-structure audit");
    add_common(audit, o, true);
    audit->add_option("--scheme", o.scheme, "optimal or baseline");

    auto* rates = app.add_subcommand("rates", "theoretical vs measured rate table");
    add_common(rates, o, false);
    rates->add_option("--scheme", schemes, "optimal, baseline or both");

    auto* sweep = app.add_subcommand("sweep", "repeated runs over a parameter grid");
    add_common(sweep, o, false);
    sweep->add_option("--scheme", schemes, "optimal, baseline or both");
    sweep->add_option("--trials", trials, "runs per grid point");

    auto* demo = app.add_subcommand("demo-infeasible", "leakage at |T| = K-2 without conditioning on the sum");
    add_common(demo, o, true);
    demo->add_option("--scheme", o.scheme, "optimal or baseline");
    demo->add_flag("--force", o.force, "required: run outside the feasible region");

    auto* replay = app.add_subcommand("replay", "re-execute a replay file and compare transcripts");
    replay->add_option("input", replay_in, "replay file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) return cmd_run(o, order, observer, colluders, replay_out);
        if (*audit) return cmd_audit(o);
        if (*rates) return cmd_rates(o, schemes);
        if (*sweep) return cmd_sweep(o, schemes, trials);
        if (*demo) return cmd_demo_infeasible(o);
        if (*replay) return cmd_replay(replay_in);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const dsa::BudgetExceeded& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBudget;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
