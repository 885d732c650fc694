#include <gtest/gtest.h>

#include <sstream>

#include "dsa/report.hpp"

using namespace dsa;

TEST(Json, RationalRoundTrip)
{
    const Rational r(6, 4);
    const json j = to_json(r);
    EXPECT_EQ(j["num"], 3);
    EXPECT_EQ(j["den"], 2);
    EXPECT_EQ(rational_from_json(j), r);
}

TEST(Json, RunDocumentShape)
{
    Rng rng(3);
    const ProtocolConfig cfg(3, 0, 2, Modulus(5), Scheme::Baseline);
    const auto run = run_protocol(cfg, std::nullopt, rng);
    const json j = run_json(run, 3, {collude(run, 0, {})});
    EXPECT_EQ(j["config"]["K"], 3);
    EXPECT_EQ(j["config"]["scheme"], "baseline");
    EXPECT_EQ(j["transcript"]["messages"].size(), 6u);
    EXPECT_EQ(j["transcript"]["messages"][0]["round"], 1);
    EXPECT_EQ(j["transcript"]["messages"][0]["recipient"], 1);
    EXPECT_EQ(j["transcript"]["messages"][0]["symbols"].size(), 2u);
    EXPECT_TRUE(j["rates_match"].get<bool>());
    EXPECT_EQ(rational_from_json(j["theoretical"]["R_ZSigma"]), Rational(6));
    EXPECT_EQ(j["views"][0]["observed"].size(), 2u);
}

TEST(Json, InfeasibleRunOmitsTheory)
{
    Rng rng(3);
    const ProtocolConfig cfg(3, 1, 1, Modulus(2), Scheme::Optimal, DemoOverride::On);
    const json j = run_json(run_protocol(cfg, std::nullopt, rng), 3);
    EXPECT_FALSE(j.contains("theoretical"));
    EXPECT_TRUE(j["config"]["override"].get<bool>());
}

TEST(Json, AuditDocument)
{
    const Auditor auditor(ProtocolConfig(3, 0, 1, Modulus(2), Scheme::Optimal));
    const json j = audit_json(auditor.config(), {auditor.audit_recovery(0), auditor.audit_security(1, {})});
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_EQ(j["results"][1]["relation"], "eq");
    EXPECT_TRUE(j["results"][1]["exact_zero"].get<bool>());
}

TEST(Replay, WriteReadVerify)
{
    for (auto scheme : {Scheme::Optimal, Scheme::Baseline}) {
        const ProtocolConfig cfg(4, 1, 2, Modulus(7), scheme);
        Rng rng(42);
        const auto run = run_protocol(cfg, std::nullopt, rng);
        std::stringstream ss;
        write_replay(ss, run, 42);
        const auto log = read_replay(ss);
        EXPECT_EQ(log.messages, run.transcript.messages);
        EXPECT_TRUE(verify_replay(log));

        auto tampered = log;
        tampered.messages.back().payload = vec_add(tampered.messages.back().payload, SymbolVector({1, 0}, Modulus(7)));
        EXPECT_FALSE(verify_replay(tampered));
        auto reseeded = log;
        reseeded.seed = 43;
        EXPECT_FALSE(verify_replay(reseeded));
    }
}

TEST(Replay, RejectsForeignInput)
{
    std::stringstream empty;
    EXPECT_THROW(read_replay(empty), Error);
    std::stringstream other("{\"format\":\"something-else\"}\n");
    EXPECT_THROW(read_replay(other), Error);
}
