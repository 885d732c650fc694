#include <gtest/gtest.h>

#include <vector>

#include "dsa/simnet.hpp"

using namespace dsa;

namespace {

ProtocolConfig config(int k, int t, Scheme scheme, int length = 1, std::uint64_t q = 2)
{
    return ProtocolConfig(k, t, length, Modulus(q), scheme);
}

} // namespace

TEST(RunProtocol, MeasuredRatesSmallest)
{
    Rng rng(1);
    const auto opt = run_protocol(config(3, 0, Scheme::Optimal), std::nullopt, rng);
    EXPECT_EQ(opt.measured.rates, (RateReport{Rational(1), Rational(1), Rational(2)}));
    const auto base = run_protocol(config(3, 0, Scheme::Baseline), std::nullopt, rng);
    EXPECT_EQ(base.measured.rates, (RateReport{Rational(2), Rational(2), Rational(6)}));
    EXPECT_EQ(base.measured.independent_source_symbols, 3u);
}

TEST(RunProtocol, MeasuredMatchesTheoryAcrossGrid)
{
    Rng rng(2);
    for (auto scheme : {Scheme::Optimal, Scheme::Baseline}) {
        for (int k = 3; k <= 6; ++k) {
            for (int length : {1, 3}) {
                const auto cfg = config(k, 0, scheme, length, 7);
                const auto run = run_protocol(cfg, std::nullopt, rng);
                EXPECT_EQ(run.measured.rates, theoretical_rates(cfg));
                EXPECT_EQ(run.measured.dealer_overhead, Rational(k) * run.measured.rates.individual_key);
                EXPECT_EQ(run.measured.dealer_unicast_symbols,
                          static_cast<std::size_t>(k) * run.measured.key_symbols_per_user);
            }
        }
    }
    Rng r4(3);
    EXPECT_EQ(run_protocol(config(4, 0, Scheme::Baseline), std::nullopt, r4).measured.rates,
              (RateReport{Rational(3), Rational(3), Rational(12)}));
}

TEST(RunProtocol, SuppliedInputsRecovered)
{
    const Modulus q(5);
    const std::vector<SymbolVector> inputs{SymbolVector({1, 4}, q), SymbolVector({2, 2}, q), SymbolVector({3, 0}, q),
                                           SymbolVector({4, 4}, q)};
    Rng rng(11);
    const auto run = run_protocol(ProtocolConfig(4, 1, 2, q, Scheme::Optimal), inputs, rng);
    for (const auto& s : run.transcript.recovered) EXPECT_EQ(s, SymbolVector({0, 0}, q));
    EXPECT_THROW(run_protocol(ProtocolConfig(4, 1, 2, q, Scheme::Optimal),
                              std::vector<SymbolVector>(inputs.begin(), inputs.begin() + 3), rng),
                 ShapeMismatch);
}

TEST(RunProtocol, DeliveryOrderInvariance)
{
    for (auto scheme : {Scheme::Optimal, Scheme::Baseline}) {
        const auto cfg = config(5, 2, scheme, 2, 3);
        std::vector<Transcript> transcripts;
        for (auto channel : {ChannelModel{DeliveryOrder::Forward, 0}, ChannelModel{DeliveryOrder::Reverse, 0},
                             ChannelModel{DeliveryOrder::Shuffled, 5}, ChannelModel{DeliveryOrder::Shuffled, 77}}) {
            Rng rng(123);
            transcripts.push_back(run_protocol(cfg, std::nullopt, rng, channel).transcript);
        }
        for (const auto& t : transcripts) EXPECT_EQ(t, transcripts.front());
    }
}

TEST(RunProtocol, DeterministicPerSeed)
{
    const auto cfg = config(4, 1, Scheme::Baseline, 3, 11);
    Rng a(9), b(9), c(10);
    const auto ra = run_protocol(cfg, std::nullopt, a);
    EXPECT_EQ(ra.transcript, run_protocol(cfg, std::nullopt, b).transcript);
    EXPECT_NE(ra.transcript, run_protocol(cfg, std::nullopt, c).transcript);
}

TEST(RunProtocol, InfeasibleNeedsOverride)
{
    Rng rng(1);
    const ProtocolConfig cfg(3, 1, 1, Modulus(2), Scheme::Optimal, DemoOverride::On);
    EXPECT_NO_THROW(run_protocol(cfg, std::nullopt, rng));
}

TEST(Collude, OptimalView)
{
    Rng rng(4);
    const auto run = run_protocol(config(5, 2, Scheme::Optimal), std::nullopt, rng);
    const auto view = collude(run, 0, {3, 1});
    EXPECT_EQ(view.colluders, (std::vector<int>{1, 3}));
    EXPECT_EQ(view.observed.size(), 4u);
    EXPECT_EQ(view.collected.size(), 2u);
    EXPECT_EQ(view.collected.at(3).first, run.inputs[3]);
    EXPECT_EQ(view.own_key, run.keys.keys[0]);
}

TEST(Collude, BaselineObserverSeesOnlyItsRound)
{
    Rng rng(4);
    const auto run = run_protocol(config(4, 0, Scheme::Baseline), std::nullopt, rng);
    const auto view = collude(run, 2, {});
    ASSERT_EQ(view.observed.size(), 3u);
    for (const auto& [sender, x] : view.observed) {
        EXPECT_EQ(x, encode_message(run.inputs[sender], baseline_round_key(run.keys.keys[sender], run.config, sender, 2)));
    }
}

TEST(Collude, InvalidSets)
{
    Rng rng(4);
    const auto run = run_protocol(config(4, 1, Scheme::Optimal), std::nullopt, rng);
    EXPECT_THROW(collude(run, 0, {0}), InvalidCollusion);
    EXPECT_THROW(collude(run, 0, {1, 1}), InvalidCollusion);
    EXPECT_THROW(collude(run, 0, {1, 2}), InvalidCollusion);
    EXPECT_THROW(collude(run, 0, {4}), InvalidCollusion);
    EXPECT_THROW(collude(run, -1, {}), InvalidCollusion);
}

TEST(Sweep, RowsAndRates)
{
    Rng rng(5);
    const std::vector<SweepPoint> grid{{3, 0, 1, 2, Scheme::Optimal}, {4, 1, 2, 5, Scheme::Baseline}};
    const auto report = sweep(grid, 10, rng);
    ASSERT_EQ(report.rows.size(), 2u);
    for (const auto& row : report.rows) {
        EXPECT_EQ(row.recoveries, 10u);
        EXPECT_TRUE(row.rates_match);
    }
    EXPECT_EQ(report.rows[1].measured, (RateReport{Rational(3), Rational(3), Rational(12)}));
}

TEST(Sweep, ZeroTrialsAndBadPoints)
{
    Rng rng(5);
    EXPECT_TRUE(sweep({{3, 0, 1, 2, Scheme::Optimal}}, 0, rng).rows.empty());
    try {
        sweep({{4, 2, 1, 2, Scheme::Optimal}}, 1, rng);
        FAIL();
    } catch (const SweepError& e) {
        EXPECT_NE(std::string(e.what()).find("K=4 T=2"), std::string::npos);
    }
    EXPECT_THROW(sweep({{3, 0, 1, 4, Scheme::Optimal}}, 1, rng), SweepError);
}
