// Copyright 2026 Pipematch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>

#include "pipematch/pipeline.h"

using namespace pipematch;

namespace {

// Probability of an odd number of failures among N independent rounds, summed term by term.
double odd_binomial_sum(double q, int n) {
    double total = 0;
    double binom = 1;  // C(n, k)
    for (int k = 0; k <= n; k++) {
        if (k % 2 == 1) {
            total += binom * std::pow(q, k) * std::pow(1 - q, n - k);
        }
        binom = binom * (n - k) / (k + 1);
    }
    return total;
}

}  // namespace

TEST(Pipeline, PerRoundRateExamples) {
    EXPECT_DOUBLE_EQ(per_round_rate(0.2, 1), 0.2);
    EXPECT_EQ(per_round_rate(0.0, 50), 0.0);
    // Closed form (1 - 0.8^(1/100)) / 2 = 1.11447e-3.
    double q = per_round_rate(0.1, 100);
    EXPECT_NEAR(q, 1.1144739e-3, 1e-10);
    EXPECT_NEAR(odd_binomial_sum(q, 100), 0.1, 1e-12);
    EXPECT_THROW(per_round_rate(0.5, 3), std::invalid_argument);
    EXPECT_THROW(per_round_rate(-0.1, 3), std::invalid_argument);
    EXPECT_THROW(per_round_rate(0.1, 0), std::invalid_argument);
}

TEST(Pipeline, PerRoundRateRoundTrip) {
    for (int n : {1, 2, 3, 7, 25, 100, 400}) {
        for (double P : {1e-6, 1e-3, 0.01, 0.1, 0.3, 0.49}) {
            double q = per_round_rate(P, n);
            EXPECT_NEAR(odd_binomial_sum(q, n), P, 1e-12) << "P=" << P << " N=" << n;
            EXPECT_NEAR(odd_failure_probability(q, n), P, 1e-12);
        }
    }
}

TEST(Pipeline, Stats) {
    auto s = make_stats(1000, 100, 10);
    EXPECT_DOUBLE_EQ(s.P_logical, 0.1);
    EXPECT_DOUBLE_EQ(s.q_per_round, per_round_rate(0.1, 10));
    EXPECT_GT(s.stderr_q, 0.0);
    // Delta method: dq/dP * sqrt(P(1-P)/n).
    double dq = (per_round_rate(0.1 + 1e-7, 10) - per_round_rate(0.1 - 1e-7, 10)) / 2e-7;
    EXPECT_NEAR(s.stderr_q, dq * std::sqrt(0.1 * 0.9 / 1000), 1e-9);
    auto saturated = make_stats(10, 6, 3);
    EXPECT_TRUE(std::isnan(saturated.q_per_round));
}

TEST(Pipeline, ConfigValidation) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    c.distance = 4;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.shots = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.p = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.workers = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Pipeline, NoiselessRunHasNoFailures) {
    RunConfig c;
    c.p = 0;
    c.shots = 100;
    auto s = run(c);
    EXPECT_EQ(s.failures, 0u);
    EXPECT_EQ(s.q_per_round, 0.0);
}

TEST(Pipeline, RunIsIndependentOfWorkerCount) {
    RunConfig c;
    c.family = CodeFamily::Rotated;
    c.p = 0.01;
    c.shots = 3000;
    c.seed = 42;
    auto one = run(c);
    c.workers = 4;
    auto four = run(c);
    EXPECT_EQ(one.failures, four.failures);
    EXPECT_GT(one.failures, 0u);
    EXPECT_EQ(csv_row(c, one), csv_row(c, four));
}

TEST(Pipeline, UncorrelatedDecoderIsPlainMatching) {
    Experiment ex(CodeFamily::Unrotated, 3, 3, 0.01);
    Decoder plain(ex.graph(), DecoderOptions{false});
    EdgeWeights base(ex.graph());
    for (uint64_t shot = 0; shot < 300; shot++) {
        auto s = ex.model().sample(1, shot);
        DecodeTrace trace;
        auto a = plain.decode(s.events, &trace);
        auto b = mwpm(s.events, {}, base);
        EXPECT_EQ(a.pairs, b.pairs);
        EXPECT_EQ(a.boundary, b.boundary);
        EXPECT_EQ(a.total_weight, b.total_weight);
        EXPECT_EQ(a.logical_x_correction, b.logical_x_correction);
        EXPECT_TRUE(trace.overlay.empty());
        EXPECT_TRUE(a.frozen.empty());
    }
}

TEST(Pipeline, CorrelatedDecoderUsesVirtualMatches) {
    Experiment ex(CodeFamily::Unrotated, 5, 5, 0.01);
    Decoder corr(ex.graph(), DecoderOptions{true});
    Decoder staged(ex.graph(), DecoderOptions{true, true});
    size_t reweighted = 0;
    for (uint64_t shot = 0; shot < 100; shot++) {
        auto s = ex.model().sample(2, shot);
        DecodeTrace trace;
        auto out = corr.decode(s.events, &trace);
        EXPECT_TRUE(out.frozen.empty());
        EXPECT_EQ(trace.virtual_matches, prematch(s.events, EdgeWeights(ex.graph()), PmcMode::Relaxed));
        reweighted += !trace.overlay.empty();

        DecodeTrace t2;
        auto out2 = staged.decode(s.events, &t2);
        EXPECT_EQ(out2.frozen, t2.stage2.pairs);
        size_t covered = 2 * (out2.pairs.size() + out2.frozen.size()) + out2.boundary.size();
        EXPECT_EQ(covered, s.events.size());
    }
    EXPECT_GT(reweighted, 0u);
}

TEST(Pipeline, SingleFaultsAreCorrected) {
    Experiment ex(CodeFamily::Unrotated, 3, 3, 0.001);
    EXPECT_EQ(single_fault_failures(ex, DecoderOptions{false}), 0u);
    EXPECT_EQ(single_fault_failures(ex, DecoderOptions{true}), 0u);
}

TEST(Pipeline, PairedRunCountsDiscordantShots) {
    RunConfig c;
    c.p = 0.01;
    c.shots = 2000;
    c.seed = 3;
    auto paired = run_paired(c);
    c.correlated = false;
    auto plain = run(c);
    c.correlated = true;
    auto corr = run(c);
    EXPECT_EQ(paired.uncorrelated.failures, plain.failures);
    EXPECT_EQ(paired.correlated.failures, corr.failures);
    EXPECT_EQ((int64_t)paired.uncorrelated.failures - (int64_t)paired.correlated.failures,
              (int64_t)paired.only_uncorrelated - (int64_t)paired.only_correlated);
    EXPECT_GE(paired.q_difference_stderr, 0.0);
}

TEST(Pipeline, ParallelCounterPropagatesErrors) {
    EXPECT_EQ(count_parallel(1000, 3, [](uint64_t k) { return k % 10 == 0; }), 100u);
    EXPECT_THROW(count_parallel(1000, 3,
                                [](uint64_t k) -> bool {
                                    if (k == 500) {
                                        throw std::runtime_error("boom");
                                    }
                                    return false;
                                }),
                 std::runtime_error);
}

TEST(Pipeline, CsvFormat) {
    EXPECT_EQ(csv_header(), "family,distance,p,rounds,shots,failures,P_logical,q_per_round,stderr,correlated\n");
    RunConfig c;
    c.family = CodeFamily::Toric;
    c.distance = 5;
    c.rounds = 10;
    c.p = 0.004;
    c.correlated = false;
    auto s = make_stats(1000, 100, 10);
    std::string row = csv_row(c, s);
    EXPECT_EQ(row.substr(0, row.find(",1.00000e-01")), "toric,5,4.00000e-03,10,1000,100");
    EXPECT_EQ(row.substr(row.size() - 5), ",off\n");
    EXPECT_EQ(format_rate(1.1157e-3), "1.11570e-03");
}

TEST(Pipeline, SweepConfigParsing) {
    auto c = parse_sweep_config(
        "# sweep\n"
        "families = toric, rotated\n"
        "distances = 3 5\n"
        "p = 0.001, 0.002\n"
        "rounds = auto\n"
        "shots = 500   # per point\n"
        "correlated = on\n"
        "seed = 9\n"
        "workers = 2\n"
        "out = results.csv\n");
    EXPECT_EQ(c.families, (std::vector<CodeFamily>{CodeFamily::Toric, CodeFamily::Rotated}));
    EXPECT_EQ(c.distances, (std::vector<int>{3, 5}));
    EXPECT_EQ(c.ps, (std::vector<double>{0.001, 0.002}));
    EXPECT_EQ(c.rounds, 0);
    EXPECT_EQ(c.shots, 500u);
    EXPECT_EQ(c.correlated, (std::vector<bool>{true}));
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.workers, 2);
    EXPECT_EQ(c.out, "results.csv");
    auto both = parse_sweep_config("family = toric\ndistances = 3\np = 0.01\nrounds = 7\ncorrelated = both\n");
    EXPECT_EQ(both.correlated, (std::vector<bool>{true, false}));
    EXPECT_EQ(both.rounds, 7);
    EXPECT_THROW(parse_sweep_config("family = toric\np = 0.01\n"), std::invalid_argument);
    EXPECT_THROW(parse_sweep_config("family = toric\ndistances = 3\np = 0.01\ncolour = blue\n"),
                 std::invalid_argument);
    EXPECT_THROW(parse_sweep_config("shots\n"), std::invalid_argument);
    EXPECT_THROW(parse_sweep_config("shots = many\n"), std::invalid_argument);
}

TEST(Pipeline, SweepAndCurves) {
    SweepConfig c = parse_sweep_config("family = unrotated\ndistances = 3\np = 0.004, 0.002\nrounds = 3\nshots = 300\n");
    std::string csv = run_sweep(c);
    EXPECT_EQ(csv, run_sweep(c));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    auto curves = plot_curves(csv);
    ASSERT_EQ(curves.size(), 2u);
    ASSERT_TRUE(curves.count("unrotated_d3_correlated"));
    const std::string &body = curves["unrotated_d3_uncorrelated"];
    EXPECT_EQ(body.rfind("# p q_per_round stderr\n", 0), 0u);
    EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 3);
    EXPECT_LT(body.find("2.00000e-03"), body.find("4.00000e-03"));
    EXPECT_THROW(plot_curves("family,distance\ntoric,3\n"), std::invalid_argument);
}

TEST(Pipeline, AdaptiveRoundsTargetTenPercent) {
    RunConfig base;
    base.family = CodeFamily::Unrotated;
    base.distance = 3;
    base.p = 0.01;
    base.seed = 5;
    int rounds = choose_rounds(base, 2000, 100);
    EXPECT_GE(rounds, 1);
    EXPECT_LE(rounds, 100);
    base.rounds = rounds;
    base.shots = 4000;
    auto s = run(base);
    EXPECT_GT(s.P_logical, 0.03);
    EXPECT_LT(s.P_logical, 0.25);
}
