// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "risac/harness.hpp"

using namespace risac;

namespace
{

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.n_tx_antennas = 4;
    c.n_rx_antennas = 4;
    c.n_users = 2;
    c.slot_length = 10;
    c.mc_trials = 400;
    c.calibration_trials = 1000;
    c.pfa_target = 0.05;
    c.master_seed = 11;
    return c;
}

std::string pod_csv(const ScenarioConfig &c, int workers)
{
    std::ostringstream out;
    write_pod_csv(out, run_pod_vs_rcs(c, {workers}));
    return out.str();
}

} // namespace

TEST(RunTrials, OrderedAndWorkerIndependent)
{
    auto fn = [](int i) { return RandomStream(5, StreamKind::detection, static_cast<std::uint64_t>(i)).gaussian(); };
    const auto one = run_trials(257, 1, fn);
    const auto four = run_trials(257, 4, fn);
    ASSERT_EQ(one.size(), 257u);
    EXPECT_EQ(one, four);
    EXPECT_EQ(run_trials(3, 8, [](int i) { return i * i; }), (std::vector<int>{0, 1, 4}));
    EXPECT_TRUE(run_trials(0, 2, [](int i) { return i; }).empty());
}

TEST(RunTrials, PropagatesExceptions)
{
    auto fn = [](int i) -> int {
        if (i == 17)
            throw NumericalError("boom");
        return i;
    };
    EXPECT_THROW(run_trials(40, 3, fn), NumericalError);
    EXPECT_THROW(run_trials(40, 1, fn), NumericalError);
}

TEST(Substreams, DistinctPerKindAndTrial)
{
    EXPECT_NE(substream_seed(1, StreamKind::calibration, 0), substream_seed(1, StreamKind::null_evaluation, 0));
    EXPECT_NE(substream_seed(1, StreamKind::detection, 0), substream_seed(1, StreamKind::detection, 1));
    EXPECT_NE(substream_seed(1, StreamKind::detection, 0), substream_seed(2, StreamKind::detection, 0));
    EXPECT_EQ(substream_seed(3, StreamKind::oracle, 9), substream_seed(3, StreamKind::oracle, 9));
}

TEST(SensingTrial, ReproducibleFromItsSeed)
{
    const auto study = make_sensing_study(small_config());
    const auto a = simulate_sensing_trial(study, StreamKind::detection, 12, true, true);
    const auto b = simulate_sensing_trial(study, StreamKind::detection, 12, true, true);
    EXPECT_EQ(a.statistic, b.statistic);
    EXPECT_EQ(a.rcs_draw, b.rcs_draw);
    EXPECT_EQ(a.rcs_estimate, b.rcs_estimate);
    EXPECT_EQ(a.seed, substream_seed(11, StreamKind::detection, 12));
    const auto n = simulate_sensing_trial(study, StreamKind::detection, 12, false);
    EXPECT_EQ(n.rcs_draw, Complex(0.0, 0.0));
    EXPECT_EQ(n.truth, Hypothesis::h0);
}

TEST(SensingTrial, MismatchedRcsPriorOnlyChangesTheDetector)
{
    auto c = small_config();
    const auto matched = make_sensing_study(c);
    c.detector_rcs_scale = 0.1;
    const auto mismatched = make_sensing_study(c);
    EXPECT_DOUBLE_EQ(mismatched.model.sigma_t_sq, 0.1 * c.rcs_variance);
    const auto a = simulate_sensing_trial(matched, StreamKind::detection, 4, true);
    const auto b = simulate_sensing_trial(mismatched, StreamKind::detection, 4, true);
    EXPECT_EQ(a.rcs_draw, b.rcs_draw);
    EXPECT_NE(a.statistic, b.statistic);
}

TEST(Calibration, RealizedPfaNearTarget)
{
    const auto study = make_sensing_study(small_config());
    const auto cal = calibrate_threshold(study, 1);
    EXPECT_EQ(cal.trials, 1000);
    EXPECT_TRUE(cal.warning.empty());
    const auto fresh = null_statistics(study, StreamKind::null_evaluation, 2000, 1);
    const double pfa = static_cast<double>(std::count_if(fresh.begin(), fresh.end(),
                                                         [&](double t) { return t >= cal.threshold; })) /
                       2000.0;
    // binomial spread of both runs, 4 sigma
    EXPECT_NEAR(pfa, 0.05, 4.0 * std::sqrt(0.05 * 0.95 * (1.0 / 1000 + 1.0 / 2000)));
}

TEST(PodStudy, VanishingRcsDetectsAtTheFalseAlarmRate)
{
    auto c = small_config();
    c.rcs_grid = {1e-30};
    c.pod_repeater_gains_db = {std::nullopt};
    const auto r = run_pod_vs_rcs(c);
    ASSERT_EQ(r.pod.size(), 1u);
    const double sd = std::sqrt(0.05 * 0.95 / c.mc_trials);
    EXPECT_NEAR(r.pod[0].pod, r.pod[0].empirical_pfa, 6.0 * sd);
}

TEST(PodStudy, StrongTargetIsDetected)
{
    auto c = small_config();
    c.rcs_grid = {1e20};
    c.pod_repeater_gains_db = {std::nullopt, 20.0};
    const auto r = run_pod_vs_rcs(c);
    ASSERT_EQ(r.pod.size(), 2u);
    for (const auto &p : r.pod)
        EXPECT_GT(p.pod, 0.9);
}

TEST(PodStudy, CsvIndependentOfWorkers)
{
    auto c = small_config();
    c.mc_trials = 60;
    c.calibration_trials = 200;
    c.rcs_grid = {1e8, 1e12};
    EXPECT_EQ(pod_csv(c, 1), pod_csv(c, 3));
    const auto csv = pod_csv(c, 2);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "sigma_t_sq,repeater_gain_db,pod,threshold,empirical_pfa,trials");
    EXPECT_NE(csv.find("-inf"), std::string::npos);
}

TEST(PodStudy, DetectorDumpHasOneRowPerDetectionTrial)
{
    auto c = small_config();
    c.mc_trials = 20;
    c.calibration_trials = 100;
    c.rcs_grid = {1e9};
    c.pod_repeater_gains_db = {20.0};
    RunOptions opt;
    opt.detector_dump = true;
    const auto r = run_pod_vs_rcs(c, opt);
    EXPECT_EQ(r.detector_dump.size(), 20u);
    std::ostringstream out;
    write_detector_dump(out, r.detector_dump);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "trial,T,threshold,decision,re_alpha,im_alpha");
}

TEST(PodStudy, RejectsEmptyGrid)
{
    auto c = small_config();
    c.rcs_grid.clear();
    EXPECT_THROW(run_pod_vs_rcs(c), ConfigError);
}

TEST(SeStudy, NoSensingPowerMakesBeamsEquivalent)
{
    auto c = small_config();
    c.sensing_power_fraction = 0.0;
    c.mc_trials = 50;
    const auto r = run_se_cdf(c);
    ASSERT_EQ(r.se.size(), 4u);
    // order: (target, off), (target, on), (comm, off), (comm, on)
    for (int rep = 0; rep < 2; ++rep)
    {
        const auto &t = r.se[static_cast<std::size_t>(rep)].se;
        const auto &m = r.se[static_cast<std::size_t>(2 + rep)].se;
        ASSERT_EQ(t.size(), 100u);
        for (std::size_t i = 0; i < t.size(); ++i)
            EXPECT_NEAR(t[i], m[i], 1e-12);
    }
    EXPECT_EQ(r.degenerate_drops, 0);
}

TEST(SeStudy, SortedSeriesAndWorkerIndependentCsv)
{
    auto c = small_config();
    c.mc_trials = 40;
    const auto r = run_se_cdf(c);
    for (const auto &s : r.se)
        EXPECT_TRUE(std::is_sorted(s.se.begin(), s.se.end()));
    std::ostringstream a, b;
    write_se_cdf_csv(a, r);
    write_se_cdf_csv(b, run_se_cdf(c, {3}));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "mode,repeater,se,cdf");
}

TEST(SeStudy, CountsDropsWhereNullingIsImpossible)
{
    auto c = small_config();
    c.n_tx_antennas = 2;
    c.n_users = 2;
    c.mc_trials = 10;
    const auto r = run_se_cdf(c);
    // two user directions span the whole transmit space
    EXPECT_EQ(r.degenerate_drops, 10);
}

TEST(SeStudy, NeedsUsers)
{
    auto c = small_config();
    c.n_users = 0;
    EXPECT_THROW(run_se_cdf(c), ConfigError);
}
