// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "risac/comm_metrics.hpp"
#include "risac/harness.hpp"

using namespace risac;

namespace
{

// One user on antenna 0 of a two-antenna array, sensing beam on antenna 1.
struct HandCase
{
    ScenarioConfig config;
    ChannelRealization ch;
    PrecoderSet pre;
};

HandCase hand_case()
{
    HandCase h;
    h.config.n_tx_antennas = 2;
    h.config.n_users = 1;
    h.config.repeater_gain_db = std::nullopt;
    h.config.sensing_power_fraction = 0.5;
    h.config.tx_power_watt = 4.0 * h.config.noise_power_ue();
    h.ch.f_user = {CVector::Unit(2, 0)};
    h.ch.h_user = {0.0};
    h.ch.b_tx = CVector::Zero(2);
    h.pre.user = {CVector::Unit(2, 0)};
    h.pre.sensing = CVector::Unit(2, 1);
    return h;
}

} // namespace

TEST(SpectralEfficiency, HandValues)
{
    EXPECT_EQ(spectral_efficiency(0.0), 0.0);
    EXPECT_DOUBLE_EQ(spectral_efficiency(1.0), 1.0);
    EXPECT_DOUBLE_EQ(spectral_efficiency(3.0), 2.0);
    EXPECT_NEAR(spectral_efficiency(2.0), 1.584962500721156, 1e-15);
    EXPECT_THROW(spectral_efficiency(-1e-3), std::domain_error);
}

TEST(Sinr, NoInterferenceHandCase)
{
    const auto h = hand_case();
    const auto m = user_sinr(0, h.pre, h.ch, h.config);
    EXPECT_NEAR(m.sinr, 2.0, 1e-12);
    EXPECT_NEAR(m.se, 1.584962500721156, 1e-12);
    EXPECT_EQ(m.sensing_interference, 0.0);
    EXPECT_EQ(m.multiuser_interference, 0.0);
}

TEST(Sinr, SensingBeamOnTheUser)
{
    auto h = hand_case();
    h.pre.sensing = CVector::Unit(2, 0);
    EXPECT_NEAR(user_sinr(0, h.pre, h.ch, h.config).sinr, 2.0 / 3.0, 1e-12);
}

TEST(Sinr, ForwardedRepeaterNoise)
{
    auto h = hand_case();
    h.config.repeater_gain_db = 0.0;
    h.config.repeater_noise_power_watt = h.config.noise_power_ue();
    h.ch.h_user = {2.0};
    const auto m = user_sinr(0, h.pre, h.ch, h.config);
    EXPECT_NEAR(m.noise_power, 5.0 * h.config.noise_power_ue(), 1e-12 * m.noise_power);
    EXPECT_NEAR(m.sinr, 0.4, 1e-12);
}

TEST(Sinr, RepeaterOffLeavesOnlyReceiverNoise)
{
    auto h = hand_case();
    h.ch.h_user = {Complex(3.0, -1.0)};
    h.ch.b_tx = CVector::Ones(2);
    const auto m = user_sinr(0, h.pre, h.ch, h.config);
    EXPECT_EQ(m.noise_power, h.config.noise_power_ue());
    EXPECT_NEAR(m.sinr, 2.0, 1e-12);
}

TEST(Sinr, LiteralSumIncludesTheUserItself)
{
    auto h = hand_case();
    h.config.sinr_literal_sum = true;
    // S = 2 sigma^2, I = S, N = sigma^2
    EXPECT_NEAR(user_sinr(0, h.pre, h.ch, h.config).sinr, 2.0 / 3.0, 1e-12);
}

TEST(Sinr, RejectsBadIndex)
{
    const auto h = hand_case();
    EXPECT_THROW(user_sinr(1, h.pre, h.ch, h.config), ConfigError);
    EXPECT_THROW(user_sinr(-1, h.pre, h.ch, h.config), ConfigError);
}

class DropMetrics : public ::testing::Test
{
  protected:
    ScenarioConfig config;
    void SetUp() override
    {
        config.n_users = 4;
        config.repeater_gain_db = 20.0;
    }
    ChannelRealization drop(std::uint64_t i) const
    {
        RandomStream rng(77, StreamKind::se_drop, i);
        return gen_channels(drop_entities(config, rng), config, rng);
    }
};

TEST_F(DropMetrics, DecompositionIsConsistent)
{
    for (std::uint64_t i = 0; i < 20; ++i)
    {
        const auto ch = drop(i);
        for (const auto &m : all_user_metrics(build_precoders(ch, config), ch, config))
        {
            const double denom = m.multiuser_interference + m.sensing_interference + m.noise_power;
            EXPECT_NEAR(m.sinr, m.signal_power / denom, 1e-12 * m.sinr);
            EXPECT_NEAR(m.se, std::log2(1.0 + m.sinr), 1e-12);
        }
    }
}

TEST_F(DropMetrics, CommCentricBeamIsInvisibleToUsers)
{
    config.precoder_mode = PrecoderMode::comm_centric;
    const Complex nu = config.repeater_gain();
    for (std::uint64_t i = 0; i < 50; ++i)
    {
        const auto ch = drop(i);
        const auto pre = build_precoders(ch, config);
        const auto fdot = effective_channels(ch, nu);
        const auto metrics = all_user_metrics(pre, ch, config);
        for (std::size_t n = 0; n < metrics.size(); ++n)
            EXPECT_LE(metrics[n].sensing_interference,
                      1e-20 * config.tx_power_watt * config.sensing_power_fraction * fdot[n].squaredNorm());
    }
}

TEST_F(DropMetrics, CommCentricNeverLeaksMoreThanTargetCentric)
{
    for (std::uint64_t i = 0; i < 50; ++i)
    {
        const auto ch = drop(i);
        config.precoder_mode = PrecoderMode::target_centric;
        const auto target = all_user_metrics(build_precoders(ch, config), ch, config);
        config.precoder_mode = PrecoderMode::comm_centric;
        const auto comm = all_user_metrics(build_precoders(ch, config), ch, config);
        for (std::size_t n = 0; n < comm.size(); ++n)
        {
            EXPECT_LE(comm[n].sensing_interference, target[n].sensing_interference);
            EXPECT_GE(comm[n].sinr, target[n].sinr * (1.0 - 1e-9));
        }
    }
}

TEST_F(DropMetrics, InvariantToUserChannelPhase)
{
    const auto ch = drop(3);
    const auto base = all_user_metrics(build_precoders(ch, config), ch, config);
    auto rotated = ch;
    for (std::size_t n = 0; n < rotated.f_user.size(); ++n)
    {
        const Complex ph = std::polar(1.0, 0.7 * static_cast<double>(n + 1));
        rotated.f_user[n] *= ph;
        rotated.h_user[n] *= ph;
    }
    const auto rot = all_user_metrics(build_precoders(rotated, config), rotated, config);
    for (std::size_t n = 0; n < base.size(); ++n)
        EXPECT_NEAR(rot[n].sinr, base[n].sinr, 1e-9 * base[n].sinr);
}
