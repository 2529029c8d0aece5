// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "risac/detector.hpp"
#include "risac/propagation.hpp"

using namespace risac;

namespace
{

ChannelRealization scalar_channels(Complex value)
{
    ChannelRealization ch;
    ch.a_tx = CVector::Constant(1, value);
    ch.a_rx = CVector::Constant(1, value);
    ch.b_tx = CVector::Constant(1, value);
    ch.b_rx = CVector::Constant(1, value);
    ch.g_rep = value;
    ch.clutter = CMatrix::Zero(1, 1);
    ch.interbs_error = CMatrix::Zero(1, 1);
    return ch;
}

ScenarioConfig small_config(int nt, int nr, int k, int slots)
{
    ScenarioConfig c;
    c.n_tx_antennas = nt;
    c.n_rx_antennas = nr;
    c.n_users = k;
    c.slot_length = slots;
    return c;
}

ChannelRealization random_channels(RandomStream &rng, const ScenarioConfig &c)
{
    ChannelRealization ch;
    for (int n = 0; n < c.n_users; ++n)
    {
        ch.f_user.push_back(rng.complex_gaussian_vector(c.n_tx_antennas));
        ch.h_user.push_back(rng.complex_gaussian());
    }
    ch.a_tx = rng.complex_gaussian_vector(c.n_tx_antennas);
    ch.a_rx = rng.complex_gaussian_vector(c.n_rx_antennas);
    ch.b_tx = rng.complex_gaussian_vector(c.n_tx_antennas);
    ch.b_rx = rng.complex_gaussian_vector(c.n_rx_antennas);
    ch.g_rep = rng.complex_gaussian();
    ch.clutter = rng.complex_gaussian_matrix(c.n_rx_antennas, c.n_tx_antennas);
    ch.interbs_error = rng.complex_gaussian_matrix(c.n_rx_antennas, c.n_tx_antennas);
    ch.rcs = rng.complex_gaussian();
    return ch;
}

TransmitFrame frame_from(const CMatrix &x)
{
    TransmitFrame f;
    f.x = x;
    return f;
}

} // namespace

TEST(Repeater, OffGivesNoOutput)
{
    RandomStream rng(1);
    const auto ch = scalar_channels(1.0);
    const auto io = repeater_io(CVector::Constant(1, 3.0), ch, 0.0, 2.0, 0.5);
    EXPECT_EQ(io.output, Complex(0.0, 0.0));
}

TEST(Repeater, HandValue)
{
    ChannelRealization ch = scalar_channels(0.0);
    ch.a_tx = CVector::Zero(2);
    ch.b_tx = CVector::Zero(2);
    ch.b_tx(0) = 1.0;
    CVector x = CVector::Zero(2);
    x(0) = 3.0;
    const auto io = repeater_io(x, ch, 2.0, 0.0, 0.0);
    EXPECT_EQ(io.input, Complex(3.0, 0.0));
    EXPECT_EQ(io.output, Complex(6.0, 0.0));
}

TEST(Repeater, LinearWithoutNoise)
{
    RandomStream rng(2);
    const auto c = small_config(4, 2, 0, 1);
    const auto ch = random_channels(rng, c);
    const CVector x = rng.complex_gaussian_vector(4);
    const auto one = repeater_io(x, ch, {1.5, 0.5}, ch.rcs, 0.0);
    const auto two = repeater_io(2.0 * x, ch, {1.5, 0.5}, ch.rcs, 0.0);
    EXPECT_NEAR(std::abs(two.output - 2.0 * one.output), 0.0, 1e-13);
}

TEST(SensingBs, AllSourcesOff)
{
    auto c = small_config(3, 2, 0, 4);
    RandomStream rng(3);
    auto ch = random_channels(rng, c);
    ch.rcs = 0.0;
    ch.clutter.setZero();
    ch.interbs_error.setZero();
    const auto obs = receive_bs_slot(frame_from(rng.complex_gaussian_matrix(3, 4)), ch, zero_noise(c), c);
    EXPECT_LE(obs.y.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SensingBs, ScalarHandCase)
{
    auto c = small_config(1, 1, 0, 1);
    c.repeater_gain_db = 0.0; // nu = 1
    auto ch = scalar_channels(1.0);
    ch.rcs = 2.0;
    const auto obs = receive_bs_slot(frame_from(CMatrix::Constant(1, 1, 1.0)), ch, zero_noise(c), c);
    EXPECT_NEAR(std::abs(obs.y(0, 0) - Complex(4.0, 0.0)), 0.0, 1e-14);
}

TEST(SensingBs, RepeaterOffIsClassicBistaticEcho)
{
    auto c = small_config(4, 3, 0, 5);
    c.repeater_gain_db = std::nullopt;
    RandomStream rng(4);
    auto ch = random_channels(rng, c);
    ch.clutter.setZero();
    ch.interbs_error.setZero();
    const CMatrix x = rng.complex_gaussian_matrix(4, 5);
    const auto obs = receive_bs_slot(frame_from(x), ch, zero_noise(c), c);
    for (int t = 0; t < 5; ++t)
    {
        const CVector expected = ch.rcs * ch.a_rx * bilinear(ch.a_tx, x.col(t));
        EXPECT_LE((obs.y.col(t) - expected).norm(), 1e-13 * expected.norm());
    }
}

TEST(SensingBs, SuperpositionOfPaths)
{
    auto c = small_config(4, 3, 0, 6);
    c.repeater_gain_db = 13.0;
    c.repeater_phase_rad = 0.7;
    RandomStream rng(5);
    const auto ch = random_channels(rng, c);
    const CMatrix x = rng.complex_gaussian_matrix(4, 6);
    const NoiseDraws noise{rng.complex_gaussian_vector(6), rng.complex_gaussian_matrix(3, 6), CMatrix(0, 6)};
    const Complex nu = c.repeater_gain();

    for (bool cancel : {true, false})
    {
        c.cancel_repeater_leakage = cancel;
        const auto obs = receive_bs_slot(frame_from(x), ch, noise, c);
        for (int t = 0; t < 6; ++t)
        {
            const CVector xt = x.col(t);
            const CVector target = ch.rcs * ch.a_rx * bilinear(ch.a_tx, xt);
            const CVector via_repeater = ch.rcs * nu * ch.g_rep * ch.b_rx * bilinear(ch.a_tx, xt);
            CVector clutter = ch.clutter * xt;
            if (!cancel)
                clutter += nu * ch.b_rx * bilinear(ch.b_tx, xt);
            const CVector noise_t = ch.interbs_error * xt + nu * noise.w_rep(t) * ch.b_rx + noise.w_bs.col(t);
            const CVector sum = target + via_repeater + clutter + noise_t;
            EXPECT_LE((obs.y.col(t) - sum).norm(), 1e-12 * sum.norm());
        }
        EXPECT_EQ(obs.stacked().size(), 3 * 6);
        EXPECT_EQ(obs.stacked().segment(3, 3), obs.slot(1));
    }
}

TEST(SensingBs, NoiseCovarianceMatchesDetectorModel)
{
    auto c = small_config(3, 3, 0, 1);
    c.repeater_gain_db = 0.0;
    c.residual_interbs_power = 0.7;
    c.repeater_noise_power_watt = 1.3;
    c.noise_figure_db = 0.0;
    c.bandwidth_hz = 1.0;
    c.noise_density_dbm_hz = 30.0; // 1 W
    RandomStream rng(6);
    ChannelRealization ch = random_channels(rng, c);
    ch.rcs = 0.0;
    ch.clutter.setZero();
    const CMatrix x = rng.complex_gaussian_matrix(3, 1);

    const int draws = 10000;
    CMatrix acc = CMatrix::Zero(3, 3);
    for (int i = 0; i < draws; ++i)
    {
        ch.interbs_error = draw_interbs_error(c, rng);
        const CVector w = receive_bs_slot(frame_from(x), ch, draw_noise(c, rng), c).y.col(0);
        acc += w * w.adjoint();
    }
    acc /= draws;
    const CMatrix model =
        sensing_noise_cov(x.col(0), ch.b_rx, c.repeater_gain(), c.noise_power_repeater(), c.noise_power_bs(),
                          c.residual_interbs_power);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_LE(std::abs(acc(i, j) - model(i, j)), 0.05 * std::sqrt(model(i, i).real() * model(j, j).real()));
}

TEST(UserReceive, RepeaterOffNoiseless)
{
    auto c = small_config(4, 2, 2, 3);
    c.repeater_gain_db = std::nullopt;
    RandomStream rng(7);
    const auto ch = random_channels(rng, c);
    const CMatrix x = rng.complex_gaussian_matrix(4, 3);
    const CVector y = receive_ue(frame_from(x), ch, 1, zero_noise(c), c);
    for (int t = 0; t < 3; ++t)
        EXPECT_NEAR(std::abs(y(t) - bilinear(ch.f_user[1], x.col(t))), 0.0, 1e-14);
    EXPECT_THROW(receive_ue(frame_from(x), ch, 2, zero_noise(c), c), ConfigError);
}

TEST(UserReceive, ZeroInputLeavesOnlyNoise)
{
    auto c = small_config(4, 2, 2, 3);
    RandomStream rng(8);
    const auto ch = random_channels(rng, c);
    const auto noise = draw_noise(c, rng);
    const CVector y = receive_ue(frame_from(CMatrix::Zero(4, 3)), ch, 0, noise, c);
    const CVector expected = c.repeater_gain() * ch.h_user[0] * noise.w_rep + noise.w_ue.row(0).transpose();
    EXPECT_EQ(y, expected);
}

TEST(UserReceive, EffectiveNoiseVariance)
{
    auto c = small_config(2, 1, 1, 1);
    c.repeater_gain_db = 3.0;
    c.repeater_noise_power_watt = 0.8;
    c.noise_density_dbm_hz = 30.0;
    c.bandwidth_hz = 1.0;
    c.ue_noise_figure_db = 0.0;
    RandomStream rng(9);
    const auto ch = random_channels(rng, c);
    const int draws = 100000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i)
        acc += std::norm(receive_ue(frame_from(CMatrix::Zero(2, 1)), ch, 0, draw_noise(c, rng), c)(0));
    const double expected = std::norm(c.repeater_gain()) * std::norm(ch.h_user[0]) * 0.8 + 1.0;
    EXPECT_NEAR(acc / draws, expected, 0.02 * expected);
}
