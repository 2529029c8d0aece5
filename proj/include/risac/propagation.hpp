// SPDX-License-Identifier: Apache-2.0
//
// risac: link-level simulator for repeater-assisted bi-static MIMO ISAC
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef RISAC_PROPAGATION_HPP
#define RISAC_PROPAGATION_HPP

#include <utility>

#include "channel.hpp"
#include "precoding.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "types.hpp"

namespace risac
{

struct NoiseDraws
{
    CVector w_rep; // repeater input noise, one per channel use
    CMatrix w_bs;  // N_r x tau_L
    CMatrix w_ue;  // K x tau_L
};

inline NoiseDraws draw_noise(const ScenarioConfig &config, RandomStream &rng)
{
    NoiseDraws w;
    w.w_rep = rng.complex_gaussian_vector(config.slot_length, config.noise_power_repeater());
    w.w_bs = rng.complex_gaussian_matrix(config.n_rx_antennas, config.slot_length, config.noise_power_bs());
    w.w_ue = rng.complex_gaussian_matrix(config.n_users, config.slot_length, config.noise_power_ue());
    return w;
}

inline NoiseDraws zero_noise(const ScenarioConfig &config)
{
    return {CVector::Zero(config.slot_length), CMatrix::Zero(config.n_rx_antennas, config.slot_length),
            CMatrix::Zero(config.n_users, config.slot_length)};
}

/// Received signal at the sensing BS after inter-BS subtraction; column tau is
/// y_BS[tau].
struct SensingObservation
{
    CMatrix y;

    int slots() const { return static_cast<int>(y.cols()); }
    CVector slot(int tau) const { return y.col(tau); }
    // [y[1]; y[2]; ...; y[tau_L]], length N_r tau_L.
    CVector stacked() const { return y.reshaped(); }
};

struct RepeaterSignals
{
    Complex input;
    Complex output;
};

/// Repeater terminals for one channel use:
///   y_in  = alpha g (a_t^T x) + b_t^T x
///   y_out = nu (y_in + w_R)
inline RepeaterSignals repeater_io(const CVector &x, const ChannelRealization &ch, Complex nu, Complex rcs,
                                   Complex w_rep)
{
    const Complex in = rcs * ch.g_rep * bilinear(ch.a_tx, x) + bilinear(ch.b_tx, x);
    return {in, nu * (in + w_rep)};
}

/// Sensing-BS observation over the slot, built from the physical paths:
/// direct target echo, repeater output, residual inter-BS leakage, clutter and
/// receiver noise. The repeater leakage nu b_r b_t^T x is removed when the
/// config pre-cancels it, leaving the clutter term as C x.
inline SensingObservation receive_bs_slot(const TransmitFrame &frame, const ChannelRealization &ch,
                                          const NoiseDraws &noise, const ScenarioConfig &config)
{
    const Complex nu = config.repeater_gain();
    const int slots = static_cast<int>(frame.x.cols());
    SensingObservation obs;
    obs.y.resize(ch.a_rx.size(), slots);
    const CMatrix direct = ch.clutter + ch.interbs_error;
    for (int t = 0; t < slots; ++t)
    {
        const CVector x = frame.x.col(t);
        const RepeaterSignals rep = repeater_io(x, ch, nu, ch.rcs, noise.w_rep(t));
        CVector y = (ch.rcs * bilinear(ch.a_tx, x)) * ch.a_rx + rep.output * ch.b_rx + direct * x + noise.w_bs.col(t);
        if (config.cancel_repeater_leakage)
            y -= (nu * bilinear(ch.b_tx, x)) * ch.b_rx;
        obs.y.col(t) = y;
    }
    return obs;
}

/// Downlink samples of user n over the slot: f_dot_n^T x + nu h_n w_R + w_UE.
inline CVector receive_ue(const TransmitFrame &frame, const ChannelRealization &ch, int user_index,
                          const NoiseDraws &noise, const ScenarioConfig &config)
{
    if (user_index < 0 || user_index >= static_cast<int>(ch.f_user.size()))
        throw ConfigError("receive_ue: user index out of range");
    const auto n = static_cast<std::size_t>(user_index);
    const Complex nu = config.repeater_gain();
    const CVector fdot = effective_downlink_channel(ch.f_user[n], ch.h_user[n], nu, ch.b_tx);
    CVector y = frame.x.transpose() * fdot;
    y += (nu * ch.h_user[n]) * noise.w_rep + noise.w_ue.row(user_index).transpose();
    return y;
}

} // namespace risac

#endif
