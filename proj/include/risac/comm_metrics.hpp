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


#ifndef RISAC_COMM_METRICS_HPP
#define RISAC_COMM_METRICS_HPP

#include <cmath>
#include <vector>

#include "channel.hpp"
#include "precoding.hpp"
#include "scenario.hpp"
#include "types.hpp"

namespace risac
{

/// Per-user downlink figures, all powers in watts.
struct UserMetrics
{
    double sinr = 0.0;
    double se = 0.0;
    double signal_power = 0.0;
    double multiuser_interference = 0.0;
    double sensing_interference = 0.0;
    double noise_power = 0.0;
};

inline double spectral_efficiency(double sinr)
{
    if (!(sinr >= 0.0))
        throw std::domain_error("SINR must be nonnegative");
    return std::log2(1.0 + sinr);
}

/// Instantaneous SINR of user n with perfect CSI:
///   rho pi_n |f_n^T p_n|^2 /
///   (rho sum_{n' != n} pi_n' |f_n^T p_n'|^2 + rho pi_T |f_n^T p_T|^2 + |nu|^2 |h_n|^2 sigma_R^2 + sigma_UE^2)
/// where f_n is the effective channel including the repeater path. With
/// sinr_literal_sum the interference sum also includes n' = n.
inline UserMetrics user_sinr(int n, const PrecoderSet &precoders, const ChannelRealization &ch,
                             const ScenarioConfig &config)
{
    const int k = static_cast<int>(ch.f_user.size());
    if (n < 0 || n >= k || static_cast<int>(precoders.user.size()) != k)
        throw ConfigError("user_sinr: user index out of range");
    const auto un = static_cast<std::size_t>(n);
    const Complex nu = config.repeater_gain();
    const CVector fdot = effective_downlink_channel(ch.f_user[un], ch.h_user[un], nu, ch.b_tx);
    const auto fractions = config.user_fractions();
    const double rho = config.tx_power_watt;

    UserMetrics m;
    m.signal_power = rho * fractions[un] * std::norm(bilinear(fdot, precoders.user[un]));
    for (int j = 0; j < k; ++j)
    {
        if (j == n && !config.sinr_literal_sum)
            continue;
        const auto uj = static_cast<std::size_t>(j);
        m.multiuser_interference += rho * fractions[uj] * std::norm(bilinear(fdot, precoders.user[uj]));
    }
    m.sensing_interference = rho * config.sensing_power_fraction * std::norm(bilinear(fdot, precoders.sensing));
    m.noise_power = std::norm(nu) * std::norm(ch.h_user[un]) * config.noise_power_repeater() + config.noise_power_ue();
    m.sinr = m.signal_power / (m.multiuser_interference + m.sensing_interference + m.noise_power);
    m.se = spectral_efficiency(m.sinr);
    return m;
}

inline std::vector<UserMetrics> all_user_metrics(const PrecoderSet &precoders, const ChannelRealization &ch,
                                                 const ScenarioConfig &config)
{
    std::vector<UserMetrics> out;
    for (int n = 0; n < static_cast<int>(ch.f_user.size()); ++n)
        out.push_back(user_sinr(n, precoders, ch, config));
    return out;
}

} // namespace risac

#endif
