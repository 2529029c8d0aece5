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


#ifndef RISAC_PRECODING_HPP
#define RISAC_PRECODING_HPP

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "channel.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "types.hpp"

namespace risac
{

struct PrecoderSet
{
    std::vector<CVector> user; // unit norm, one per user
    CVector sensing;           // unit norm
    std::vector<double> user_normalizers;
    double sensing_normalizer = 1.0;
};

/// Symbols and transmit vectors of one slot. Column tau of x is x[tau];
/// row n < K of symbols is s_n, the last row is s_T.
struct TransmitFrame
{
    CMatrix symbols;
    CMatrix x;
    std::vector<double> user_fractions;
    double sensing_fraction = 0.0;
};

// Entrywise conjugation when the conjugate convention is on, identity otherwise.
inline CVector precoding_direction(const CVector &channel, bool conjugate)
{
    return conjugate ? CVector(channel.conjugate()) : channel;
}

/// f_n + nu h_n b_t. The target echo relayed to the user is not part of this
/// channel; the user cannot tell it apart from any other scatterer.
inline CVector effective_downlink_channel(const CVector &f_n, Complex h_n, Complex nu, const CVector &b_tx)
{
    if (f_n.size() != b_tx.size())
        throw ConfigError("effective_downlink_channel: dimension mismatch");
    return f_n + (nu * h_n) * b_tx;
}

inline std::vector<CVector> effective_channels(const ChannelRealization &ch, Complex nu)
{
    std::vector<CVector> out;
    out.reserve(ch.f_user.size());
    for (std::size_t n = 0; n < ch.f_user.size(); ++n)
        out.push_back(effective_downlink_channel(ch.f_user[n], ch.h_user[n], nu, ch.b_tx));
    return out;
}

struct UserPrecoders
{
    std::vector<CVector> vectors;
    std::vector<double> normalizers;
};

/// Regularized zero forcing:
///   p_n = eps_n (sum_n' c(f_n') c(f_n')^H + zeta I)^{-1} c(f_n).
inline UserPrecoders rzf_precoders(std::span<const CVector> channels, double zf_regularizer, bool conjugate = true)
{
    if (channels.empty())
        throw ConfigError("rzf_precoders: at least one user channel is required");
    if (!(zf_regularizer > 0.0))
        throw ConfigError("rzf_precoders: regularizer must be positive");
    const Eigen::Index nt = channels.front().size();
    const Eigen::Index k = static_cast<Eigen::Index>(channels.size());
    CMatrix dirs(nt, k);
    for (Eigen::Index n = 0; n < k; ++n)
    {
        if (channels[static_cast<std::size_t>(n)].size() != nt)
            throw ConfigError("rzf_precoders: channel dimension mismatch");
        dirs.col(n) = precoding_direction(channels[static_cast<std::size_t>(n)], conjugate);
    }
    CMatrix gram = dirs * dirs.adjoint();
    gram.diagonal().array() += zf_regularizer;
    const CMatrix raw = gram.llt().solve(dirs);

    UserPrecoders out;
    for (Eigen::Index n = 0; n < k; ++n)
    {
        const double norm = raw.col(n).norm();
        if (!(norm > 0.0))
            throw NumericalError("rzf_precoders: zero channel");
        out.vectors.push_back(raw.col(n) / norm);
        out.normalizers.push_back(1.0 / norm);
    }
    return out;
}

struct SensingPrecoder
{
    CVector vector;
    double normalizer = 1.0;
};

/// Sensing beam for the three supported modes.
///
/// target_centric: c(a_t). comm_centric: c(a_t) projected onto the orthogonal
/// complement of span{c(f_1) .. c(f_K)}, so that f_n^T p_T = 0 under the
/// conjugate convention. repeater_null: c(a_t) with the b_t^* direction
/// removed, so that b_t^T p_T = 0.
inline SensingPrecoder target_precoder(PrecoderMode mode, const CVector &a_tx, const CVector &b_tx,
                                       std::span<const CVector> channels, bool conjugate = true)
{
    const CVector dir = precoding_direction(a_tx, conjugate);
    CVector raw;
    switch (mode)
    {
    case PrecoderMode::target_centric:
        raw = dir;
        break;
    case PrecoderMode::comm_centric: {
        raw = dir;
        if (!channels.empty())
        {
            CMatrix span_cols(dir.size(), static_cast<Eigen::Index>(channels.size()));
            for (std::size_t n = 0; n < channels.size(); ++n)
                span_cols.col(static_cast<Eigen::Index>(n)) = precoding_direction(channels[n], conjugate);
            Eigen::ColPivHouseholderQR<CMatrix> qr(span_cols);
            qr.setThreshold(1e-12);
            const Eigen::Index rank = qr.rank();
            const CMatrix basis = CMatrix(qr.householderQ()).leftCols(rank);
            raw = dir - basis * (basis.adjoint() * dir);
            // second pass removes the rounding left by the first
            raw -= basis * (basis.adjoint() * raw);
        }
        break;
    }
    case PrecoderMode::repeater_null: {
        const double bb = b_tx.squaredNorm();
        if (!(bb > 0.0))
            throw ConfigError("repeater_null precoder: repeater channel is zero");
        const CVector bconj = b_tx.conjugate();
        raw = dir - bconj * (bilinear(b_tx, dir) / bb);
        raw -= bconj * (bilinear(b_tx, raw) / bb);
        break;
    }
    }
    const double norm = raw.norm();
    if (!(norm >= 1e-10 * a_tx.norm()) || norm == 0.0)
        throw NumericalError("sensing direction lies in nulled subspace");
    return {raw / norm, 1.0 / norm};
}

/// Builds the user and sensing precoders for a realization under the config's
/// mode and conventions.
inline PrecoderSet build_precoders(const ChannelRealization &ch, const ScenarioConfig &config)
{
    const Complex nu = config.repeater_gain();
    const std::vector<CVector> design =
        config.precoder_repeater_aware ? effective_channels(ch, nu) : ch.f_user;

    PrecoderSet set;
    if (!design.empty())
    {
        auto users = rzf_precoders(design, config.zf_regularization(), config.conjugate_convention);
        set.user = std::move(users.vectors);
        set.user_normalizers = std::move(users.normalizers);
    }
    auto sensing = target_precoder(config.precoder_mode, ch.a_tx, ch.b_tx, design, config.conjugate_convention);
    set.sensing = std::move(sensing.vector);
    set.sensing_normalizer = sensing.normalizer;
    return set;
}

inline Complex draw_symbol(SymbolAlphabet alphabet, RandomStream &rng)
{
    if (alphabet == SymbolAlphabet::qpsk)
    {
        const double s = 1.0 / std::sqrt(2.0);
        return {rng.uniform() < 0.5 ? -s : s, rng.uniform() < 0.5 ? -s : s};
    }
    return rng.complex_gaussian(1.0);
}

/// x[tau] = sqrt(rho) (sum_n sqrt(pi_n) p_n s_n[tau] + sqrt(pi_T) p_T s_T[tau]).
inline TransmitFrame build_transmit_frame(const PrecoderSet &precoders, const ScenarioConfig &config,
                                          RandomStream &rng)
{
    TransmitFrame frame;
    frame.user_fractions = config.user_fractions();
    frame.sensing_fraction = config.sensing_power_fraction;
    const double total =
        std::accumulate(frame.user_fractions.begin(), frame.user_fractions.end(), frame.sensing_fraction);
    if (total > 1.0 + 1e-12)
        throw ConfigError("power fractions sum exceeds 1 (power budget)");
    if (frame.user_fractions.size() != precoders.user.size())
        throw ConfigError("build_transmit_frame: one power fraction per user precoder is required");

    const Eigen::Index k = static_cast<Eigen::Index>(precoders.user.size());
    const Eigen::Index nt = precoders.sensing.size();
    const int slots = config.slot_length;

    CMatrix weights(nt, k + 1); // sqrt(rho pi) p, one column per stream
    for (Eigen::Index n = 0; n < k; ++n)
        weights.col(n) = std::sqrt(config.tx_power_watt * frame.user_fractions[static_cast<std::size_t>(n)]) *
                         precoders.user[static_cast<std::size_t>(n)];
    weights.col(k) = std::sqrt(config.tx_power_watt * frame.sensing_fraction) * precoders.sensing;

    frame.symbols.resize(k + 1, slots);
    for (int t = 0; t < slots; ++t)
        for (Eigen::Index n = 0; n <= k; ++n)
            frame.symbols(n, t) = draw_symbol(config.symbol_alphabet, rng);
    frame.x = weights * frame.symbols;
    return frame;
}

} // namespace risac

#endif
