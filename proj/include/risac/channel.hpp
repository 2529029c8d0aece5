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


#ifndef RISAC_CHANNEL_HPP
#define RISAC_CHANNEL_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "random.hpp"
#include "scenario.hpp"
#include "types.hpp"

namespace risac
{

/// One draw of every channel in the system plus the target RCS.
///
/// The estimated inter-BS channel never appears: the receive BS subtracts it
/// before detection, so only the residual error interbs_error is carried.
struct ChannelRealization
{
    std::vector<CVector> f_user; // transmit BS -> user n (N_t)
    std::vector<Complex> h_user; // repeater -> user n
    CVector a_tx;                // transmit BS -> target (N_t)
    CVector a_rx;                // target -> receive BS (N_r)
    CVector b_tx;                // transmit BS -> repeater (N_t)
    CVector b_rx;                // repeater -> receive BS (N_r)
    Complex g_rep{};             // target -> repeater
    CMatrix interbs_error;       // N_r x N_t
    CMatrix clutter;             // N_r x N_t
    Complex rcs{};
};

// Large-scale gains of every link for a fixed geometry.
struct LinkBudget
{
    std::vector<double> beta_user;
    std::vector<double> beta_repeater_user;
    double beta_a_tx = 0.0;
    double beta_a_rx = 0.0;
    double beta_b_tx = 0.0;
    double beta_b_rx = 0.0;
    double beta_g = 0.0;
    double beta_clutter = 0.0;
};

/// Half-wavelength ULA response, element m = exp(i pi m sin(angle)).
inline CVector steering_vector(int n_antennas, double angle_rad)
{
    CVector v(n_antennas);
    const double s = std::sin(angle_rad);
    for (int m = 0; m < n_antennas; ++m)
        v(m) = std::polar(1.0, kPi * m * s);
    return v;
}

/// Swerling-I RCS draw, CN(0, sigma_t_sq).
inline Complex draw_rcs(double sigma_t_sq, RandomStream &rng)
{
    if (!(sigma_t_sq > 0.0))
        throw ConfigError("RCS variance must be positive");
    return rng.complex_gaussian(sigma_t_sq);
}

namespace detail
{

inline double link_gain(const Position &from, const Position &to, double carrier_ghz)
{
    return pathloss_linear((to - from).norm(), carrier_ghz, std::min(from.z(), to.z()));
}

inline double azimuth(const Position &from, const Position &to)
{
    return std::atan2(to.y() - from.y(), to.x() - from.x());
}

inline Complex distance_phase(const Position &from, const Position &to, double carrier_ghz)
{
    const double wavelength = kSpeedOfLight / (carrier_ghz * 1e9);
    return std::polar(1.0, -2.0 * kPi * (to - from).norm() / wavelength);
}

inline CVector los_vector(const Position &array, double broadside_deg, const Position &other, int n,
                          double beta, double carrier_ghz)
{
    const double angle = azimuth(array, other) - broadside_deg * kPi / 180.0;
    return std::sqrt(beta) * distance_phase(array, other, carrier_ghz) * steering_vector(n, angle);
}

} // namespace detail

inline LinkBudget link_budget(const Geometry &geometry, const ScenarioConfig &config)
{
    const double fc = config.carrier_ghz;
    LinkBudget b;
    for (const auto &u : geometry.users)
    {
        b.beta_user.push_back(detail::link_gain(geometry.tx_bs, u, fc));
        b.beta_repeater_user.push_back(detail::link_gain(geometry.repeater, u, fc));
    }
    b.beta_a_tx = detail::link_gain(geometry.tx_bs, geometry.target, fc);
    b.beta_a_rx = detail::link_gain(geometry.target, geometry.rx_bs, fc);
    b.beta_b_tx = detail::link_gain(geometry.tx_bs, geometry.repeater, fc);
    b.beta_b_rx = detail::link_gain(geometry.repeater, geometry.rx_bs, fc);
    b.beta_g = detail::link_gain(geometry.target, geometry.repeater, fc);
    b.beta_clutter = detail::link_gain(geometry.tx_bs, geometry.rx_bs, fc);
    return b;
}

inline CMatrix draw_clutter(const ScenarioConfig &config, const LinkBudget &budget, RandomStream &rng)
{
    return rng.complex_gaussian_matrix(config.n_rx_antennas, config.n_tx_antennas,
                                       config.clutter_suppression * budget.beta_clutter);
}

inline CMatrix draw_interbs_error(const ScenarioConfig &config, RandomStream &rng)
{
    if (config.residual_interbs_power == 0.0)
        return CMatrix::Zero(config.n_rx_antennas, config.n_tx_antennas);
    return rng.complex_gaussian_matrix(config.n_rx_antennas, config.n_tx_antennas, config.residual_interbs_power);
}

/// Draws every channel for a fixed geometry.
///
/// User links are Rayleigh, repeater and target links are LOS steering vectors
/// with distance-dependent phase, clutter and residual inter-BS error are i.i.d.
/// complex Gaussian.
inline ChannelRealization gen_channels(const Geometry &geometry, const ScenarioConfig &config, RandomStream &rng)
{
    const int nt = config.n_tx_antennas;
    const int nr = config.n_rx_antennas;
    const double fc = config.carrier_ghz;
    const LinkBudget budget = link_budget(geometry, config);

    ChannelRealization ch;
    for (std::size_t n = 0; n < geometry.users.size(); ++n)
    {
        ch.f_user.push_back(std::sqrt(budget.beta_user[n]) * rng.complex_gaussian_vector(nt));
        ch.h_user.push_back(std::sqrt(budget.beta_repeater_user[n]) *
                            detail::distance_phase(geometry.repeater, geometry.users[n], fc));
    }
    ch.a_tx = detail::los_vector(geometry.tx_bs, config.tx_array_azimuth_deg, geometry.target, nt, budget.beta_a_tx, fc);
    ch.a_rx = detail::los_vector(geometry.rx_bs, config.rx_array_azimuth_deg, geometry.target, nr, budget.beta_a_rx, fc);
    ch.b_tx = detail::los_vector(geometry.tx_bs, config.tx_array_azimuth_deg, geometry.repeater, nt, budget.beta_b_tx, fc);
    ch.b_rx = detail::los_vector(geometry.rx_bs, config.rx_array_azimuth_deg, geometry.repeater, nr, budget.beta_b_rx, fc);
    ch.g_rep = std::sqrt(budget.beta_g) * detail::distance_phase(geometry.target, geometry.repeater, fc);
    ch.clutter = draw_clutter(config, budget, rng);
    ch.interbs_error = draw_interbs_error(config, rng);
    ch.rcs = draw_rcs(config.rcs_variance, rng);
    return ch;
}

/// Prior covariance of vec(C) (column-major, length N_t N_r) together with
/// its inverse, which enters the detector statistics directly.
struct ClutterModel
{
    CMatrix covariance;
    CMatrix precision;
};

inline ClutterModel make_clutter_model(CMatrix covariance)
{
    if (covariance.rows() != covariance.cols())
        throw NumericalError("clutter covariance must be square");
    CMatrix herm = 0.5 * (covariance + covariance.adjoint());
    Eigen::LLT<CMatrix> llt(herm);
    if (llt.info() != Eigen::Success)
        throw NumericalError("clutter covariance is not positive definite");
    CMatrix precision = llt.solve(CMatrix::Identity(herm.rows(), herm.cols()));
    precision = 0.5 * (precision + precision.adjoint()).eval();
    return {std::move(herm), std::move(precision)};
}

/// Diagonal i.i.d. clutter prior kappa * beta_clutter * I, matching draw_clutter.
inline ClutterModel clutter_covariance(const ScenarioConfig &config, const Geometry &geometry)
{
    const double variance = config.clutter_suppression * link_budget(geometry, config).beta_clutter;
    if (!(variance > 0.0))
        throw ConfigError("clutter variance is zero; the clutter covariance must be invertible");
    const Eigen::Index n = static_cast<Eigen::Index>(config.n_tx_antennas) * config.n_rx_antennas;
    ClutterModel m;
    m.covariance = variance * CMatrix::Identity(n, n);
    m.precision = (1.0 / variance) * CMatrix::Identity(n, n);
    return m;
}

/// Folds an uncancelled repeater leakage nu b_r b_t^T into the clutter prior as
/// an extra rank-one term.
inline ClutterModel with_repeater_leakage(const ClutterModel &base, Complex nu, const CVector &b_rx,
                                          const CVector &b_tx)
{
    const CMatrix leak = nu * b_rx * b_tx.transpose();
    const CVector v = leak.reshaped();
    return make_clutter_model(base.covariance + v * v.adjoint());
}

// ---------------------------------------------------------------------------
// Channel dump: CSV "name,index,re,im" with one row per complex entry.
// Vectors are listed element by element; matrices column-major; per-user
// quantities use names like f_user3.

namespace detail
{

inline void dump_entries(std::ostream &out, const std::string &name, const Complex *data, Eigen::Index n)
{
    for (Eigen::Index i = 0; i < n; ++i)
        out << name << ',' << i << ',' << format_number(data[i].real()) << ',' << format_number(data[i].imag())
            << '\n';
}

} // namespace detail

inline void write_channel_dump(std::ostream &out, const ChannelRealization &ch)
{
    out << "name,index,re,im\n";
    for (std::size_t n = 0; n < ch.f_user.size(); ++n)
        detail::dump_entries(out, "f_user" + std::to_string(n), ch.f_user[n].data(), ch.f_user[n].size());
    for (std::size_t n = 0; n < ch.h_user.size(); ++n)
        detail::dump_entries(out, "h_user" + std::to_string(n), &ch.h_user[n], 1);
    detail::dump_entries(out, "a_tx", ch.a_tx.data(), ch.a_tx.size());
    detail::dump_entries(out, "a_rx", ch.a_rx.data(), ch.a_rx.size());
    detail::dump_entries(out, "b_tx", ch.b_tx.data(), ch.b_tx.size());
    detail::dump_entries(out, "b_rx", ch.b_rx.data(), ch.b_rx.size());
    detail::dump_entries(out, "g_rep", &ch.g_rep, 1);
    detail::dump_entries(out, "interbs_error", ch.interbs_error.data(), ch.interbs_error.size());
    detail::dump_entries(out, "clutter", ch.clutter.data(), ch.clutter.size());
    detail::dump_entries(out, "rcs", &ch.rcs, 1);
}

/// Reads a dump written by write_channel_dump. Antenna counts come from the config.
inline ChannelRealization read_channel_dump(std::istream &in, const ScenarioConfig &config)
{
    std::map<std::string, std::vector<Complex>> entries;
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "name,index,re,im")
        throw ConfigError("channel dump: missing header");
    while (std::getline(in, line))
    {
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto parts = detail::split_list(line);
        if (parts.size() != 4)
            throw ConfigError("channel dump: malformed row '" + line + "'");
        auto &vec = entries[parts[0]];
        const auto idx = static_cast<std::size_t>(detail::parse_integer("index", parts[1]));
        if (idx != vec.size())
            throw ConfigError("channel dump: entries of '" + parts[0] + "' out of order");
        vec.emplace_back(detail::parse_double("re", parts[2]), detail::parse_double("im", parts[3]));
    }

    auto take = [&](const std::string &name, Eigen::Index expected) {
        auto it = entries.find(name);
        if (it == entries.end() || static_cast<Eigen::Index>(it->second.size()) != expected)
            throw ConfigError("channel dump: '" + name + "' missing or of wrong length");
        return CVector(Eigen::Map<const CVector>(it->second.data(), expected));
    };
    const int nt = config.n_tx_antennas;
    const int nr = config.n_rx_antennas;
    ChannelRealization ch;
    for (int n = 0; n < config.n_users; ++n)
    {
        ch.f_user.push_back(take("f_user" + std::to_string(n), nt));
        ch.h_user.push_back(take("h_user" + std::to_string(n), 1)(0));
    }
    ch.a_tx = take("a_tx", nt);
    ch.a_rx = take("a_rx", nr);
    ch.b_tx = take("b_tx", nt);
    ch.b_rx = take("b_rx", nr);
    ch.g_rep = take("g_rep", 1)(0);
    ch.interbs_error = take("interbs_error", nt * nr).reshaped(nr, nt);
    ch.clutter = take("clutter", nt * nr).reshaped(nr, nt);
    ch.rcs = take("rcs", 1)(0);
    return ch;
}

} // namespace risac

#endif
