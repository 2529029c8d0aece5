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


#ifndef RISAC_DETECTOR_HPP
#define RISAC_DETECTOR_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "channel.hpp"
#include "precoding.hpp"
#include "propagation.hpp"
#include "scenario.hpp"
#include "types.hpp"

namespace risac
{

/// Everything the sensing BS knows: the target and repeater geometry channels,
/// the noise levels, and the priors on the RCS and the clutter.
struct SensingModel
{
    CVector a_tx;
    CVector a_rx;
    CVector b_rx;
    Complex g_rep{};
    Complex nu{};
    double sigma_bs_sq = 1.0;
    double sigma_r_sq = 1.0;
    double zeta_sq = 0.0;
    double sigma_t_sq = 1.0;
    ClutterModel clutter;

    Eigen::Index n_tx() const { return a_tx.size(); }
    Eigen::Index n_rx() const { return a_rx.size(); }
};

inline SensingModel make_sensing_model(const ChannelRealization &ch, const ScenarioConfig &config,
                                       ClutterModel clutter)
{
    SensingModel m;
    m.a_tx = ch.a_tx;
    m.a_rx = ch.a_rx;
    m.b_rx = ch.b_rx;
    m.g_rep = ch.g_rep;
    m.nu = config.repeater_gain();
    m.sigma_bs_sq = config.noise_power_bs();
    m.sigma_r_sq = config.noise_power_repeater();
    m.zeta_sq = config.residual_interbs_power;
    m.sigma_t_sq = config.detector_rcs_scale * config.rcs_variance;
    if (!config.cancel_repeater_leakage)
        clutter = with_repeater_leakage(clutter, m.nu, ch.b_rx, ch.b_tx);
    m.clutter = std::move(clutter);
    return m;
}

/// B = x^T kron I_{N_r}, so that B vec(C) = C x for any N_r x N_t matrix C.
inline CMatrix regressor(const CVector &x, Eigen::Index n_rx)
{
    const Eigen::Index nt = x.size();
    CMatrix b = CMatrix::Zero(n_rx, nt * n_rx);
    for (Eigen::Index j = 0; j < nt; ++j)
        b.block(0, j * n_rx, n_rx, n_rx).diagonal().setConstant(x(j));
    return b;
}

/// Covariance of the overall sensing noise for transmit vector x:
///   zeta^2 |x|^2 I + |nu|^2 sigma_R^2 b_r b_r^H + sigma_BS^2 I.
inline CMatrix sensing_noise_cov(const CVector &x, const CVector &b_rx, Complex nu, double sigma_r_sq,
                                 double sigma_bs_sq, double zeta_sq)
{
    CMatrix s = (std::norm(nu) * sigma_r_sq) * (b_rx * b_rx.adjoint());
    s.diagonal().array() += zeta_sq * x.squaredNorm() + sigma_bs_sq;
    return s;
}

inline CMatrix sensing_noise_cov(const CVector &x, const SensingModel &m)
{
    return sensing_noise_cov(x, m.b_rx, m.nu, m.sigma_r_sq, m.sigma_bs_sq, m.zeta_sq);
}

/// Equivalent sensing channel r = (a_r + nu g b_r)(a_t^T x).
inline CVector sensing_channel(const CVector &x, const CVector &a_tx, const CVector &a_rx, const CVector &b_rx,
                               Complex g, Complex nu)
{
    return (a_rx + (nu * g) * b_rx) * bilinear(a_tx, x);
}

enum class Hypothesis
{
    h0,
    h1,
};

/// Sufficient statistics of the joint MAP problem over z = [alpha; vec(C)].
///
/// Q_H1 = [ sum r^H S^-1 r + 1/sigma_T^2   sum r^H S^-1 B ]
///        [ (sum r^H S^-1 B)^H             Q_H0           ]
/// Q_H0 = sum B^H S^-1 B + Sigma_c^-1
/// t_H1 = [ sum r^H S^-1 y ; t_H0 ],  t_H0 = sum B^H S^-1 y
struct DetectorWorkspace
{
    std::vector<CMatrix> sigma_s;
    CMatrix sigma_c;
    CVector t_h1;
    CVector t_h0;
    CMatrix q_h1;
    CMatrix q_h0;
    double sigma_t_sq = 1.0;
};

struct DetectionResult
{
    Hypothesis decision = Hypothesis::h0;
    double statistic = 0.0;
    double threshold = 0.0;
    Complex rcs_estimate{};
    CVector clutter_estimate;
};

inline DetectorWorkspace assemble_statistics(const SensingObservation &observation, const CMatrix &x,
                                             const SensingModel &model)
{
    const Eigen::Index nr = model.n_rx();
    const Eigen::Index nt = model.n_tx();
    const Eigen::Index slots = x.cols();
    if (observation.y.rows() != nr || observation.y.cols() != slots || x.rows() != nt)
        throw ConfigError("assemble_statistics: observation/frame dimensions disagree with the model");
    if (!(model.sigma_t_sq > 0.0))
        throw NumericalError("RCS prior variance must be positive");
    const Eigen::Index dim = nt * nr;
    if (model.clutter.precision.rows() != dim)
        throw ConfigError("assemble_statistics: clutter covariance has the wrong size");

    DetectorWorkspace ws;
    ws.sigma_t_sq = model.sigma_t_sq;
    ws.sigma_c = model.clutter.covariance;
    ws.sigma_s.reserve(static_cast<std::size_t>(slots));

    // S = c I + d b b^H with c = sigma_BS^2 + zeta^2 |x|^2 and d = |nu|^2 sigma_R^2,
    // so S^-1 = I / c - e b b^H with e = d / (c (c + d |b|^2)). The Kronecker
    // sum over slots then collapses to two N_t x N_t accumulations:
    //   sum B^H S^-1 B = P kron I - E kron b b^H.
    const CVector echo_dir = model.a_rx + (model.nu * model.g_rep) * model.b_rx;
    const CVector &b = model.b_rx;
    const double d = std::norm(model.nu) * model.sigma_r_sq;
    const double b_sq = b.squaredNorm();
    CMatrix whitened_y(nr, slots); // S^-1 y
    CMatrix whitened_r(nr, slots); // S^-1 r
    Complex t_alpha{};
    Complex q_alpha{};
    CMatrix p = CMatrix::Zero(nt, nt);
    CMatrix e_acc = CMatrix::Zero(nt, nt);

    for (Eigen::Index t = 0; t < slots; ++t)
    {
        const CVector xt = x.col(t);
        const double c = model.sigma_bs_sq + model.zeta_sq * xt.squaredNorm();
        if (!(c > 0.0))
            throw NumericalError("sensing noise covariance is not positive definite");
        const double e = d / (c * (c + d * b_sq));
        ws.sigma_s.push_back(sensing_noise_cov(xt, model));

        const CVector r = echo_dir * bilinear(model.a_tx, xt);
        const CVector y = observation.y.col(t);
        whitened_y.col(t) = y / c - (e * b.dot(y)) * b;
        whitened_r.col(t) = r / c - (e * b.dot(r)) * b;
        t_alpha += r.dot(whitened_y.col(t));
        q_alpha += r.dot(whitened_r.col(t));

        const CMatrix outer = xt.conjugate() * xt.transpose();
        p += outer / c;
        if (e != 0.0)
            e_acc += e * outer;
    }

    const CMatrix bb = b * b.adjoint();
    CMatrix q0(dim, dim);
    for (Eigen::Index l = 0; l < nt; ++l)
        for (Eigen::Index j = 0; j < nt; ++j)
        {
            auto blk = q0.block(j * nr, l * nr, nr, nr);
            blk = -e_acc(j, l) * bb;
            blk.diagonal().array() += p(j, l);
        }
    q0 += model.clutter.precision;
    q0 = (0.5 * (q0 + q0.adjoint())).eval();

    // B^H v = vec(v x^H)
    ws.t_h0 = (whitened_y * x.adjoint()).reshaped();
    const CVector cross = (whitened_r * x.adjoint()).reshaped();

    ws.t_h1.resize(dim + 1);
    ws.t_h1(0) = t_alpha;
    ws.t_h1.tail(dim) = ws.t_h0;

    ws.q_h1.resize(dim + 1, dim + 1);
    ws.q_h1(0, 0) = Complex(q_alpha.real() + 1.0 / model.sigma_t_sq, 0.0);
    ws.q_h1.block(1, 0, dim, 1) = cross;
    ws.q_h1.block(0, 1, 1, dim) = cross.adjoint();
    ws.q_h1.bottomRightCorner(dim, dim) = q0;
    ws.q_h0 = std::move(q0);
    return ws;
}

namespace detail
{

// Cholesky of a Hermitian PD matrix after symmetric diagonal (Jacobi) scaling;
// the statistics mix entries that differ by many orders of magnitude.
class ScaledCholesky
{
  public:
    explicit ScaledCholesky(const CMatrix &q)
    {
        const RVector diag = q.diagonal().real();
        if ((diag.array() <= 0.0).any() || !diag.allFinite())
            throw NumericalError("statistic matrix is not positive definite");
        scale_ = diag.array().rsqrt();
        const CMatrix herm = 0.5 * (q + q.adjoint());
        const CMatrix scaled = scale_.asDiagonal() * herm * scale_.asDiagonal();
        llt_.compute(scaled);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("Cholesky factorization of a statistic matrix failed");
    }

    template <typename Rhs>
    CMatrix solve(const Rhs &b) const
    {
        const CMatrix scaled = scale_.asDiagonal() * b;
        return scale_.asDiagonal() * llt_.solve(scaled);
    }

  private:
    RVector scale_;
    Eigen::LLT<CMatrix> llt_;
};

} // namespace detail

/// GLRT statistic T = t_H1^H Q_H1^-1 t_H1 - t_H0^H Q_H0^-1 t_H0.
///
/// Evaluated through the Schur complement of Q_H0 in Q_H1, which needs a single
/// factorization of Q_H0 and avoids subtracting two nearly equal quadratic
/// forms:
///   T = |t_alpha - q^H Q_H0^-1 t_H0|^2 / (q_alpha - q^H Q_H0^-1 q)
/// where [q_alpha, q^H] is the first row of Q_H1.
inline double glrt_statistic(const DetectorWorkspace &ws)
{
    const Eigen::Index dim = ws.q_h0.rows();
    const detail::ScaledCholesky chol(ws.q_h0);
    CMatrix rhs(dim, 2);
    rhs.col(0) = ws.t_h0;
    rhs.col(1) = ws.q_h1.block(1, 0, dim, 1);
    const CMatrix sol = chol.solve(rhs);
    const CVector q = rhs.col(1);
    const double schur = ws.q_h1(0, 0).real() - q.dot(sol.col(1)).real();
    if (!(schur > 0.0))
        throw NumericalError("Q_H1 is not positive definite (non-positive Schur complement)");
    const Complex innovation = ws.t_h1(0) - q.dot(sol.col(0));
    return std::norm(innovation) / schur;
}

/// Same statistic as the literal difference of the two quadratic forms, one
/// factorization each. Kept as a cross-check of glrt_statistic.
inline double glrt_statistic_two_solve(const DetectorWorkspace &ws)
{
    const detail::ScaledCholesky c1(ws.q_h1);
    const detail::ScaledCholesky c0(ws.q_h0);
    const Complex h1 = ws.t_h1.dot(c1.solve(ws.t_h1).col(0));
    const Complex h0 = ws.t_h0.dot(c0.solve(ws.t_h0).col(0));
    const Complex t = h1 - h0;
    if (std::abs(t.imag()) > 1e-9 * (1.0 + std::abs(h1) + std::abs(h0)))
        throw NumericalError("GLRT statistic has a non-negligible imaginary part");
    return t.real();
}

struct MapEstimate
{
    Complex rcs;
    CVector clutter; // vec of the equivalent clutter channel
};

/// z = Q_H1^-1 t_H1, the joint MAP estimate of [alpha; vec(C)] under H1.
inline MapEstimate map_estimate(const DetectorWorkspace &ws)
{
    const detail::ScaledCholesky chol(ws.q_h1);
    const CVector z = chol.solve(ws.t_h1).col(0);
    return {z(0), z.tail(z.size() - 1)};
}

inline Hypothesis decide(double statistic, double threshold)
{
    return statistic >= threshold ? Hypothesis::h1 : Hypothesis::h0;
}

inline DetectionResult detect(const DetectorWorkspace &ws, double threshold, bool with_estimates = false)
{
    DetectionResult out;
    out.statistic = glrt_statistic(ws);
    out.threshold = threshold;
    out.decision = decide(out.statistic, threshold);
    if (with_estimates)
    {
        auto est = map_estimate(ws);
        out.rcs_estimate = est.rcs;
        out.clutter_estimate = std::move(est.clutter);
    }
    return out;
}

struct ThresholdCalibration
{
    double threshold = 0.0;
    int trials = 0;
    double pfa_target = 0.0;
    // Fraction of the calibration statistics at or above the threshold.
    double calibration_pfa = 0.0;
    std::string warning;
};

/// Empirical (1 - pfa) quantile of null statistics, "higher" interpolation:
/// the sorted sample at index ceil((1 - pfa)(M - 1)). The result is stored in
/// the log domain of the likelihood ratio, i.e. compared to T directly.
inline ThresholdCalibration empirical_threshold(std::vector<double> null_statistics, double pfa)
{
    if (null_statistics.empty())
        throw ConfigError("threshold calibration needs at least one null statistic");
    if (!(pfa > 0.0 && pfa < 1.0))
        throw ConfigError("pfa_target must lie in (0, 1)");
    std::sort(null_statistics.begin(), null_statistics.end());
    const auto m = null_statistics.size();
    const auto index = static_cast<std::size_t>(std::ceil((1.0 - pfa) * static_cast<double>(m - 1)));
    ThresholdCalibration cal;
    cal.threshold = null_statistics[std::min(index, m - 1)];
    cal.trials = static_cast<int>(m);
    cal.pfa_target = pfa;
    const auto first = std::lower_bound(null_statistics.begin(), null_statistics.end(), cal.threshold);
    cal.calibration_pfa = static_cast<double>(null_statistics.end() - first) / static_cast<double>(m);
    if (static_cast<double>(m) * pfa < 10.0)
        cal.warning = "calibration too small to resolve the target PFA (M * PFA < 10)";
    return cal;
}

} // namespace risac

#endif
