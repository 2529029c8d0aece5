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


#ifndef RISAC_ORACLE_HPP
#define RISAC_ORACLE_HPP

// Brute-force reference for the GLRT statistic. It maximizes both posteriors
// by dense real least squares on the whitened, stacked observation model and
// does not touch the closed-form assembly in detector.hpp; only the
// SensingModel/observation containers are shared.

#include <cmath>
#include <cstdint>
#include <vector>

#include "detector.hpp"
#include "propagation.hpp"
#include "random.hpp"
#include "types.hpp"

namespace risac
{

class OracleError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

namespace oracle_detail
{

// [Re A, -Im A; Im A, Re A]
inline RMatrix realify(const CMatrix &a)
{
    RMatrix r(2 * a.rows(), 2 * a.cols());
    r << a.real(), -a.imag(), a.imag(), a.real();
    return r;
}

inline RVector realify(const CVector &b)
{
    RVector r(2 * b.size());
    r << b.real(), b.imag();
    return r;
}

// min_z ||A z - b||^2 over complex z; returns the minimum.
inline double least_squares_minimum(const CMatrix &a, const CVector &b)
{
    const RMatrix ar = realify(a);
    const RVector br = realify(b);
    const Eigen::ColPivHouseholderQR<RMatrix> qr(ar);
    const RVector z = qr.solve(br);
    const RVector residual = ar * z - br;
    const double gradient = (ar.transpose() * residual).norm();
    const double scale = (ar.transpose() * br).norm() + ar.norm() * br.norm() * 1e-300;
    if (!(gradient <= 1e-8 * scale + 1e-300))
        throw OracleError("oracle least-squares residual above tolerance");
    return residual.squaredNorm();
}

} // namespace oracle_detail

/// Difference of the maximized log posteriors under H1 and H0, both up to the
/// same constants that the detector drops (the ln(1 / (pi sigma_T^2)) ratio
/// lives in the calibrated threshold).
///
/// Each hypothesis is the least-squares problem
///   sum_tau |L_tau^-1 (y_tau - r_tau alpha - B_tau c)|^2 + |alpha|^2 / sigma_T^2 + |L_c^-1 c|^2
/// with S_tau = L_tau L_tau^H and Sigma_c = L_c L_c^H, so T = f_H0,min - f_H1,min.
inline double oracle_loglike_ratio(const SensingObservation &observation, const CMatrix &x,
                                   const SensingModel &model)
{
    const Eigen::Index nr = model.a_rx.size();
    const Eigen::Index nt = model.a_tx.size();
    const Eigen::Index slots = x.cols();
    const Eigen::Index dim = nt * nr;
    const Eigen::Index rows = nr * slots + dim + 1;
    if (dim + 1 > 200)
        throw OracleError("oracle is limited to small instances");

    // columns: [alpha, vec(C)]
    CMatrix a = CMatrix::Zero(rows, dim + 1);
    CVector b = CVector::Zero(rows);

    const CMatrix echo = (model.a_rx + model.nu * model.g_rep * model.b_rx) * model.a_tx.transpose();
    for (Eigen::Index t = 0; t < slots; ++t)
    {
        const CVector xt = x.col(t);
        CMatrix cov = CMatrix::Identity(nr, nr) * (model.sigma_bs_sq + model.zeta_sq * xt.squaredNorm());
        cov += std::norm(model.nu) * model.sigma_r_sq * model.b_rx * model.b_rx.adjoint();
        const Eigen::LLT<CMatrix> llt(cov);
        if (llt.info() != Eigen::Success)
            throw OracleError("oracle: noise covariance not positive definite");
        const CMatrix l_inv = llt.matrixL().solve(CMatrix::Identity(nr, nr));

        CMatrix design(nr, dim + 1);
        design.col(0) = echo * xt;
        // C x = sum_{i,j} C_ij x_j e_i, vec index j * nr + i
        for (Eigen::Index j = 0; j < nt; ++j)
            for (Eigen::Index i = 0; i < nr; ++i)
            {
                CVector col = CVector::Zero(nr);
                col(i) = xt(j);
                design.col(1 + j * nr + i) = col;
            }
        a.block(t * nr, 0, nr, dim + 1) = l_inv * design;
        b.segment(t * nr, nr) = l_inv * observation.y.col(t);
    }

    const Eigen::LLT<CMatrix> clutter_llt(model.clutter.covariance);
    if (clutter_llt.info() != Eigen::Success)
        throw OracleError("oracle: clutter covariance not positive definite");
    const CMatrix lc_inv = clutter_llt.matrixL().solve(CMatrix::Identity(dim, dim));
    a.block(nr * slots, 1, dim, dim) = lc_inv;
    a(rows - 1, 0) = 1.0 / std::sqrt(model.sigma_t_sq);

    const double f_h1 = oracle_detail::least_squares_minimum(a, b);

    // H0 drops the alpha column and its prior row.
    const CMatrix a0 = a.block(0, 1, rows - 1, dim);
    const CVector b0 = b.head(rows - 1);
    const double f_h0 = oracle_detail::least_squares_minimum(a0, b0);
    return f_h0 - f_h1;
}

/// A random, well-conditioned detection problem with O(1) entries and a
/// correlated (non-diagonal) clutter prior.
struct DetectionInstance
{
    SensingModel model;
    CMatrix x;
    SensingObservation observation;
    bool target_present = false;
};

inline DetectionInstance random_detection_instance(RandomStream &rng, int n_tx, int n_rx, int slots)
{
    DetectionInstance inst;
    SensingModel &m = inst.model;
    m.a_tx = rng.complex_gaussian_vector(n_tx);
    m.a_rx = rng.complex_gaussian_vector(n_rx);
    m.b_rx = rng.complex_gaussian_vector(n_rx);
    m.g_rep = rng.complex_gaussian();
    m.nu = rng.complex_gaussian();
    m.sigma_bs_sq = 0.5 + 1.5 * rng.uniform();
    m.sigma_r_sq = 0.5 + 1.5 * rng.uniform();
    m.zeta_sq = 0.5 * rng.uniform();
    m.sigma_t_sq = 0.5 + 1.5 * rng.uniform();
    const Eigen::Index dim = static_cast<Eigen::Index>(n_tx) * n_rx;
    const CMatrix g = rng.complex_gaussian_matrix(dim, dim);
    m.clutter = make_clutter_model(g * g.adjoint() / static_cast<double>(dim) + 0.5 * CMatrix::Identity(dim, dim));

    inst.x = rng.complex_gaussian_matrix(n_tx, slots);
    inst.target_present = rng.uniform() < 0.5;
    const Complex alpha = inst.target_present ? rng.complex_gaussian(m.sigma_t_sq) : Complex{};
    const Eigen::LLT<CMatrix> lc(m.clutter.covariance);
    const CVector c = lc.matrixL() * rng.complex_gaussian_vector(dim);
    const CMatrix clutter = c.reshaped(n_rx, n_tx);

    inst.observation.y.resize(n_rx, slots);
    for (int t = 0; t < slots; ++t)
    {
        const CVector xt = inst.x.col(t);
        const CVector r = (m.a_rx + m.nu * m.g_rep * m.b_rx) * bilinear(m.a_tx, xt);
        const CVector noise = rng.complex_gaussian_vector(n_rx, m.sigma_bs_sq + m.zeta_sq * xt.squaredNorm()) +
                              (m.nu * rng.complex_gaussian(m.sigma_r_sq)) * m.b_rx;
        inst.observation.y.col(t) = alpha * r + clutter * xt + noise;
    }
    return inst;
}

struct OracleCheckSummary
{
    int instances = 0;
    int failures = 0;
    double worst_relative_error = 0.0;
};

/// Closed form against the oracle on random small instances; an instance fails
/// when |T - T_oracle| > tolerance (1 + |T|).
inline OracleCheckSummary run_oracle_check(int instances, std::uint64_t seed, int n_tx = 2, int n_rx = 2,
                                           int slots = 3, double tolerance = 1e-6)
{
    OracleCheckSummary s;
    for (int i = 0; i < instances; ++i)
    {
        RandomStream rng(seed, StreamKind::oracle, static_cast<std::uint64_t>(i));
        const auto inst = random_detection_instance(rng, n_tx, n_rx, slots);
        const auto ws = assemble_statistics(inst.observation, inst.x, inst.model);
        const double t = glrt_statistic(ws);
        const double t_oracle = oracle_loglike_ratio(inst.observation, inst.x, inst.model);
        const double rel = std::abs(t - t_oracle) / (1.0 + std::abs(t));
        s.worst_relative_error = std::max(s.worst_relative_error, rel);
        if (!(rel <= tolerance))
            ++s.failures;
        ++s.instances;
    }
    return s;
}

} // namespace risac

#endif
