// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "risac/oracle.hpp"

using namespace risac;

TEST(Oracle, LeastSquaresMinimumOfExactSystemIsZero)
{
    CMatrix a(2, 1);
    a << 1.0, Complex(0.0, 1.0);
    CVector b = a * Complex(2.0, -1.0);
    EXPECT_NEAR(oracle_detail::least_squares_minimum(a, b), 0.0, 1e-12);
}

TEST(Oracle, LeastSquaresResidualHandValue)
{
    // min |[1;0] z - [1;2]|^2 = 4
    CMatrix a = CMatrix::Zero(2, 1);
    a(0, 0) = 1.0;
    CVector b(2);
    b << 1.0, 2.0;
    EXPECT_NEAR(oracle_detail::least_squares_minimum(a, b), 4.0, 1e-12);
}

TEST(Oracle, ScalarHandCase)
{
    SensingModel m;
    m.a_tx = CVector::Constant(1, 1.0);
    m.a_rx = CVector::Constant(1, 1.0);
    m.b_rx = CVector::Constant(1, 1.0);
    m.nu = 0.0;
    m.sigma_bs_sq = 1.0;
    m.sigma_t_sq = 1.0;
    m.clutter = make_clutter_model(CMatrix::Identity(1, 1));
    SensingObservation obs;
    obs.y = CMatrix::Constant(1, 1, 3.0);
    EXPECT_NEAR(oracle_loglike_ratio(obs, CMatrix::Ones(1, 1), m), 1.5, 1e-10);
}

TEST(Oracle, ZeroDataGivesZero)
{
    RandomStream rng(21);
    auto inst = random_detection_instance(rng, 2, 2, 3);
    inst.observation.y.setZero();
    EXPECT_NEAR(oracle_loglike_ratio(inst.observation, inst.x, inst.model), 0.0, 1e-12);
}

TEST(Oracle, AgreesWithClosedFormOnRandomInstances)
{
    const auto s = run_oracle_check(100, 20261019);
    EXPECT_EQ(s.instances, 100);
    EXPECT_EQ(s.failures, 0);
    EXPECT_LE(s.worst_relative_error, 1e-6);
}

TEST(Oracle, AgreesOnRectangularArrays)
{
    const auto s = run_oracle_check(30, 5, 3, 2, 4);
    EXPECT_EQ(s.failures, 0);
    const auto t = run_oracle_check(30, 6, 1, 3, 2);
    EXPECT_EQ(t.failures, 0);
}

TEST(Oracle, RefusesLargeProblems)
{
    RandomStream rng(22);
    const auto inst = random_detection_instance(rng, 16, 16, 2);
    EXPECT_THROW(oracle_loglike_ratio(inst.observation, inst.x, inst.model), OracleError);
}
