// SPDX-License-Identifier: Apache-2.0
//
// mmwsim - millimetre-wave transceiver impairment simulation toolkit
// Copyright (C) 2026 mmwsim contributors
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

#ifndef MMWSIM_PA_MODELS_HPP
#define MMWSIM_PA_MODELS_HPP

#include "mmwsim/rng.hpp"
#include "mmwsim/types.hpp"

#include <optional>
#include <string>

namespace mmwsim {

/// Static third-order polynomial PA: y = theta1 x + theta2 x |x|^2.
struct Poly3Params {
    cplx theta1{1.0, 0.0};
    cplx theta2{0.0, 0.0};
};

/// First-order stochastic decomposition parameters for Gaussian input:
/// y = alpha x + w with w uncorrelated with x.
struct BussgangParams {
    cplx alpha{1.0, 0.0};
    double sigma_w2 = 0.0;
    double sigma_x2 = 1.0; // the Gaussian input power alpha was computed for
};

ComplexSequence apply_poly3(const Poly3Params &params, const ComplexSequence &x);

/// alpha = theta1 + 2 theta2 sigma_x^2 (complex-Gaussian fourth moment).
cplx bussgang_alpha(const Poly3Params &params, double sigma_x2);

/// Which closed form the distortion power uses. AsPrinted evaluates
/// 2|theta2|^2 (3 sigma_x^6 + 2 sigma_x^8); McOracle estimates
/// E[|y - alpha x|^2] by simulation. The two disagree materially; callers
/// that need ground truth should use the oracle and report the gap.
enum class DistortionFormula { AsPrinted, McOracle };

struct DistortionPowerResult {
    double sigma_w2 = 0.0;
    double ci_halfwidth = 0.0;   // 95% CI, zero for the closed form
    std::string warning;         // set when the draw count is too small
};

DistortionPowerResult bussgang_distortion_power(const Poly3Params &params, double sigma_x2,
                                                DistortionFormula formula,
                                                Eigen::Index mc_draws = 1'000'000,
                                                RngStream *rng = nullptr);

/// Bundle alpha and the distortion power for one operating point.
BussgangParams bussgang_decompose(const Poly3Params &params, double sigma_x2,
                                  DistortionFormula formula = DistortionFormula::AsPrinted,
                                  Eigen::Index mc_draws = 1'000'000, RngStream *rng = nullptr);

/// Generalized memory polynomial structure. Aligned terms use odd orders
/// 1..K; cross and secondary-envelope groups start at order 3 (an order-1
/// envelope factor is constant and would duplicate the linear tap).
struct GmpStructure {
    int nonlinearity_order = 7; // K, odd
    int memory_depth = 1;       // L, taps 0..L-1
    int cross_lags = 0;         // M, lags/leads 1..M
    bool secondary_input = false;

    Eigen::Index basis_size() const;
};

/// GMP coefficients in the documented basis order: aligned by (k,l), then
/// lagging by (k,l,m), then leading by (k,l,m), then secondary-envelope
/// terms by (k,l) when enabled. k runs fastest over its group, then l,
/// then m, each in increasing order.
struct GmpModel {
    GmpStructure structure;
    Eigen::VectorXcd coefficients;
};

void validate(const GmpStructure &structure);
void validate(const GmpModel &model);

/// y[n] = sum of coefficient-weighted basis terms; out-of-range sample
/// indices read as zero (streaming start-up).
ComplexSequence apply_gmp(const GmpModel &model, const ComplexSequence &x,
                          const ComplexSequence *secondary = nullptr);

/// The regression matrix whose columns are the basis terms, in coefficient
/// order. Shared by apply_gmp and fit_gmp so the ordering cannot drift.
Eigen::MatrixXcd gmp_basis_matrix(const GmpStructure &structure, const Eigen::VectorXcd &x,
                                  const Eigen::VectorXcd *secondary = nullptr);

struct GmpFitReport {
    double nmse_db = 0.0;
    double condition_estimate = 0.0;
    double ridge_used = 0.0;
};

struct GmpFitResult {
    GmpModel model;
    GmpFitReport report;
};

/// Ridge-regularized least squares min ||y - Phi c||^2 + ridge ||c||^2.
/// ridge = nullopt selects the default 1e-10 * trace of the Gram matrix;
/// an explicit 0 requests the unregularized solve and fails loudly on a
/// rank-deficient basis.
GmpFitResult fit_gmp(const ComplexSequence &x, const ComplexSequence &y,
                     const GmpStructure &structure, std::optional<double> ridge = std::nullopt,
                     const ComplexSequence *secondary = nullptr);

/// Multi-branch statistical PA model Y = Lambda X + W with X ~ CN(0, C_xx)
/// and W ~ CN(0, C_ww).
struct ArrayStatModel {
    Eigen::VectorXcd alphas;  // diagonal of Lambda
    Eigen::MatrixXcd c_ww;
    Eigen::MatrixXcd c_xx;
};

void validate(const ArrayStatModel &model);

/// Per-branch Bussgang parameters from the input covariance diagonal;
/// baseline C_ww is diagonal (uncorrelated branch distortions).
ArrayStatModel build_array_stat_model(const std::vector<Poly3Params> &branch_params,
                                      const Eigen::MatrixXcd &c_xx,
                                      DistortionFormula formula = DistortionFormula::AsPrinted,
                                      Eigen::Index mc_draws = 1'000'000, RngStream *rng = nullptr);

/// Y = Lambda X + W, W drawn CN(0, C_ww) independently per column.
Eigen::MatrixXcd apply_array_stat(const ArrayStatModel &model, const Eigen::MatrixXcd &x_block,
                                  RngStream &rng);

} // namespace mmwsim

#endif
