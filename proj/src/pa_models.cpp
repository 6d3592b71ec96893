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

#include "mmwsim/pa_models.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace mmwsim {

ComplexSequence apply_poly3(const Poly3Params &params, const ComplexSequence &x) {
    ComplexSequence y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.samples = x.samples.array() * (params.theta1 + params.theta2 * x.samples.array().abs2());
    return y;
}

cplx bussgang_alpha(const Poly3Params &params, double sigma_x2) {
    if (!(sigma_x2 > 0.0))
        throw std::invalid_argument("bussgang_alpha: sigma_x2 must be > 0");
    return params.theta1 + 2.0 * params.theta2 * sigma_x2;
}

DistortionPowerResult bussgang_distortion_power(const Poly3Params &params, double sigma_x2,
                                                DistortionFormula formula, Eigen::Index mc_draws,
                                                RngStream *rng) {
    if (!(sigma_x2 > 0.0))
        throw std::invalid_argument("bussgang_distortion_power: sigma_x2 must be > 0");

    DistortionPowerResult res;
    if (formula == DistortionFormula::AsPrinted) {
        const double t2 = std::norm(params.theta2);
        const double s2 = sigma_x2;
        res.sigma_w2 = 2.0 * t2 * (3.0 * s2 * s2 * s2 + 2.0 * s2 * s2 * s2 * s2);
        return res;
    }

    if (rng == nullptr)
        throw std::invalid_argument("bussgang_distortion_power: mc-oracle mode needs an RngStream");
    if (mc_draws < 1)
        throw std::invalid_argument("bussgang_distortion_power: mc_draws must be >= 1");
    if (mc_draws < 10'000)
        res.warning = "mc-oracle with fewer than 1e4 draws; estimate may be unreliable";

    const cplx alpha = bussgang_alpha(params, sigma_x2);
    const double scale = std::sqrt(sigma_x2);
    double mean = 0.0;
    double m2 = 0.0; // Welford accumulator for the CI
    for (Eigen::Index i = 0; i < mc_draws; ++i) {
        const cplx x = scale * rng->normal_complex();
        const cplx y = params.theta1 * x + params.theta2 * x * std::norm(x);
        const double v = std::norm(y - alpha * x);
        const double d = v - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (v - mean);
    }
    res.sigma_w2 = mean;
    if (mc_draws > 1) {
        const double var_of_mean = m2 / static_cast<double>(mc_draws - 1) / static_cast<double>(mc_draws);
        res.ci_halfwidth = 1.96 * std::sqrt(var_of_mean);
    }
    return res;
}

BussgangParams bussgang_decompose(const Poly3Params &params, double sigma_x2,
                                  DistortionFormula formula, Eigen::Index mc_draws,
                                  RngStream *rng) {
    BussgangParams out;
    out.alpha = bussgang_alpha(params, sigma_x2);
    out.sigma_w2 = bussgang_distortion_power(params, sigma_x2, formula, mc_draws, rng).sigma_w2;
    out.sigma_x2 = sigma_x2;
    return out;
}

// ---------------------------------------------------------------- GMP ---

Eigen::Index GmpStructure::basis_size() const {
    const Eigen::Index n_orders = (nonlinearity_order + 1) / 2;     // k in {1,3,...,K}
    const Eigen::Index n_cross_orders = n_orders - 1;               // k in {3,...,K}
    Eigen::Index size = n_orders * memory_depth;
    size += 2 * n_cross_orders * memory_depth * cross_lags;
    if (secondary_input)
        size += n_cross_orders * memory_depth;
    return size;
}

void validate(const GmpStructure &structure) {
    if (structure.nonlinearity_order < 1 || structure.nonlinearity_order % 2 == 0)
        throw std::invalid_argument("nonlinearity_order: must be odd and >= 1");
    if (structure.memory_depth < 1)
        throw std::invalid_argument("memory_depth: must be >= 1");
    if (structure.cross_lags < 0)
        throw std::invalid_argument("cross_lags: must be >= 0");
}

void validate(const GmpModel &model) {
    validate(model.structure);
    if (model.coefficients.size() != model.structure.basis_size())
        throw std::invalid_argument(
            "coefficients: expected " + std::to_string(model.structure.basis_size()) +
            " entries for this (K, L, M, secondary) structure, got " +
            std::to_string(model.coefficients.size()));
}

namespace {

inline cplx sample_at(const Eigen::VectorXcd &v, Eigen::Index i) {
    return (i >= 0 && i < v.size()) ? v[i] : cplx(0.0, 0.0);
}

inline double magsq_at(const Eigen::VectorXd &v, Eigen::Index i) {
    return (i >= 0 && i < v.size()) ? v[i] : 0.0;
}

// Envelope power |.|^(k-1) as an integer power of |.|^2.
inline double env_pow(double magsq, int k) {
    double p = 1.0;
    for (int e = 0; e < (k - 1) / 2; ++e)
        p *= magsq;
    return p;
}

// Visits every basis term in coefficient order.
// visit(term_index, signal_lag l, envelope_lag le, order k, use_secondary)
template <typename F> void for_each_term(const GmpStructure &st, F &&visit) {
    Eigen::Index idx = 0;
    for (int k = 1; k <= st.nonlinearity_order; k += 2)
        for (int l = 0; l < st.memory_depth; ++l)
            visit(idx++, l, l, k, false);
    for (int k = 3; k <= st.nonlinearity_order; k += 2)
        for (int l = 0; l < st.memory_depth; ++l)
            for (int m = 1; m <= st.cross_lags; ++m)
                visit(idx++, l, l + m, k, false); // lagging envelope
    for (int k = 3; k <= st.nonlinearity_order; k += 2)
        for (int l = 0; l < st.memory_depth; ++l)
            for (int m = 1; m <= st.cross_lags; ++m)
                visit(idx++, l, l - m, k, false); // leading envelope
    if (st.secondary_input)
        for (int k = 3; k <= st.nonlinearity_order; k += 2)
            for (int l = 0; l < st.memory_depth; ++l)
                visit(idx++, l, l, k, true);
}

} // namespace

Eigen::MatrixXcd gmp_basis_matrix(const GmpStructure &structure, const Eigen::VectorXcd &x,
                                  const Eigen::VectorXcd *secondary) {
    validate(structure);
    if (structure.secondary_input) {
        if (secondary == nullptr)
            throw std::invalid_argument("gmp basis: structure requires a secondary input sequence");
        if (secondary->size() != x.size())
            throw std::invalid_argument("gmp basis: secondary input length mismatch");
    }

    const Eigen::Index n = x.size();
    const Eigen::VectorXd magsq = x.array().abs2();
    Eigen::VectorXd magsq2;
    if (structure.secondary_input)
        magsq2 = secondary->array().abs2();

    Eigen::MatrixXcd phi(n, structure.basis_size());
    for_each_term(structure, [&](Eigen::Index col, int l, int le, int k, bool use_secondary) {
        const Eigen::VectorXd &env = use_secondary ? magsq2 : magsq;
        for (Eigen::Index i = 0; i < n; ++i)
            phi(i, col) = sample_at(x, i - l) * env_pow(magsq_at(env, i - le), k);
    });
    return phi;
}

ComplexSequence apply_gmp(const GmpModel &model, const ComplexSequence &x,
                          const ComplexSequence *secondary) {
    validate(model);
    const Eigen::VectorXcd *sec = nullptr;
    if (model.structure.secondary_input) {
        if (secondary == nullptr)
            throw std::invalid_argument("apply_gmp: model requires a secondary input sequence");
        if (secondary->samples.size() != x.samples.size())
            throw std::invalid_argument("apply_gmp: secondary input length mismatch");
        sec = &secondary->samples;
    }
    ComplexSequence y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.samples = gmp_basis_matrix(model.structure, x.samples, sec) * model.coefficients;
    return y;
}

GmpFitResult fit_gmp(const ComplexSequence &x, const ComplexSequence &y,
                     const GmpStructure &structure, std::optional<double> ridge,
                     const ComplexSequence *secondary) {
    validate(structure);
    if (x.samples.size() != y.samples.size())
        throw std::invalid_argument("fit_gmp: x and y length mismatch");
    const Eigen::Index b = structure.basis_size();
    if (x.samples.size() < 10 * b)
        throw std::invalid_argument("fit_gmp: need at least 10 x basis_size samples, basis size is " +
                                    std::to_string(b));
    if (ridge.has_value() && *ridge < 0.0)
        throw std::invalid_argument("fit_gmp: ridge must be >= 0");

    const Eigen::VectorXcd *sec =
        (structure.secondary_input && secondary) ? &secondary->samples : nullptr;
    const Eigen::MatrixXcd phi = gmp_basis_matrix(structure, x.samples, sec);
    const Eigen::Index n = phi.rows();

    // Column equilibration keeps the QR well-scaled across |x|^6-type columns;
    // the ridge rows are rescaled so the penalty stays ridge*||c||^2 exactly.
    Eigen::VectorXd col_norm(b);
    for (Eigen::Index j = 0; j < b; ++j) {
        const double s = phi.col(j).norm();
        col_norm[j] = (s > 0.0) ? s : 1.0;
    }
    const double gram_trace = phi.squaredNorm();
    const double ridge_used = ridge.value_or(1e-10 * gram_trace);

    Eigen::MatrixXcd a(n + b, b);
    a.topRows(n) = phi * col_norm.cwiseInverse().asDiagonal();
    a.bottomRows(b).setZero();
    const double sr = std::sqrt(ridge_used);
    for (Eigen::Index j = 0; j < b; ++j)
        a(n + j, j) = sr / col_norm[j];

    Eigen::VectorXcd rhs(n + b);
    rhs.head(n) = y.samples;
    rhs.tail(b).setZero();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
    if (ridge_used == 0.0 && qr.rank() < b)
        throw numerical_error("fit_gmp: basis is rank-deficient; supply ridge > 0");
    const Eigen::VectorXcd c_scaled = qr.solve(rhs);
    const Eigen::VectorXcd coeffs = col_norm.cwiseInverse().asDiagonal() * c_scaled;

    GmpFitResult result;
    result.model.structure = structure;
    result.model.coefficients = coeffs;

    const Eigen::VectorXcd residual = y.samples - phi * coeffs;
    const double ref = y.samples.squaredNorm();
    result.report.nmse_db =
        ref > 0.0 ? 10.0 * std::log10(residual.squaredNorm() / ref)
                  : -std::numeric_limits<double>::infinity();
    result.report.ridge_used = ridge_used;

    // Gram-spectrum condition estimate: cond(Phi) ~ sqrt(lmax/lmin)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi.adjoint() * phi, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    result.report.condition_estimate =
        lmin > 0.0 ? std::sqrt(lmax / lmin) : std::numeric_limits<double>::infinity();
    return result;
}

// ------------------------------------------------------ array statistics ---

static void check_hermitian_psd(const Eigen::MatrixXcd &c, const char *what) {
    if (c.rows() != c.cols())
        throw std::invalid_argument(std::string(what) + ": must be square");
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument(std::string(what) + ": not Hermitian within 1e-12");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument(std::string(what) + ": not positive semidefinite");
}

void validate(const ArrayStatModel &model) {
    const Eigen::Index m = model.alphas.size();
    if (model.c_ww.rows() != m || model.c_xx.rows() != m)
        throw std::invalid_argument("ArrayStatModel: covariance dimensions must match branch count");
    check_hermitian_psd(model.c_ww, "c_ww");
    check_hermitian_psd(model.c_xx, "c_xx");
}

ArrayStatModel build_array_stat_model(const std::vector<Poly3Params> &branch_params,
                                      const Eigen::MatrixXcd &c_xx, DistortionFormula formula,
                                      Eigen::Index mc_draws, RngStream *rng) {
    const Eigen::Index m = static_cast<Eigen::Index>(branch_params.size());
    if (c_xx.rows() != m || c_xx.cols() != m)
        throw std::invalid_argument("build_array_stat_model: branch count and c_xx dimension differ");
    check_hermitian_psd(c_xx, "c_xx");

    ArrayStatModel model;
    model.c_xx = c_xx;
    model.alphas.resize(m);
    model.c_ww = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sx2 = c_xx(i, i).real();
        model.alphas[i] = bussgang_alpha(branch_params[static_cast<std::size_t>(i)], sx2);
        model.c_ww(i, i) = bussgang_distortion_power(branch_params[static_cast<std::size_t>(i)],
                                                     sx2, formula, mc_draws, rng)
                               .sigma_w2;
    }
    return model;
}

Eigen::MatrixXcd apply_array_stat(const ArrayStatModel &model, const Eigen::MatrixXcd &x_block,
                                  RngStream &rng) {
    const Eigen::Index m = model.alphas.size();
    if (x_block.rows() != m)
        throw std::invalid_argument("apply_array_stat: block row count must equal branch count");

    // C_ww^(1/2) via eigen decomposition; tiny negative eigenvalues clamp to 0
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(model.c_ww);
    if (es.info() != Eigen::Success)
        throw numerical_error("apply_array_stat: eigen decomposition of c_ww failed");
    const Eigen::MatrixXcd root =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    Eigen::MatrixXcd y = model.alphas.asDiagonal() * x_block;
    Eigen::VectorXcd z(m);
    for (Eigen::Index t = 0; t < x_block.cols(); ++t) {
        for (Eigen::Index i = 0; i < m; ++i)
            z[i] = rng.normal_complex();
        y.col(t) += root * z;
    }
    return y;
}

} // namespace mmwsim
