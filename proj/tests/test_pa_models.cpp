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
#include "mmwsim/signal.hpp"

#include <doctest.h>

using namespace mmwsim;

TEST_CASE("apply_poly3 is the pointwise cubic law") {
    Poly3Params p{cplx(1.0, 0.0), cplx(-0.1, 0.0)};
    ComplexSequence x;
    x.samples.resize(3);
    x.samples << cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 2.0);
    const ComplexSequence y = apply_poly3(p, x);
    CHECK(std::abs(y.samples[0] - cplx(0.9, 0.0)) < 1e-15);
    CHECK(y.samples[1] == cplx(0.0, 0.0));
    // x = 2j: y = 2j - 0.1 * 2j * 4 = 1.2j
    CHECK(std::abs(y.samples[2] - cplx(0.0, 1.2)) < 1e-15);

    Poly3Params linear{cplx(0.3, -0.4), cplx(0.0, 0.0)};
    const ComplexSequence yl = apply_poly3(linear, x);
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(std::abs(yl.samples[i] - linear.theta1 * x.samples[i]) < 1e-15);
}

TEST_CASE("bussgang_alpha closed form and linear reduction") {
    CHECK(bussgang_alpha({cplx(1.0, 0.0), cplx(-0.1, 0.0)}, 1.0) == cplx(0.8, 0.0));
    for (double s2 : {0.1, 1.0, 7.0})
        CHECK(bussgang_alpha({cplx(0.5, 0.5), cplx(0.0, 0.0)}, s2) == cplx(0.5, 0.5));
    CHECK_THROWS_AS(bussgang_alpha({}, 0.0), std::invalid_argument);
}

TEST_CASE("bussgang_alpha matches the sample-average oracle") {
    const Poly3Params p{cplx(0.95, 0.1), cplx(-0.08, 0.03)};
    const double s2 = 1.3;
    const cplx alpha = bussgang_alpha(p, s2);
    RngStream rng(21, 0);
    cplx acc = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        const cplx x = std::sqrt(s2) * rng.normal_complex();
        const cplx y = p.theta1 * x + p.theta2 * x * std::norm(x);
        acc += y * std::conj(x);
    }
    const cplx alpha_hat = acc / (static_cast<double>(n) * s2);
    CHECK(std::abs(alpha_hat - alpha) / std::abs(alpha) < 0.01);
}

TEST_CASE("distortion power modes: linear device has none") {
    const Poly3Params p{cplx(2.0, 0.0), cplx(0.0, 0.0)};
    CHECK(bussgang_distortion_power(p, 1.0, DistortionFormula::AsPrinted).sigma_w2 == 0.0);
    RngStream rng(22, 0);
    CHECK(bussgang_distortion_power(p, 1.0, DistortionFormula::McOracle, 20000, &rng).sigma_w2 <
          1e-12);
}

TEST_CASE("distortion power as-printed evaluates the printed expression") {
    const Poly3Params p{cplx(1.0, 0.0), cplx(0.1, 0.0)};
    const auto r = bussgang_distortion_power(p, 1.0, DistortionFormula::AsPrinted);
    CHECK(r.sigma_w2 == doctest::Approx(0.1).epsilon(1e-12)); // 2*0.01*(3+2)
    CHECK(r.ci_halfwidth == 0.0);
    CHECK(r.warning.empty());
}

TEST_CASE("distortion power oracle converges to the Gaussian-moment value") {
    // independent oracle: for y = t1 x + t2 x|x|^2 with x ~ CN(0, s2),
    // E|y - alpha x|^2 = 2 |t2|^2 s2^3 (sixth-moment identity)
    const Poly3Params p{cplx(1.0, 0.0), cplx(0.1, 0.0)};
    RngStream rng(23, 0);
    const auto mc = bussgang_distortion_power(p, 1.0, DistortionFormula::McOracle, 2'000'000, &rng);
    CHECK(mc.sigma_w2 == doctest::Approx(0.02).epsilon(0.03));
    CHECK(mc.ci_halfwidth > 0.0);
    CHECK(mc.ci_halfwidth < 0.001);
    // the printed expression sits a factor (3 + 2 s2)/ s2-free = 5 above it here
    const auto printed = bussgang_distortion_power(p, 1.0, DistortionFormula::AsPrinted);
    CHECK(printed.sigma_w2 / mc.sigma_w2 == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("bussgang_decompose bundles the operating point") {
    const Poly3Params p{cplx(1.0, 0.0), cplx(-0.1, 0.0)};
    const BussgangParams b = bussgang_decompose(p, 1.0);
    CHECK(b.alpha == cplx(0.8, 0.0));
    CHECK(b.sigma_x2 == 1.0);
    CHECK(b.sigma_w2 == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("distortion power oracle warns on tiny draw counts") {
    RngStream rng(24, 0);
    const auto r = bussgang_distortion_power({cplx(1.0, 0.0), cplx(0.1, 0.0)}, 1.0,
                                             DistortionFormula::McOracle, 500, &rng);
    CHECK(!r.warning.empty());
    CHECK_THROWS_AS(bussgang_distortion_power({}, 1.0, DistortionFormula::McOracle, 100, nullptr),
                    std::invalid_argument);
}

TEST_CASE("as-printed distortion growth stays between the term scalings") {
    RngStream rng(25, 0);
    for (int rep = 0; rep < 10; ++rep) {
        const Poly3Params p{cplx(1.0, 0.0), cplx(0.2 * rng.normal(), 0.2 * rng.normal())};
        if (std::abs(p.theta2) < 1e-6)
            continue;
        const double s2 = 0.2 + rng.uniform() * 2.0;
        const double lo = bussgang_distortion_power(p, s2, DistortionFormula::AsPrinted).sigma_w2;
        const double hi =
            bussgang_distortion_power(p, 2.0 * s2, DistortionFormula::AsPrinted).sigma_w2;
        CHECK(hi / lo >= 8.0);  // sigma^6 term scales x8
        CHECK(hi / lo <= 16.0); // sigma^8 term scales x16
    }
}

TEST_CASE("bussgang orthogonality: distortion is uncorrelated with the input") {
    const Poly3Params p{cplx(1.0, 0.0), cplx(-0.12, 0.05)};
    const double s2 = 0.8;
    const cplx alpha = bussgang_alpha(p, s2);
    RngStream rng(26, 0);
    cplx cross = 0.0;
    double wpow = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        const cplx x = std::sqrt(s2) * rng.normal_complex();
        const cplx w = p.theta2 * x * std::norm(x) + (p.theta1 - alpha) * x;
        cross += w * std::conj(x);
        wpow += std::norm(w);
    }
    const double corr =
        std::abs(cross / static_cast<double>(n)) / (std::sqrt(s2) * std::sqrt(wpow / n));
    CHECK(corr < 0.01);
}

// ------------------------------------------------------------------ GMP ---

namespace {

GmpModel random_model(const GmpStructure &st, std::uint64_t seed) {
    GmpModel m;
    m.structure = st;
    RngStream rng(seed, 0);
    m.coefficients.resize(st.basis_size());
    for (Eigen::Index i = 0; i < m.coefficients.size(); ++i)
        m.coefficients[i] = 0.05 * rng.normal_complex();
    m.coefficients[0] = cplx(1.0, 0.0);
    return m;
}

} // namespace

TEST_CASE("gmp basis size matches the structure") {
    CHECK(GmpStructure{7, 5, 2, false}.basis_size() == 80);
    CHECK(GmpStructure{7, 5, 2, true}.basis_size() == 95);
    CHECK(GmpStructure{1, 3, 0, false}.basis_size() == 3);
    CHECK_THROWS_AS(validate(GmpStructure{4, 2, 1, false}), std::invalid_argument);
    CHECK_THROWS_AS(validate(GmpStructure{3, 0, 1, false}), std::invalid_argument);
}

TEST_CASE("apply_gmp pure linear tap scales the input") {
    GmpModel m;
    m.structure = GmpStructure{1, 1, 0, false};
    m.coefficients.resize(1);
    m.coefficients[0] = cplx(0.0, 2.0);
    RngStream rng(30, 0);
    const ComplexSequence x = gaussian_complex(rng, 256, 1.0);
    const ComplexSequence y = apply_gmp(m, x);
    CHECK((y.samples - m.coefficients[0] * x.samples).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("apply_gmp zero coefficients give zero output") {
    GmpModel m;
    m.structure = GmpStructure{5, 3, 1, false};
    m.coefficients = Eigen::VectorXcd::Zero(m.structure.basis_size());
    RngStream rng(31, 0);
    const ComplexSequence x = gaussian_complex(rng, 128, 1.0);
    CHECK(apply_gmp(m, x).samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_gmp then fit_gmp recovers the coefficients") {
    const GmpStructure st{7, 5, 2, false};
    const GmpModel truth = random_model(st, 32);
    RngStream rng(33, 0);
    const ComplexSequence x = gaussian_complex(rng, 1 << 13, 1.0);
    const ComplexSequence y = apply_gmp(truth, x);
    const GmpFitResult fit = fit_gmp(x, y, st, 0.0);
    const double rel = (fit.model.coefficients - truth.coefficients).norm() /
                       truth.coefficients.norm();
    CHECK(rel < 1e-6);
    CHECK(fit.report.nmse_db < -120.0);
}

TEST_CASE("fit_gmp on the identity device finds the unit tap") {
    RngStream rng(34, 0);
    const ComplexSequence x = gaussian_complex(rng, 4096, 1.0);
    const GmpFitResult fit = fit_gmp(x, x, GmpStructure{5, 2, 1, false}, 0.0);
    CHECK(std::abs(fit.model.coefficients[0] - cplx(1.0, 0.0)) < 1e-8);
    for (Eigen::Index i = 1; i < fit.model.coefficients.size(); ++i)
        CHECK(std::abs(fit.model.coefficients[i]) < 1e-8);
}

TEST_CASE("fit_gmp absorbs a poly3 device (model containment)") {
    RngStream rng(35, 0);
    const ComplexSequence x = gaussian_complex(rng, 8192, 1.0);
    const ComplexSequence y = apply_poly3({cplx(1.0, 0.0), cplx(-0.15, 0.08)}, x);
    const GmpFitResult fit = fit_gmp(x, y, GmpStructure{3, 2, 1, false});
    CHECK(fit.report.nmse_db < -100.0);
}

TEST_CASE("fit_gmp flags a rank-deficient basis when unregularized") {
    // constant-envelope input makes |x[n-l]|^2 columns collinear with the
    // linear taps
    RngStream rng(36, 0);
    ComplexSequence x;
    x.samples.resize(2048);
    for (Eigen::Index i = 0; i < x.samples.size(); ++i)
        x.samples[i] = std::polar(1.0, 2.0 * pi * rng.uniform());
    const ComplexSequence y = x;
    CHECK_THROWS_WITH_AS(fit_gmp(x, y, GmpStructure{3, 2, 0, false}, 0.0),
                         doctest::Contains("ridge"), numerical_error);
    // the default ridge handles the same data
    const GmpFitResult fit = fit_gmp(x, y, GmpStructure{3, 2, 0, false});
    CHECK(fit.report.nmse_db < -100.0);
}

TEST_CASE("fit_gmp enforces the sample-count precondition") {
    RngStream rng(37, 0);
    const ComplexSequence x = gaussian_complex(rng, 100, 1.0);
    CHECK_THROWS_AS(fit_gmp(x, x, GmpStructure{7, 5, 2, false}), std::invalid_argument);
}

TEST_CASE("gmp output is linear in the coefficients") {
    const GmpStructure st{5, 3, 1, false};
    GmpModel a = random_model(st, 38);
    GmpModel b = random_model(st, 39);
    GmpModel sum;
    sum.structure = st;
    sum.coefficients = a.coefficients + b.coefficients;
    RngStream rng(40, 0);
    const ComplexSequence x = gaussian_complex(rng, 512, 1.0);
    const Eigen::VectorXcd lhs = apply_gmp(sum, x).samples;
    const Eigen::VectorXcd rhs = apply_gmp(a, x).samples + apply_gmp(b, x).samples;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fitted coefficients sit at a residual minimum") {
    const GmpStructure st{3, 2, 1, false};
    const GmpModel truth = random_model(st, 41);
    RngStream rng(42, 0);
    const ComplexSequence x = gaussian_complex(rng, 2048, 1.0);
    ComplexSequence y = apply_gmp(truth, x);
    RngStream nrng(43, 0);
    y.samples += gaussian_complex(nrng, 2048, 1e-3).samples;

    const GmpFitResult fit = fit_gmp(x, y, st);
    const Eigen::MatrixXcd phi = gmp_basis_matrix(st, x.samples);
    auto objective = [&](const Eigen::VectorXcd &c) {
        return (y.samples - phi * c).squaredNorm() + fit.report.ridge_used * c.squaredNorm();
    };
    const double at_fit = objective(fit.model.coefficients);
    RngStream prng(44, 0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXcd c = fit.model.coefficients;
        const Eigen::Index j = static_cast<Eigen::Index>(prng.below(
            static_cast<std::uint64_t>(c.size())));
        c[j] *= (prng.bit() ? 1.0 + 1e-3 : 1.0 - 1e-3);
        CHECK(objective(c) >= at_fit * (1.0 - 1e-12));
    }
}

TEST_CASE("secondary-envelope terms identify a coupled device") {
    const GmpStructure st{5, 2, 1, true};
    const GmpModel truth = random_model(st, 45);
    RngStream rng(46, 0), rng2(47, 0);
    const ComplexSequence x = gaussian_complex(rng, 4096, 1.0);
    const ComplexSequence x2 = gaussian_complex(rng2, 4096, 0.5);
    const ComplexSequence y = apply_gmp(truth, x, &x2);
    const GmpFitResult fit = fit_gmp(x, y, st, 0.0, &x2);
    CHECK(fit.report.nmse_db < -120.0);
    CHECK_THROWS_AS(apply_gmp(truth, x, nullptr), std::invalid_argument);
}

// ---------------------------------------------------------- array model ---

TEST_CASE("build_array_stat_model linear array has identity-like statistics") {
    const std::vector<Poly3Params> branches{{cplx(0.9, 0.1), cplx(0.0, 0.0)},
                                            {cplx(1.1, -0.2), cplx(0.0, 0.0)}};
    const Eigen::MatrixXcd c_xx = Eigen::MatrixXcd::Identity(2, 2);
    const ArrayStatModel m = build_array_stat_model(branches, c_xx);
    CHECK(m.alphas[0] == branches[0].theta1);
    CHECK(m.alphas[1] == branches[1].theta1);
    CHECK(m.c_ww.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-branch model reduces to the scalar operations") {
    const Poly3Params p{cplx(1.0, 0.0), cplx(-0.1, 0.02)};
    Eigen::MatrixXcd c_xx(1, 1);
    c_xx(0, 0) = 1.7;
    const ArrayStatModel m = build_array_stat_model({p}, c_xx);
    CHECK(m.alphas[0] == bussgang_alpha(p, 1.7));
    CHECK(m.c_ww(0, 0).real() ==
          bussgang_distortion_power(p, 1.7, DistortionFormula::AsPrinted).sigma_w2);
}

TEST_CASE("identical branches with equal powers get equal distortion entries") {
    const Poly3Params p{cplx(1.0, 0.0), cplx(0.07, -0.04)};
    const Eigen::MatrixXcd c_xx = 1.2 * Eigen::MatrixXcd::Identity(2, 2);
    RngStream rng(50, 0);
    const ArrayStatModel m =
        build_array_stat_model({p, p}, c_xx, DistortionFormula::McOracle, 200000, &rng);
    CHECK(m.c_ww(0, 0).real() == doctest::Approx(m.c_ww(1, 1).real()).epsilon(0.05));
    // mode choice never leaks into the alphas
    const ArrayStatModel printed = build_array_stat_model({p, p}, c_xx);
    CHECK(m.alphas == printed.alphas);
}

TEST_CASE("build_array_stat_model rejects a non-PSD covariance") {
    Eigen::MatrixXcd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3 and -1
    CHECK_THROWS_AS(build_array_stat_model({{}, {}}, bad), std::invalid_argument);
    Eigen::MatrixXcd nonherm(2, 2);
    nonherm << 1.0, cplx(0.1, 0.1), cplx(0.1, 0.3), 1.0;
    CHECK_THROWS_AS(build_array_stat_model({{}, {}}, nonherm), std::invalid_argument);
}

TEST_CASE("apply_array_stat without distortion is the diagonal map") {
    ArrayStatModel m;
    m.alphas.resize(2);
    m.alphas << cplx(0.5, 0.5), cplx(2.0, 0.0);
    m.c_ww = Eigen::MatrixXcd::Zero(2, 2);
    m.c_xx = Eigen::MatrixXcd::Identity(2, 2);
    RngStream rng(51, 0);
    Eigen::MatrixXcd x(2, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i / 8, i % 8) = rng.normal_complex();
    const Eigen::MatrixXcd y = apply_array_stat(m, x, rng);
    CHECK((y - m.alphas.asDiagonal() * x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_array_stat distortion matches the requested covariance") {
    ArrayStatModel m;
    m.alphas = Eigen::VectorXcd::Ones(2);
    m.c_ww.resize(2, 2);
    m.c_ww << 0.5, cplx(0.1, 0.05), cplx(0.1, -0.05), 0.3;
    m.c_xx = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::Index t = 400000;
    const Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(2, t);
    RngStream rng(52, 0);
    const Eigen::MatrixXcd w = apply_array_stat(m, x, rng);
    const Eigen::MatrixXcd sample_cov = (w * w.adjoint()) / static_cast<double>(t);
    CHECK((sample_cov - m.c_ww).norm() / m.c_ww.norm() < 0.02);
}
