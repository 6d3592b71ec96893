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

#include "mmwsim/antenna.hpp"
#include "mmwsim/rng.hpp"

#include <doctest.h>

using namespace mmwsim;

TEST_CASE("steering_weights broadside on a planar array is all ones") {
    const ArrayGeometry g = lattice_geometry(2, 4, 0.5, 0.5);
    const BeamWeights w = steering_weights(g, 0.0, 0.0);
    for (Eigen::Index m = 0; m < w.weights.size(); ++m)
        CHECK(std::abs(w.weights[m] - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering_weights line array gives the closed-form progressive phase") {
    const ArrayGeometry g = lattice_geometry(1, 4, 0.5, 0.5);
    const BeamWeights w = steering_weights(g, 30.0 * pi / 180.0, 0.0);
    // adjacent-element phase step: -pi sin(30 deg) = -pi/2
    for (Eigen::Index m = 1; m < 4; ++m) {
        const double step = std::arg(w.weights[m] * std::conj(w.weights[m - 1]));
        CHECK(step == doctest::Approx(-pi / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("steering aligns an aperiodic layout coherently") {
    RngStream rng(60, 0);
    ArrayGeometry g;
    g.positions.resize(9, 3);
    for (Eigen::Index i = 0; i < g.positions.size(); ++i)
        g.positions(i / 3, i % 3) = 2.0 * rng.uniform() - 1.0;
    const double t0 = 0.4, p0 = 1.1;
    const BeamWeights w = steering_weights(g, t0, p0);
    const Eigen::Vector3d u{std::sin(t0) * std::cos(p0), std::sin(t0) * std::sin(p0), std::cos(t0)};
    cplx af = 0.0;
    for (Eigen::Index m = 0; m < 9; ++m)
        af += w.weights[m] * std::polar(1.0, 2.0 * pi * g.positions.row(m).dot(u));
    CHECK(std::abs(af) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("quantize_phase snaps onto the state grid") {
    BeamWeights w;
    w.weights.resize(4);
    w.weights << std::polar(1.0, 0.3), std::polar(2.0, 1.9), std::polar(0.5, -2.7),
        std::polar(1.0, 3.0);
    const BeamWeights q1 = quantize_phase(w, 1);
    for (Eigen::Index m = 0; m < 4; ++m) {
        const double ph = std::arg(q1.weights[m]);
        const bool on_state = std::abs(ph) < 1e-12 || std::abs(std::abs(ph) - pi) < 1e-12;
        CHECK(on_state);
        CHECK(std::abs(q1.weights[m]) == doctest::Approx(std::abs(w.weights[m])));
    }
    const BeamWeights q2 = quantize_phase(w, 2);
    for (Eigen::Index m = 0; m < 4; ++m) {
        const double ph = std::arg(q2.weights[m]);
        const double steps = ph / (pi / 2.0);
        CHECK(std::abs(steps - std::round(steps)) < 1e-12);
    }
}

TEST_CASE("quantize_phase is idempotent and keeps grid points fixed") {
    BeamWeights w;
    w.weights.resize(3);
    w.weights << std::polar(1.0, 0.0), std::polar(1.0, pi / 2.0), std::polar(1.0, pi);
    const BeamWeights q = quantize_phase(w, 2);
    CHECK((q.weights - w.weights).cwiseAbs().maxCoeff() < 1e-12);
    RngStream rng(61, 0);
    BeamWeights r;
    r.weights.resize(16);
    for (Eigen::Index m = 0; m < 16; ++m)
        r.weights[m] = std::polar(1.0, 2.0 * pi * rng.uniform());
    for (int bits : {1, 2, 3}) {
        const BeamWeights once = quantize_phase(r, bits);
        const BeamWeights twice = quantize_phase(once, bits);
        CHECK((twice.weights - once.weights).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(quantize_phase(w, 0), std::invalid_argument);
}

TEST_CASE("array_factor of a single element is flat at 0 dB") {
    ArrayGeometry g;
    g.positions = Eigen::MatrixXd::Zero(1, 3);
    BeamWeights w;
    w.weights = Eigen::VectorXcd::Ones(1);
    const FarFieldPattern p = array_factor(g, w, sphere_grid(10.0), PatternCoverage::FullSphere);
    CHECK(p.gain_db.maxCoeff() < 1e-9);
    CHECK(p.gain_db.minCoeff() > -1e-9);
}

TEST_CASE("uniform broadside peak is the coherent sum") {
    for (int n : {4, 8}) {
        const ArrayGeometry g = lattice_geometry(1, n, 0.5, 0.5);
        const FarFieldPattern p = array_factor(g, steering_weights(g, 0.0, 0.0), sphere_grid(2.0),
                                               PatternCoverage::FullSphere);
        CHECK(p.peak_gain_db == doctest::Approx(20.0 * std::log10(n)).epsilon(1e-6));
    }
}

TEST_CASE("eight-element line array first sidelobe level") {
    const ArrayGeometry g = lattice_geometry(1, 8, 0.5, 0.5);
    const FarFieldPattern p = array_factor(g, steering_weights(g, 0.0, 0.0),
                                           cut_grid(0.0, 0.05), PatternCoverage::Cut);
    const PatternCut cut = extract_cut(p, 0.0);
    double sidelobe = -100.0;
    bool past_null = false;
    for (Eigen::Index i = 0; i < cut.angle_deg.size(); ++i) {
        if (cut.angle_deg[i] < 5.0)
            continue;
        if (!past_null) {
            past_null = cut.rel_db[i] < -20.0;
            continue;
        }
        if (cut.angle_deg[i] > 35.0)
            break;
        sidelobe = std::max(sidelobe, cut.rel_db[i]);
    }
    CHECK(sidelobe == doctest::Approx(-12.8).epsilon(0.02));
}

TEST_CASE("directivity of reference patterns") {
    // isotropic
    ArrayGeometry g;
    g.positions = Eigen::MatrixXd::Zero(1, 3);
    BeamWeights w;
    w.weights = Eigen::VectorXcd::Ones(1);
    const FarFieldPattern iso = array_factor(g, w, sphere_grid(2.0), PatternCoverage::FullSphere);
    CHECK(std::abs(directivity(iso).dbi) < 1e-3);

    // cos-power q = 1: D = 2(2q+1) = 6 -> 7.78 dBi
    ElementPattern cosq;
    cosq.kind = ElementKind::CosPower;
    cosq.q_exponent = 1.0;
    cosq.peak_gain_dbi = 10.0 * std::log10(6.0);
    const FarFieldPattern hemi = total_pattern(
        array_factor(g, w, hemisphere_grid(0.5), PatternCoverage::Hemisphere), cosq);
    CHECK(directivity(hemi).dbi == doctest::Approx(7.7815).epsilon(0.002));

    // 4-element half-wave line of isotropic elements ~ 6 dBi
    const ArrayGeometry g4 = lattice_geometry(1, 4, 0.5, 0.5);
    const FarFieldPattern p4 = array_factor(g4, steering_weights(g4, 0.0, 0.0), sphere_grid(1.0),
                                            PatternCoverage::FullSphere);
    CHECK(directivity(p4).dbi == doctest::Approx(6.02).epsilon(0.02));
}

TEST_CASE("directivity warns on a too-coarse grid") {
    const ArrayGeometry g = lattice_geometry(1, 8, 0.5, 0.5);
    const FarFieldPattern coarse = array_factor(g, steering_weights(g, 0.0, 0.0),
                                                sphere_grid(15.0), PatternCoverage::FullSphere);
    CHECK(directivity(coarse).grid_warning);
    const FarFieldPattern fine = array_factor(g, steering_weights(g, 0.0, 0.0), sphere_grid(1.0),
                                              PatternCoverage::FullSphere);
    CHECK(!directivity(fine).grid_warning);
    const FarFieldPattern cut = array_factor(g, steering_weights(g, 0.0, 0.0), cut_grid(0.0),
                                             PatternCoverage::Cut);
    CHECK_THROWS_AS(directivity(cut), std::invalid_argument);
}

TEST_CASE("grating_lobe_limit piecewise closed form") {
    CHECK(grating_lobe_limit(0.5) == 90.0);
    CHECK(grating_lobe_limit(0.3) == 90.0);
    CHECK(grating_lobe_limit(1.0) == 0.0);
    CHECK(grating_lobe_limit(1.4) == 0.0);
    CHECK(std::abs(grating_lobe_limit(0.7) - 25.38) <= 0.01);
    CHECK_THROWS_AS(grating_lobe_limit(0.0), std::invalid_argument);
}

TEST_CASE("steered peak lands on the steering direction") {
    const ArrayGeometry g = lattice_geometry(4, 4, 0.5, 0.5);
    for (double deg : {0.0, 20.0, 40.0}) {
        const double t0 = deg * pi / 180.0;
        const FarFieldPattern p = array_factor(g, steering_weights(g, t0, 0.0),
                                               hemisphere_grid(1.0), PatternCoverage::Hemisphere);
        CHECK(std::abs(p.peak_theta_rad - t0) <= 1.0 * pi / 180.0 + 1e-12);
        if (deg > 0.0)
            CHECK(std::abs(std::remainder(p.peak_phi_rad, 2.0 * pi)) <= 1.0 * pi / 180.0 + 1e-12);
    }
}

TEST_CASE("sphere power is invariant under phase-only weight changes") {
    // holds when every inter-element distance is a half-wave multiple
    // (mutual sinc terms vanish), i.e. on half-wave line arrays
    const ArrayGeometry g = lattice_geometry(1, 8, 0.5, 0.5);
    RngStream rng(62, 0);
    const FarFieldPattern ref = array_factor(g, steering_weights(g, 0.0, 0.0), sphere_grid(2.0),
                                             PatternCoverage::FullSphere);
    const double p_ref = integrated_intensity(ref);
    for (int rep = 0; rep < 3; ++rep) {
        BeamWeights w;
        w.weights.resize(8);
        for (Eigen::Index m = 0; m < 8; ++m)
            w.weights[m] = std::polar(1.0, 2.0 * pi * rng.uniform());
        const double p = integrated_intensity(
            array_factor(g, w, sphere_grid(2.0), PatternCoverage::FullSphere));
        CHECK(std::abs(10.0 * std::log10(p / p_ref)) < 0.1);
    }
}

TEST_CASE("doubling the element count follows the 6 dB / 3 dB law") {
    const ArrayGeometry g4 = lattice_geometry(1, 4, 0.5, 0.5);
    const ArrayGeometry g8 = lattice_geometry(1, 8, 0.5, 0.5);
    const FarFieldPattern p4 = array_factor(g4, steering_weights(g4, 0.0, 0.0), sphere_grid(1.0),
                                            PatternCoverage::FullSphere);
    const FarFieldPattern p8 = array_factor(g8, steering_weights(g8, 0.0, 0.0), sphere_grid(1.0),
                                            PatternCoverage::FullSphere);
    CHECK(p8.peak_gain_db - p4.peak_gain_db ==
          doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
    CHECK(directivity(p8).dbi - directivity(p4).dbi == doctest::Approx(3.01).epsilon(0.02));
}

TEST_CASE("cos_power_element_from_gain matches its own directivity") {
    for (double gain : {6.0, 9.0, 12.0}) {
        const ElementPattern e = cos_power_element_from_gain(gain);
        validate(e);
        const double d = 10.0 * std::log10(2.0 * (2.0 * e.q_exponent + 1.0));
        CHECK(std::abs(d - gain) < 0.1);
    }
    CHECK(cos_power_element_from_gain(9.0).q_exponent == doctest::Approx(1.4858).epsilon(1e-3));
}

TEST_CASE("transmitarray quantization loss closed form") {
    CHECK(phase_quantization_loss_db(1) == doctest::Approx(3.92).epsilon(0.002));
    CHECK(phase_quantization_loss_db(2) == doctest::Approx(0.912).epsilon(0.002));
    CHECK(phase_quantization_loss_db(3) == doctest::Approx(0.224).epsilon(0.01));
}

TEST_CASE("transmitarray budgets land near the reference designs") {
    struct Row {
        TransmitarrayConfig config;
        double expected_dbi;
    };
    const Row rows[] = {
        {{20, 20, 5.0, 60.0, 10.0, 1, 26.0}, 23.7},
        {{14, 14, 5.0, 45.0, 10.0, 2, 26.0}, 23.4},
        {{40, 40, 5.0, 134.0, 10.0, 1, 26.0}, 30.5},
        {{40, 44, 5.0, 134.0, 10.0, 2, 26.0}, 33.0},
        {{40, 44, 5.0, 134.0, 10.0, 3, 26.0}, 33.5},
    };
    for (const Row &r : rows) {
        const TransmitarrayBudget b = transmitarray_budget(r.config);
        CHECK(std::abs(b.net_gain_dbi - r.expected_dbi) < 1.5);
        CHECK(b.spillover_loss_db > 0.0);
        CHECK(b.taper_loss_db > 0.0);
    }
}

TEST_CASE("net transmitarray gain is non-decreasing in phase bits") {
    double prev = -1e9;
    for (int bits : {1, 2, 3}) {
        const TransmitarrayBudget b = transmitarray_budget({40, 44, 5.0, 134.0, 10.0, bits, 26.0});
        CHECK(b.net_gain_dbi >= prev);
        prev = b.net_gain_dbi;
    }
}

TEST_CASE("transmitarray validation rejects bad dimensions") {
    TransmitarrayConfig c{20, 20, 5.0, -1.0, 10.0, 1, 26.0};
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("focal_distance"), std::invalid_argument);
    c = {20, 20, 5.0, 60.0, 10.0, 4, 26.0};
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("mask_compliance boundary behaviour") {
    // flat 0 dB pattern against a 0 dB mask: margin exactly zero, passes
    ArrayGeometry g;
    g.positions = Eigen::MatrixXd::Zero(1, 3);
    BeamWeights w;
    w.weights = Eigen::VectorXcd::Ones(1);
    const FarFieldPattern p = array_factor(g, w, cut_grid(0.0, 1.0), PatternCoverage::Cut);
    RadiationMask mask;
    mask.points = {{0.0, 0.0}, {90.0, 0.0}};
    const MaskReport r = mask_compliance(p, mask, 0.0);
    CHECK(r.pass);
    CHECK(r.worst_margin_db == doctest::Approx(0.0).epsilon(1e-12));

    RadiationMask below;
    below.points = {{0.0, -1.0}, {90.0, -1.0}};
    CHECK(!mask_compliance(p, below, 0.0).pass);

    RadiationMask bad;
    bad.points = {{10.0, 0.0}, {10.0, -5.0}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    RadiationMask outside;
    outside.points = {{120.0, 0.0}, {150.0, 0.0}};
    CHECK_THROWS_AS(mask_compliance(p, outside, 0.0), std::invalid_argument);
}

TEST_CASE("finer phase quantization widens the wide-angle mask margin") {
    RadiationMask mask;
    mask.points = {{0.0, 40.0}, {29.0, 40.0}, {30.0, -10.0}, {90.0, -10.0}};
    double prev = -1e9;
    for (int bits : {1, 2, 3}) {
        const TransmitarrayConfig c{40, 40, 5.0, 134.0, 10.0, bits, 26.0};
        const FarFieldPattern p = transmitarray_pattern(c, cut_grid(0.0, 0.2),
                                                        PatternCoverage::Cut);
        const MaskReport r = mask_compliance(p, mask, 0.0);
        CHECK(r.worst_margin_db >= prev);
        prev = r.worst_margin_db;
    }
    CHECK(prev > 0.0); // the 3-bit design clears this mask
}

TEST_CASE("geometry validation") {
    ArrayGeometry g = lattice_geometry(2, 3, 0.5, 0.7);
    CHECK(g.positions.rows() == 6);
    validate(g);
    g.lattice->rows = 4; // now inconsistent with the positions
    CHECK_THROWS_AS(validate(g), std::invalid_argument);
    ArrayGeometry empty;
    empty.positions.resize(0, 3);
    CHECK_THROWS_AS(validate(empty), std::invalid_argument);
    CHECK_THROWS_AS(lattice_geometry(0, 3, 0.5, 0.5), std::invalid_argument);
}
