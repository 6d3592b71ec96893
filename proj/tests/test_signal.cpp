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

#include "mmwsim/signal.hpp"

#include <doctest.h>

using namespace mmwsim;

TEST_CASE("gaussian_complex degenerate variance gives exact zeros") {
    RngStream rng(1, 0);
    const ComplexSequence s = gaussian_complex(rng, 5, 0.0);
    REQUIRE(s.samples.size() == 5);
    for (Eigen::Index i = 0; i < 5; ++i)
        CHECK(s.samples[i] == cplx(0.0, 0.0));
}

TEST_CASE("gaussian_complex sample variance converges") {
    RngStream rng(2, 0);
    const ComplexSequence s = gaussian_complex(rng, 1'000'000, 1.0);
    const double var = s.samples.squaredNorm() / static_cast<double>(s.samples.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
    // circular symmetry: each part carries half the power
    double re2 = 0.0, im2 = 0.0;
    for (Eigen::Index i = 0; i < s.samples.size(); ++i) {
        re2 += s.samples[i].real() * s.samples[i].real();
        im2 += s.samples[i].imag() * s.samples[i].imag();
    }
    CHECK(re2 / im2 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gaussian draws are reproducible per (seed, stream)") {
    RngStream a(99, 7), b(99, 7), c(99, 8);
    const ComplexSequence sa = gaussian_complex(a, 64, 1.0);
    const ComplexSequence sb = gaussian_complex(b, 64, 1.0);
    const ComplexSequence sc = gaussian_complex(c, 64, 1.0);
    CHECK(sa.samples == sb.samples); // bit-identical
    CHECK(sa.samples != sc.samples);
}

TEST_CASE("gaussian_complex rejects negative variance") {
    RngStream rng(1, 0);
    CHECK_THROWS_AS(gaussian_complex(rng, 4, -1.0), std::invalid_argument);
}

TEST_CASE("welch_psd white noise sits at the analytic level") {
    RngStream rng(3, 0);
    const ComplexSequence wn = gaussian_complex(rng, 1 << 18, 1.0, 1.0);
    const SpectrumEstimate est = welch_psd(wn, 256, 0.5, Window::Hann);
    REQUIRE(est.freqs_hz.size() == 256);
    for (Eigen::Index i = 1; i < est.freqs_hz.size(); ++i)
        CHECK(est.freqs_hz[i] > est.freqs_hz[i - 1]);
    for (Eigen::Index i = 0; i < est.psd_db.size(); ++i)
        CHECK(std::abs(est.psd_db[i]) < 0.5); // 0 dB/Hz for variance 1 at fs = 1
}

TEST_CASE("welch_psd finds a pure tone at its frequency") {
    const double fs = 1000.0, f0 = 125.0;
    ComplexSequence x;
    x.sample_rate_hz = fs;
    x.samples.resize(4096);
    for (Eigen::Index n = 0; n < x.samples.size(); ++n)
        x.samples[n] = std::polar(1.0, 2.0 * pi * f0 * static_cast<double>(n) / fs);
    const SpectrumEstimate est = welch_psd(x, 512, 0.5, Window::Hann);
    Eigen::Index peak = 0;
    est.psd_db.maxCoeff(&peak);
    CHECK(est.freqs_hz[peak] == doctest::Approx(f0).epsilon(0.01));
}

TEST_CASE("welch_psd of silence floors at -infinity") {
    ComplexSequence x;
    x.sample_rate_hz = 1.0;
    x.samples = Eigen::VectorXcd::Zero(1024);
    const SpectrumEstimate est = welch_psd(x, 128);
    CHECK(est.psd_db.minCoeff() == -std::numeric_limits<double>::infinity());
    CHECK(est.psd_db.maxCoeff() == -std::numeric_limits<double>::infinity());
}

TEST_CASE("welch_psd rejects bad segmentation") {
    RngStream rng(4, 0);
    const ComplexSequence x = gaussian_complex(rng, 100, 1.0);
    CHECK_THROWS_AS(welch_psd(x, 128), std::invalid_argument);
    CHECK_THROWS_AS(welch_psd(x, 4), std::invalid_argument);
    CHECK_THROWS_AS(welch_psd(x, 64, 1.0), std::invalid_argument);
}

TEST_CASE("welch_psd integrates back to the time-domain power") {
    RngStream rng(5, 0);
    const double fs = 48000.0;
    const ComplexSequence x = gaussian_complex(rng, 1 << 18, 2.5, fs);
    const SpectrumEstimate est = welch_psd(x, 1024, 0.5, Window::Hann);
    double integral = 0.0;
    for (Eigen::Index i = 0; i < est.psd_db.size(); ++i)
        integral += std::pow(10.0, est.psd_db[i] / 10.0) * est.resolution_hz;
    const double power = x.samples.squaredNorm() / static_cast<double>(x.samples.size());
    CHECK(integral == doctest::Approx(power).epsilon(0.05));
}

TEST_CASE("db_lin_convert round trips and rejects non-positive input") {
    CHECK(db_lin_convert(1.0, DbDirection::ToDb) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(db_lin_convert(100.0, DbDirection::ToDb) == doctest::Approx(20.0).epsilon(1e-14));
    const double v = 5.37e-4;
    const double rt = db_lin_convert(db_lin_convert(v, DbDirection::ToDb), DbDirection::ToLinear);
    CHECK(std::abs(rt - v) / v < 1e-12);
    CHECK_THROWS_AS(db_lin_convert(0.0, DbDirection::ToDb), std::domain_error);
    CHECK_THROWS_AS(db_lin_convert(-3.0, DbDirection::ToDb), std::domain_error);
}

TEST_CASE("fft helpers invert each other") {
    RngStream rng(6, 0);
    const Eigen::VectorXcd x = gaussian_complex(rng, 64, 1.0).samples;
    const Eigen::VectorXcd rt = fft_inv(fft_fwd(x));
    CHECK((rt - x).cwiseAbs().maxCoeff() < 1e-12);
}
