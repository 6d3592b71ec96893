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

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace mmwsim {

ComplexSequence gaussian_complex(RngStream &rng, Eigen::Index n, double variance,
                                 double sample_rate_hz) {
    if (n < 0)
        throw std::invalid_argument("gaussian_complex: n must be >= 0");
    if (variance < 0.0)
        throw std::invalid_argument("gaussian_complex: variance must be >= 0");
    check_positive(sample_rate_hz, "sample_rate_hz");

    ComplexSequence out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.resize(n);
    const double scale = std::sqrt(variance);
    for (Eigen::Index i = 0; i < n; ++i)
        out.samples[i] = scale * rng.normal_complex();
    return out;
}

Eigen::VectorXd gaussian_real(RngStream &rng, Eigen::Index n, double variance) {
    if (n < 0)
        throw std::invalid_argument("gaussian_real: n must be >= 0");
    if (variance < 0.0)
        throw std::invalid_argument("gaussian_real: variance must be >= 0");
    Eigen::VectorXd out(n);
    const double scale = std::sqrt(variance);
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = scale * rng.normal();
    return out;
}

static Eigen::VectorXd make_window(Window kind, Eigen::Index n) {
    Eigen::VectorXd w(n);
    switch (kind) {
    case Window::Rectangular:
        w.setOnes();
        break;
    case Window::Hann:
        for (Eigen::Index i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n));
        break;
    }
    return w;
}

SpectrumEstimate welch_psd(const ComplexSequence &x, Eigen::Index segment_len,
                           double overlap_fraction, Window window) {
    const Eigen::Index n = x.samples.size();
    check_positive(x.sample_rate_hz, "sample_rate_hz");
    if (segment_len < 8)
        throw std::invalid_argument("welch_psd: segment_len must be >= 8");
    if (segment_len > n)
        throw std::invalid_argument("welch_psd: segment_len exceeds signal length");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw std::invalid_argument("welch_psd: overlap_fraction must be in [0, 1)");

    const double fs = x.sample_rate_hz;
    const Eigen::Index hop =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(
                                      static_cast<double>(segment_len) * (1.0 - overlap_fraction))));
    const Eigen::VectorXd w = make_window(window, segment_len);
    const double window_power = w.squaredNorm(); // sum w^2

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> seg(static_cast<std::size_t>(segment_len));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(segment_len));
    Eigen::VectorXd accum = Eigen::VectorXd::Zero(segment_len);

    Eigen::Index n_segments = 0;
    for (Eigen::Index start = 0; start + segment_len <= n; start += hop) {
        for (Eigen::Index i = 0; i < segment_len; ++i)
            seg[static_cast<std::size_t>(i)] = w[i] * x.samples[start + i];
        fft.fwd(spec, seg);
        for (Eigen::Index k = 0; k < segment_len; ++k)
            accum[k] += std::norm(spec[static_cast<std::size_t>(k)]);
        ++n_segments;
    }

    accum /= static_cast<double>(n_segments) * fs * window_power;

    // fftshift so the frequency axis is strictly increasing
    SpectrumEstimate est;
    est.resolution_hz = fs / static_cast<double>(segment_len);
    est.freqs_hz.resize(segment_len);
    est.psd_db.resize(segment_len);
    const Eigen::Index half = segment_len / 2;
    for (Eigen::Index i = 0; i < segment_len; ++i) {
        const Eigen::Index k = (i + half) % segment_len; // bin index in DFT order
        est.freqs_hz[i] = static_cast<double>(i - half) * est.resolution_hz;
        est.psd_db[i] = 10.0 * std::log10(accum[k]);
    }
    return est;
}

Eigen::VectorXd band_average_psd_db(const SpectrumEstimate &spec,
                                    const Eigen::VectorXd &band_centers_hz) {
    const Eigen::Index m = band_centers_hz.size();
    Eigen::VectorXd out(m);
    for (Eigen::Index b = 0; b < m; ++b) {
        const double fc = band_centers_hz[b];
        if (!(fc > 0.0))
            throw std::invalid_argument("band_average_psd_db: band centers must be > 0");
        // symmetric band around the center: wide enough to average several
        // bins, narrow enough (2% of fc) not to bias steep slopes
        const double w = std::max(2.5 * spec.resolution_hz, 0.02 * fc);
        const double lo = fc - w;
        const double hi = fc + w;
        double acc = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < spec.freqs_hz.size(); ++i) {
            const double af = std::abs(spec.freqs_hz[i]);
            if (af >= lo && af < hi) {
                acc += std::pow(10.0, spec.psd_db[i] / 10.0);
                ++count;
            }
        }
        if (count == 0) {
            // fall back to the nearest positive-frequency bin
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < spec.freqs_hz.size(); ++i) {
                const double d = std::abs(std::abs(spec.freqs_hz[i]) - fc);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            out[b] = spec.psd_db[best];
        } else {
            out[b] = 10.0 * std::log10(acc / static_cast<double>(count));
        }
    }
    return out;
}

double db_lin_convert(double value, DbDirection direction) {
    if (direction == DbDirection::ToDb) {
        if (!(value > 0.0))
            throw std::domain_error("db_lin_convert: to-dB requires value > 0");
        return 10.0 * std::log10(value);
    }
    return std::pow(10.0, value / 10.0);
}

Eigen::VectorXcd fft_fwd(const Eigen::VectorXcd &x) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(x.size());
    fft.fwd(out, x);
    return out;
}

Eigen::VectorXcd fft_inv(const Eigen::VectorXcd &x) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(x.size());
    fft.inv(out, x);
    return out;
}

} // namespace mmwsim
