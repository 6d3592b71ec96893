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

#ifndef MMWSIM_SIGNAL_HPP
#define MMWSIM_SIGNAL_HPP

#include "mmwsim/rng.hpp"
#include "mmwsim/types.hpp"

namespace mmwsim {

enum class Window { Rectangular, Hann };
enum class DbDirection { ToDb, ToLinear };

/// n circularly-symmetric complex Gaussian samples with E|z|^2 = variance
/// (real and imaginary parts each carry variance/2).
ComplexSequence gaussian_complex(RngStream &rng, Eigen::Index n, double variance,
                                 double sample_rate_hz = 1.0);

/// n real N(0, variance) samples.
Eigen::VectorXd gaussian_real(RngStream &rng, Eigen::Index n, double variance);

/// Welch-averaged modified periodogram, two-sided, fftshifted so freqs run
/// from -fs/2 to +fs/2. Window power is normalized so white noise of
/// variance s^2 sits at a flat 10*log10(s^2/fs) dB/Hz.
SpectrumEstimate welch_psd(const ComplexSequence &x, Eigen::Index segment_len,
                           double overlap_fraction = 0.5, Window window = Window::Hann);

/// Average the linear PSD around each requested positive offset (both
/// spectral sides contribute). Band half-width is max(2.5 bins, 2% of the
/// center) so estimation noise averages out without biasing steep slopes.
/// Returns dB values; bands with no bins fall back to the nearest bin.
Eigen::VectorXd band_average_psd_db(const SpectrumEstimate &spec,
                                    const Eigen::VectorXd &band_centers_hz);

/// 10*log10 and its inverse. ToDb requires value > 0.
double db_lin_convert(double value, DbDirection direction);

inline double db_from_linear(double v) { return db_lin_convert(v, DbDirection::ToDb); }
inline double linear_from_db(double v) { return db_lin_convert(v, DbDirection::ToLinear); }

/// Unnormalized forward DFT: X_k = sum_n x_n exp(-j 2 pi k n / N).
Eigen::VectorXcd fft_fwd(const Eigen::VectorXcd &x);

/// Inverse of fft_fwd (includes the 1/N factor).
Eigen::VectorXcd fft_inv(const Eigen::VectorXcd &x);

} // namespace mmwsim

#endif
