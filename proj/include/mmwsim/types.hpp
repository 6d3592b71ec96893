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

#ifndef MMWSIM_TYPES_HPP
#define MMWSIM_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace mmwsim {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double speed_of_light_m_s = 299792458.0;

/// Thrown when an algorithm fails numerically (singular evaluation,
/// rank-deficient solve, quadrature failure). Distinct from parameter
/// errors so the CLI can map it to its own exit code.
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Thrown on file-system failures (unreadable config, failed atomic rename).
class io_error : public std::runtime_error {
  public:
    explicit io_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Complex baseband samples with a sample rate. The universal signal carrier.
struct ComplexSequence {
    Eigen::VectorXcd samples;
    double sample_rate_hz = 1.0;
};

/// Averaged spectral estimate. freqs_hz is strictly increasing; psd_db is
/// 10*log10 of the linear two-sided density (dB/Hz, or dBc/Hz for phase).
struct SpectrumEstimate {
    Eigen::VectorXd freqs_hz;
    Eigen::VectorXd psd_db;
    double resolution_hz = 0.0;
};

inline void check_finite(const Eigen::VectorXcd &v, const char *what) {
    if (!v.allFinite())
        throw std::invalid_argument(std::string(what) + ": samples must be finite");
}

inline void check_positive(double v, const char *what) {
    if (!(v > 0.0))
        throw std::invalid_argument(std::string(what) + " must be > 0, got " + std::to_string(v));
}

} // namespace mmwsim

#endif
