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

#ifndef MMWSIM_PHASE_NOISE_HPP
#define MMWSIM_PHASE_NOISE_HPP

#include "mmwsim/rng.hpp"
#include "mmwsim/types.hpp"

#include <variant>
#include <vector>

namespace mmwsim {

/// Multi-pole/zero oscillator phase-noise PSD model. The analytic
/// single-sideband level at offset f from a carrier fc is
///
///   L(f) = psd0_dbc_hz
///        + 10*log10( prod_n (1 + (f/f_z,n)^2) / (1 + (f/f_p,n)^2) )
///        + 20*log10( fc / base_carrier_hz )            [dBc/Hz]
///
/// Convention: values are single-sideband L(f); the symmetric two-sided
/// phase PSD equals L(|f|), so total phase variance is 2 * int_0^inf L df.
struct PoleZeroPnParams {
    double psd0_dbc_hz = -80.0;
    std::vector<double> poles_mhz; // f_p,n
    std::vector<double> zeros_mhz; // f_z,n, paired with poles_mhz
    double base_carrier_hz = 30e9;
};

/// Real phase samples in radians at a fixed rate.
struct PhaseTrajectory {
    Eigen::VectorXd phase_rad;
    double sample_rate_hz = 1.0;
};

/// First-order IIR section y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1].
struct FirstOrderSection {
    double b0 = 1.0;
    double b1 = 0.0;
    double a1 = 0.0;
};

/// Discrete-time shaping filter: cascade of first-order sections plus a
/// scalar gain. Driving it with unit-variance white Gaussian noise at
/// sample_rate_hz yields the model PSD.
struct PnShapingFilter {
    std::vector<FirstOrderSection> sections;
    double gain = 1.0;
    double sample_rate_hz = 1.0;
    Eigen::Index default_warmup_samples = 0; // 4x slowest pole time constant
};

/// Throws std::invalid_argument naming the violated field if params are bad.
void validate(const PoleZeroPnParams &params);

/// Analytic SSB PSD at a positive (or zero) offset, in dBc/Hz.
double eval_pole_zero_psd(const PoleZeroPnParams &params, double offset_hz, double carrier_hz);

/// Same PSD in linear 1/Hz units.
double eval_pole_zero_psd_linear(const PoleZeroPnParams &params, double offset_hz,
                                 double carrier_hz);

/// 20*log10(carrier / base_carrier). Both arguments must be positive.
double carrier_scale_db(double carrier_hz, double base_carrier_hz);

/// Bilinear-transform realization of the pole/zero model, one prewarped
/// first-order section per pole/zero pair. The DC gain is normalized so
/// |H(1)|^2 / fs equals the linear PSD at zero offset.
PnShapingFilter design_pn_filter(const PoleZeroPnParams &params, double carrier_hz,
                                 double sample_rate_hz);

/// Squared magnitude response of the filter at offset_hz, as 10*log10 of
/// the output PSD |H|^2/fs (directly comparable to eval_pole_zero_psd).
double filter_psd_db(const PnShapingFilter &filter, double offset_hz);

/// Run the cascade over an input block (stateless call, state starts at 0).
Eigen::VectorXd apply_filter(const PnShapingFilter &filter, const Eigen::VectorXd &input);

/// Gaussian wide-sense-stationary phase samples matching the model PSD.
/// warmup_samples < 0 selects the filter default (4x slowest time constant);
/// the warm-up prefix is generated and discarded.
PhaseTrajectory synthesize_phase(const PoleZeroPnParams &params, double carrier_hz,
                                 double sample_rate_hz, Eigen::Index n, RngStream &rng,
                                 Eigen::Index warmup_samples = -1);

/// Rational loop filter Z(s) = num(s)/den(s), coefficients in ascending
/// powers of s.
struct LoopFilter {
    std::vector<double> num;
    std::vector<double> den;
};

/// Piecewise power-law PSD: anchors (offset_hz, dbc_hz) interpolated
/// linearly in log10(f) vs dB; end slopes continue beyond the table.
/// An empty anchor list is a silent source (zero power).
struct PowerLawPsd {
    std::vector<std::pair<double, double>> anchors;
};

using SourcePsd = std::variant<PoleZeroPnParams, PowerLawPsd>;

/// PLL noise-shaping parameters: detector gain, VCO sensitivity, divider,
/// loop filter, and the three source PSDs (reference, detector/loop filter,
/// VCO). Source spectra are caller-supplied model inputs.
struct PllPnParams {
    double kd = 1.0;
    double kvco = 1.0;
    double nd = 1.0;
    LoopFilter loop_filter;
    SourcePsd ref_source;
    SourcePsd lp_source;
    SourcePsd vco_source;
};

void validate(const PllPnParams &params);

/// Evaluate one source PSD at a positive offset, linear 1/Hz units.
double eval_source_psd_linear(const SourcePsd &source, double offset_hz);

/// Output PSD of the PLL at offset_hz in dBc/Hz: the three sources are
/// combined as sum_i |H_i(j 2 pi f)|^2 S_i(f) with
///   H_ref = N K_vco Z / D,  H_lp = K_d N K_vco Z / D,  H_vco = s N / D,
///   D = s N + K_d K_vco Z.
double eval_pll_psd(const PllPnParams &params, double offset_hz);

/// Squared magnitudes of the three transfer functions at offset_hz
/// (ref, lp, vco order). Exposed for limit checks and reporting.
Eigen::Vector3d pll_transfer_mag2(const PllPnParams &params, double offset_hz);

/// Unity-crossing frequency of the open-loop gain |K_d K_vco Z / (s N)|,
/// located by bisection on a log grid.
double pll_loop_bandwidth_hz(const PllPnParams &params, double f_lo = 1.0, double f_hi = 1e12);

} // namespace mmwsim

#endif
