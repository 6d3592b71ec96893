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

#include "mmwsim/phase_noise.hpp"
#include "mmwsim/signal.hpp"

#include <algorithm>
#include <cmath>

namespace mmwsim {

void validate(const PoleZeroPnParams &params) {
    if (params.poles_mhz.empty())
        throw std::invalid_argument("poles_mhz: at least one pole/zero pair required");
    if (params.poles_mhz.size() != params.zeros_mhz.size())
        throw std::invalid_argument("poles_mhz/zeros_mhz: pole and zero lists must pair up");
    for (double p : params.poles_mhz)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("poles_mhz: pole frequencies must be positive and finite");
    for (double z : params.zeros_mhz)
        if (!(z > 0.0) || !std::isfinite(z))
            throw std::invalid_argument("zeros_mhz: zero frequencies must be positive and finite");
    if (!std::isfinite(params.psd0_dbc_hz))
        throw std::invalid_argument("psd0_dbc_hz: must be finite");
    if (!(params.base_carrier_hz > 0.0))
        throw std::invalid_argument("base_carrier_hz: must be > 0");
}

double carrier_scale_db(double carrier_hz, double base_carrier_hz) {
    if (!(carrier_hz > 0.0))
        throw std::domain_error("carrier_scale_db: carrier_hz must be > 0");
    if (!(base_carrier_hz > 0.0))
        throw std::domain_error("carrier_scale_db: base_carrier_hz must be > 0");
    return 20.0 * std::log10(carrier_hz / base_carrier_hz);
}

double eval_pole_zero_psd(const PoleZeroPnParams &params, double offset_hz, double carrier_hz) {
    validate(params);
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("eval_pole_zero_psd: carrier_hz must be > 0");
    if (offset_hz < 0.0)
        throw std::invalid_argument("eval_pole_zero_psd: offset_hz must be >= 0");

    double shape_db = 0.0;
    for (std::size_t i = 0; i < params.poles_mhz.size(); ++i) {
        const double fz = params.zeros_mhz[i] * 1e6;
        const double fp = params.poles_mhz[i] * 1e6;
        const double rz = offset_hz / fz;
        const double rp = offset_hz / fp;
        shape_db += 10.0 * std::log10((1.0 + rz * rz) / (1.0 + rp * rp));
    }
    return params.psd0_dbc_hz + shape_db + carrier_scale_db(carrier_hz, params.base_carrier_hz);
}

double eval_pole_zero_psd_linear(const PoleZeroPnParams &params, double offset_hz,
                                 double carrier_hz) {
    return std::pow(10.0, eval_pole_zero_psd(params, offset_hz, carrier_hz) / 10.0);
}

PnShapingFilter design_pn_filter(const PoleZeroPnParams &params, double carrier_hz,
                                 double sample_rate_hz) {
    validate(params);
    check_positive(sample_rate_hz, "sample_rate_hz");
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("design_pn_filter: carrier_hz must be > 0");

    const double nyquist = sample_rate_hz / 2.0;
    for (double p : params.poles_mhz)
        if (p * 1e6 >= nyquist)
            throw std::invalid_argument("design_pn_filter: pole at " + std::to_string(p) +
                                        " MHz is at or above Nyquist (" +
                                        std::to_string(nyquist / 1e6) + " MHz)");
    for (double z : params.zeros_mhz)
        if (z * 1e6 >= nyquist)
            throw std::invalid_argument("design_pn_filter: zero at " + std::to_string(z) +
                                        " MHz is at or above Nyquist (" +
                                        std::to_string(nyquist / 1e6) + " MHz)");

    PnShapingFilter filter;
    filter.sample_rate_hz = sample_rate_hz;

    // Each (1 + s/w_c) maps through s = 2 fs (1 - z^-1)/(1 + z^-1) with the
    // corner prewarped so the digital corner lands exactly at f_c:
    // c = 1/tan(pi f_c/fs). The (1+z^-1) terms of a zero/pole pair cancel.
    double slowest_pole_hz = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.poles_mhz.size(); ++i) {
        const double fz = params.zeros_mhz[i] * 1e6;
        const double fp = params.poles_mhz[i] * 1e6;
        const double cz = 1.0 / std::tan(pi * fz / sample_rate_hz);
        const double cp = 1.0 / std::tan(pi * fp / sample_rate_hz);
        FirstOrderSection s;
        s.b0 = (1.0 + cz) / (1.0 + cp);
        s.b1 = (1.0 - cz) / (1.0 + cp);
        s.a1 = (1.0 - cp) / (1.0 + cp);
        filter.sections.push_back(s);
        slowest_pole_hz = std::min(slowest_pole_hz, fp);
    }

    // Unity DC gain per section; the scalar carries the whole level:
    // |H(1)|^2 / fs = S_lin(0).
    const double s0_lin = eval_pole_zero_psd_linear(params, 0.0, carrier_hz);
    filter.gain = std::sqrt(s0_lin * sample_rate_hz);

    const double tau_samples = sample_rate_hz / (2.0 * pi * slowest_pole_hz);
    filter.default_warmup_samples = static_cast<Eigen::Index>(std::ceil(4.0 * tau_samples));
    return filter;
}

double filter_psd_db(const PnShapingFilter &filter, double offset_hz) {
    const double w = 2.0 * pi * offset_hz / filter.sample_rate_hz;
    const cplx zinv = std::polar(1.0, -w);
    cplx h = filter.gain;
    for (const auto &s : filter.sections)
        h *= (s.b0 + s.b1 * zinv) / (1.0 + s.a1 * zinv);
    return 10.0 * std::log10(std::norm(h) / filter.sample_rate_hz);
}

Eigen::VectorXd apply_filter(const PnShapingFilter &filter, const Eigen::VectorXd &input) {
    Eigen::VectorXd y = input;
    for (const auto &s : filter.sections) {
        double x_prev = 0.0;
        double y_prev = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double xi = y[i];
            const double yi = s.b0 * xi + s.b1 * x_prev - s.a1 * y_prev;
            x_prev = xi;
            y_prev = yi;
            y[i] = yi;
        }
    }
    return y * filter.gain;
}

PhaseTrajectory synthesize_phase(const PoleZeroPnParams &params, double carrier_hz,
                                 double sample_rate_hz, Eigen::Index n, RngStream &rng,
                                 Eigen::Index warmup_samples) {
    if (n < 1)
        throw std::invalid_argument("synthesize_phase: n must be >= 1");
    const PnShapingFilter filter = design_pn_filter(params, carrier_hz, sample_rate_hz);
    const Eigen::Index warmup = warmup_samples >= 0 ? warmup_samples : filter.default_warmup_samples;

    Eigen::VectorXd white = gaussian_real(rng, warmup + n, 1.0);
    Eigen::VectorXd shaped = apply_filter(filter, white);

    PhaseTrajectory traj;
    traj.sample_rate_hz = sample_rate_hz;
    traj.phase_rad = shaped.tail(n);
    return traj;
}

// ---------------------------------------------------------------- PLL ---

void validate(const PllPnParams &params) {
    if (!(params.nd > 0.0))
        throw std::invalid_argument("nd: divider ratio must be > 0");
    bool any_den = false;
    for (double c : params.loop_filter.den)
        if (c != 0.0)
            any_den = true;
    if (!any_den)
        throw std::invalid_argument("loop_filter.den: denominator is identically zero");
}

static cplx polyval_ascending(const std::vector<double> &coeffs, cplx s) {
    cplx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = acc * s + *it;
    return acc;
}

static cplx eval_loop_filter(const LoopFilter &z, cplx s) {
    const cplx den = polyval_ascending(z.den, s);
    if (den == cplx(0.0, 0.0))
        throw numerical_error("loop filter evaluation singular at the requested frequency");
    return polyval_ascending(z.num, s) / den;
}

double eval_source_psd_linear(const SourcePsd &source, double offset_hz) {
    if (std::holds_alternative<PoleZeroPnParams>(source)) {
        const auto &pz = std::get<PoleZeroPnParams>(source);
        // source spectra carry no extra carrier shift: evaluate at base carrier
        return eval_pole_zero_psd_linear(pz, offset_hz, pz.base_carrier_hz);
    }
    const auto &pl = std::get<PowerLawPsd>(source);
    if (pl.anchors.empty())
        return 0.0;
    if (!(offset_hz > 0.0))
        throw std::invalid_argument("power-law source PSD requires offset_hz > 0");
    const auto &a = pl.anchors;
    if (a.size() == 1)
        return std::pow(10.0, a.front().second / 10.0);
    const double lf = std::log10(offset_hz);
    std::size_t i = 0;
    while (i + 2 < a.size() && lf > std::log10(a[i + 1].first))
        ++i;
    const double x0 = std::log10(a[i].first), x1 = std::log10(a[i + 1].first);
    const double y0 = a[i].second, y1 = a[i + 1].second;
    const double db = y0 + (y1 - y0) * (lf - x0) / (x1 - x0); // extrapolates end slopes
    return std::pow(10.0, db / 10.0);
}

Eigen::Vector3d pll_transfer_mag2(const PllPnParams &params, double offset_hz) {
    if (!(offset_hz > 0.0))
        throw std::invalid_argument("pll_transfer_mag2: offset_hz must be > 0");
    const cplx s(0.0, 2.0 * pi * offset_hz);
    const cplx z = eval_loop_filter(params.loop_filter, s);
    const cplx d = s * params.nd + params.kd * params.kvco * z;
    if (d == cplx(0.0, 0.0))
        throw numerical_error("PLL characteristic polynomial singular at the requested frequency");
    const cplx h_ref = params.nd * params.kvco * z / d;
    const cplx h_lp = params.kd * h_ref;
    const cplx h_vco = s * params.nd / d;
    return {std::norm(h_ref), std::norm(h_lp), std::norm(h_vco)};
}

double eval_pll_psd(const PllPnParams &params, double offset_hz) {
    validate(params);
    const Eigen::Vector3d h2 = pll_transfer_mag2(params, offset_hz);
    const double s_lin = h2[0] * eval_source_psd_linear(params.ref_source, offset_hz) +
                         h2[1] * eval_source_psd_linear(params.lp_source, offset_hz) +
                         h2[2] * eval_source_psd_linear(params.vco_source, offset_hz);
    return 10.0 * std::log10(s_lin); // -inf when every source is silent
}

double pll_loop_bandwidth_hz(const PllPnParams &params, double f_lo, double f_hi) {
    validate(params);
    auto open_loop_db = [&](double f) {
        const cplx s(0.0, 2.0 * pi * f);
        const cplx g = params.kd * params.kvco * eval_loop_filter(params.loop_filter, s) /
                       (s * params.nd);
        return 10.0 * std::log10(std::norm(g));
    };
    double lo = f_lo, hi = f_hi;
    if (open_loop_db(lo) < 0.0 || open_loop_db(hi) > 0.0)
        throw numerical_error("pll_loop_bandwidth_hz: no unity crossing in the search range");
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        (open_loop_db(mid) > 0.0 ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

} // namespace mmwsim
