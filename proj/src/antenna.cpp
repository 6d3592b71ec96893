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

#include <cmath>

namespace mmwsim {

namespace {

Eigen::Vector3d unit_direction(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Eigen::VectorXd degree_range(double start, double stop, double step) {
    const int n = static_cast<int>(std::round((stop - start) / step)) + 1;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = (start + i * step) * pi / 180.0;
    return v;
}

} // namespace

ArrayGeometry lattice_geometry(int rows, int cols, double spacing_x_lambda,
                               double spacing_y_lambda) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("lattice_geometry: rows and cols must be >= 1");
    if (!(spacing_x_lambda > 0.0) || !(spacing_y_lambda > 0.0))
        throw std::invalid_argument("lattice_geometry: spacings must be > 0");
    ArrayGeometry g;
    g.lattice = LatticeDescriptor{rows, cols, spacing_x_lambda, spacing_y_lambda};
    g.positions.resize(static_cast<Eigen::Index>(rows) * cols, 3);
    Eigen::Index m = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            g.positions(m, 0) = (c - 0.5 * (cols - 1)) * spacing_x_lambda;
            g.positions(m, 1) = (r - 0.5 * (rows - 1)) * spacing_y_lambda;
            g.positions(m, 2) = 0.0;
            ++m;
        }
    return g;
}

void validate(const ArrayGeometry &geometry) {
    if (geometry.positions.rows() < 1)
        throw std::invalid_argument("geometry: at least one element required");
    if (geometry.positions.cols() != 3)
        throw std::invalid_argument("geometry: positions must be N x 3");
    if (!geometry.positions.allFinite())
        throw std::invalid_argument("geometry: positions must be finite");
    if (geometry.lattice) {
        const auto &lat = *geometry.lattice;
        if (static_cast<Eigen::Index>(lat.rows) * lat.cols != geometry.positions.rows())
            throw std::invalid_argument("geometry: lattice descriptor disagrees with positions");
    }
}

ElementPattern cos_power_element_from_gain(double peak_gain_dbi) {
    const double d_lin = std::pow(10.0, peak_gain_dbi / 10.0);
    if (d_lin < 2.0)
        throw std::invalid_argument("cos_power_element_from_gain: gain must be >= 3.01 dBi "
                                    "(hemispheric cos-power floor)");
    ElementPattern e;
    e.kind = ElementKind::CosPower;
    e.q_exponent = (d_lin / 2.0 - 1.0) / 2.0; // D = 2(2q+1)
    e.peak_gain_dbi = peak_gain_dbi;
    return e;
}

void validate(const ElementPattern &element) {
    if (element.q_exponent < 0.0)
        throw std::invalid_argument("element: q_exponent must be >= 0");
    if (element.kind == ElementKind::CosPower) {
        const double d_dbi = 10.0 * std::log10(2.0 * (2.0 * element.q_exponent + 1.0));
        if (std::abs(d_dbi - element.peak_gain_dbi) > 0.1)
            throw std::invalid_argument("element: cos-power peak_gain_dbi inconsistent with "
                                        "q_exponent (directivity 2(2q+1))");
    }
    if (element.kind == ElementKind::Tabulated) {
        if (element.table_theta_rad.size() != element.table_gain_dbi.size() ||
            element.table_theta_rad.size() < 2)
            throw std::invalid_argument("element: tabulated pattern needs >= 2 matching entries");
    }
}

double element_gain_dbi(const ElementPattern &element, double theta_rad) {
    switch (element.kind) {
    case ElementKind::Isotropic:
        return element.peak_gain_dbi;
    case ElementKind::CosPower: {
        const double c = std::cos(theta_rad);
        if (c <= 0.0)
            return -std::numeric_limits<double>::infinity();
        return element.peak_gain_dbi + 20.0 * element.q_exponent * std::log10(c);
    }
    case ElementKind::Tabulated: {
        const auto &t = element.table_theta_rad;
        const auto &g = element.table_gain_dbi;
        if (theta_rad <= t[0])
            return g[0];
        if (theta_rad >= t[t.size() - 1])
            return g[g.size() - 1];
        Eigen::Index i = 0;
        while (t[i + 1] < theta_rad)
            ++i;
        const double f = (theta_rad - t[i]) / (t[i + 1] - t[i]);
        return g[i] + f * (g[i + 1] - g[i]);
    }
    }
    return 0.0;
}

PatternGrid sphere_grid(double step_deg) {
    return {degree_range(0.0, 180.0, step_deg), degree_range(0.0, 360.0 - step_deg, step_deg)};
}

PatternGrid hemisphere_grid(double step_deg) {
    return {degree_range(0.0, 90.0, step_deg), degree_range(0.0, 360.0 - step_deg, step_deg)};
}

PatternGrid cut_grid(double phi_deg, double step_deg) {
    PatternGrid g;
    g.theta_rad = degree_range(0.0, 90.0, step_deg);
    g.phi_rad.resize(2);
    g.phi_rad[0] = phi_deg * pi / 180.0;
    g.phi_rad[1] = (phi_deg + 180.0) * pi / 180.0;
    return g;
}

void refresh_peak(FarFieldPattern &pattern) {
    Eigen::Index it = 0, ip = 0;
    pattern.peak_gain_db = pattern.gain_db.maxCoeff(&it, &ip);
    pattern.peak_theta_rad = pattern.theta_rad[it];
    pattern.peak_phi_rad = pattern.phi_rad[ip];
}

BeamWeights steering_weights(const ArrayGeometry &geometry, double theta0_rad, double phi0_rad) {
    validate(geometry);
    const Eigen::Vector3d u = unit_direction(theta0_rad, phi0_rad);
    BeamWeights bw;
    bw.weights.resize(geometry.positions.rows());
    for (Eigen::Index m = 0; m < geometry.positions.rows(); ++m) {
        const double phase = -2.0 * pi * geometry.positions.row(m).dot(u);
        bw.weights[m] = std::polar(1.0, phase);
    }
    return bw;
}

BeamWeights quantize_phase(const BeamWeights &weights, int bits) {
    if (bits < 1)
        throw std::invalid_argument("quantize_phase: bits must be >= 1");
    const double n_states = std::pow(2.0, bits);
    const double step = 2.0 * pi / n_states;
    BeamWeights out;
    out.quantization_bits = bits;
    out.weights.resize(weights.weights.size());
    for (Eigen::Index m = 0; m < weights.weights.size(); ++m) {
        const cplx w = weights.weights[m];
        double phase = std::arg(w);
        if (phase < 0.0)
            phase += 2.0 * pi;
        // round half-down: exact midpoints take the lower state
        double idx = std::ceil(phase / step - 0.5);
        if (idx >= n_states)
            idx -= n_states;
        out.weights[m] = std::polar(std::abs(w), idx * step);
    }
    return out;
}

FarFieldPattern array_factor(const ArrayGeometry &geometry, const BeamWeights &weights,
                             const PatternGrid &grid, PatternCoverage coverage) {
    validate(geometry);
    if (weights.weights.size() != geometry.positions.rows())
        throw std::invalid_argument("array_factor: weight count must equal element count");
    if (grid.theta_rad.size() == 0 || grid.phi_rad.size() == 0)
        throw std::invalid_argument("array_factor: empty grid");

    FarFieldPattern p;
    p.theta_rad = grid.theta_rad;
    p.phi_rad = grid.phi_rad;
    p.coverage = coverage;
    p.reference = PatternReference::SingleElement;
    p.gain_db.resize(grid.theta_rad.size(), grid.phi_rad.size());

    for (Eigen::Index ip = 0; ip < grid.phi_rad.size(); ++ip) {
        for (Eigen::Index it = 0; it < grid.theta_rad.size(); ++it) {
            const Eigen::Vector3d u = unit_direction(grid.theta_rad[it], grid.phi_rad[ip]);
            cplx af = 0.0;
            for (Eigen::Index m = 0; m < geometry.positions.rows(); ++m) {
                const double phase = 2.0 * pi * geometry.positions.row(m).dot(u);
                af += weights.weights[m] * std::polar(1.0, phase);
            }
            p.gain_db(it, ip) = 20.0 * std::log10(std::abs(af) + 1e-300);
        }
    }
    refresh_peak(p);
    return p;
}

FarFieldPattern total_pattern(const FarFieldPattern &af, const ElementPattern &element) {
    validate(element);
    FarFieldPattern p = af;
    p.reference = PatternReference::Isotropic;
    for (Eigen::Index it = 0; it < p.theta_rad.size(); ++it) {
        const double eg = element_gain_dbi(element, p.theta_rad[it]);
        for (Eigen::Index ip = 0; ip < p.phi_rad.size(); ++ip)
            p.gain_db(it, ip) += eg;
    }
    refresh_peak(p);
    return p;
}

namespace {

// Trapezoid in theta (sin-theta weighted), periodic rectangle rule in phi.
// stride decimates the grid for the quadrature self-check.
double integrate_intensity(const FarFieldPattern &p, Eigen::Index stride) {
    const Eigen::Index nt = p.theta_rad.size();
    const Eigen::Index np = p.phi_rad.size();
    std::vector<Eigen::Index> ti, pj;
    for (Eigen::Index i = 0; i < nt; i += stride)
        ti.push_back(i);
    if (ti.back() != nt - 1)
        ti.push_back(nt - 1);
    for (Eigen::Index j = 0; j < np; j += stride)
        pj.push_back(j);

    const double dphi = 2.0 * pi / static_cast<double>(pj.size());
    double total = 0.0;
    for (std::size_t a = 0; a + 1 < ti.size(); ++a) {
        const double t0 = p.theta_rad[ti[a]];
        const double t1 = p.theta_rad[ti[a + 1]];
        for (std::size_t b = 0; b < pj.size(); ++b) {
            const double u0 = std::pow(10.0, p.gain_db(ti[a], pj[b]) / 10.0) * std::sin(t0);
            const double u1 = std::pow(10.0, p.gain_db(ti[a + 1], pj[b]) / 10.0) * std::sin(t1);
            total += 0.5 * (u0 + u1) * (t1 - t0) * dphi;
        }
    }
    return total;
}

} // namespace

double integrated_intensity(const FarFieldPattern &pattern) {
    if (pattern.coverage == PatternCoverage::Cut)
        throw std::invalid_argument("integrated_intensity: pattern must cover a sphere or hemisphere");
    if (pattern.theta_rad.size() < 3 || pattern.phi_rad.size() < 3)
        throw std::invalid_argument("integrated_intensity: grid too small");
    return integrate_intensity(pattern, 1);
}

DirectivityResult directivity(const FarFieldPattern &pattern) {
    const double integral = integrated_intensity(pattern);
    if (!(integral > 0.0))
        throw numerical_error("directivity: integrated intensity is zero");
    const double peak_lin = std::pow(10.0, pattern.gain_db.maxCoeff() / 10.0);

    DirectivityResult res;
    res.dbi = 10.0 * std::log10(4.0 * pi * peak_lin / integral);
    const double coarse = integrate_intensity(pattern, 2);
    const double coarse_dbi = 10.0 * std::log10(4.0 * pi * peak_lin / coarse);
    res.grid_warning = std::abs(coarse_dbi - res.dbi) > 0.1;
    return res;
}

double grating_lobe_limit(double spacing_lambda) {
    if (!(spacing_lambda > 0.0))
        throw std::invalid_argument("grating_lobe_limit: spacing must be > 0");
    if (spacing_lambda <= 0.5)
        return 90.0;
    if (spacing_lambda >= 1.0)
        return 0.0;
    return std::asin(1.0 / spacing_lambda - 1.0) * 180.0 / pi;
}

// ------------------------------------------------------- transmitarray ---

void validate(const TransmitarrayConfig &config) {
    if (config.uc_rows < 1 || config.uc_cols < 1)
        throw std::invalid_argument("transmitarray: uc_rows/uc_cols must be >= 1");
    if (!(config.uc_size_mm > 0.0))
        throw std::invalid_argument("transmitarray: uc_size_mm must be > 0");
    if (!(config.focal_distance_mm > 0.0))
        throw std::invalid_argument("transmitarray: focal_distance_mm must be > 0");
    if (config.phase_bits < 1 || config.phase_bits > 3)
        throw std::invalid_argument("transmitarray: phase_bits must be 1, 2 or 3");
    if (!(config.frequency_ghz > 0.0))
        throw std::invalid_argument("transmitarray: frequency_ghz must be > 0");
}

double phase_quantization_loss_db(int bits) {
    if (bits < 1)
        throw std::invalid_argument("phase_quantization_loss_db: bits must be >= 1");
    const double x = std::pow(2.0, -bits);
    const double sinc = std::sin(pi * x) / (pi * x);
    return -20.0 * std::log10(sinc);
}

namespace {

struct FeedSample {
    double amp;    // field amplitude at the cell
    double domega; // solid angle the sub-cell subtends at the feed
    double cos2q;  // feed intensity factor cos^(2q)
};

// Feed on the axis at z = -F, boresight toward the aperture plane.
// Samples every unit cell on a sub x sub grid.
template <typename F>
void for_each_cell_sample(const TransmitarrayConfig &cfg, double q, int sub, F &&fn) {
    const double cell = cfg.uc_size_mm;
    const double f_mm = cfg.focal_distance_mm;
    const double sub_area = (cell / sub) * (cell / sub);
    for (int r = 0; r < cfg.uc_rows; ++r) {
        for (int c = 0; c < cfg.uc_cols; ++c) {
            const double yc = (r - 0.5 * (cfg.uc_rows - 1)) * cell;
            const double xc = (c - 0.5 * (cfg.uc_cols - 1)) * cell;
            for (int sr = 0; sr < sub; ++sr) {
                for (int sc = 0; sc < sub; ++sc) {
                    const double x = xc + (sc - 0.5 * (sub - 1)) * cell / sub;
                    const double y = yc + (sr - 0.5 * (sub - 1)) * cell / sub;
                    const double r2 = x * x + y * y + f_mm * f_mm;
                    const double rr = std::sqrt(r2);
                    const double cos_t = f_mm / rr;
                    FeedSample s;
                    s.cos2q = std::pow(cos_t, 2.0 * q);
                    s.amp = std::pow(cos_t, q) / rr;
                    s.domega = sub_area * cos_t / r2;
                    fn(r, c, x, y, rr, s);
                }
            }
        }
    }
}

double feed_q_from_gain(double fs_gain_dbi) {
    const double d_lin = std::pow(10.0, fs_gain_dbi / 10.0);
    if (d_lin < 2.0)
        throw std::invalid_argument("transmitarray: fs_gain_dbi too low for a cos-power feed");
    return (d_lin / 2.0 - 1.0) / 2.0;
}

} // namespace

TransmitarrayBudget transmitarray_budget(const TransmitarrayConfig &config) {
    validate(config);
    TransmitarrayBudget b;
    b.wavelength_mm = speed_of_light_m_s / (config.frequency_ghz * 1e9) * 1e3;
    b.feed_q = feed_q_from_gain(config.fs_gain_dbi);

    const double area_mm2 =
        (config.uc_rows * config.uc_size_mm) * (config.uc_cols * config.uc_size_mm);
    b.aperture_directivity_dbi =
        10.0 * std::log10(4.0 * pi * area_mm2 / (b.wavelength_mm * b.wavelength_mm));

    // spillover: feed power intercepted by the rim vs the full radiated power
    double captured = 0.0;
    double amp_sum = 0.0, amp2_sum = 0.0;
    Eigen::Index n_samples = 0;
    for_each_cell_sample(config, b.feed_q, 3,
                         [&](int, int, double, double, double, const FeedSample &s) {
                             captured += s.cos2q * s.domega;
                             amp_sum += s.amp;
                             amp2_sum += s.amp * s.amp;
                             ++n_samples;
                         });
    const double total_radiated = 2.0 * pi / (2.0 * b.feed_q + 1.0); // hemisphere cos^2q integral
    const double eta_spill = captured / total_radiated;
    const double eta_taper = amp_sum * amp_sum / (static_cast<double>(n_samples) * amp2_sum);

    b.spillover_loss_db = -10.0 * std::log10(eta_spill);
    b.taper_loss_db = -10.0 * std::log10(eta_taper);
    b.quantization_loss_db = phase_quantization_loss_db(config.phase_bits);
    b.net_gain_dbi = b.aperture_directivity_dbi - b.spillover_loss_db - b.taper_loss_db -
                     b.quantization_loss_db;
    return b;
}

FarFieldPattern transmitarray_pattern(const TransmitarrayConfig &config, const PatternGrid &grid,
                                      PatternCoverage coverage, double cell_q) {
    validate(config);
    const double lambda_mm = speed_of_light_m_s / (config.frequency_ghz * 1e9) * 1e3;
    const double q_feed = feed_q_from_gain(config.fs_gain_dbi);
    const double k_mm = 2.0 * pi / lambda_mm;

    if (cell_q < 0.0) {
        // directivity of the cell's physical aperture sets a sensible default
        const double d_cell = 4.0 * pi * config.uc_size_mm * config.uc_size_mm /
                              (lambda_mm * lambda_mm);
        cell_q = std::max(0.0, (d_cell / 2.0 - 1.0) / 2.0);
    }

    ArrayGeometry geometry;
    geometry.positions.resize(static_cast<Eigen::Index>(config.uc_rows) * config.uc_cols, 3);
    BeamWeights bw;
    bw.weights.resize(geometry.positions.rows());

    const double n_states = std::pow(2.0, config.phase_bits);
    const double step = 2.0 * pi / n_states;
    Eigen::Index m = 0;
    for_each_cell_sample(config, q_feed, 1,
                         [&](int, int, double x, double y, double rr, const FeedSample &s) {
                             geometry.positions(m, 0) = x / lambda_mm;
                             geometry.positions(m, 1) = y / lambda_mm;
                             geometry.positions(m, 2) = 0.0;
                             // ideal compensation k*R, snapped to the state grid
                             double ideal = std::fmod(k_mm * rr, 2.0 * pi);
                             double idx = std::ceil(ideal / step - 0.5);
                             if (idx >= n_states)
                                 idx -= n_states;
                             const double applied = idx * step;
                             bw.weights[m] = std::polar(s.amp, applied - k_mm * rr);
                             ++m;
                         });

    FarFieldPattern af = array_factor(geometry, bw, grid, coverage);
    ElementPattern cell;
    cell.kind = ElementKind::CosPower;
    cell.q_exponent = cell_q;
    cell.peak_gain_dbi = 10.0 * std::log10(2.0 * (2.0 * cell_q + 1.0));
    return total_pattern(af, cell);
}

// ---------------------------------------------------------------- masks ---

void validate(const RadiationMask &mask) {
    if (mask.points.size() < 2)
        throw std::invalid_argument("mask: at least two points required");
    for (std::size_t i = 1; i < mask.points.size(); ++i)
        if (!(mask.points[i].first > mask.points[i - 1].first))
            throw std::invalid_argument("mask: angles must be strictly increasing");
}

PatternCut extract_cut(const FarFieldPattern &pattern, double phi_deg) {
    auto find_phi = [&](double target_rad) -> Eigen::Index {
        for (Eigen::Index j = 0; j < pattern.phi_rad.size(); ++j) {
            double d = std::remainder(pattern.phi_rad[j] - target_rad, 2.0 * pi);
            if (std::abs(d) < 1e-9)
                return j;
        }
        return -1;
    };
    const double phi0 = phi_deg * pi / 180.0;
    const Eigen::Index jp = find_phi(phi0);
    const Eigen::Index jm = find_phi(phi0 + pi);
    if (jp < 0 || jm < 0)
        throw std::invalid_argument("extract_cut: requested cut plane not on the pattern grid");

    const Eigen::Index nt = pattern.theta_rad.size();
    PatternCut cut;
    cut.angle_deg.resize(2 * nt - 1);
    cut.rel_db.resize(2 * nt - 1);
    const double peak = pattern.peak_gain_db;
    for (Eigen::Index i = 0; i < nt; ++i) {
        // negative angles from the phi+180 half, positive from the phi half
        cut.angle_deg[nt - 1 - i] = -pattern.theta_rad[i] * 180.0 / pi;
        cut.rel_db[nt - 1 - i] = pattern.gain_db(i, jm) - peak;
        cut.angle_deg[nt - 1 + i] = pattern.theta_rad[i] * 180.0 / pi;
        cut.rel_db[nt - 1 + i] = pattern.gain_db(i, jp) - peak;
    }
    cut.rel_db[nt - 1] = pattern.gain_db(0, jp) - peak; // boresight belongs to both halves
    return cut;
}

static double mask_level_db(const RadiationMask &mask, double angle_deg) {
    const auto &pts = mask.points;
    std::size_t i = 0;
    while (i + 2 < pts.size() && pts[i + 1].first < angle_deg)
        ++i;
    const double f = (angle_deg - pts[i].first) / (pts[i + 1].first - pts[i].first);
    return pts[i].second + f * (pts[i + 1].second - pts[i].second);
}

MaskReport mask_compliance(const FarFieldPattern &pattern, const RadiationMask &mask,
                           double cut_phi_deg) {
    validate(mask);
    const PatternCut cut = extract_cut(pattern, cut_phi_deg);
    const double a_lo = mask.points.front().first;
    const double a_hi = mask.points.back().first;

    MaskReport report;
    report.worst_margin_db = std::numeric_limits<double>::infinity();
    bool any = false;
    for (Eigen::Index i = 0; i < cut.angle_deg.size(); ++i) {
        const double a = std::abs(cut.angle_deg[i]);
        if (a < a_lo || a > a_hi)
            continue;
        any = true;
        const double margin = mask_level_db(mask, a) - cut.rel_db[i];
        if (margin < report.worst_margin_db) {
            report.worst_margin_db = margin;
            report.worst_angle_deg = cut.angle_deg[i];
        }
    }
    if (!any)
        throw std::invalid_argument("mask_compliance: mask angle range does not overlap the cut");
    report.pass = report.worst_margin_db >= 0.0;
    return report;
}

} // namespace mmwsim
