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

#ifndef MMWSIM_ANTENNA_HPP
#define MMWSIM_ANTENNA_HPP

#include "mmwsim/types.hpp"

#include <optional>
#include <vector>

namespace mmwsim {

/// Periodic lattice description (spacings in wavelengths).
struct LatticeDescriptor {
    int rows = 1;
    int cols = 1;
    double spacing_x = 0.5;
    double spacing_y = 0.5;
};

/// Element positions in wavelengths (N x 3), optionally carrying the
/// lattice they were generated from.
struct ArrayGeometry {
    Eigen::MatrixXd positions; // one row per element: (x, y, z) in lambda
    std::optional<LatticeDescriptor> lattice;
};

/// Centered planar lattice in the z = 0 plane.
ArrayGeometry lattice_geometry(int rows, int cols, double spacing_x_lambda,
                               double spacing_y_lambda);

void validate(const ArrayGeometry &geometry);

enum class ElementKind { Isotropic, CosPower, Tabulated };

/// Single-element radiation pattern, rotationally symmetric about boresight.
/// CosPower uses field amplitude cos(theta)^q (zero behind the plane), whose
/// directivity is 2(2q+1); peak_gain_dbi must stay consistent with q.
struct ElementPattern {
    ElementKind kind = ElementKind::Isotropic;
    double q_exponent = 0.0;
    double peak_gain_dbi = 0.0;
    Eigen::VectorXd table_theta_rad; // Tabulated only
    Eigen::VectorXd table_gain_dbi;
};

/// Cos-power element whose integrated directivity equals peak_gain_dbi.
ElementPattern cos_power_element_from_gain(double peak_gain_dbi);

void validate(const ElementPattern &element);

/// Element gain in dBi at angle theta off boresight (-inf behind a
/// cos-power element).
double element_gain_dbi(const ElementPattern &element, double theta_rad);

/// Per-element complex excitation.
struct BeamWeights {
    Eigen::VectorXcd weights;
    std::optional<int> quantization_bits;
};

/// Evaluation grid: theta strictly increasing; phi strictly increasing and
/// treated as periodic (no duplicated endpoint).
struct PatternGrid {
    Eigen::VectorXd theta_rad;
    Eigen::VectorXd phi_rad;
};

PatternGrid sphere_grid(double step_deg = 2.0);
PatternGrid hemisphere_grid(double step_deg = 2.0);
/// Two-phi grid {phi, phi+180 deg} over theta in [0, 90 deg]: one principal cut.
PatternGrid cut_grid(double phi_deg, double step_deg = 0.5);

enum class PatternCoverage { FullSphere, Hemisphere, Cut };
enum class PatternReference { Isotropic, SingleElement };

/// Sampled far-field pattern; gain_db is (theta x phi).
struct FarFieldPattern {
    Eigen::VectorXd theta_rad;
    Eigen::VectorXd phi_rad;
    Eigen::MatrixXd gain_db;
    PatternCoverage coverage = PatternCoverage::FullSphere;
    PatternReference reference = PatternReference::Isotropic;
    double peak_gain_db = 0.0;
    double peak_theta_rad = 0.0;
    double peak_phi_rad = 0.0;
};

/// Recompute (and store) the peak entry from the sampled values.
void refresh_peak(FarFieldPattern &pattern);

/// Unit-magnitude conjugate-phase steering weights for direction
/// (theta0, phi0): w_m = exp(-j 2 pi r_m . u(theta0, phi0)).
BeamWeights steering_weights(const ArrayGeometry &geometry, double theta0_rad, double phi0_rad);

/// Snap each weight's phase to the nearest of 2^bits states spaced
/// 360/2^bits degrees apart; ties break toward the lower state. Magnitudes
/// are preserved.
BeamWeights quantize_phase(const BeamWeights &weights, int bits);

/// Array factor AF = sum_m w_m exp(+j 2 pi r_m . u), stored as
/// 20*log10|AF| relative to a single unit-weight element.
FarFieldPattern array_factor(const ArrayGeometry &geometry, const BeamWeights &weights,
                             const PatternGrid &grid, PatternCoverage coverage);

/// Pattern multiplication: array factor plus element gain, in dBi.
FarFieldPattern total_pattern(const FarFieldPattern &af, const ElementPattern &element);

/// Sphere/hemisphere integral of the linear intensity (sr-weighted).
double integrated_intensity(const FarFieldPattern &pattern);

struct DirectivityResult {
    double dbi = 0.0;
    bool grid_warning = false; // quadrature self-check exceeded 0.1 dB
};

/// 4 pi * peak / integrated intensity on the stored grid. Requires sphere
/// or hemisphere coverage.
DirectivityResult directivity(const FarFieldPattern &pattern);

/// Widest scan angle (degrees) keeping grating lobes out of visible space:
/// asin(1/d - 1) for 0.5 < d < 1; 90 for d <= 0.5; 0 for d >= 1.
double grating_lobe_limit(double spacing_lambda);

/// Transmitarray description (flat lens of phase-shifting cells fed by a
/// focal horn).
struct TransmitarrayConfig {
    int uc_rows = 20;
    int uc_cols = 20;
    double uc_size_mm = 5.0;
    double focal_distance_mm = 60.0;
    double fs_gain_dbi = 10.0;
    int phase_bits = 1; // 1 | 2 | 3
    double frequency_ghz = 26.0;
};

void validate(const TransmitarrayConfig &config);

/// Mean phase-quantization efficiency loss -20*log10(sinc(2^-bits)) in dB.
double phase_quantization_loss_db(int bits);

struct TransmitarrayBudget {
    double wavelength_mm = 0.0;
    double feed_q = 0.0;
    double aperture_directivity_dbi = 0.0;
    double spillover_loss_db = 0.0;
    double taper_loss_db = 0.0;
    double quantization_loss_db = 0.0;
    double net_gain_dbi = 0.0;
};

/// Analytic gain budget: physical-aperture directivity minus spillover,
/// taper, and quantization losses, with a cos-power feed matched to
/// fs_gain_dbi integrated over the array rim.
TransmitarrayBudget transmitarray_budget(const TransmitarrayConfig &config);

/// Far field of the fed, phase-compensated, phase-quantized aperture.
/// Feed illumination sets the amplitudes; the spherical-wave path phase is
/// compensated by each cell's quantized transmission phase. cell_q < 0
/// selects a default matched to the unit-cell area.
FarFieldPattern transmitarray_pattern(const TransmitarrayConfig &config, const PatternGrid &grid,
                                      PatternCoverage coverage, double cell_q = -1.0);

/// Piecewise-linear envelope: (angle off boresight, max level relative to
/// peak). Angles strictly increasing, in degrees.
struct RadiationMask {
    std::vector<std::pair<double, double>> points;
};

void validate(const RadiationMask &mask);

struct MaskReport {
    bool pass = false;
    double worst_margin_db = 0.0;
    double worst_angle_deg = 0.0;
};

/// One principal cut as (signed angle deg, dB relative to pattern peak).
/// The pattern grid must contain phi and phi+180 columns.
struct PatternCut {
    Eigen::VectorXd angle_deg;
    Eigen::VectorXd rel_db;
};

PatternCut extract_cut(const FarFieldPattern &pattern, double phi_deg);

/// Compare a principal cut against the mask; the margin is mask minus
/// pattern (negative where the pattern pokes through). Only cut angles
/// inside the mask's angle range participate.
MaskReport mask_compliance(const FarFieldPattern &pattern, const RadiationMask &mask,
                           double cut_phi_deg);

} // namespace mmwsim

#endif
