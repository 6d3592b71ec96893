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

#ifndef MMWSIM_OFDM_HPP
#define MMWSIM_OFDM_HPP

#include "mmwsim/rng.hpp"
#include "mmwsim/types.hpp"

#include <cstdint>
#include <vector>

namespace mmwsim {

enum class Modulation { Qpsk, Qam16, Qam64 };

int bits_per_symbol(Modulation mod);

/// Gray-mapped unit-average-power constellation point from bits_per_symbol
/// bits (even positions go to I, odd to Q).
Eigen::VectorXcd map_bits(const std::vector<std::uint8_t> &bits, Modulation mod);

/// Nearest-point hard demapping, inverse of map_bits.
std::vector<std::uint8_t> hard_demap(const Eigen::VectorXcd &symbols, Modulation mod);

/// OFDM numerology and MIMO dimensions.
struct OfdmConfig {
    Eigen::Index n_subcarriers = 2048; // power of two, >= 8
    Eigen::Index cp_len = 144;
    double subcarrier_spacing_hz = 120e3;
    int n_tx = 1;
    int n_rx = 1;
    Modulation modulation = Modulation::Qam64;

    double sample_rate_hz() const {
        return static_cast<double>(n_subcarriers) * subcarrier_spacing_hz;
    }
};

void validate(const OfdmConfig &config);

/// Resource allocation in PRB units (12 subcarriers x 7 symbols each).
struct PrbAllocation {
    int n_prbs = 1;
    static constexpr int subcarriers_per_prb = 12;
    static constexpr int symbols_per_slot = 7;

    Eigen::Index n_subcarriers() const {
        return static_cast<Eigen::Index>(n_prbs) * subcarriers_per_prb;
    }
};

void validate(const PrbAllocation &alloc, const OfdmConfig &config);

/// Phase-tracking pilot layout: one pilot subcarrier per freq_density_l
/// PRBs (subcarrier 0 of the first PRB of each group), present in symbols
/// where index % time_density_k == 0. Pilot values are unit-magnitude QPSK
/// drawn deterministically from pilot_seed.
struct PtrsConfig {
    int freq_density_l = 4;  // 1 | 2 | 4 | 8 | 16
    int time_density_k = 1;  // 1 | 2 | 4
    std::uint64_t pilot_seed = 1;
};

void validate(const PtrsConfig &config);

/// Concrete pilot positions and values for one slot.
struct PtrsMap {
    std::vector<Eigen::Index> pilot_subcarriers; // within the allocation
    std::vector<int> pilot_symbols;              // bearing symbol indices
    Eigen::MatrixXcd pilot_values;               // (subcarrier, bearing symbol)
};

PtrsMap make_ptrs_map(const PrbAllocation &alloc, const PtrsConfig &config,
                      int n_symbols = PrbAllocation::symbols_per_slot);

/// One slot of resource elements (allocation subcarriers x symbols).
/// kind: 0 = data, 1 = PTRS.
struct ResourceGrid {
    Eigen::MatrixXcd re;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> kind;
};

ResourceGrid make_resource_grid(const PrbAllocation &alloc,
                                int n_symbols = PrbAllocation::symbols_per_slot);

/// Write the pilot values into the grid and mark their positions.
void insert_ptrs(ResourceGrid &grid, const PtrsMap &map);

/// g_k = (1/N) sum_n exp(j theta_n) exp(-j 2 pi n k / N); zero phase gives
/// g = (1, 0, ..., 0) and sum_k |g_k|^2 = 1.
Eigen::VectorXcd pn_dft_coeffs(const Eigen::VectorXd &theta_segment);

/// N x N circulant with first column g (entry (k,l) = g_{(k-l) mod N}).
Eigen::MatrixXcd build_pn_matrix(const Eigen::VectorXcd &g);

/// Transmit/receive PN coefficient pair for one OFDM symbol.
struct PnMatrices {
    Eigen::VectorXcd g_tx;
    Eigen::VectorXcd g_rx;
};

PnMatrices make_pn_matrices(const Eigen::VectorXd &theta_tx, const Eigen::VectorXd &theta_rx);

/// Checks the normalization invariants: equal lengths and sum |g_k|^2 = 1
/// on both sides (exact for unit-modulus phase exponentials).
void validate(const PnMatrices &matrices);

/// Per-subcarrier MIMO channel: blocks[k] is N_R x N_T.
struct ChannelRealization {
    std::vector<Eigen::MatrixXcd> blocks;
};

ChannelRealization flat_channel(Eigen::Index n_subcarriers, int n_rx, int n_tx);
ChannelRealization iid_rayleigh_channel(Eigen::Index n_subcarriers, int n_rx, int n_tx,
                                        RngStream &rng);

/// Frequency-domain MIMO-OFDM signal model
///   y = (G_R (x) I_NR) H (G_T (x) I_NT) x + w
/// applied block-circulantly (no Kronecker product is materialized).
/// x is stacked subcarrier-major: x[k*N_T + t]. noise_variance > 0 draws
/// w ~ CN(0, noise_variance I) from rng.
Eigen::VectorXcd apply_pn_matrix_model(const ChannelRealization &h, const Eigen::VectorXcd &g_tx,
                                       const Eigen::VectorXcd &g_rx, const Eigen::VectorXcd &x,
                                       double noise_variance = 0.0, RngStream *rng = nullptr);

/// Same model realized in the time domain: per receive antenna
/// DFT{ exp(j theta_rx) . circconv(h, exp(j theta_tx) . IDFT{x}) }.
Eigen::VectorXcd apply_pn_time_domain(const ChannelRealization &h,
                                      const Eigen::VectorXd &theta_tx,
                                      const Eigen::VectorXd &theta_rx,
                                      const Eigen::VectorXcd &x_freq);

struct CpeIciDecomposition {
    Eigen::VectorXcd cpe_term; // g0_rx g0_tx H x
    Eigen::VectorXcd ici_term; // e, everything that leaks across subcarriers
};

/// Exact split of the noiseless model output into the common-phase-error
/// term and the inter-carrier-interference term; the two sum back to the
/// full output.
CpeIciDecomposition decompose_cpe_ici(const ChannelRealization &h, const Eigen::VectorXcd &g_tx,
                                      const Eigen::VectorXcd &g_rx, const Eigen::VectorXcd &x);

/// Per-symbol common-phase estimates from the pilots. h_at_pilots holds the
/// (genie) scalar channel at each pilot subcarrier. Bearing symbols use the
/// matched correlator arg sum y conj(H p); other symbols interpolate the
/// unwrapped bearing phases linearly (edges take the nearest estimate).
Eigen::VectorXd estimate_cpe(const ResourceGrid &rx_grid, const PtrsMap &map,
                             const Eigen::VectorXcd &h_at_pilots);

/// Multiply every resource element of symbol s by exp(-j estimates[s]).
void correct_cpe(ResourceGrid &grid, const Eigen::VectorXd &estimates);

} // namespace mmwsim

#endif
