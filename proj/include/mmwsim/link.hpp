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

#ifndef MMWSIM_LINK_HPP
#define MMWSIM_LINK_HPP

#include "mmwsim/fec.hpp"
#include "mmwsim/ofdm.hpp"
#include "mmwsim/phase_noise.hpp"

#include <optional>

namespace mmwsim {

enum class ChannelKind { FlatAwgn, IidRayleighPerSubcarrier };

/// Oscillator impairment attached to the link. The trajectory is sampled
/// at one sample per OFDM time-domain sample; CP samples consume phase
/// samples but are discarded at the receiver, so common phase error stays
/// continuous from symbol to symbol.
struct PnLinkConfig {
    PoleZeroPnParams params;
    double carrier_hz = 30e9;
    bool apply_tx = true;
    bool apply_rx = false;
};

/// Full Monte-Carlo experiment description for one BLER curve.
struct LinkExperiment {
    OfdmConfig ofdm;
    PrbAllocation allocation;
    PtrsConfig ptrs;
    std::optional<PnLinkConfig> pn; // nullopt = clean oscillator
    ChannelKind channel = ChannelKind::FlatAwgn;
    std::vector<double> snr_db;
    Eigen::Index trials = 1000;
    bool cpe_correction = true;
    std::string fec_kind = "conv-k7-r12";
};

void validate(const LinkExperiment &experiment);

struct BlerPoint {
    double snr_db = 0.0;
    double bler = 0.0;
    double ci_halfwidth = 0.0; // 95% Wilson interval
    Eigen::Index trials = 0;
    Eigen::Index block_errors = 0;
};

struct BlerResult {
    std::vector<BlerPoint> points;
    Eigen::Index data_res_per_slot = 0;  // spectral-efficiency denominator
    Eigen::Index pilot_res_per_slot = 0;
    Eigen::Index info_bits_per_block = 0;
};

/// One transport block per 7-symbol slot: encode, map, OFDM-modulate, run
/// through phase noise + channel + AWGN, PTRS-based CPE correction (when
/// enabled), genie equalization, demap, decode, count block errors.
/// Trials are independent units of work with their own RNG streams, so the
/// result is bit-identical for any thread count.
BlerResult run_bler(const LinkExperiment &experiment, std::uint64_t seed, int threads = 1);

/// 95% Wilson score interval half-width for e errors out of n trials.
double wilson_halfwidth(Eigen::Index errors, Eigen::Index trials);

} // namespace mmwsim

#endif
