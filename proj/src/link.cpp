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

#include "mmwsim/link.hpp"
#include "mmwsim/signal.hpp"

#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

namespace mmwsim {

void validate(const LinkExperiment &experiment) {
    validate(experiment.ofdm);
    validate(experiment.allocation, experiment.ofdm);
    validate(experiment.ptrs);
    if (experiment.ofdm.n_tx != 1 || experiment.ofdm.n_rx != 1)
        throw std::invalid_argument("link-bler: single-stream (n_tx = n_rx = 1) only");
    if (experiment.snr_db.empty())
        throw std::invalid_argument("link-bler: snr_db list is empty");
    if (experiment.trials < 1)
        throw std::invalid_argument("link-bler: trials must be >= 1");
    if (experiment.pn) {
        validate(experiment.pn->params);
        // surfaces corner-above-Nyquist problems before any trial runs
        design_pn_filter(experiment.pn->params, experiment.pn->carrier_hz,
                         experiment.ofdm.sample_rate_hz());
    }
    make_fec(experiment.fec_kind); // throws on unknown kinds

    const auto fec = make_fec(experiment.fec_kind);
    const PtrsMap map = make_ptrs_map(experiment.allocation, experiment.ptrs);
    const Eigen::Index total_res =
        experiment.allocation.n_subcarriers() * PrbAllocation::symbols_per_slot;
    const Eigen::Index pilot_res = static_cast<Eigen::Index>(map.pilot_subcarriers.size()) *
                                   static_cast<Eigen::Index>(map.pilot_symbols.size());
    const Eigen::Index capacity =
        (total_res - pilot_res) * bits_per_symbol(experiment.ofdm.modulation);
    if (capacity / 2 < 6 + 16)
        throw std::invalid_argument("link-bler: FEC block size incompatible with the allocation "
                                    "(needs at least 16 information bits per slot)");
}

double wilson_halfwidth(Eigen::Index errors, Eigen::Index trials) {
    const double z = 1.959963984540054; // 95%
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2n = z * z / n;
    return z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
}

namespace {

struct SlotLayout {
    PtrsMap map;
    std::vector<Eigen::Index> data_sc;  // flattened data RE coordinates
    std::vector<int> data_sym;
    Eigen::Index data_res = 0;
    Eigen::Index pilot_res = 0;
    Eigen::Index info_bits = 0;
    Eigen::Index coded_capacity = 0;
};

SlotLayout plan_slot(const LinkExperiment &ex, const FecScheme &fec) {
    SlotLayout layout;
    layout.map = make_ptrs_map(ex.allocation, ex.ptrs);

    ResourceGrid marker = make_resource_grid(ex.allocation);
    insert_ptrs(marker, layout.map);
    for (int s = 0; s < PrbAllocation::symbols_per_slot; ++s)
        for (Eigen::Index sc = 0; sc < marker.re.rows(); ++sc)
            if (marker.kind(sc, s) == 0) {
                layout.data_sc.push_back(sc);
                layout.data_sym.push_back(s);
            }
    layout.data_res = static_cast<Eigen::Index>(layout.data_sc.size());
    layout.pilot_res = marker.re.size() - layout.data_res;
    layout.coded_capacity = layout.data_res * bits_per_symbol(ex.ofdm.modulation);
    // largest info block whose terminated codeword fits the data REs
    layout.info_bits = layout.coded_capacity / 2 - 6;
    (void)fec;
    return layout;
}

// stream ids per trial so any thread schedule reproduces the same bytes
enum TrialStream : std::uint64_t {
    kStreamBits = 0,
    kStreamPnTx = 1,
    kStreamPnRx = 2,
    kStreamNoise = 3,
    kStreamChannel = 4,
    kStreamsPerTrial = 8
};

bool run_single_trial(const LinkExperiment &ex, const SlotLayout &layout, const FecScheme &fec,
                      std::uint64_t seed, std::uint64_t point_index, std::uint64_t trial_index,
                      double snr_lin) {
    const Eigen::Index n = ex.ofdm.n_subcarriers;
    const Eigen::Index cp = ex.ofdm.cp_len;
    const Eigen::Index sym_len = n + cp;
    const int n_sym = PrbAllocation::symbols_per_slot;
    const Eigen::Index n_alloc = ex.allocation.n_subcarriers();
    const std::uint64_t base =
        (point_index * static_cast<std::uint64_t>(ex.trials) + trial_index) * kStreamsPerTrial;

    // 1) transport block
    RngStream bits_rng(seed, base + kStreamBits);
    std::vector<std::uint8_t> info(static_cast<std::size_t>(layout.info_bits));
    for (auto &b : info)
        b = bits_rng.bit() ? 1 : 0;
    std::vector<std::uint8_t> coded = fec.encode(info);
    coded.resize(static_cast<std::size_t>(layout.coded_capacity), 0); // filler bits

    const Eigen::VectorXcd data_symbols = map_bits(coded, ex.ofdm.modulation);

    ResourceGrid tx_grid = make_resource_grid(ex.allocation);
    insert_ptrs(tx_grid, layout.map);
    for (Eigen::Index i = 0; i < layout.data_res; ++i)
        tx_grid.re(layout.data_sc[static_cast<std::size_t>(i)],
                   layout.data_sym[static_cast<std::size_t>(i)]) = data_symbols[i];

    // 2) impairments
    Eigen::VectorXd theta_tx, theta_rx;
    if (ex.pn) {
        const Eigen::Index slot_samples = static_cast<Eigen::Index>(n_sym) * sym_len;
        if (ex.pn->apply_tx) {
            RngStream rng(seed, base + kStreamPnTx);
            theta_tx = synthesize_phase(ex.pn->params, ex.pn->carrier_hz,
                                        ex.ofdm.sample_rate_hz(), slot_samples, rng)
                           .phase_rad;
        }
        if (ex.pn->apply_rx) {
            RngStream rng(seed, base + kStreamPnRx);
            theta_rx = synthesize_phase(ex.pn->params, ex.pn->carrier_hz,
                                        ex.ofdm.sample_rate_hz(), slot_samples, rng)
                           .phase_rad;
        }
    }

    Eigen::VectorXcd h_freq; // scalar channel over the allocation
    if (ex.channel == ChannelKind::IidRayleighPerSubcarrier) {
        RngStream rng(seed, base + kStreamChannel);
        h_freq.resize(n_alloc);
        for (Eigen::Index k = 0; k < n_alloc; ++k)
            h_freq[k] = rng.normal_complex();
    } else {
        h_freq = Eigen::VectorXcd::Ones(n_alloc);
    }

    RngStream noise_rng(seed, base + kStreamNoise);
    const double noise_var_time = 1.0 / (static_cast<double>(n) * snr_lin);
    const double noise_scale = std::sqrt(noise_var_time);

    // 3) per-symbol chain: IFFT, PN, channel, PN, AWGN, FFT
    ResourceGrid rx_grid = make_resource_grid(ex.allocation);
    Eigen::VectorXcd x_freq = Eigen::VectorXcd::Zero(n);
    for (int s = 0; s < n_sym; ++s) {
        x_freq.setZero();
        x_freq.head(n_alloc) = tx_grid.re.col(s);
        Eigen::VectorXcd t = fft_inv(x_freq);

        const Eigen::Index core_start = static_cast<Eigen::Index>(s) * sym_len + cp;
        if (theta_tx.size() > 0)
            for (Eigen::Index i = 0; i < n; ++i)
                t[i] *= std::polar(1.0, theta_tx[core_start + i]);

        if (ex.channel == ChannelKind::IidRayleighPerSubcarrier) {
            Eigen::VectorXcd f = fft_fwd(t);
            f.head(n_alloc).array() *= h_freq.array();
            t = fft_inv(f);
        }

        if (theta_rx.size() > 0)
            for (Eigen::Index i = 0; i < n; ++i)
                t[i] *= std::polar(1.0, theta_rx[core_start + i]);

        for (Eigen::Index i = 0; i < n; ++i)
            t[i] += noise_scale * noise_rng.normal_complex();

        const Eigen::VectorXcd y_freq = fft_fwd(t);
        rx_grid.re.col(s) = y_freq.head(n_alloc);
    }

    // 4) receiver: CPE correction from PTRS, genie ZF equalization, decode
    if (ex.cpe_correction) {
        Eigen::VectorXcd h_pilots(static_cast<Eigen::Index>(layout.map.pilot_subcarriers.size()));
        for (std::size_t i = 0; i < layout.map.pilot_subcarriers.size(); ++i)
            h_pilots[static_cast<Eigen::Index>(i)] = h_freq[layout.map.pilot_subcarriers[i]];
        const Eigen::VectorXd est = estimate_cpe(rx_grid, layout.map, h_pilots);
        correct_cpe(rx_grid, est);
    }

    Eigen::VectorXcd eq(layout.data_res);
    for (Eigen::Index i = 0; i < layout.data_res; ++i) {
        const Eigen::Index sc = layout.data_sc[static_cast<std::size_t>(i)];
        eq[i] = rx_grid.re(sc, layout.data_sym[static_cast<std::size_t>(i)]) / h_freq[sc];
    }

    std::vector<std::uint8_t> rx_coded = hard_demap(eq, ex.ofdm.modulation);
    rx_coded.resize(fec.coded_length(info.size())); // drop filler positions
    const std::vector<std::uint8_t> decoded = fec.decode(rx_coded, info.size());
    return decoded != info; // block error
}

} // namespace

BlerResult run_bler(const LinkExperiment &experiment, std::uint64_t seed, int threads) {
    validate(experiment);
    if (threads < 1)
        threads = 1;
    const auto fec = make_fec(experiment.fec_kind);
    const SlotLayout layout = plan_slot(experiment, *fec);

    BlerResult result;
    result.data_res_per_slot = layout.data_res;
    result.pilot_res_per_slot = layout.pilot_res;
    result.info_bits_per_block = layout.info_bits;

    for (std::size_t p = 0; p < experiment.snr_db.size(); ++p) {
        const double snr_lin = std::pow(10.0, experiment.snr_db[p] / 10.0);
        std::atomic<Eigen::Index> next_trial{0};
        std::atomic<Eigen::Index> errors{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;

        auto worker = [&]() {
            Eigen::Index local_errors = 0;
            try {
                for (;;) {
                    const Eigen::Index i = next_trial.fetch_add(1);
                    if (i >= experiment.trials)
                        break;
                    if (run_single_trial(experiment, layout, *fec, seed,
                                         static_cast<std::uint64_t>(p),
                                         static_cast<std::uint64_t>(i), snr_lin))
                        ++local_errors;
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next_trial.store(experiment.trials); // drain remaining work
            }
            errors.fetch_add(local_errors);
        };

        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(threads));
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (failure)
            std::rethrow_exception(failure);

        BlerPoint point;
        point.snr_db = experiment.snr_db[p];
        point.trials = experiment.trials;
        point.block_errors = errors.load();
        point.bler = static_cast<double>(point.block_errors) / static_cast<double>(point.trials);
        point.ci_halfwidth = wilson_halfwidth(point.block_errors, point.trials);
        result.points.push_back(point);
    }
    return result;
}

} // namespace mmwsim
