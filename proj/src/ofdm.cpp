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

#include "mmwsim/ofdm.hpp"
#include "mmwsim/signal.hpp"

#include <cmath>

namespace mmwsim {

// ----------------------------------------------------------- modulation ---

int bits_per_symbol(Modulation mod) {
    switch (mod) {
    case Modulation::Qpsk:
        return 2;
    case Modulation::Qam16:
        return 4;
    case Modulation::Qam64:
        return 6;
    }
    return 0;
}

namespace {

int gray_decode(int g) {
    int b = 0;
    for (; g; g >>= 1)
        b ^= g;
    return b;
}

int gray_encode(int b) { return b ^ (b >> 1); }

double qam_scale(Modulation mod) {
    switch (mod) {
    case Modulation::Qpsk:
        return std::sqrt(2.0);
    case Modulation::Qam16:
        return std::sqrt(10.0);
    case Modulation::Qam64:
        return std::sqrt(42.0);
    }
    return 1.0;
}

// Gray PAM: m bits -> amplitude level in {-(2^m-1), ..., -1, +1, ..., +(2^m-1)}
double pam_level(int bits_value, int m) {
    const int idx = gray_decode(bits_value);
    return static_cast<double>(2 * idx - ((1 << m) - 1));
}

int pam_demap(double amp, int m) {
    const int n_levels = 1 << m;
    int idx = static_cast<int>(std::lround((amp + (n_levels - 1)) / 2.0));
    idx = std::clamp(idx, 0, n_levels - 1);
    return gray_encode(idx);
}

} // namespace

Eigen::VectorXcd map_bits(const std::vector<std::uint8_t> &bits, Modulation mod) {
    const int bps = bits_per_symbol(mod);
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw std::invalid_argument("map_bits: bit count must be a multiple of bits-per-symbol");
    const int m = bps / 2;
    const double scale = qam_scale(mod);
    const std::size_t n = bits.size() / static_cast<std::size_t>(bps);
    Eigen::VectorXcd out(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
        int vi = 0, vq = 0;
        for (int b = 0; b < bps; ++b) {
            const int bit = bits[s * static_cast<std::size_t>(bps) + static_cast<std::size_t>(b)] & 1;
            if (b % 2 == 0)
                vi = (vi << 1) | bit;
            else
                vq = (vq << 1) | bit;
        }
        out[static_cast<Eigen::Index>(s)] =
            cplx(pam_level(vi, m), pam_level(vq, m)) / scale;
    }
    return out;
}

std::vector<std::uint8_t> hard_demap(const Eigen::VectorXcd &symbols, Modulation mod) {
    const int bps = bits_per_symbol(mod);
    const int m = bps / 2;
    const double scale = qam_scale(mod);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(symbols.size()) *
                                   static_cast<std::size_t>(bps));
    for (Eigen::Index s = 0; s < symbols.size(); ++s) {
        const int vi = pam_demap(symbols[s].real() * scale, m);
        const int vq = pam_demap(symbols[s].imag() * scale, m);
        for (int b = 0; b < bps; ++b) {
            const int src = (b % 2 == 0) ? vi : vq;
            const int shift = m - 1 - b / 2;
            bits[static_cast<std::size_t>(s) * static_cast<std::size_t>(bps) +
                 static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((src >> shift) & 1);
        }
    }
    return bits;
}

// ------------------------------------------------------------- validate ---

void validate(const OfdmConfig &config) {
    const Eigen::Index n = config.n_subcarriers;
    if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("n_subcarriers: must be a power of two >= 8");
    if (config.cp_len < 0 || config.cp_len >= n)
        throw std::invalid_argument("cp_len: must be in [0, n_subcarriers)");
    if (!(config.subcarrier_spacing_hz > 0.0))
        throw std::invalid_argument("subcarrier_spacing_hz: must be > 0");
    if (config.n_tx < 1 || config.n_rx < 1)
        throw std::invalid_argument("n_tx/n_rx: must be >= 1");
}

void validate(const PrbAllocation &alloc, const OfdmConfig &config) {
    if (alloc.n_prbs < 1)
        throw std::invalid_argument("n_prbs: must be >= 1");
    if (alloc.n_subcarriers() > config.n_subcarriers)
        throw std::invalid_argument("n_prbs: allocation exceeds the FFT size (12 x n_prbs > N)");
}

void validate(const PtrsConfig &config) {
    const int l = config.freq_density_l;
    if (l != 1 && l != 2 && l != 4 && l != 8 && l != 16)
        throw std::invalid_argument("freq_density_l: must be one of {1, 2, 4, 8, 16}");
    const int k = config.time_density_k;
    if (k != 1 && k != 2 && k != 4)
        throw std::invalid_argument("time_density_k: must be one of {1, 2, 4}");
}

// ----------------------------------------------------------------- PTRS ---

PtrsMap make_ptrsmap_impl(const PrbAllocation &alloc, const PtrsConfig &config, int n_symbols) {
    PtrsMap map;
    for (int group = 0; group * config.freq_density_l < alloc.n_prbs; ++group)
        map.pilot_subcarriers.push_back(static_cast<Eigen::Index>(group) *
                                        config.freq_density_l * PrbAllocation::subcarriers_per_prb);
    for (int s = 0; s < n_symbols; ++s)
        if (s % config.time_density_k == 0)
            map.pilot_symbols.push_back(s);

    // deterministic unit-magnitude QPSK pilots
    RngStream rng(config.pilot_seed, 0);
    const Eigen::Index np = static_cast<Eigen::Index>(map.pilot_subcarriers.size());
    const Eigen::Index ns = static_cast<Eigen::Index>(map.pilot_symbols.size());
    map.pilot_values.resize(np, ns);
    for (Eigen::Index j = 0; j < ns; ++j)
        for (Eigen::Index i = 0; i < np; ++i) {
            const int b0 = rng.bit() ? 1 : 0;
            const int b1 = rng.bit() ? 1 : 0;
            map.pilot_values(i, j) = cplx((b0 ? -1.0 : 1.0) / std::sqrt(2.0),
                                          (b1 ? -1.0 : 1.0) / std::sqrt(2.0));
        }
    return map;
}

PtrsMap make_ptrs_map(const PrbAllocation &alloc, const PtrsConfig &config, int n_symbols) {
    validate(config);
    if (alloc.n_prbs < 1)
        throw std::invalid_argument("make_ptrs_map: allocation too small to host any PTRS");
    if (n_symbols < 1)
        throw std::invalid_argument("make_ptrs_map: need at least one symbol");
    return make_ptrsmap_impl(alloc, config, n_symbols);
}

ResourceGrid make_resource_grid(const PrbAllocation &alloc, int n_symbols) {
    ResourceGrid grid;
    grid.re = Eigen::MatrixXcd::Zero(alloc.n_subcarriers(), n_symbols);
    grid.kind = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(
        alloc.n_subcarriers(), n_symbols);
    return grid;
}

void insert_ptrs(ResourceGrid &grid, const PtrsMap &map) {
    for (std::size_t j = 0; j < map.pilot_symbols.size(); ++j)
        for (std::size_t i = 0; i < map.pilot_subcarriers.size(); ++i) {
            const Eigen::Index sc = map.pilot_subcarriers[i];
            const int sym = map.pilot_symbols[j];
            if (sc >= grid.re.rows() || sym >= grid.re.cols())
                throw std::invalid_argument("insert_ptrs: pilot position outside the grid");
            grid.re(sc, sym) = map.pilot_values(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(j));
            grid.kind(sc, sym) = 1;
        }
}

// ------------------------------------------------------------ PN algebra ---

Eigen::VectorXcd pn_dft_coeffs(const Eigen::VectorXd &theta_segment) {
    const Eigen::Index n = theta_segment.size();
    if (n < 1)
        throw std::invalid_argument("pn_dft_coeffs: empty phase segment");
    Eigen::VectorXcd e(n);
    for (Eigen::Index i = 0; i < n; ++i)
        e[i] = std::polar(1.0, theta_segment[i]);
    return fft_fwd(e) / static_cast<double>(n);
}

Eigen::MatrixXcd build_pn_matrix(const Eigen::VectorXcd &g) {
    const Eigen::Index n = g.size();
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
            m(k, l) = g[(k - l + n) % n];
    return m;
}

PnMatrices make_pn_matrices(const Eigen::VectorXd &theta_tx, const Eigen::VectorXd &theta_rx) {
    if (theta_tx.size() != theta_rx.size())
        throw std::invalid_argument("make_pn_matrices: phase segments must have equal length");
    PnMatrices m;
    m.g_tx = pn_dft_coeffs(theta_tx);
    m.g_rx = pn_dft_coeffs(theta_rx);
    return m;
}

void validate(const PnMatrices &matrices) {
    if (matrices.g_tx.size() != matrices.g_rx.size() || matrices.g_tx.size() < 1)
        throw std::invalid_argument("PnMatrices: g vectors must be non-empty and equal length");
    for (const auto *g : {&matrices.g_tx, &matrices.g_rx})
        if (std::abs(g->squaredNorm() - 1.0) > 1e-12)
            throw std::invalid_argument("PnMatrices: sum |g_k|^2 must equal 1");
}

ChannelRealization flat_channel(Eigen::Index n_subcarriers, int n_rx, int n_tx) {
    ChannelRealization h;
    h.blocks.assign(static_cast<std::size_t>(n_subcarriers),
                    Eigen::MatrixXcd::Identity(n_rx, n_tx));
    return h;
}

ChannelRealization iid_rayleigh_channel(Eigen::Index n_subcarriers, int n_rx, int n_tx,
                                        RngStream &rng) {
    ChannelRealization h;
    h.blocks.resize(static_cast<std::size_t>(n_subcarriers));
    for (auto &blk : h.blocks) {
        blk.resize(n_rx, n_tx);
        for (Eigen::Index r = 0; r < n_rx; ++r)
            for (Eigen::Index t = 0; t < n_tx; ++t)
                blk(r, t) = rng.normal_complex();
    }
    return h;
}

namespace {

void check_model_dims(const ChannelRealization &h, const Eigen::VectorXcd &g_tx,
                      const Eigen::VectorXcd &g_rx, const Eigen::VectorXcd &x, Eigen::Index &n,
                      Eigen::Index &n_rx, Eigen::Index &n_tx) {
    n = static_cast<Eigen::Index>(h.blocks.size());
    if (n == 0)
        throw std::invalid_argument("channel: no subcarrier blocks");
    n_rx = h.blocks.front().rows();
    n_tx = h.blocks.front().cols();
    if (g_tx.size() != n || g_rx.size() != n)
        throw std::invalid_argument("pn model: g vector length must equal the subcarrier count");
    if (x.size() != n * n_tx)
        throw std::invalid_argument("pn model: stacked input must have N * N_T entries");
}

// out_k = sum_l g_{(k-l) mod N} v_l on P-sized blocks (circulant block mixing)
Eigen::VectorXcd circulant_block_apply(const Eigen::VectorXcd &g, const Eigen::VectorXcd &v,
                                       Eigen::Index block) {
    const Eigen::Index n = g.size();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l) {
            const cplx gkl = g[(k - l + n) % n];
            if (gkl != cplx(0.0, 0.0))
                out.segment(k * block, block) += gkl * v.segment(l * block, block);
        }
    return out;
}

Eigen::VectorXcd block_diag_channel_apply(const ChannelRealization &h, const Eigen::VectorXcd &u,
                                          Eigen::Index n_rx, Eigen::Index n_tx) {
    const Eigen::Index n = static_cast<Eigen::Index>(h.blocks.size());
    Eigen::VectorXcd v(n * n_rx);
    for (Eigen::Index k = 0; k < n; ++k)
        v.segment(k * n_rx, n_rx) =
            h.blocks[static_cast<std::size_t>(k)] * u.segment(k * n_tx, n_tx);
    return v;
}

} // namespace

Eigen::VectorXcd apply_pn_matrix_model(const ChannelRealization &h, const Eigen::VectorXcd &g_tx,
                                       const Eigen::VectorXcd &g_rx, const Eigen::VectorXcd &x,
                                       double noise_variance, RngStream *rng) {
    Eigen::Index n, n_rx, n_tx;
    check_model_dims(h, g_tx, g_rx, x, n, n_rx, n_tx);

    const Eigen::VectorXcd u = circulant_block_apply(g_tx, x, n_tx);
    const Eigen::VectorXcd v = block_diag_channel_apply(h, u, n_rx, n_tx);
    Eigen::VectorXcd y = circulant_block_apply(g_rx, v, n_rx);

    if (noise_variance < 0.0)
        throw std::invalid_argument("apply_pn_matrix_model: noise_variance must be >= 0");
    if (noise_variance > 0.0) {
        if (rng == nullptr)
            throw std::invalid_argument("apply_pn_matrix_model: noise needs an RngStream");
        const double s = std::sqrt(noise_variance);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y[i] += s * rng->normal_complex();
    }
    return y;
}

Eigen::VectorXcd apply_pn_time_domain(const ChannelRealization &h, const Eigen::VectorXd &theta_tx,
                                      const Eigen::VectorXd &theta_rx,
                                      const Eigen::VectorXcd &x_freq) {
    Eigen::Index n, n_rx, n_tx;
    {
        Eigen::VectorXcd g_dummy = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(h.blocks.size()));
        check_model_dims(h, g_dummy, g_dummy, x_freq, n, n_rx, n_tx);
    }
    if (theta_tx.size() != n || theta_rx.size() != n)
        throw std::invalid_argument("apply_pn_time_domain: phase segments must have N samples");

    Eigen::VectorXcd mod_tx(n), mod_rx(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        mod_tx[i] = std::polar(1.0, theta_tx[i]);
        mod_rx[i] = std::polar(1.0, theta_rx[i]);
    }

    // per TX antenna: freq -> time, phase, back to freq
    Eigen::MatrixXcd s_freq(n, n_tx);
    for (Eigen::Index t = 0; t < n_tx; ++t) {
        Eigen::VectorXcd xk(n);
        for (Eigen::Index k = 0; k < n; ++k)
            xk[k] = x_freq[k * n_tx + t];
        s_freq.col(t) = fft_fwd(fft_inv(xk).cwiseProduct(mod_tx));
    }

    // per-subcarrier channel, then RX phase per receive antenna
    Eigen::VectorXcd y(n * n_rx);
    for (Eigen::Index r = 0; r < n_rx; ++r) {
        Eigen::VectorXcd vk(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            cplx acc = 0.0;
            for (Eigen::Index t = 0; t < n_tx; ++t)
                acc += h.blocks[static_cast<std::size_t>(k)](r, t) * s_freq(k, t);
            vk[k] = acc;
        }
        const Eigen::VectorXcd yk = fft_fwd(fft_inv(vk).cwiseProduct(mod_rx));
        for (Eigen::Index k = 0; k < n; ++k)
            y[k * n_rx + r] = yk[k];
    }
    return y;
}

CpeIciDecomposition decompose_cpe_ici(const ChannelRealization &h, const Eigen::VectorXcd &g_tx,
                                      const Eigen::VectorXcd &g_rx, const Eigen::VectorXcd &x) {
    Eigen::Index n, n_rx, n_tx;
    check_model_dims(h, g_tx, g_rx, x, n, n_rx, n_tx);

    const cplx g0_tx = g_tx[0];
    const cplx g0_rx = g_rx[0];
    Eigen::VectorXcd p_tx = g_tx;
    Eigen::VectorXcd p_rx = g_rx;
    p_tx[0] = 0.0;
    p_rx[0] = 0.0;

    CpeIciDecomposition d;
    d.cpe_term = g0_rx * g0_tx * block_diag_channel_apply(h, x, n_rx, n_tx);

    const Eigen::VectorXcd pt_x = circulant_block_apply(p_tx, x, n_tx);
    const Eigen::VectorXcd h_pt_x = block_diag_channel_apply(h, pt_x, n_rx, n_tx);
    const Eigen::VectorXcd h_x = block_diag_channel_apply(h, x, n_rx, n_tx);
    d.ici_term = circulant_block_apply(p_rx, h_pt_x, n_rx) + g0_rx * h_pt_x +
                 g0_tx * circulant_block_apply(p_rx, h_x, n_rx);
    return d;
}

// ------------------------------------------------------- CPE estimation ---

Eigen::VectorXd estimate_cpe(const ResourceGrid &rx_grid, const PtrsMap &map,
                             const Eigen::VectorXcd &h_at_pilots) {
    if (map.pilot_subcarriers.empty() || map.pilot_symbols.empty())
        throw std::invalid_argument("estimate_cpe: no PTRS in the slot");
    if (h_at_pilots.size() != static_cast<Eigen::Index>(map.pilot_subcarriers.size()))
        throw std::invalid_argument("estimate_cpe: channel vector must cover every pilot subcarrier");

    const Eigen::Index n_symbols = rx_grid.re.cols();
    const Eigen::Index nb = static_cast<Eigen::Index>(map.pilot_symbols.size());

    Eigen::VectorXd bearing_phase(nb);
    for (Eigen::Index j = 0; j < nb; ++j) {
        const int sym = map.pilot_symbols[static_cast<std::size_t>(j)];
        cplx corr = 0.0;
        for (std::size_t i = 0; i < map.pilot_subcarriers.size(); ++i) {
            const Eigen::Index sc = map.pilot_subcarriers[i];
            const cplx expected =
                h_at_pilots[static_cast<Eigen::Index>(i)] *
                map.pilot_values(static_cast<Eigen::Index>(i), j);
            corr += rx_grid.re(sc, sym) * std::conj(expected);
        }
        bearing_phase[j] = std::arg(corr);
    }

    // unwrap across bearing symbols so interpolation crosses +-pi cleanly
    for (Eigen::Index j = 1; j < nb; ++j) {
        double d = bearing_phase[j] - bearing_phase[j - 1];
        d = std::remainder(d, 2.0 * pi);
        bearing_phase[j] = bearing_phase[j - 1] + d;
    }

    Eigen::VectorXd est(n_symbols);
    for (Eigen::Index s = 0; s < n_symbols; ++s) {
        const double sym = static_cast<double>(s);
        const double first = map.pilot_symbols.front();
        const double last = map.pilot_symbols.back();
        if (sym <= first) {
            est[s] = bearing_phase[0];
        } else if (sym >= last) {
            est[s] = bearing_phase[nb - 1];
        } else {
            Eigen::Index j = 0;
            while (map.pilot_symbols[static_cast<std::size_t>(j + 1)] < s)
                ++j;
            const double s0 = map.pilot_symbols[static_cast<std::size_t>(j)];
            const double s1 = map.pilot_symbols[static_cast<std::size_t>(j + 1)];
            const double f = (sym - s0) / (s1 - s0);
            est[s] = bearing_phase[j] + f * (bearing_phase[j + 1] - bearing_phase[j]);
        }
    }
    return est;
}

void correct_cpe(ResourceGrid &grid, const Eigen::VectorXd &estimates) {
    if (estimates.size() != grid.re.cols())
        throw std::invalid_argument("correct_cpe: one estimate per symbol required");
    for (Eigen::Index s = 0; s < grid.re.cols(); ++s)
        grid.re.col(s) *= std::polar(1.0, -estimates[s]);
}

} // namespace mmwsim
