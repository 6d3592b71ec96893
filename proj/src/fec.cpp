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

#include "mmwsim/fec.hpp"

#include <bit>
#include <array>
#include <stdexcept>

namespace mmwsim {

namespace {
constexpr unsigned kG0 = 0133; // taps on bits 6,4,3,1,0
constexpr unsigned kG1 = 0171; // taps on bits 6,5,4,3,0
constexpr int kStates = 64;
} // namespace

ConvolutionalCodeK7::ConvolutionalCodeK7() {
    for (unsigned reg = 0; reg < 128; ++reg) {
        const unsigned b0 = std::popcount(reg & kG0) & 1u;
        const unsigned b1 = std::popcount(reg & kG1) & 1u;
        out_pair_[reg] = static_cast<std::uint8_t>((b0 << 1) | b1);
    }
}

std::vector<std::uint8_t> ConvolutionalCodeK7::encode(const std::vector<std::uint8_t> &info) const {
    std::vector<std::uint8_t> coded;
    coded.reserve(coded_length(info.size()));
    unsigned state = 0; // most recent 6 bits, newest in bit 5
    auto push = [&](unsigned bit) {
        const unsigned reg = (bit << 6) | state;
        const std::uint8_t out = out_pair_[reg];
        coded.push_back(static_cast<std::uint8_t>((out >> 1) & 1));
        coded.push_back(static_cast<std::uint8_t>(out & 1));
        state = (reg >> 1) & 0x3F;
    };
    for (std::uint8_t b : info)
        push(b & 1u);
    for (int i = 0; i < 6; ++i) // zero tail drives the register home
        push(0);
    return coded;
}

std::vector<std::uint8_t> ConvolutionalCodeK7::decode(const std::vector<std::uint8_t> &coded,
                                                      std::size_t n_info) const {
    const std::size_t n_steps = n_info + 6;
    if (coded.size() != 2 * n_steps)
        throw std::invalid_argument("viterbi: coded length must be 2*(n_info+6)");

    // unreachable states start large; per-step costs are <= 2 so no overflow
    constexpr int kFar = 1 << 24;
    int metric[kStates], next_metric[kStates];
    for (int s = 0; s < kStates; ++s)
        metric[s] = kFar;
    metric[0] = 0; // encoder starts in the all-zero state
    std::vector<std::uint8_t> decisions(n_steps * kStates);

    // branch costs for both halves of the trellis, refreshed per step
    int bc0[kStates], bc1[kStates];
    for (std::size_t step = 0; step < n_steps; ++step) {
        const unsigned r = (static_cast<unsigned>(coded[2 * step] & 1) << 1) |
                           static_cast<unsigned>(coded[2 * step + 1] & 1);
        int cost[4];
        for (unsigned o = 0; o < 4; ++o)
            cost[o] = std::popcount(o ^ r);
        for (int p = 0; p < kStates; ++p) {
            bc0[p] = cost[out_pair_[p]];        // input bit 0 half
            bc1[p] = cost[out_pair_[64 + p]];   // input bit 1 half
        }

        std::uint8_t *dec = decisions.data() + step * kStates;
        for (int half = 0; half < 2; ++half) {
            const int *bc = half ? bc1 : bc0;
            for (int i = 0; i < 32; ++i) {
                const int m0 = metric[2 * i] + bc[2 * i];
                const int m1 = metric[2 * i + 1] + bc[2 * i + 1];
                const bool take1 = m1 < m0;
                next_metric[half * 32 + i] = take1 ? m1 : m0;
                dec[half * 32 + i] = take1;
            }
        }
        for (int s = 0; s < kStates; ++s)
            metric[s] = next_metric[s];
    }

    // zero tail forces the survivor through state 0
    std::vector<std::uint8_t> info(n_info);
    unsigned ns = 0;
    for (std::size_t step = n_steps; step-- > 0;) {
        const unsigned b = ns >> 5;
        const unsigned lsb = decisions[step * kStates + ns];
        const unsigned ps = ((ns & 31u) << 1) | lsb;
        if (step < n_info)
            info[step] = static_cast<std::uint8_t>(b);
        ns = ps;
    }
    return info;
}

std::unique_ptr<FecScheme> make_fec(const std::string &kind) {
    if (kind == "conv-k7-r12")
        return std::make_unique<ConvolutionalCodeK7>();
    throw std::invalid_argument("unknown FEC kind: " + kind);
}

} // namespace mmwsim
