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

#ifndef MMWSIM_FEC_HPP
#define MMWSIM_FEC_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mmwsim {

/// Minimal block FEC interface so the link loop stays code-agnostic.
class FecScheme {
  public:
    virtual ~FecScheme() = default;
    virtual std::string name() const = 0;
    /// Coded bits produced for n_info information bits (termination included).
    virtual std::size_t coded_length(std::size_t n_info) const = 0;
    virtual std::vector<std::uint8_t> encode(const std::vector<std::uint8_t> &info) const = 0;
    /// Hard-decision decode; coded.size() must equal coded_length(n_info).
    virtual std::vector<std::uint8_t> decode(const std::vector<std::uint8_t> &coded,
                                             std::size_t n_info) const = 0;
};

/// Rate-1/2 convolutional code, constraint length 7, generators 133/171
/// (octal), zero-tail terminated, hard-decision Viterbi decoding.
class ConvolutionalCodeK7 final : public FecScheme {
  public:
    ConvolutionalCodeK7();
    std::string name() const override { return "conv-k7-r12"; }
    std::size_t coded_length(std::size_t n_info) const override { return 2 * (n_info + 6); }
    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t> &info) const override;
    std::vector<std::uint8_t> decode(const std::vector<std::uint8_t> &coded,
                                     std::size_t n_info) const override;

  private:
    // output bit pair for each 7-bit register content (current bit in MSB)
    std::uint8_t out_pair_[128];
};

std::unique_ptr<FecScheme> make_fec(const std::string &kind);

} // namespace mmwsim

#endif
