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

#ifndef MMWSIM_RNG_HPP
#define MMWSIM_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mmwsim {

/// Seeded, stream-addressable random source. Identical (seed, stream_id)
/// pairs reproduce identical draw sequences; distinct stream_ids give
/// statistically independent streams, so parallel workers each own one.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (pairs cached). Deterministic for a
    /// fixed (seed, stream_id) on a given platform.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Circularly-symmetric complex normal with E|z|^2 = 1.
    std::complex<double> normal_complex() {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-std::log(u1)); // variance 1/2 per part
        return {r * std::cos(2.0 * 3.14159265358979323846 * u2),
                r * std::sin(2.0 * 3.14159265358979323846 * u2)};
    }

    /// Single fair bit, buffered from the 64-bit engine output.
    bool bit() {
        if (bit_count_ == 0) {
            bit_buffer_ = engine_();
            bit_count_ = 64;
        }
        bool b = (bit_buffer_ & 1u) != 0;
        bit_buffer_ >>= 1;
        --bit_count_;
        return b;
    }

    /// Uniform integer in [0, n) for small n (rejection-free, fine for n << 2^64).
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  private:
    // splitmix64 over (seed, stream_id); decorrelates nearby ids.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
    std::uint64_t bit_buffer_ = 0;
    int bit_count_ = 0;
};

} // namespace mmwsim

#endif
