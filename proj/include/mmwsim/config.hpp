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

#ifndef MMWSIM_CONFIG_HPP
#define MMWSIM_CONFIG_HPP

#include "mmwsim/antenna.hpp"
#include "mmwsim/link.hpp"
#include "mmwsim/pa_models.hpp"
#include "mmwsim/phase_noise.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmwsim {

inline constexpr const char *toolkit_version = "0.1.0";

/// Experiment kinds the CLI can dispatch.
enum class ExperimentKind { PnPsd, PnSynth, PaBussgang, PaGmpFit, ArrayPattern, TaBudget, LinkBler };

ExperimentKind experiment_kind_from_string(const std::string &name);
std::string to_string(ExperimentKind kind);

/// CLI-level overrides applied on top of the config document.
struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int threads = 1;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    double duration_s = 0.0;
    std::vector<std::string> outputs;
};

/// Load a config document and resolve its "include" list (filesystem paths
/// relative to the config, or "preset:<name>" references). Later includes
/// override earlier ones; the document itself overrides all includes.
nlohmann::json load_config(const std::string &path);

/// Include resolution on an in-memory document (base_dir anchors relative
/// include paths).
nlohmann::json resolve_includes(const nlohmann::json &doc, const std::string &base_dir);

std::vector<std::string> preset_names();
const nlohmann::json &preset_json(const std::string &name);
std::string preset_description(const std::string &name);

/// FNV-1a 64-bit hash of the canonical (sorted-key) serialization.
std::string config_hash_hex(const nlohmann::json &config);

/// Every violated invariant, each prefixed with a config-path locator.
/// Empty result means the config is runnable.
std::vector<std::string> validate_experiment_config(const nlohmann::json &config);

/// Execute one experiment: writes all outputs atomically plus a
/// <output>.manifest.json, and returns the manifest.
RunManifest run_experiment(const nlohmann::json &config, const RunOptions &options);

// Parsers for the module parameter blocks (exposed for tests and tools).
namespace cfg {
PoleZeroPnParams parse_pole_zero(const nlohmann::json &j);
PllPnParams parse_pll(const nlohmann::json &j);
OfdmConfig parse_ofdm(const nlohmann::json &j);
PrbAllocation parse_allocation(const nlohmann::json &j);
PtrsConfig parse_ptrs(const nlohmann::json &j);
TransmitarrayConfig parse_transmitarray(const nlohmann::json &j);
ArrayGeometry parse_geometry(const nlohmann::json &j);
ElementPattern parse_element(const nlohmann::json &j);
RadiationMask parse_mask_csv(const std::string &content);
LinkExperiment parse_link_experiment(const nlohmann::json &config);
} // namespace cfg

/// GMP coefficient file format: '#' comments, a K/L/M/secondary header,
/// then one "re im" pair per line in the documented basis order.
std::string gmp_coefficients_text(const GmpModel &model);
GmpModel parse_gmp_coefficients(const std::string &text);

} // namespace mmwsim

#endif
