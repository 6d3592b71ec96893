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

#include "mmwsim/config.hpp"
#include "mmwsim/csv.hpp"
#include "mmwsim/signal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

namespace mmwsim {

using nlohmann::json;

ExperimentKind experiment_kind_from_string(const std::string &name) {
    if (name == "pn-psd")
        return ExperimentKind::PnPsd;
    if (name == "pn-synth")
        return ExperimentKind::PnSynth;
    if (name == "pa-bussgang")
        return ExperimentKind::PaBussgang;
    if (name == "pa-gmp-fit")
        return ExperimentKind::PaGmpFit;
    if (name == "array-pattern")
        return ExperimentKind::ArrayPattern;
    if (name == "ta-budget")
        return ExperimentKind::TaBudget;
    if (name == "link-bler")
        return ExperimentKind::LinkBler;
    throw std::invalid_argument("experiment: unknown kind '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::PnPsd:
        return "pn-psd";
    case ExperimentKind::PnSynth:
        return "pn-synth";
    case ExperimentKind::PaBussgang:
        return "pa-bussgang";
    case ExperimentKind::PaGmpFit:
        return "pa-gmp-fit";
    case ExperimentKind::ArrayPattern:
        return "array-pattern";
    case ExperimentKind::TaBudget:
        return "ta-budget";
    case ExperimentKind::LinkBler:
        return "link-bler";
    }
    return "?";
}

// ---------------------------------------------------------------- presets ---

namespace {

const std::map<std::string, std::pair<std::string, json>> &preset_table() {
    static const std::map<std::string, std::pair<std::string, json>> table = {
        {"osc-set-a",
         {"30 GHz oscillator pole/zero phase-noise parameter set",
          json{{"pn",
                {{"psd0_dbc_hz", -79.4},
                 {"poles_mhz", {0.1, 0.2, 8.0}},
                 {"zeros_mhz", {1.8, 2.2, 40.0}},
                 {"base_carrier_ghz", 30.0}}}}}},
        {"osc-set-b",
         {"60 GHz oscillator pole/zero phase-noise parameter set",
          json{{"pn",
                {{"psd0_dbc_hz", -70.0},
                 {"poles_mhz", {0.005, 0.4, 0.6}},
                 {"zeros_mhz", {0.02, 6.0, 10.0}},
                 {"base_carrier_ghz", 60.0}}}}}},
        {"ta-access-1bit",
         {"20x20-cell 1-bit radio-access transmitarray",
          json{{"ta",
                {{"uc_rows", 20}, {"uc_cols", 20}, {"uc_size_mm", 5.0},
                 {"focal_distance_mm", 60.0}, {"fs_gain_dbi", 10.0}, {"phase_bits", 1},
                 {"frequency_ghz", 26.0}}}}}},
        {"ta-access-2bit",
         {"14x14-cell 2-bit radio-access transmitarray",
          json{{"ta",
                {{"uc_rows", 14}, {"uc_cols", 14}, {"uc_size_mm", 5.0},
                 {"focal_distance_mm", 45.0}, {"fs_gain_dbi", 10.0}, {"phase_bits", 2},
                 {"frequency_ghz", 26.0}}}}}},
        {"ta-backhaul-1bit",
         {"40x40-cell 1-bit backhaul transmitarray",
          json{{"ta",
                {{"uc_rows", 40}, {"uc_cols", 40}, {"uc_size_mm", 5.0},
                 {"focal_distance_mm", 134.0}, {"fs_gain_dbi", 10.0}, {"phase_bits", 1},
                 {"frequency_ghz", 26.0}}}}}},
        {"ta-backhaul-2bit",
         {"40x44-cell 2-bit backhaul transmitarray",
          json{{"ta",
                {{"uc_rows", 40}, {"uc_cols", 44}, {"uc_size_mm", 5.0},
                 {"focal_distance_mm", 134.0}, {"fs_gain_dbi", 10.0}, {"phase_bits", 2},
                 {"frequency_ghz", 26.0}}}}}},
        {"ta-backhaul-3bit",
         {"40x44-cell 3-bit backhaul transmitarray",
          json{{"ta",
                {{"uc_rows", 40}, {"uc_cols", 44}, {"uc_size_mm", 5.0},
                 {"focal_distance_mm", 134.0}, {"fs_gain_dbi", 10.0}, {"phase_bits", 3},
                 {"frequency_ghz", 26.0}}}}}},
        {"ofdm-120khz",
         {"2048-subcarrier 120 kHz-spacing OFDM numerology, 64QAM",
          json{{"ofdm",
                {{"n_subcarriers", 2048}, {"cp_len", 144}, {"subcarrier_spacing_hz", 120000.0},
                 {"n_tx", 1}, {"n_rx", 1}, {"modulation", "64qam"}}}}}},
    };
    return table;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto &kv : preset_table())
        names.push_back(kv.first);
    return names;
}

const json &preset_json(const std::string &name) {
    const auto it = preset_table().find(name);
    if (it == preset_table().end())
        throw std::invalid_argument("unknown preset '" + name + "'");
    return it->second.second;
}

std::string preset_description(const std::string &name) {
    const auto it = preset_table().find(name);
    if (it == preset_table().end())
        throw std::invalid_argument("unknown preset '" + name + "'");
    return it->second.first;
}

// ------------------------------------------------------------- includes ---

namespace {

void deep_merge(json &base, const json &overlay) {
    if (!base.is_object() || !overlay.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()))
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

} // namespace

json resolve_includes(const json &doc, const std::string &base_dir) {
    if (!doc.is_object())
        throw std::invalid_argument("config: document root must be a JSON object");
    json merged = json::object();
    if (doc.contains("include")) {
        if (!doc["include"].is_array())
            throw std::invalid_argument("include: must be an array of paths or preset:<name>");
        for (const auto &entry : doc["include"]) {
            const std::string ref = entry.get<std::string>();
            json part;
            if (ref.rfind("preset:", 0) == 0) {
                part = preset_json(ref.substr(7));
            } else {
                std::filesystem::path p(ref);
                if (p.is_relative())
                    p = std::filesystem::path(base_dir) / p;
                json sub;
                try {
                    sub = json::parse(read_file(p.string()));
                } catch (const json::parse_error &e) {
                    throw io_error("include '" + ref + "': " + e.what());
                }
                part = resolve_includes(sub, p.parent_path().string());
            }
            deep_merge(merged, part);
        }
    }
    json self = doc;
    self.erase("include");
    deep_merge(merged, self);
    return merged;
}

json load_config(const std::string &path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error &e) {
        throw io_error(std::string("config parse failure: ") + e.what());
    }
    return resolve_includes(doc, std::filesystem::path(path).parent_path().string());
}

std::string config_hash_hex(const json &config) {
    const std::string canon = config.dump(); // nlohmann objects iterate sorted by key
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --------------------------------------------------------------- parsing ---

namespace cfg {

namespace {

[[noreturn]] void fail(const std::string &locator, const std::string &msg) {
    throw std::invalid_argument(locator + ": " + msg);
}

const json &need(const json &j, const std::string &locator, const char *key) {
    if (!j.contains(key))
        fail(locator + "." + key, "missing");
    return j.at(key);
}

double need_num(const json &j, const std::string &locator, const char *key) {
    const json &v = need(j, locator, key);
    if (!v.is_number())
        fail(locator + "." + key, "must be a number");
    return v.get<double>();
}

double opt_num(const json &j, const char *key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::vector<double> need_num_list(const json &j, const std::string &locator, const char *key) {
    const json &v = need(j, locator, key);
    if (!v.is_array())
        fail(locator + "." + key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto &e : v)
        out.push_back(e.get<double>());
    return out;
}

cplx parse_complex(const json &v, const std::string &locator) {
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2)
        return {v[0].get<double>(), v[1].get<double>()};
    fail(locator, "complex values are [re, im] pairs");
}

} // namespace

PoleZeroPnParams parse_pole_zero(const json &j) {
    PoleZeroPnParams p;
    p.psd0_dbc_hz = need_num(j, "pn", "psd0_dbc_hz");
    p.poles_mhz = need_num_list(j, "pn", "poles_mhz");
    p.zeros_mhz = need_num_list(j, "pn", "zeros_mhz");
    p.base_carrier_hz = need_num(j, "pn", "base_carrier_ghz") * 1e9;
    validate(p);
    return p;
}

static SourcePsd parse_source(const json &j, const std::string &locator) {
    if (j.is_null())
        return PowerLawPsd{};
    if (j.contains("pole_zero")) {
        const json &pz = j.at("pole_zero");
        PoleZeroPnParams p;
        p.psd0_dbc_hz = need_num(pz, locator, "psd0_dbc_hz");
        p.poles_mhz = need_num_list(pz, locator, "poles_mhz");
        p.zeros_mhz = need_num_list(pz, locator, "zeros_mhz");
        p.base_carrier_hz = opt_num(pz, "base_carrier_ghz", 1.0) * 1e9;
        validate(p);
        return p;
    }
    if (j.contains("power_law")) {
        PowerLawPsd p;
        for (const auto &row : j.at("power_law")) {
            if (!row.is_array() || row.size() != 2)
                fail(locator, "power_law entries are [offset_hz, dbc_hz] pairs");
            p.anchors.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        return p;
    }
    fail(locator, "source PSD needs a pole_zero or power_law block");
}

PllPnParams parse_pll(const json &j) {
    PllPnParams p;
    p.kd = need_num(j, "pll", "kd");
    p.kvco = need_num(j, "pll", "kvco");
    p.nd = need_num(j, "pll", "nd");
    const json &lf = need(j, "pll", "loop_filter");
    p.loop_filter.num = need_num_list(lf, "pll.loop_filter", "num");
    p.loop_filter.den = need_num_list(lf, "pll.loop_filter", "den");
    const json &src = need(j, "pll", "sources");
    p.ref_source = parse_source(src.contains("ref") ? src.at("ref") : json(), "pll.sources.ref");
    p.lp_source = parse_source(src.contains("lp") ? src.at("lp") : json(), "pll.sources.lp");
    p.vco_source = parse_source(src.contains("vco") ? src.at("vco") : json(), "pll.sources.vco");
    validate(p);
    return p;
}

OfdmConfig parse_ofdm(const json &j) {
    OfdmConfig c;
    c.n_subcarriers = static_cast<Eigen::Index>(need_num(j, "ofdm", "n_subcarriers"));
    c.cp_len = static_cast<Eigen::Index>(need_num(j, "ofdm", "cp_len"));
    c.subcarrier_spacing_hz = need_num(j, "ofdm", "subcarrier_spacing_hz");
    c.n_tx = static_cast<int>(opt_num(j, "n_tx", 1));
    c.n_rx = static_cast<int>(opt_num(j, "n_rx", 1));
    const std::string mod = j.contains("modulation") ? j.at("modulation").get<std::string>() : "64qam";
    if (mod == "qpsk")
        c.modulation = Modulation::Qpsk;
    else if (mod == "16qam")
        c.modulation = Modulation::Qam16;
    else if (mod == "64qam")
        c.modulation = Modulation::Qam64;
    else
        fail("ofdm.modulation", "must be qpsk, 16qam or 64qam");
    validate(c);
    return c;
}

PrbAllocation parse_allocation(const json &j) {
    PrbAllocation a;
    a.n_prbs = static_cast<int>(need_num(j, "allocation", "n_prbs"));
    if (a.n_prbs < 1)
        fail("allocation.n_prbs", "must be >= 1");
    return a;
}

PtrsConfig parse_ptrs(const json &j) {
    PtrsConfig p;
    p.freq_density_l = static_cast<int>(need_num(j, "ptrs", "freq_density_l"));
    p.time_density_k = static_cast<int>(need_num(j, "ptrs", "time_density_k"));
    p.pilot_seed = static_cast<std::uint64_t>(opt_num(j, "pilot_seed", 1));
    validate(p);
    return p;
}

TransmitarrayConfig parse_transmitarray(const json &j) {
    TransmitarrayConfig c;
    c.uc_rows = static_cast<int>(need_num(j, "ta", "uc_rows"));
    c.uc_cols = static_cast<int>(need_num(j, "ta", "uc_cols"));
    c.uc_size_mm = need_num(j, "ta", "uc_size_mm");
    c.focal_distance_mm = need_num(j, "ta", "focal_distance_mm");
    c.fs_gain_dbi = need_num(j, "ta", "fs_gain_dbi");
    c.phase_bits = static_cast<int>(need_num(j, "ta", "phase_bits"));
    c.frequency_ghz = need_num(j, "ta", "frequency_ghz");
    validate(c);
    return c;
}

ArrayGeometry parse_geometry(const json &j) {
    if (j.contains("lattice")) {
        const json &lat = j.at("lattice");
        return lattice_geometry(static_cast<int>(need_num(lat, "geometry.lattice", "rows")),
                                static_cast<int>(need_num(lat, "geometry.lattice", "cols")),
                                need_num(lat, "geometry.lattice", "spacing_x_lambda"),
                                need_num(lat, "geometry.lattice", "spacing_y_lambda"));
    }
    if (j.contains("positions")) {
        const json &pos = j.at("positions");
        ArrayGeometry g;
        g.positions.resize(static_cast<Eigen::Index>(pos.size()), 3);
        Eigen::Index i = 0;
        for (const auto &row : pos) {
            if (!row.is_array() || row.size() != 3)
                fail("geometry.positions", "entries are [x, y, z] in wavelengths");
            for (int c = 0; c < 3; ++c)
                g.positions(i, c) = row[static_cast<std::size_t>(c)].get<double>();
            ++i;
        }
        validate(g);
        return g;
    }
    fail("geometry", "needs a lattice or positions block");
}

ElementPattern parse_element(const json &j) {
    const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "isotropic";
    if (kind == "isotropic") {
        ElementPattern e;
        e.peak_gain_dbi = opt_num(j, "peak_gain_dbi", 0.0);
        return e;
    }
    if (kind == "cos-power") {
        if (j.contains("q")) {
            ElementPattern e;
            e.kind = ElementKind::CosPower;
            e.q_exponent = j.at("q").get<double>();
            e.peak_gain_dbi = 10.0 * std::log10(2.0 * (2.0 * e.q_exponent + 1.0));
            return e;
        }
        return cos_power_element_from_gain(need_num(j, "element", "peak_gain_dbi"));
    }
    fail("element.kind", "must be isotropic or cos-power");
}

RadiationMask parse_mask_csv(const std::string &content) {
    RadiationMask mask;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double angle = 0, level = 0;
        if (!(row >> angle >> level))
            continue; // header row
        mask.points.emplace_back(angle, level);
    }
    validate(mask);
    return mask;
}

LinkExperiment parse_link_experiment(const json &config) {
    LinkExperiment ex;
    ex.ofdm = parse_ofdm(need(config, "config", "ofdm"));
    ex.allocation = parse_allocation(need(config, "config", "allocation"));
    ex.ptrs = parse_ptrs(need(config, "config", "ptrs"));
    if (config.contains("pn") && !config.at("pn").is_null()) {
        const json &pn = config.at("pn");
        PnLinkConfig plc;
        plc.params = parse_pole_zero(pn);
        plc.carrier_hz = opt_num(pn, "carrier_ghz", plc.params.base_carrier_hz / 1e9) * 1e9;
        plc.apply_tx = pn.contains("apply_tx") ? pn.at("apply_tx").get<bool>() : true;
        plc.apply_rx = pn.contains("apply_rx") ? pn.at("apply_rx").get<bool>() : false;
        ex.pn = plc;
    }
    const std::string chan =
        config.contains("channel") ? config.at("channel").get<std::string>() : "flat-awgn";
    if (chan == "flat-awgn")
        ex.channel = ChannelKind::FlatAwgn;
    else if (chan == "iid-rayleigh")
        ex.channel = ChannelKind::IidRayleighPerSubcarrier;
    else
        fail("channel", "must be flat-awgn or iid-rayleigh");
    ex.snr_db = need_num_list(config, "config", "snr_db");
    ex.trials = static_cast<Eigen::Index>(need_num(config, "config", "trials"));
    ex.cpe_correction =
        config.contains("cpe_correction") ? config.at("cpe_correction").get<bool>() : true;
    ex.fec_kind = config.contains("fec") ? config.at("fec").get<std::string>() : "conv-k7-r12";
    validate(ex);
    return ex;
}

} // namespace cfg

// ---------------------------------------------------- GMP coefficient IO ---

std::string gmp_coefficients_text(const GmpModel &model) {
    validate(model);
    std::string out;
    out += "# gmp coefficients: aligned (k,l), lagging (k,l,m), leading (k,l,m)";
    out += model.structure.secondary_input ? ", secondary (k,l)\n" : "\n";
    out += "K " + std::to_string(model.structure.nonlinearity_order) + "\n";
    out += "L " + std::to_string(model.structure.memory_depth) + "\n";
    out += "M " + std::to_string(model.structure.cross_lags) + "\n";
    out += std::string("secondary ") + (model.structure.secondary_input ? "1" : "0") + "\n";
    for (Eigen::Index i = 0; i < model.coefficients.size(); ++i)
        out += CsvBuilder::format_number(model.coefficients[i].real()) + " " +
               CsvBuilder::format_number(model.coefficients[i].imag()) + "\n";
    return out;
}

GmpModel parse_gmp_coefficients(const std::string &text) {
    GmpModel model;
    std::istringstream in(text);
    std::string line;
    std::vector<cplx> coeffs;
    int header_seen = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream row(line);
        std::string tag;
        if (line[0] == 'K' || line[0] == 'L' || line[0] == 'M' || line[0] == 's') {
            int value = 0;
            row >> tag >> value;
            if (tag == "K")
                model.structure.nonlinearity_order = value;
            else if (tag == "L")
                model.structure.memory_depth = value;
            else if (tag == "M")
                model.structure.cross_lags = value;
            else if (tag == "secondary")
                model.structure.secondary_input = value != 0;
            else
                throw std::invalid_argument("gmp coefficients: unknown header tag " + tag);
            ++header_seen;
            continue;
        }
        double re = 0, im = 0;
        if (!(row >> re >> im))
            throw std::invalid_argument("gmp coefficients: bad coefficient line '" + line + "'");
        coeffs.emplace_back(re, im);
    }
    if (header_seen < 4)
        throw std::invalid_argument("gmp coefficients: incomplete K/L/M/secondary header");
    model.coefficients =
        Eigen::Map<const Eigen::VectorXcd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    validate(model);
    return model;
}

// ------------------------------------------------------------ validation ---

std::vector<std::string> validate_experiment_config(const json &config) {
    std::vector<std::string> violations;
    auto attempt = [&](auto &&fn) {
        try {
            fn();
        } catch (const std::exception &e) {
            violations.emplace_back(e.what());
        }
    };

    ExperimentKind kind{};
    try {
        if (!config.contains("experiment"))
            throw std::invalid_argument("experiment: missing kind");
        kind = experiment_kind_from_string(config.at("experiment").get<std::string>());
    } catch (const std::exception &e) {
        violations.emplace_back(e.what());
        return violations;
    }

    switch (kind) {
    case ExperimentKind::PnPsd:
        if (config.contains("pll"))
            attempt([&] { cfg::parse_pll(config.at("pll")); });
        else if (config.contains("pn"))
            attempt([&] { cfg::parse_pole_zero(config.at("pn")); });
        else
            violations.emplace_back("pn-psd: needs a pn or pll parameter block");
        if (config.contains("carrier_ghz"))
            attempt([&] {
                if (!(config.at("carrier_ghz").get<double>() > 0.0))
                    throw std::invalid_argument("carrier_ghz: must be > 0");
            });
        break;
    case ExperimentKind::PnSynth:
        attempt([&] {
            const auto p = cfg::parse_pole_zero(config.at("pn"));
            const double fs = config.at("sample_rate_hz").get<double>();
            const double carrier =
                config.contains("carrier_ghz") ? config.at("carrier_ghz").get<double>() * 1e9
                                               : p.base_carrier_hz;
            design_pn_filter(p, carrier, fs);
        });
        break;
    case ExperimentKind::PaBussgang:
        attempt([&] {
            cfg::parse_complex(config.at("theta1"), "theta1");
            cfg::parse_complex(config.at("theta2"), "theta2");
            for (double s : config.at("sigma_x2").get<std::vector<double>>())
                if (!(s > 0.0))
                    throw std::invalid_argument("sigma_x2: entries must be > 0");
        });
        break;
    case ExperimentKind::PaGmpFit:
        attempt([&] {
            const json &st = config.at("structure");
            GmpStructure s;
            s.nonlinearity_order = st.at("order").get<int>();
            s.memory_depth = st.at("memory").get<int>();
            s.cross_lags = st.at("cross").get<int>();
            s.secondary_input = st.contains("secondary") && st.at("secondary").get<bool>();
            validate(s);
        });
        break;
    case ExperimentKind::ArrayPattern:
        attempt([&] { cfg::parse_geometry(config.at("geometry")); });
        if (config.contains("element"))
            attempt([&] { cfg::parse_element(config.at("element")); });
        break;
    case ExperimentKind::TaBudget:
        attempt([&] { cfg::parse_transmitarray(config.at("ta")); });
        break;
    case ExperimentKind::LinkBler:
        // sub-blocks validate independently so one report names every problem
        attempt([&] { cfg::parse_ofdm(cfg::need(config, "config", "ofdm")); });
        attempt([&] { cfg::parse_allocation(cfg::need(config, "config", "allocation")); });
        attempt([&] { cfg::parse_ptrs(cfg::need(config, "config", "ptrs")); });
        if (config.contains("pn") && !config.at("pn").is_null())
            attempt([&] { cfg::parse_pole_zero(config.at("pn")); });
        attempt([&] { cfg::parse_link_experiment(config); });
        break;
    }
    // duplicate messages appear when a sub-block failure also fails the
    // whole-experiment parse; keep the first occurrence of each
    std::vector<std::string> unique;
    for (const auto &v : violations)
        if (std::find(unique.begin(), unique.end(), v) == unique.end())
            unique.push_back(v);
    return unique;
}

// ------------------------------------------------------------- execution ---

namespace {

struct OutputSink {
    std::string out_dir;
    std::string hash;
    std::uint64_t seed = 0;
    bool emit_json = false;
    std::vector<std::string> written;

    std::string path_for(const std::string &name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }

    void write_csv(const std::string &name, CsvBuilder &csv) {
        const std::string path = path_for(name);
        atomic_write_file(path, csv.str());
        written.push_back(path);
    }

    void write_text(const std::string &name, const std::string &content) {
        const std::string path = path_for(name);
        atomic_write_file(path, content);
        written.push_back(path);
    }
};

CsvBuilder make_csv(const OutputSink &sink) {
    CsvBuilder csv;
    csv.comment("config_hash", sink.hash);
    csv.comment("seed", std::to_string(sink.seed));
    csv.comment("version", toolkit_version);
    return csv;
}

void mirror_json(const json &config, OutputSink &sink, const std::string &csv_name,
                 const std::vector<std::string> &columns, const std::vector<std::vector<double>> &rows) {
    (void)config;
    if (!sink.emit_json)
        return;
    json doc;
    doc["config_hash"] = sink.hash;
    doc["seed"] = sink.seed;
    doc["version"] = toolkit_version;
    doc["columns"] = columns;
    doc["rows"] = rows;
    sink.write_text(csv_name + ".json", doc.dump(2) + "\n");
}

Eigen::VectorXd log_grid(double start_hz, double stop_hz, int points_per_decade) {
    if (!(start_hz > 0.0) || !(stop_hz > start_hz))
        throw std::invalid_argument("offsets: need 0 < start_hz < stop_hz");
    if (points_per_decade < 1)
        throw std::invalid_argument("offsets: points_per_decade must be >= 1");
    const double decades = std::log10(stop_hz / start_hz);
    const int n = static_cast<int>(std::ceil(decades * points_per_decade)) + 1;
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i)
        f[i] = start_hz * std::pow(10.0, decades * i / (n - 1));
    return f;
}

std::string default_output_name(ExperimentKind kind) { return to_string(kind) + ".csv"; }

void run_pn_psd(const json &config, OutputSink &sink) {
    const json offsets = config.contains("offsets") ? config.at("offsets") : json::object();
    const Eigen::VectorXd grid =
        log_grid(offsets.value("start_hz", 1e3), offsets.value("stop_hz", 1e8),
                 offsets.value("points_per_decade", 40));

    CsvBuilder csv = make_csv(sink);
    std::vector<std::vector<double>> rows;
    if (config.contains("pll")) {
        const PllPnParams params = cfg::parse_pll(config.at("pll"));
        csv.comment("model", "pll");
        csv.columns({"offset_hz", "psd_dbc_hz"});
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            rows.push_back({grid[i], eval_pll_psd(params, grid[i])});
            csv.row(rows.back());
        }
    } else {
        const PoleZeroPnParams params = cfg::parse_pole_zero(config.at("pn"));
        const double carrier =
            config.value("carrier_ghz", params.base_carrier_hz / 1e9) * 1e9;
        csv.comment("model", "pole-zero");
        csv.comment("carrier_ghz", CsvBuilder::format_number(carrier / 1e9));
        csv.columns({"offset_hz", "psd_dbc_hz"});
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            rows.push_back({grid[i], eval_pole_zero_psd(params, grid[i], carrier)});
            csv.row(rows.back());
        }
    }
    const std::string name = config.value("output", default_output_name(ExperimentKind::PnPsd));
    sink.write_csv(name, csv);
    mirror_json(config, sink, name, {"offset_hz", "psd_dbc_hz"}, rows);
}

void run_pn_synth(const json &config, OutputSink &sink) {
    const PoleZeroPnParams params = cfg::parse_pole_zero(config.at("pn"));
    const double carrier = config.value("carrier_ghz", params.base_carrier_hz / 1e9) * 1e9;
    const double fs = config.at("sample_rate_hz").get<double>();
    const Eigen::Index n = static_cast<Eigen::Index>(config.value("n_samples", 1 << 20));
    const json welch = config.contains("welch") ? config.at("welch") : json::object();
    const Eigen::Index seg = static_cast<Eigen::Index>(welch.value("segment_len", 1 << 14));
    const double overlap = welch.value("overlap", 0.5);

    RngStream rng(sink.seed, 0);
    const PhaseTrajectory traj = synthesize_phase(params, carrier, fs, n, rng);
    const SpectrumEstimate spec =
        welch_psd({traj.phase_rad.cast<cplx>(), fs}, seg, overlap, Window::Hann);

    const json offsets = config.contains("offsets") ? config.at("offsets") : json::object();
    const Eigen::VectorXd centers =
        log_grid(offsets.value("start_hz", std::max(10.0 * fs / seg, 1.0)),
                 offsets.value("stop_hz", fs / 4.0), offsets.value("points_per_decade", 24));
    const Eigen::VectorXd measured = band_average_psd_db(spec, centers);

    CsvBuilder csv = make_csv(sink);
    csv.comment("carrier_ghz", CsvBuilder::format_number(carrier / 1e9));
    csv.comment("sample_rate_hz", CsvBuilder::format_number(fs));
    csv.columns({"offset_hz", "measured_dbc_hz", "analytic_dbc_hz"});
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < centers.size(); ++i) {
        rows.push_back({centers[i], measured[i], eval_pole_zero_psd(params, centers[i], carrier)});
        csv.row(rows.back());
    }
    const std::string name = config.value("output", default_output_name(ExperimentKind::PnSynth));
    sink.write_csv(name, csv);
    mirror_json(config, sink, name, {"offset_hz", "measured_dbc_hz", "analytic_dbc_hz"}, rows);
}

void run_pa_bussgang(const json &config, OutputSink &sink) {
    Poly3Params params;
    params.theta1 = cfg::parse_complex(config.at("theta1"), "theta1");
    params.theta2 = cfg::parse_complex(config.at("theta2"), "theta2");
    const std::vector<double> sigmas = config.at("sigma_x2").get<std::vector<double>>();
    const Eigen::Index draws = static_cast<Eigen::Index>(config.value("mc_draws", 1e6));

    CsvBuilder csv = make_csv(sink);
    csv.columns({"sigma_x2", "alpha_re", "alpha_im", "sigma_w2_printed", "sigma_w2_mc",
                 "mc_ci_halfwidth", "printed_over_mc_db"});
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double s2 = sigmas[i];
        const cplx alpha = bussgang_alpha(params, s2);
        const auto printed =
            bussgang_distortion_power(params, s2, DistortionFormula::AsPrinted);
        RngStream rng(sink.seed, static_cast<std::uint64_t>(i));
        const auto mc =
            bussgang_distortion_power(params, s2, DistortionFormula::McOracle, draws, &rng);
        const double ratio_db = (mc.sigma_w2 > 0.0 && printed.sigma_w2 > 0.0)
                                    ? 10.0 * std::log10(printed.sigma_w2 / mc.sigma_w2)
                                    : 0.0;
        rows.push_back({s2, alpha.real(), alpha.imag(), printed.sigma_w2, mc.sigma_w2,
                        mc.ci_halfwidth, ratio_db});
        csv.row(rows.back());
    }
    const std::string name = config.value("output", default_output_name(ExperimentKind::PaBussgang));
    sink.write_csv(name, csv);
    mirror_json(config, sink, name,
                {"sigma_x2", "alpha_re", "alpha_im", "sigma_w2_printed", "sigma_w2_mc",
                 "mc_ci_halfwidth", "printed_over_mc_db"},
                rows);
}

void run_pa_gmp_fit(const json &config, OutputSink &sink) {
    const json &st = config.at("structure");
    GmpStructure structure;
    structure.nonlinearity_order = st.at("order").get<int>();
    structure.memory_depth = st.at("memory").get<int>();
    structure.cross_lags = st.at("cross").get<int>();
    structure.secondary_input = st.contains("secondary") && st.at("secondary").get<bool>();
    validate(structure);

    ComplexSequence x, y;
    const json &data = config.at("data");
    const std::string kind = data.value("kind", "synthetic");
    if (kind == "synthetic") {
        GmpModel truth;
        if (data.contains("coeff_file")) {
            truth = parse_gmp_coefficients(read_file(data.at("coeff_file").get<std::string>()));
        } else {
            truth.structure = structure;
            RngStream crng(sink.seed, 100);
            truth.coefficients.resize(structure.basis_size());
            for (Eigen::Index i = 0; i < truth.coefficients.size(); ++i)
                truth.coefficients[i] = 0.1 * crng.normal_complex();
            truth.coefficients[0] = 1.0; // dominant linear tap
        }
        const Eigen::Index n = static_cast<Eigen::Index>(data.value("n_samples", 1 << 14));
        RngStream xrng(sink.seed, 101);
        x = gaussian_complex(xrng, n, data.value("input_variance", 1.0));
        y = apply_gmp(truth, x);
        if (data.contains("snr_db") && !data.at("snr_db").is_null()) {
            const double snr = std::pow(10.0, data.at("snr_db").get<double>() / 10.0);
            const double np = y.samples.squaredNorm() / static_cast<double>(n) / snr;
            RngStream nrng(sink.seed, 102);
            y.samples += gaussian_complex(nrng, n, np).samples;
        }
    } else if (kind == "files") {
        auto load_seq = [](const std::string &path) {
            ComplexSequence s;
            std::vector<cplx> vals;
            std::istringstream in(read_file(path));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#')
                    continue;
                std::replace(line.begin(), line.end(), ',', ' ');
                std::istringstream row(line);
                double re = 0, im = 0;
                if (row >> re >> im)
                    vals.emplace_back(re, im);
            }
            s.samples = Eigen::Map<const Eigen::VectorXcd>(vals.data(),
                                                           static_cast<Eigen::Index>(vals.size()));
            return s;
        };
        x = load_seq(data.at("x").get<std::string>());
        y = load_seq(data.at("y").get<std::string>());
    } else {
        throw std::invalid_argument("data.kind: must be synthetic or files");
    }

    std::optional<double> ridge;
    if (config.contains("ridge") && !config.at("ridge").is_null())
        ridge = config.at("ridge").get<double>();
    const GmpFitResult fit = fit_gmp(x, y, structure, ridge);

    const std::string stem = config.value("output", std::string("pa-gmp-fit"));
    sink.write_text(stem + ".coeffs", gmp_coefficients_text(fit.model));
    std::string report;
    report += "nmse_db " + CsvBuilder::format_number(fit.report.nmse_db) + "\n";
    report += "condition_estimate " + CsvBuilder::format_number(fit.report.condition_estimate) + "\n";
    report += "ridge " + CsvBuilder::format_number(fit.report.ridge_used) + "\n";
    sink.write_text(stem + ".report.txt", report);
}

void run_array_pattern(const json &config, OutputSink &sink) {
    const ArrayGeometry geometry = cfg::parse_geometry(config.at("geometry"));
    const ElementPattern element = config.contains("element")
                                       ? cfg::parse_element(config.at("element"))
                                       : ElementPattern{};

    double theta0 = 0.0, phi0 = 0.0;
    if (config.contains("steer")) {
        theta0 = config.at("steer").value("theta_deg", 0.0) * pi / 180.0;
        phi0 = config.at("steer").value("phi_deg", 0.0) * pi / 180.0;
    }
    BeamWeights weights = steering_weights(geometry, theta0, phi0);
    if (config.contains("quantize_bits") && !config.at("quantize_bits").is_null())
        weights = quantize_phase(weights, config.at("quantize_bits").get<int>());

    const json grid_cfg = config.contains("grid") ? config.at("grid") : json::object();
    const std::string grid_kind = grid_cfg.value("kind", "sphere");
    PatternGrid grid;
    PatternCoverage coverage = PatternCoverage::FullSphere;
    if (grid_kind == "sphere") {
        grid = sphere_grid(grid_cfg.value("step_deg", 2.0));
    } else if (grid_kind == "hemisphere") {
        grid = hemisphere_grid(grid_cfg.value("step_deg", 2.0));
        coverage = PatternCoverage::Hemisphere;
    } else if (grid_kind == "cut") {
        grid = cut_grid(grid_cfg.value("cut_phi_deg", 0.0), grid_cfg.value("step_deg", 0.5));
        coverage = PatternCoverage::Cut;
    } else {
        throw std::invalid_argument("grid.kind: must be sphere, hemisphere or cut");
    }

    const FarFieldPattern pattern =
        total_pattern(array_factor(geometry, weights, grid, coverage), element);

    CsvBuilder csv = make_csv(sink);
    csv.comment("peak_gain_dbi", CsvBuilder::format_number(pattern.peak_gain_db));
    if (coverage != PatternCoverage::Cut) {
        const DirectivityResult d = directivity(pattern);
        csv.comment("directivity_dbi", CsvBuilder::format_number(d.dbi));
        if (d.grid_warning)
            csv.comment("warning", "pattern grid too coarse for 0.1 dB quadrature accuracy");
    }
    csv.columns({"theta_deg", "phi_deg", "gain_dbi"});
    std::vector<std::vector<double>> rows;
    for (Eigen::Index it = 0; it < pattern.theta_rad.size(); ++it)
        for (Eigen::Index ip = 0; ip < pattern.phi_rad.size(); ++ip) {
            rows.push_back({pattern.theta_rad[it] * 180.0 / pi, pattern.phi_rad[ip] * 180.0 / pi,
                            pattern.gain_db(it, ip)});
            csv.row(rows.back());
        }
    const std::string name =
        config.value("output", default_output_name(ExperimentKind::ArrayPattern));
    sink.write_csv(name, csv);
    mirror_json(config, sink, name, {"theta_deg", "phi_deg", "gain_dbi"}, rows);

    if (config.contains("mask_file")) {
        const RadiationMask mask =
            cfg::parse_mask_csv(read_file(config.at("mask_file").get<std::string>()));
        const double cut_phi = grid_cfg.value("cut_phi_deg", 0.0);
        const MaskReport report = mask_compliance(pattern, mask, cut_phi);
        std::string txt;
        txt += std::string("pass ") + (report.pass ? "1" : "0") + "\n";
        txt += "worst_margin_db " + CsvBuilder::format_number(report.worst_margin_db) + "\n";
        txt += "worst_angle_deg " + CsvBuilder::format_number(report.worst_angle_deg) + "\n";
        sink.write_text(name + ".mask_report.txt", txt);
    }
}

void run_ta_budget(const json &config, OutputSink &sink) {
    const TransmitarrayConfig ta = cfg::parse_transmitarray(config.at("ta"));
    const TransmitarrayBudget budget = transmitarray_budget(ta);

    CsvBuilder csv = make_csv(sink);
    csv.comment("phase_bits", std::to_string(ta.phase_bits));
    const std::vector<std::string> cols = {"aperture_directivity_dbi", "spillover_loss_db",
                                           "taper_loss_db",            "quantization_loss_db",
                                           "net_gain_dbi",             "feed_q",
                                           "wavelength_mm"};
    csv.columns(cols);
    const std::vector<double> row = {budget.aperture_directivity_dbi, budget.spillover_loss_db,
                                     budget.taper_loss_db,            budget.quantization_loss_db,
                                     budget.net_gain_dbi,             budget.feed_q,
                                     budget.wavelength_mm};
    csv.row(row);
    const std::string name = config.value("output", default_output_name(ExperimentKind::TaBudget));
    sink.write_csv(name, csv);
    mirror_json(config, sink, name, cols, {row});

    if (config.value("pattern_cut", false)) {
        const double step = config.value("pattern_cut_step_deg", 0.25);
        const FarFieldPattern cut = transmitarray_pattern(ta, cut_grid(0.0, step),
                                                          PatternCoverage::Cut);
        const PatternCut pc = extract_cut(cut, 0.0);
        CsvBuilder cut_csv = make_csv(sink);
        cut_csv.columns({"angle_deg", "rel_db"});
        for (Eigen::Index i = 0; i < pc.angle_deg.size(); ++i)
            cut_csv.row({pc.angle_deg[i], pc.rel_db[i]});
        sink.write_csv(name + ".cut.csv", cut_csv);
    }
}

void run_link_bler(const json &config, OutputSink &sink, int threads) {
    const LinkExperiment experiment = cfg::parse_link_experiment(config);
    const BlerResult result = run_bler(experiment, sink.seed, threads);

    CsvBuilder csv = make_csv(sink);
    csv.comment("data_res_per_slot", std::to_string(result.data_res_per_slot));
    csv.comment("pilot_res_per_slot", std::to_string(result.pilot_res_per_slot));
    csv.comment("info_bits_per_block", std::to_string(result.info_bits_per_block));
    csv.columns({"snr_db", "bler", "ci_halfwidth", "trials"});
    std::vector<std::vector<double>> rows;
    for (const auto &p : result.points) {
        rows.push_back({p.snr_db, p.bler, p.ci_halfwidth, static_cast<double>(p.trials)});
        csv.row(rows.back());
    }
    const std::string name = config.value("output", default_output_name(ExperimentKind::LinkBler));
    sink.write_csv(name, csv);
    mirror_json(config, sink, name, {"snr_db", "bler", "ci_halfwidth", "trials"}, rows);
}

} // namespace

RunManifest run_experiment(const json &config, const RunOptions &options) {
    const auto t0 = std::chrono::steady_clock::now();

    const std::vector<std::string> violations = validate_experiment_config(config);
    if (!violations.empty()) {
        std::string msg = "config validation failed:";
        for (const auto &v : violations)
            msg += "\n  " + v;
        throw std::invalid_argument(msg);
    }

    const ExperimentKind kind =
        experiment_kind_from_string(config.at("experiment").get<std::string>());

    OutputSink sink;
    sink.out_dir = options.out_dir;
    sink.seed = options.seed.value_or(
        config.contains("seed") ? config.at("seed").get<std::uint64_t>() : 0u);
    sink.emit_json = config.value("emit_json", false);

    json hashed = config;
    hashed["seed"] = sink.seed;
    sink.hash = config_hash_hex(hashed);

    switch (kind) {
    case ExperimentKind::PnPsd:
        run_pn_psd(config, sink);
        break;
    case ExperimentKind::PnSynth:
        run_pn_synth(config, sink);
        break;
    case ExperimentKind::PaBussgang:
        run_pa_bussgang(config, sink);
        break;
    case ExperimentKind::PaGmpFit:
        run_pa_gmp_fit(config, sink);
        break;
    case ExperimentKind::ArrayPattern:
        run_array_pattern(config, sink);
        break;
    case ExperimentKind::TaBudget:
        run_ta_budget(config, sink);
        break;
    case ExperimentKind::LinkBler:
        run_link_bler(config, sink, options.threads);
        break;
    }

    RunManifest manifest;
    manifest.config_hash = sink.hash;
    manifest.seed = sink.seed;
    manifest.version = toolkit_version;
    manifest.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.outputs = sink.written;

    json mj;
    mj["config_hash"] = manifest.config_hash;
    mj["seed"] = manifest.seed;
    mj["version"] = manifest.version;
    mj["duration_s"] = manifest.duration_s;
    mj["outputs"] = manifest.outputs;
    const std::string manifest_name =
        config.value("output", default_output_name(kind)) + ".manifest.json";
    atomic_write_file(sink.path_for(manifest_name), mj.dump(2) + "\n");
    return manifest;
}

} // namespace mmwsim
