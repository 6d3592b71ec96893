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

#include "mmwsim/csv.hpp"
#include "mmwsim/types.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mmwsim {

void atomic_write_file(const std::string &path, const std::string &content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot open temporary file " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw io_error("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw io_error("failed to move output into place at " + target.string());
    }
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string CsvBuilder::format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvBuilder::comment(const std::string &key, const std::string &value) {
    buffer_ += "# " + key + "=" + value + "\n";
}

void CsvBuilder::columns(const std::vector<std::string> &names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i)
            buffer_ += ",";
        buffer_ += names[i];
    }
    buffer_ += "\n";
}

void CsvBuilder::row(const std::vector<double> &values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            buffer_ += ",";
        buffer_ += format_number(values[i]);
    }
    buffer_ += "\n";
}

} // namespace mmwsim
