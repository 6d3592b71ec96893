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

#ifndef MMWSIM_CSV_HPP
#define MMWSIM_CSV_HPP

#include <string>
#include <vector>

namespace mmwsim {

/// Write content to path atomically (temp file in the same directory, then
/// rename), so an interrupted run never leaves a partial file behind.
void atomic_write_file(const std::string &path, const std::string &content);

std::string read_file(const std::string &path);

/// Accumulates a CSV document: '#'-prefixed comment headers, a column-name
/// row, then fixed-format numeric rows (deterministic byte output).
class CsvBuilder {
  public:
    void comment(const std::string &key, const std::string &value);
    void columns(const std::vector<std::string> &names);
    void row(const std::vector<double> &values);
    const std::string &str() const { return buffer_; }

    static std::string format_number(double v);

  private:
    std::string buffer_;
};

} // namespace mmwsim

#endif
