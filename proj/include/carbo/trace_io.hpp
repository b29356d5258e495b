// Copyright 2026 The carbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

// File formats. Traces are JSON lines: a header object
//   {"format":"carbo-trace","version":1,"method":...,"seed":...,...}
// followed by one object per observation. Summaries are tab-separated with
// "# carbo-summary v1" and a "# key=value ..." metadata line before the
// column header. Numbers use the shortest round-trip decimal form, so equal
// runs produce byte-identical files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "carbo/optimizer.hpp"

namespace carbo {

inline constexpr int kTraceFormatVersion = 1;
inline constexpr int kSummaryFormatVersion = 1;

// Shortest decimal that parses back to the same double; "inf", "-inf", "nan"
// for non-finite values.
std::string format_number(double v);
double parse_number(const std::string& text);

nlohmann::json observation_to_json(const Observation& o, const SearchSpace& space);

void write_trace(std::ostream& out, const Trace& trace, const SearchSpace& space);
void save_trace(const std::filesystem::path& path, const Trace& trace,
                const SearchSpace& space);
// Throws SchemaError naming the line on malformed input.
Trace read_trace(std::istream& in, const SearchSpace& space,
                 const std::string& source = "<trace>");
Trace load_trace(const std::filesystem::path& path, const SearchSpace& space);

void write_summary(std::ostream& out, const Summary& summary);
void save_summary(const std::filesystem::path& path, const Summary& summary);
Summary read_summary(std::istream& in, const std::string& source = "<summary>");
Summary load_summary(const std::filesystem::path& path);

// Long-format table: method, cost, median, std[, regret_median, regret_std].
void write_tidy(std::ostream& out, const std::vector<Summary>& summaries);

struct SavingsRow {
  std::string problem;
  std::string method;                 // the method being credited
  std::vector<std::string> baselines;
  std::vector<double> savings;        // percent, per baseline
  std::string next_best;              // baseline with the lowest final median
  double next_best_savings = 0.0;
};

SavingsRow savings_row(const std::string& problem, const Summary& method,
                       const std::vector<Summary>& baselines);
void write_savings_table(std::ostream& out, const std::vector<SavingsRow>& rows);

}  // namespace carbo
