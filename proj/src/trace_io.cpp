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

#include "carbo/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "carbo/errors.hpp"

namespace carbo {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

std::string_view to_string(CostAxis axis) {
  return axis == CostAxis::kElapsed ? "elapsed" : "total";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw SchemaError("not a number: '" + text + "'");
  }
  return v;
}

json observation_to_json(const Observation& o, const SearchSpace& space) {
  (void)space;
  json j;
  j["round"] = o.round;
  j["phase"] = to_string(o.phase);
  j["params"] = to_json(o.point.raw);
  j["encoded"] = std::vector<double>(o.point.encoded.data(),
                                     o.point.encoded.data() + o.point.encoded.size());
  j["objective"] = optional_number(o.objective);
  if (!o.error.empty()) j["error"] = o.error;
  j["realized_cost"] = o.cost;
  j["cumulative_cost"] = o.cumulative_cost;
  j["alpha"] = optional_number(o.alpha);
  j["timestamp"] = o.timestamp;
  return j;
}

void write_trace(std::ostream& out, const Trace& trace, const SearchSpace& space) {
  json header;
  header["format"] = "carbo-trace";
  header["version"] = kTraceFormatVersion;
  header["method"] = trace.method;
  header["seed"] = trace.seed;
  header["simulated"] = trace.simulated;
  header["completed"] = trace.completed;
  if (!trace.abort_reason.empty()) header["abort_reason"] = trace.abort_reason;
  header["config"] = trace.config;
  header["search_space"] = to_json(space);
  out << header.dump() << '\n';
  for (const auto& o : trace.observations) {
    out << observation_to_json(o, space).dump() << '\n';
  }
}

void save_trace(const std::filesystem::path& path, const Trace& trace,
                const SearchSpace& space) {
  auto out = open_out(path);
  write_trace(out, trace, space);
}

Trace read_trace(std::istream& in, const SearchSpace& space, const std::string& source) {
  Trace t;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> SchemaError {
    return SchemaError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(in, line)) throw SchemaError(source + ": empty trace file");
  ++lineno;
  try {
    const json h = json::parse(line);
    if (h.value("format", "") != "carbo-trace") throw fail("not a carbo trace");
    if (h.at("version").get<int>() != kTraceFormatVersion) {
      throw fail("unsupported trace version " + h.at("version").dump());
    }
    t.method = h.at("method").get<std::string>();
    t.seed = h.at("seed").get<std::uint64_t>();
    t.simulated = h.at("simulated").get<bool>();
    t.completed = h.at("completed").get<bool>();
    t.abort_reason = h.value("abort_reason", "");
    t.config = h.value("config", json::object());
  } catch (const json::exception& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  double best = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Observation o;
    try {
      const json j = json::parse(line);
      o.round = j.at("round").get<std::size_t>();
      o.phase = parse_phase(j.at("phase").get<std::string>());
      o.point.raw = raw_params_from_json(j.at("params"));
      const auto enc = j.at("encoded").get<std::vector<double>>();
      if (enc.size() != space.encoded_dim()) throw fail("encoded point has wrong dimension");
      o.point.encoded = Eigen::Map<const Eigen::VectorXd>(enc.data(), static_cast<Eigen::Index>(enc.size()));
      if (!j.at("objective").is_null()) o.objective = j.at("objective").get<double>();
      o.error = j.value("error", "");
      o.cost = j.at("realized_cost").get<double>();
      o.cumulative_cost = j.at("cumulative_cost").get<double>();
      if (!j.at("alpha").is_null()) o.alpha = j.at("alpha").get<double>();
      o.timestamp = j.at("timestamp").get<double>();
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
    if (o.objective) best = std::min(best, *o.objective);
    t.best_so_far.push_back(best);
    t.observations.push_back(std::move(o));
  }
  return t;
}

Trace load_trace(const std::filesystem::path& path, const SearchSpace& space) {
  auto in = open_in(path);
  return read_trace(in, space, path.string());
}

void write_summary(std::ostream& out, const Summary& s) {
  out << "# carbo-summary v" << kSummaryFormatVersion << '\n';
  out << "# method=" << s.method << " requested=" << s.requested
      << " completed=" << s.completed << " budget=" << format_number(s.budget)
      << " axis=" << to_string(s.axis);
  if (s.optimum) out << " optimum=" << format_number(*s.optimum);
  out << " final_median=" << format_number(s.final_median)
      << " final_std=" << format_number(s.final_stdev)
      << " median_evaluations=" << format_number(s.median_evaluations) << '\n';
  out << "cost\tmedian\tstd";
  if (s.optimum) out << "\tregret_median\tregret_std";
  out << '\n';
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    out << format_number(s.grid[i]) << '\t' << format_number(s.median[i]) << '\t'
        << format_number(s.stdev[i]);
    if (s.optimum) {
      out << '\t' << format_number(s.median[i] - *s.optimum) << '\t'
          << format_number(s.stdev[i]);
    }
    out << '\n';
  }
}

void save_summary(const std::filesystem::path& path, const Summary& summary) {
  auto out = open_out(path);
  write_summary(out, summary);
}

Summary read_summary(std::istream& in, const std::string& source) {
  Summary s;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    return SchemaError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(in, line) || line != "# carbo-summary v1") {
    ++lineno;
    throw fail("not a carbo summary (expected '# carbo-summary v1')");
  }
  ++lineno;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    ++lineno;
    throw fail("missing metadata line");
  }
  ++lineno;
  std::map<std::string, std::string> meta;
  for (const auto& tok : split(line.substr(2), ' ')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw fail("bad metadata token '" + tok + "'");
    meta[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  try {
    s.method = meta.at("method");
    s.requested = std::stoul(meta.at("requested"));
    s.completed = std::stoul(meta.at("completed"));
    s.budget = parse_number(meta.at("budget"));
    s.axis = meta.at("axis") == "total" ? CostAxis::kTotal : CostAxis::kElapsed;
    if (meta.count("optimum")) s.optimum = parse_number(meta.at("optimum"));
    s.final_median = parse_number(meta.at("final_median"));
    s.final_stdev = parse_number(meta.at("final_std"));
    s.median_evaluations = parse_number(meta.at("median_evaluations"));
  } catch (const std::out_of_range&) {
    throw fail("metadata line lacks a required key");
  } catch (const std::invalid_argument&) {
    throw fail("bad metadata value");
  }
  if (!std::getline(in, line)) throw fail("missing column header");
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 3) throw fail("expected at least 3 columns");
    try {
      s.grid.push_back(parse_number(cols[0]));
      s.median.push_back(parse_number(cols[1]));
      s.stdev.push_back(parse_number(cols[2]));
    } catch (const SchemaError& e) {
      throw fail(e.what());
    }
  }
  if (s.grid.size() < 2) throw fail("summary needs at least 2 rows");
  return s;
}

Summary load_summary(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_summary(in, path.string());
}

void write_tidy(std::ostream& out, const std::vector<Summary>& summaries) {
  bool regret = !summaries.empty();
  for (const auto& s : summaries) regret = regret && s.optimum.has_value();
  out << "method\tcost\tmedian\tstd";
  if (regret) out << "\tregret_median\tregret_std";
  out << '\n';
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      out << s.method << '\t' << format_number(s.grid[i]) << '\t'
          << format_number(s.median[i]) << '\t' << format_number(s.stdev[i]);
      if (regret) {
        out << '\t' << format_number(s.median[i] - *s.optimum) << '\t'
            << format_number(s.stdev[i]);
      }
      out << '\n';
    }
  }
}

SavingsRow savings_row(const std::string& problem, const Summary& method,
                       const std::vector<Summary>& baselines) {
  if (baselines.empty()) throw ArgumentError("savings_row: no baselines");
  SavingsRow row;
  row.problem = problem;
  row.method = method.method;
  std::size_t best = 0;
  for (std::size_t i = 0; i < baselines.size(); ++i) {
    row.baselines.push_back(baselines[i].method);
    row.savings.push_back(cost_savings(method, baselines[i]));
    if (baselines[i].final_median < baselines[best].final_median) best = i;
  }
  row.next_best = baselines[best].method;
  row.next_best_savings = row.savings[best];
  return row;
}

void write_savings_table(std::ostream& out, const std::vector<SavingsRow>& rows) {
  out << "# carbo-savings v1\n";
  if (rows.empty()) return;
  out << "problem\tmethod\tnext_best\tsavings_pct";
  for (const auto& b : rows.front().baselines) out << "\tvs_" << b;
  out << '\n';
  for (const auto& r : rows) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%+.1f", r.next_best_savings);
    out << r.problem << '\t' << r.method << '\t' << r.next_best << '\t' << pct;
    for (double v : r.savings) {
      std::snprintf(pct, sizeof pct, "%+.1f", v);
      out << '\t' << pct;
    }
    out << '\n';
  }
}

}  // namespace carbo
