#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsq/config.hpp"
#include "gsq/errors.hpp"
#include "gsq/rough_path.hpp"

namespace gsq::harness {

inline constexpr int kCsvVersion = 1;
inline constexpr const char* kRecordSchema = "gsq.record/1";
inline constexpr const char* kRoughPathSchema = "gsq.roughpath_g2/1";

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Plot data: x (r or n), y = |estimate - oracle|, y_err = std_error.
struct PlotSeries {
  std::string name;
  std::string x_label;
  std::vector<std::array<double, 3>> points;
};

/// Append-only record of one run.
class ExperimentRecord {
 public:
  std::string experiment;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string config_text;
  std::string started, finished;
  nlohmann::json summary = nlohmann::json::object();

  Table& add_table(std::string name, std::vector<std::string> columns) {
    tables_.push_back({std::move(name), std::move(columns), {}});
    return tables_.back();
  }
  PlotSeries& add_plot(std::string name, std::string x_label) {
    plots_.push_back({std::move(name), std::move(x_label), {}});
    return plots_.back();
  }
  void add_check(std::string name, bool passed, std::string detail = "") {
    checks_.push_back({std::move(name), passed, std::move(detail)});
  }
  void add_document(std::string name, nlohmann::json doc) { documents_.emplace_back(std::move(name), std::move(doc)); }

  const std::deque<Table>& tables() const { return tables_; }
  const std::deque<PlotSeries>& plots() const { return plots_; }
  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<std::pair<std::string, nlohmann::json>>& documents() const { return documents_; }

  bool passed() const {
    for (const auto& c : checks_)
      if (!c.passed) return false;
    return true;
  }

 private:
  std::deque<Table> tables_;  // deque: references from add_* stay valid
  std::deque<PlotSeries> plots_;
  std::vector<Check> checks_;
  std::vector<std::pair<std::string, nlohmann::json>> documents_;
};

inline std::string fmt(double x) { return std::isnan(x) ? "nan" : detail::format_double(x); }

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// CSV with a versioned schema comment; no timestamps, so reruns are
/// byte-identical.
inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  os << "# gsq csv v" << kCsvVersion << " table=" << t.name << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw std::logic_error("row width differs from the header in " + t.name);
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

inline std::string to_plot_data(const PlotSeries& p) {
  std::ostringstream os;
  os << "# gsq plot v" << kCsvVersion << " series=" << p.name << " x=" << p.x_label << "\n";
  os << "x y y_err\n";
  for (const auto& [x, y, e] : p.points) os << fmt(x) << " " << fmt(y) << " " << fmt(e) << "\n";
  return os.str();
}

inline nlohmann::json to_json(const ExperimentRecord& r) {
  nlohmann::json j;
  j["schema"] = kRecordSchema;
  j["experiment"] = r.experiment;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["started"] = r.started;
  j["finished"] = r.finished;
  j["config"] = r.config_text;
  j["passed"] = r.passed();
  j["summary"] = r.summary;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks()) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["tables"] = nlohmann::json::array();
  for (const auto& t : r.tables()) j["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  return j;
}

/// RoughPathG2 as {schema, d, times, level1: [[v_i]], level2: [[[m_ij]]]}.
inline nlohmann::json to_json(const roughpath::RoughPathG2& x) {
  nlohmann::json j;
  j["schema"] = kRoughPathSchema;
  j["d"] = x.d;
  j["times"] = x.times;
  j["level1"] = nlohmann::json::array();
  j["level2"] = nlohmann::json::array();
  for (const auto& g : x.values) {
    j["level1"].push_back(std::vector<double>(g.v.data(), g.v.data() + g.v.size()));
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < x.d; ++i) {
      std::vector<double> row(x.d);
      for (int k = 0; k < x.d; ++k) row[k] = g.m(i, k);
      m.push_back(row);
    }
    j["level2"].push_back(m);
  }
  return j;
}

inline roughpath::RoughPathG2 rough_path_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != kRoughPathSchema) throw IoError("not a " + std::string(kRoughPathSchema) + " document");
  roughpath::RoughPathG2 x;
  x.d = j.at("d").get<int>();
  x.times = j.at("times").get<std::vector<double>>();
  const auto& l1 = j.at("level1");
  const auto& l2 = j.at("level2");
  if (l1.size() != x.times.size() || l2.size() != x.times.size()) throw GridMismatchError("level arrays off the grid");
  for (std::size_t k = 0; k < x.times.size(); ++k) {
    roughpath::G2Element g{RVec(x.d), RMat(x.d, x.d)};
    for (int i = 0; i < x.d; ++i) {
      g.v(i) = l1[k].at(i).get<double>();
      for (int m = 0; m < x.d; ++m) g.m(i, m) = l2[k].at(i).at(m).get<double>();
    }
    roughpath::require_g2(g);
    x.values.push_back(g);
  }
  return x;
}

/// Writes <experiment>.json, one CSV per table, one .dat per plot series
/// and one JSON per document into dir. Everything is staged in temporary
/// files first, so a failure leaves no partial output.
inline std::vector<std::string> emit_report(const ExperimentRecord& r, const std::string& dir) {
  namespace fs = std::filesystem;
  if (r.tables().empty()) throw std::invalid_argument("record has no tables; nothing to report");
  for (const auto& t : r.tables())
    if (t.rows.empty()) throw std::invalid_argument("table " + t.name + " is empty");

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back(r.experiment + ".json", to_json(r).dump(2) + "\n");
  for (const auto& t : r.tables()) files.emplace_back(t.name + ".csv", to_csv(t));
  for (const auto& p : r.plots()) files.emplace_back(p.name + ".dat", to_plot_data(p));
  for (const auto& [name, doc] : r.documents()) files.emplace_back(name + ".json", doc.dump(2) + "\n");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, body] : files) {
    const fs::path tmp = fs::path(dir) / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    out << body;
    out.close();
    if (!out) {
      cleanup();
      throw IoError("cannot write " + tmp.string());
    }
    staged.push_back(tmp);
  }
  std::vector<std::string> written;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const fs::path target = fs::path(dir) / files[k].first;
    fs::rename(staged[k], target, ec);
    if (ec) throw IoError("cannot move " + staged[k].string() + " to " + target.string() + ": " + ec.message());
    written.push_back(target.string());
  }
  return written;
}

}  // namespace gsq::harness
