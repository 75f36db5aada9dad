#include "confgate/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "confgate/errors.hpp"

namespace confgate {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

void RunConfig::set(const std::string& key, double value) {
  entries.emplace_back(key, format_double(value));
}

void RunConfig::set(const std::string& key, std::uint64_t value) {
  entries.emplace_back(key, std::to_string(value));
}

std::vector<TrialReportRow> flatten_reports(
    const std::vector<TrialReport>& reports) {
  std::vector<TrialReportRow> rows;
  for (const TrialReport& rep : reports) {
    TrialReportRow base;
    base.method = rep.method;
    base.alpha = rep.alpha;
    base.n_trials = rep.n_trials;
    base.seed = rep.seed;

    TrialReportRow row = base;
    row.metric = rep.proportion_metric;
    row.value = rep.proportion;
    row.se = format_double(rep.se);
    rows.push_back(row);

    row = base;
    row.metric = "mean_threshold";
    row.value = rep.mean_threshold;
    rows.push_back(row);

    if (rep.delta_fs_median.has_value()) {
      row = base;
      row.metric = "delta_fs_median";
      row.value = *rep.delta_fs_median;
      rows.push_back(row);
    }
    if (rep.delta_cvar.has_value()) {
      row = base;
      row.metric = "delta_cvar";
      row.value = *rep.delta_cvar;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_trial_csv(std::ostream& out, const std::vector<TrialReport>& reports,
                     const RunConfig& config) {
  for (const auto& [key, value] : config.entries) {
    out << "# " << key << "=" << value << "\n";
  }
  out << "method,alpha,metric,value,se,n_trials,seed\n";
  for (const TrialReportRow& row : flatten_reports(reports)) {
    out << row.method << "," << format_double(row.alpha) << "," << row.metric
        << "," << format_double(row.value) << "," << row.se << ","
        << row.n_trials << "," << row.seed << "\n";
  }
}

std::vector<TrialReportRow> read_trial_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<TrialReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 7) {
      throw ParseError(line_no, "expected 7 CSV fields");
    }
    TrialReportRow row;
    row.method = fields[0];
    try {
      row.alpha = std::stod(fields[1]);
      row.metric = fields[2];
      row.value = std::stod(fields[3]);
      row.se = fields[4];
      row.n_trials = static_cast<std::size_t>(std::stoull(fields[5]));
      row.seed = std::stoull(fields[6]);
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary(std::ostream& out, const std::vector<TrialReportRow>& rows) {
  std::set<std::string> metrics;
  for (const TrialReportRow& row : rows) metrics.insert(row.metric);

  for (const std::string& metric : metrics) {
    std::set<double> alphas;
    std::set<std::string> methods;
    std::map<std::pair<double, std::string>, double> cell;
    for (const TrialReportRow& row : rows) {
      if (row.metric != metric) continue;
      alphas.insert(row.alpha);
      methods.insert(row.method);
      cell[{row.alpha, row.method}] = row.value;
    }
    const bool is_proportion = metric == "coverage" || metric == "pass_rate";

    out << "== " << metric << " ==\n";
    out << "alpha";
    if (is_proportion) out << ",target";
    for (const std::string& m : methods) out << "," << m;
    out << "\n";
    for (double a : alphas) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4g", a);
      out << buf;
      if (is_proportion) {
        std::snprintf(buf, sizeof(buf), ",%.4f", 1.0 - a);
        out << buf;
      }
      for (const std::string& m : methods) {
        auto it = cell.find({a, m});
        if (it == cell.end()) {
          out << ",";
        } else {
          std::snprintf(buf, sizeof(buf), ",%.6f", it->second);
          out << buf;
        }
      }
      out << "\n";
    }
    out << "\n";
  }
}

}  // namespace confgate
