#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "confgate/harness.hpp"

namespace confgate {

// Full round-trip decimal form of a double (%.17g).
std::string format_double(double x);

// Ordered key=value pairs echoed verbatim into every artifact header as
// comment lines. No timestamps: rerunning a command reproduces the file
// byte for byte.
struct RunConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);
};

// One flattened CSV row of a TrialReport metric.
struct TrialReportRow {
  std::string method;
  double alpha = 0.0;
  std::string metric;
  double value = 0.0;
  std::string se;  // empty when the metric is not a proportion
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
};

std::vector<TrialReportRow> flatten_reports(const std::vector<TrialReport>& reports);

// Header comments, then "method,alpha,metric,value,se,n_trials,seed".
void write_trial_csv(std::ostream& out, const std::vector<TrialReport>& reports,
                     const RunConfig& config);

// Reads rows back, skipping comment lines; used by the report command.
std::vector<TrialReportRow> read_trial_csv(const std::string& path);

// Plain-text pivot: one table per proportion metric (value vs alpha by
// method, with the 1-alpha target) and one per gap metric.
void write_summary(std::ostream& out, const std::vector<TrialReportRow>& rows);

}  // namespace confgate
