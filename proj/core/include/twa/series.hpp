#pragma once

// Time series of ensemble estimates and their CSV form.

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace twa {

struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  Eigen::MatrixXd mean;       // names.size() x times.size()
  Eigen::MatrixXd std_error;  // same shape; zero for exact results
  std::size_t n_total = 0;
  std::size_t n_failed = 0;

  /// Row of the named observable; throws std::out_of_range when absent.
  std::size_t index_of(const std::string& name) const;
};

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// Header "time,observable,mean,stderr", then one row per observable and time.
void write_csv(const ObservableSeries& series, std::ostream& os);
void write_csv(const ObservableSeries& series, const std::filesystem::path& path);

/// Parses the output of write_csv. Throws std::runtime_error on malformed input.
ObservableSeries read_csv(std::istream& is);
ObservableSeries read_csv(const std::filesystem::path& path);

}  // namespace twa
