#include "twa/series.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace twa {

std::size_t ObservableSeries::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::out_of_range("no observable named '" + name + "'");
}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

void write_csv(const ObservableSeries& series, std::ostream& os) {
  os << "time,observable,mean,stderr\n";
  for (std::size_t o = 0; o < series.names.size(); ++o) {
    for (std::size_t t = 0; t < series.times.size(); ++t) {
      const auto oi = static_cast<Eigen::Index>(o);
      const auto ti = static_cast<Eigen::Index>(t);
      os << format_number(series.times[t]) << ',' << series.names[o] << ','
         << format_number(series.mean(oi, ti)) << ',' << format_number(series.std_error(oi, ti))
         << '\n';
    }
  }
}

void write_csv(const ObservableSeries& series, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(series, os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

namespace {

double parse_double(const std::string& field, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("line " + std::to_string(line) + ": '" + field + "' is not a number");
  }
  return value;
}

}  // namespace

ObservableSeries read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "time,observable,mean,stderr") {
    throw std::runtime_error("missing header 'time,observable,mean,stderr'");
  }
  struct Column {
    std::vector<double> times, mean, err;
  };
  std::vector<std::string> order;
  std::map<std::string, Column> columns;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string, 4> fields;
    std::istringstream ls(line);
    for (std::size_t i = 0; i < 4; ++i) {
      if (!std::getline(ls, fields[i], i < 3 ? ',' : '\n')) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": expected 4 fields");
      }
    }
    auto [it, inserted] = columns.try_emplace(fields[1]);
    if (inserted) order.push_back(fields[1]);
    it->second.times.push_back(parse_double(fields[0], line_no));
    it->second.mean.push_back(parse_double(fields[2], line_no));
    it->second.err.push_back(parse_double(fields[3], line_no));
  }
  ObservableSeries out;
  if (order.empty()) return out;
  out.names = order;
  out.times = columns[order.front()].times;
  const auto n_obs = static_cast<Eigen::Index>(order.size());
  const auto n_t = static_cast<Eigen::Index>(out.times.size());
  out.mean.resize(n_obs, n_t);
  out.std_error.resize(n_obs, n_t);
  for (Eigen::Index o = 0; o < n_obs; ++o) {
    const auto& col = columns[order[static_cast<std::size_t>(o)]];
    if (col.times != out.times) {
      throw std::runtime_error("observable '" + order[static_cast<std::size_t>(o)] +
                               "' uses a different time grid");
    }
    for (Eigen::Index t = 0; t < n_t; ++t) {
      out.mean(o, t) = col.mean[static_cast<std::size_t>(t)];
      out.std_error(o, t) = col.err[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

ObservableSeries read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_csv(is);
}

}  // namespace twa
