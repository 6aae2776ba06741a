#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace wkam {

// CSV rows with 17 significant digits; integers print without exponent.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }

  void row(const std::vector<double>& values) {
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      os_ << (i ? "," : "") << buf;
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

}  // namespace wkam
