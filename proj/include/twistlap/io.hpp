#pragma once

#include <string>
#include <vector>

namespace twistlap::io {

// 17 significant digits, C locale.
std::string num(double v);
std::string num(long long v);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row(std::vector<std::string> cells);
  std::string str() const;
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Write through a temporary file and rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace twistlap::io
