// Deterministic artifact writers.
//
// CSV: UTF-8, LF line endings, one header row, every numeric cell printed
// with snprintf("%.17e") so repeated runs are byte-identical. JSON uses
// nlohmann::ordered_json (insertion-ordered keys) serialized with a fixed
// indent. No locale-dependent formatting anywhere.
#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace tube {

using OrderedJson = nlohmann::ordered_json;

std::string format_full(double v);  // "%.17e"

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  void add_row_raw(const std::vector<std::string>& row);
  // Returns the serialized bytes; write_file persists them.
  std::string str() const;
  void write_file(const std::string& path) const;
  size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const OrderedJson& j);

// Create directories recursively; throws std::runtime_error on failure.
void ensure_dir(const std::string& path);

}  // namespace tube
