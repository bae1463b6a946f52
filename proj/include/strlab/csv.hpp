#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "strlab/errors.hpp"

namespace strlab {

/// Minimal RFC-4180-style CSV writer: fields with commas, quotes or
/// newlines are quoted, embedded quotes doubled. Numeric formatting uses
/// %.17g so values round-trip exactly.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw IoError("cannot write CSV: " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
  }

  static std::string num(double v);
  static std::string escape(const std::string& field);

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

/// Parse one CSV document (handles quoted fields; both \r\n and \n).
std::vector<std::vector<std::string>> parse_csv(const std::string& path);
std::vector<std::vector<std::string>> parse_csv_text(const std::string& text);

}  // namespace strlab
