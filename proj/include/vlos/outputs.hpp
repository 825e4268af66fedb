#pragma once
// CSV/JSON output plumbing.  All numeric formatting goes through fixed
// snprintf patterns so two runs of the same build produce byte-identical
// files regardless of locale or thread count.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "vlos/engine.hpp"

namespace vlos {

// Buffered line writer; throws IoError on open/write failure.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::string& line);
  // formatting helpers: fixed decimals / shortest round-trip
  static std::string num(double v, int decimals);
  static std::string num_g(double v);  // %.12g, for probabilities and rates
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::string buf_;
  std::FILE* f_ = nullptr;
  void flush();
};

void ensure_dir(const std::string& path);  // mkdir -p; IoError on failure
bool file_exists(const std::string& path);
std::string read_text_file(const std::string& path);  // IoError on failure

// Minimal CSV reader for the figure pipeline: header + string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace vlos
