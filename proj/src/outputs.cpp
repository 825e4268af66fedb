#include "vlos/outputs.hpp"

#include <sys/stat.h>
#include <sys/types.h>

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vlos {

CsvWriter::CsvWriter(const std::string& path, const std::string& header) : path_(path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw IoError("cannot open " + path + " for writing");
  buf_.reserve(1 << 20);
  buf_ += header;
  buf_ += '\n';
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; call close() explicitly to catch write errors
  }
}

void CsvWriter::row(const std::string& line) {
  buf_ += line;
  buf_ += '\n';
  if (buf_.size() > (1 << 22)) flush();
}

void CsvWriter::flush() {
  if (buf_.empty() || !f_) return;
  const size_t written = std::fwrite(buf_.data(), 1, buf_.size(), f_);
  if (written != buf_.size()) throw IoError("short write to " + path_);
  buf_.clear();
}

void CsvWriter::close() {
  if (!f_) return;
  flush();
  if (std::fclose(f_) != 0) {
    f_ = nullptr;
    throw IoError("error closing " + path_);
  }
  f_ = nullptr;
}

std::string CsvWriter::num(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string CsvWriter::num_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void ensure_dir(const std::string& path) {
  // mkdir -p over each component
  std::string acc;
  std::stringstream ss(path);
  std::string part;
  if (!path.empty() && path[0] == '/') acc = "/";
  while (std::getline(ss, part, '/')) {
    if (part.empty()) continue;
    acc += part;
    acc += '/';
    if (::mkdir(acc.c_str(), 0755) != 0 && errno != EEXIST)
      throw IoError("cannot create directory " + acc);
  }
}

bool file_exists(const std::string& path) {
  struct stat st{};
  return ::stat(path.c_str(), &st) == 0;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw IoError(path + ": empty CSV");
  return t;
}

}  // namespace vlos
