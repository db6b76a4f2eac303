#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "faunawatch/error.hpp"

namespace faunawatch {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(errc::io_error, "cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    fail(errc::io_error, "read failed: " + path.string());
  return buf.str();
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(errc::io_error, "cannot open for writing: " + path.string());
  out.write(contents.data(), std::streamsize(contents.size()));
  out.flush();
  if (!out)
    fail(errc::io_error, "write failed: " + path.string());
}

inline void append_line(const std::filesystem::path& path,
                        std::string_view line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out)
    fail(errc::io_error, "cannot open for append: " + path.string());
  out.write(line.data(), std::streamsize(line.size()));
  out.put('\n');
  out.flush();
  if (!out)
    fail(errc::io_error, "append failed: " + path.string());
}

}  // namespace faunawatch
