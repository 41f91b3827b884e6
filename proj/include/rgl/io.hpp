#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rgl/matrix.hpp"

namespace rgl::io {

/// Raised on malformed or unreadable matrix files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CSV: one matrix row per line, comma separated, printed with 17
// significant digits so that values survive a round trip.
void write_csv(std::ostream& os, const RealMatrix& m);
RealMatrix read_csv(std::istream& is);
void save_csv(const std::filesystem::path& path, const RealMatrix& m);
RealMatrix load_csv(const std::filesystem::path& path);

// Binary container:
//   uint64 rows, uint64 cols            (little endian)
//   rows*cols IEEE-754 binary64 values  (little endian, row-major)
void write_binary(std::ostream& os, const RealMatrix& m);
RealMatrix read_binary(std::istream& is);
void save_binary(const std::filesystem::path& path, const RealMatrix& m);
RealMatrix load_binary(const std::filesystem::path& path);

/// Formats a double with `digits` significant digits ("%.*g").
std::string format_sig(double v, int digits = 12);

}  // namespace rgl::io
