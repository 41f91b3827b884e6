#include "rgl/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace rgl::io {

namespace {

void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) {
    throw FormatError("binary matrix: truncated stream");
  }
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return v;
}

double parse_double(std::string_view tok, Index line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
    tok.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("csv matrix: bad number '" + std::string(tok) + "' on line " +
                      std::to_string(line));
  }
  return v;
}

}  // namespace

std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_csv(std::ostream& os, const RealMatrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_sig(m(r, c), 17);
    }
    os << '\n';
  }
}

RealMatrix read_csv(std::istream& is) {
  std::vector<double> values;
  Index cols = 0;
  Index rows = 0;
  std::string line;
  Index lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    Index count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), lineno));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) cols = count;
    if (count != cols) throw FormatError("csv matrix: ragged row on line " + std::to_string(lineno));
    ++rows;
  }
  if (rows == 0) throw FormatError("csv matrix: no data");
  return RealMatrix(rows, cols, std::move(values));
}

void write_binary(std::ostream& os, const RealMatrix& m) {
  put_u64_le(os, m.rows());
  put_u64_le(os, m.cols());
  for (double v : m.data()) put_u64_le(os, std::bit_cast<std::uint64_t>(v));
}

RealMatrix read_binary(std::istream& is) {
  const std::uint64_t rows = get_u64_le(is);
  const std::uint64_t cols = get_u64_le(is);
  if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32)) {
    throw FormatError("binary matrix: implausible shape");
  }
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = std::bit_cast<double>(get_u64_le(is));
  return RealMatrix(rows, cols, std::move(values));
}

void save_csv(const std::filesystem::path& path, const RealMatrix& m) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_csv(os, m);
}

RealMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_csv(is);
}

void save_binary(const std::filesystem::path& path, const RealMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_binary(os, m);
}

RealMatrix load_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_binary(is);
}

}  // namespace rgl::io
