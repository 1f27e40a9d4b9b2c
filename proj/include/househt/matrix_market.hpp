#ifndef HOUSEHT_MATRIX_MARKET_HPP
#define HOUSEHT_MATRIX_MARKET_HPP

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "matrix.hpp"

namespace househt {

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class UnsupportedFormat : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "invalid number '" + std::string(tok) + "'");
  return v;
}

inline std::string lower(std::string_view s) {
  std::string r(s);
  std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return std::tolower(c); });
  return r;
}

} // namespace detail

/// Reads "matrix array real general" or "matrix coordinate real general|symmetric" into a dense matrix.
inline DenseMatrix mm_read(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  if (!std::getline(in, text)) throw ParseError(1, "empty input");
  ++line;
  auto head = detail::split_ws(text);
  if (head.size() != 5 || head[0] != "%%MatrixMarket" || detail::lower(head[1]) != "matrix")
    throw ParseError(line, "malformed header");
  const std::string layout = detail::lower(head[2]), field = detail::lower(head[3]),
                    symmetry = detail::lower(head[4]);
  if (layout != "array" && layout != "coordinate") throw ParseError(line, "unknown layout '" + layout + "'");
  if (field == "pattern" || field == "complex") throw UnsupportedFormat("field '" + field + "' is not supported");
  if (field != "real" && field != "double" && field != "integer")
    throw ParseError(line, "unknown field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw UnsupportedFormat("symmetry '" + symmetry + "' is not supported");
  if (symmetric && layout == "array") throw UnsupportedFormat("symmetric array layout is not supported");

  // next non-comment line holds the sizes
  std::vector<std::string_view> tok;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty() || text[0] == '%') continue;
    tok = detail::split_ws(text);
    if (!tok.empty()) break;
  }
  const std::size_t size_line = line;
  if (tok.empty()) throw ParseError(line, "missing size line");
  if (tok.size() != (layout == "array" ? 2u : 3u)) throw ParseError(line, "malformed size line");
  const auto m = detail::parse_number<long long>(tok[0], line), n = detail::parse_number<long long>(tok[1], line);
  if (m < 0 || n < 0) throw ParseError(line, "negative dimension");
  if (symmetric && m != n) throw ParseError(line, "symmetric matrix must be square");
  DenseMatrix M(static_cast<Index>(m), static_cast<Index>(n));
  const long long expected = layout == "array" ? m * n : detail::parse_number<long long>(tok[2], line);
  if (expected < 0) throw ParseError(line, "negative entry count");

  long long count = 0;
  std::string body;
  while (std::getline(in, body)) {
    ++line;
    if (body.empty() || body[0] == '%') continue;
    auto t = detail::split_ws(body);
    if (t.empty()) continue;
    if (count >= expected) throw ParseError(line, "more entries than declared");
    if (layout == "array") {
      if (t.size() != 1) throw ParseError(line, "expected one value");
      M(static_cast<Index>(count % m), static_cast<Index>(count / m)) = detail::parse_number<double>(t[0], line);
    } else {
      if (t.size() != 3) throw ParseError(line, "expected 'row col value'");
      const auto i = detail::parse_number<long long>(t[0], line), j = detail::parse_number<long long>(t[1], line);
      if (i < 1 || i > m || j < 1 || j > n) throw ParseError(line, "index out of range");
      const double v = detail::parse_number<double>(t[2], line);
      M(static_cast<Index>(i - 1), static_cast<Index>(j - 1)) = v;
      if (symmetric) M(static_cast<Index>(j - 1), static_cast<Index>(i - 1)) = v;
    }
    ++count;
  }
  if (count != expected)
    throw ParseError(size_line, "declared " + std::to_string(expected) + " entries, found " + std::to_string(count));
  return M;
}

inline DenseMatrix mm_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return mm_read(in);
}

/// Array format with 17 significant digits, which reads back bit for bit.
inline void mm_write(std::ostream& out, ConstView M) {
  out << "%%MatrixMarket matrix array real general\n" << M.rows() << ' ' << M.cols() << '\n';
  char buf[32];
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", M(i, j));
      out << buf;
    }
}

inline void mm_write(const std::string& path, ConstView M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  mm_write(out, M);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace househt

#endif
