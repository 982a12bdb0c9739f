#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "heis/fit.hpp"
#include "heis/grid.hpp"
#include "heis/map.hpp"

namespace heis {

/// Decimal serialization with 17 significant digits; round-trips doubles
/// bit-exactly and is locale-independent.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline double parse_double(const std::string& tok, const std::string& file, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError(file, line, "bad number '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

/// Columnar map format: '#' headers carry box, counts and spacing; then one
/// node per line "x y t f1 f2 f3" in node order (x slowest, t fastest).
inline void save_map(const SampledMap& map, std::ostream& os) {
  const SampledMap tab = map.analytic() ? tabulate(map) : map;
  const Grid& g = tab.grid;
  os << "# heis map v1\n";
  os << "# box";
  for (int a = 0; a < 3; ++a) os << ' ' << format_double(g.box.lo[a]) << ' '
                                 << format_double(g.box.hi[a]);
  os << "\n# counts " << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << '\n';
  os << "# spacing " << format_double(g.spacing(0)) << ' ' << format_double(g.spacing(1)) << ' '
     << format_double(g.spacing(2)) << '\n';
  for (std::size_t li = 0; li < g.size(); ++li) {
    const Point p = g.node(li);
    os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.t) << ' '
       << format_double(tab.values[0][li]) << ' ' << format_double(tab.values[1][li]) << ' '
       << format_double(tab.values[2][li]) << '\n';
  }
}

inline void save_map(const SampledMap& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_map: cannot open " + path);
  save_map(map, os);
}

inline SampledMap load_map(std::istream& is, const std::string& name = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  bool have_box = false, have_counts = false;
  Box box;
  std::array<int, 3> counts{0, 0, 0};
  SampledMap map;
  std::size_t data_row = 0;

  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto toks = detail::split_ws(line.substr(1));
      if (toks.empty()) continue;
      if (toks[0] == "box") {
        if (toks.size() != 7) throw ParseError(name, lineno, "box header needs 6 numbers");
        for (int a = 0; a < 3; ++a) {
          box.lo[a] = detail::parse_double(toks[1 + 2 * a], name, lineno);
          box.hi[a] = detail::parse_double(toks[2 + 2 * a], name, lineno);
        }
        have_box = true;
      } else if (toks[0] == "counts") {
        if (toks.size() != 4) throw ParseError(name, lineno, "counts header needs 3 integers");
        for (int a = 0; a < 3; ++a)
          counts[a] = static_cast<int>(detail::parse_double(toks[1 + a], name, lineno));
        have_counts = true;
      }
      continue;
    }
    if (!have_box || !have_counts)
      throw ParseError(name, lineno, "data before box/counts headers");
    if (data_row == 0) {
      map.grid = Grid(box, counts);
      for (int c = 0; c < 3; ++c) map.values[c].assign(map.grid.size(), 0.0);
    }
    if (data_row >= map.grid.size()) throw ParseError(name, lineno, "more rows than grid nodes");
    const auto toks = detail::split_ws(line);
    if (toks.size() != 6)
      throw ParseError(name, lineno, "expected 6 columns, got " + std::to_string(toks.size()));
    double col[6];
    for (int c = 0; c < 6; ++c) col[c] = detail::parse_double(toks[c], name, lineno);
    const Point expect = map.grid.node(data_row);
    const double scale = 1.0 + map.grid.box.diameter();
    if (std::fabs(col[0] - expect.x) > 1e-9 * scale || std::fabs(col[1] - expect.y) > 1e-9 * scale ||
        std::fabs(col[2] - expect.t) > 1e-9 * scale)
      throw ParseError(name, lineno, "node coordinates out of order");
    for (int c = 0; c < 3; ++c) map.values[c][data_row] = col[3 + c];
    ++data_row;
  }
  if (!have_box || !have_counts) throw ParseError(name, lineno, "missing box/counts headers");
  if (data_row != map.grid.size())
    throw ParseError(name, lineno + 1,
                     "truncated: expected " + std::to_string(map.grid.size()) + " rows, got " +
                         std::to_string(data_row));
  return map;
}

inline SampledMap load_map(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_map: cannot open " + path);
  return load_map(is, path);
}

/// Flat key-value record of a full fit.
inline std::string fit_record(const FullFitResult& r) {
  std::ostringstream os;
  os << "branch=" << (r.iso.reflect ? "reflected" : "direct") << '\n';
  os << "angle=" << format_double(r.iso.angle) << '\n';
  os << "trans_x=" << format_double(r.iso.trans.x) << '\n';
  os << "trans_y=" << format_double(r.iso.trans.y) << '\n';
  os << "trans_t=" << format_double(r.iso.trans.t) << '\n';
  os << "lambda_hat=" << format_double(r.lambda_hat) << '\n';
  os << "sup_d=" << format_double(r.sup_d) << '\n';
  os << "sup_dH=" << format_double(r.sup_dh) << '\n';
  os << "sobolev_dev=" << format_double(r.sobolev_dev) << '\n';
  return os.str();
}

/// Minimal deterministic CSV assembly; callers provide already-ordered rows.
struct CsvTable {
  std::vector<std::string> leading_comments;  // run configuration
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer_comments;   // fitted summaries

  std::string str() const {
    std::ostringstream os;
    for (const auto& c : leading_comments) os << "# " << c << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    for (const auto& c : footer_comments) os << "# " << c << '\n';
    return os.str();
  }
};

}  // namespace heis
