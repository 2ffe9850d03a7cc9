#include "lsicert/measure.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lsicert {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw InputError("measure file line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

std::vector<std::string> next_tokens(std::istream& in, int& line) {
  std::string text;
  while (std::getline(in, text)) {
    ++line;
    if (auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    std::istringstream ss(text);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (!toks.empty()) return toks;
  }
  return {};
}

}  // namespace

SmoothedMeasure read_measure(std::istream& in) {
  int line = 0;
  const auto header = next_tokens(in, line);
  if (header.size() != 3) throw InputError("measure file: header must be 'd N delta'");
  const double dd = parse_double(header[0], line);
  const double nn = parse_double(header[1], line);
  const double delta = parse_double(header[2], line);
  const int d = static_cast<int>(dd);
  const int n = static_cast<int>(nn);
  if (d < 1 || dd != d || n < 1 || nn != n) {
    throw InputError("measure file: d and N must be positive integers");
  }
  Matrix atoms(d, n);
  Vector weights(n);
  for (int i = 0; i < n; ++i) {
    const auto row = next_tokens(in, line);
    if (static_cast<int>(row.size()) != d + 1) {
      throw InputError("measure file line " + std::to_string(line) + ": expected " +
                       std::to_string(d + 1) + " fields");
    }
    weights[i] = parse_double(row[0], line);
    for (int k = 0; k < d; ++k) atoms(k, i) = parse_double(row[k + 1], line);
  }
  if (!next_tokens(in, line).empty()) throw InputError("measure file: trailing rows after N atoms");
  return SmoothedMeasure(BallMeasure(std::move(atoms), std::move(weights)), delta);
}

SmoothedMeasure read_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open measure file '" + path + "'");
  return read_measure(in);
}

void write_measure(std::ostream& out, const SmoothedMeasure& sm) {
  const auto& b = sm.base();
  out << b.dimension() << ' ' << b.size() << ' ' << format_double(sm.delta()) << '\n';
  for (int i = 0; i < b.size(); ++i) {
    out << format_double(b.weights()[i]);
    for (int k = 0; k < b.dimension(); ++k) out << ' ' << format_double(b.atoms()(k, i));
    out << '\n';
  }
}

void write_measure_file(const std::string& path, const SmoothedMeasure& sm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write measure file '" + path + "'");
  write_measure(out, sm);
}

}  // namespace lsicert
