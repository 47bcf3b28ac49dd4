#ifndef LOGNLOGS_IO_HPP
#define LOGNLOGS_IO_HPP

// Dataset CSV (header `y,a,b`) and JSON helpers. Requires nlohmann/json.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/errors.hpp"

namespace lognlogs {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::uint64_t parse_count(const std::string& s, std::size_t line) {
  if (s.empty()) throw DataError(line, "empty count");
  for (char c : s) {
    if (c < '0' || c > '9') throw DataError(line, "count '" + s + "' is not a nonnegative integer");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw DataError(line, "count '" + s + "' out of range");
  return static_cast<std::uint64_t>(v);
}

inline double parse_real(const std::string& s, std::size_t line, const char* what) {
  if (s.empty()) throw DataError(line, std::string("empty ") + what);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw DataError(line, std::string(what) + " '" + s + "' is not a finite number");
  }
  return v;
}

}  // namespace detail

inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<ObservedSource> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto f = detail::split_csv(t);
    if (!header) {
      if (f.size() != 3 || f[0] != "y" || f[1] != "a" || f[2] != "b") {
        throw DataError(lineno, "expected header 'y,a,b'");
      }
      header = true;
      continue;
    }
    if (f.size() != 3) {
      throw DataError(lineno, "expected 3 fields, found " + std::to_string(f.size()));
    }
    ObservedSource s;
    s.y = detail::parse_count(f[0], lineno);
    s.a = detail::parse_real(f[1], lineno, "area");
    s.b = detail::parse_real(f[2], lineno, "background");
    if (!(s.a > 0.0)) throw DataError(lineno, "area must be positive");
    if (s.b < 0.0) throw DataError(lineno, "background must be nonnegative");
    rows.push_back(s);
  }
  if (!header) throw DataError(lineno == 0 ? 1 : lineno, "missing header 'y,a,b'");
  if (rows.empty()) throw DataError(lineno, "no data rows");
  return Dataset(std::move(rows));
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_dataset_csv(in);
}

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "y,a,b\n";
  for (const auto& s : data.sources()) {
    out << s.y << ',' << format_real(s.a) << ',' << format_real(s.b) << '\n';
  }
}

inline nlohmann::json params_to_json(const BrokenParetoParams& p) {
  nlohmann::json j;
  j["beta"] = p.beta();
  j["tau"] = p.tau();
  std::vector<double> lt;
  for (double t : p.tau()) lt.push_back(std::log10(t));
  j["log10_tau"] = lt;
  return j;
}

/// Reads `beta` and `tau` (natural units) from a JSON object; the strict
/// constructor rejects invalid parameters.
inline BrokenParetoParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("beta") || !j.contains("tau")) {
    throw DomainError("parameter JSON needs 'beta' and 'tau' arrays");
  }
  std::vector<double> beta;
  std::vector<double> tau;
  try {
    beta = j.at("beta").get<std::vector<double>>();
    tau = j.at("tau").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("parameter JSON: ") + e.what());
  }
  return BrokenParetoParams(beta, tau);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(0, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace lognlogs

#endif  // LOGNLOGS_IO_HPP
