#ifndef BREACHLENS_CORE_HPP
#define BREACHLENS_CORE_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace breachlens {

// Input could not be parsed (bad CSV row, bad JSON line, ...).
// CLI maps this family to exit code 2.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string msg, std::size_t row = 0)
      : std::runtime_error(std::move(msg)), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Bad configuration or violated precondition. CLI maps to exit code 3.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class precondition_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix. Small and dumb on purpose; every consumer in this
// library iterates rows sequentially.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  std::vector<double> row_copy(std::size_t r) const {
    return std::vector<double>(row(r), row(r) + cols);
  }

  void push_row(const std::vector<double>& v) {
    if (rows == 0 && cols == 0) cols = v.size();
    if (v.size() != cols) throw precondition_error("push_row: width mismatch");
    data.insert(data.end(), v.begin(), v.end());
    ++rows;
  }
};

namespace strutil {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Lowercase and collapse every whitespace run to a single space. Keyword
// matching happens on this form so multi-word terms survive line breaks.
inline std::string normalize_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // also trims leading space
  for (char ch : s) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Code-point count of a UTF-8 string; malformed bytes count as one each.
inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t adv = 1;
    if ((c & 0x80u) == 0x00u) adv = 1;
    else if ((c & 0xE0u) == 0xC0u) adv = 2;
    else if ((c & 0xF0u) == 0xE0u) adv = 3;
    else if ((c & 0xF8u) == 0xF0u) adv = 4;
    i += adv;
    ++n;
  }
  return n;
}

inline bool contains_ci(std::string_view haystack_normalized, std::string_view needle) {
  return haystack_normalized.find(needle) != std::string_view::npos;
}

inline std::optional<long long> parse_int(std::string_view s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  // Tolerate pandas-style float renderings of integers ("2016.0").
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && p == t.data() + t.size()) return v;
  double d = 0;
  auto [pd, ed] = std::from_chars(t.data(), t.data() + t.size(), d);
  if (ed == std::errc() && pd == t.data() + t.size() && std::isfinite(d) &&
      d == std::floor(d) && std::fabs(d) < 9.0e15) {
    return static_cast<long long>(d);
  }
  return std::nullopt;
}

inline std::optional<double> parse_double(std::string_view s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && p == t.data() + t.size()) return v;
  return std::nullopt;
}

}  // namespace strutil

namespace numfmt {

// Shortest round-trip decimal form. Used for every CSV cell and anywhere a
// byte-stable rendering matters.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace numfmt

namespace fsio {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw config_error("short write: " + path);
}

}  // namespace fsio

// FNV-1a, used for config hashes in provenance blocks.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace breachlens

#endif  // BREACHLENS_CORE_HPP
