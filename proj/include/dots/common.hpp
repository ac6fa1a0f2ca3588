#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dots {

using TokenSeq = std::vector<int>;

// ---------------------------------------------------------------------------
// Errors

struct DotsError : std::runtime_error {
  explicit DotsError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : DotsError {
  explicit IoError(const std::string& msg) : DotsError(msg) {}
};

struct ConfigError : DotsError {
  explicit ConfigError(const std::string& msg) : DotsError(msg) {}
};

// Raised when a token sequence cannot be interpreted as a state even after
// repair. `valid_prefix` is the number of leading tokens that did parse.
struct ParseError : DotsError {
  ParseError(const std::string& msg, std::size_t prefix)
      : DotsError(msg), valid_prefix(prefix) {}
  std::size_t valid_prefix = 0;
};

struct TrainingError : DotsError {
  explicit TrainingError(const std::string& msg) : DotsError(msg) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// Thin wrapper over mt19937_64 that avoids std::uniform_*_distribution, whose
// output differs between standard library implementations. Sampling here is
// reproducible for a given seed on any platform.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // splitmix64; small, fast, and well distributed
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // rejection-free modulo is fine at these scales
    return next_u64() % n;
  }

  int next_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double next_real() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  bool next_bool(double p_true) { return next_real() < p_true; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[next_below(v.size())];
  }

  // Fisher-Yates; std::shuffle is not guaranteed identical across platforms.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Small string helpers

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_whitespace(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace dots
