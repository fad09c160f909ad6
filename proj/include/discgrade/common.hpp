#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace discgrade {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Error taxonomy. Validation-class errors map to CLI exit code 1, everything
// else that escapes a stage maps to exit code 2.
// ---------------------------------------------------------------------------

/// Bad user input: malformed config, missing file path, stage mismatch.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (unreadable/unwritable), distinct from validation.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent data encountered mid-pipeline (bad label, empty set, ...).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Crop/pad window arithmetic left the image.
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Degenerate numerics (zero-norm embedding, undefined loss).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG helpers. All pipeline randomness flows through explicitly
// seeded generators; sub-seeds are derived with splitmix64 so per-stage and
// per-item streams are independent of scheduling order.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable sub-seed for (seed, stream) pairs.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x51ed270b7a4aa11dULL));
}

/// xoshiro-free minimal engine wrapper: we use std::mt19937_64 for state but
/// draw floats through fixed arithmetic so results do not depend on libstdc++
/// distribution internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_ + 0x9e3779b97f4a7c15ULL);
    return state_;
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  /// Standard normal via Box-Muller (fresh pair each call, second value dropped).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Hashing and rounding
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

std::string hex64(std::uint64_t v);

/// Hash of a file's raw bytes; throws IoError if unreadable.
std::string hash_file(const fs::path& path);

/// Single documented rounding rule for coordinate->index and quantization.
inline long round_half_up(double v) {
  return static_cast<long>(std::floor(v + 0.5));
}

// ---------------------------------------------------------------------------
// Small string / CSV helpers
// ---------------------------------------------------------------------------

std::string to_lower(std::string s);
std::string trim(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

/// Float formatting that round-trips through parse (9 significant digits).
std::string format_float(float v);

/// Reads a whole text file; throws IoError.
std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& content);

}  // namespace discgrade
