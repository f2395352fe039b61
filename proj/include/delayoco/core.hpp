#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace delayoco {

/// Dense real vector. Decisions, gradients and features all use this type.
using Vector = std::vector<double>;

/// A point of the feasible set; the learner's per-round output.
using DecisionVector = Vector;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The inner solver hit its iteration cap before certifying the requested accuracy.
class CertificateNotReached : public Error {
 public:
  CertificateNotReached(const std::string& what, double gap, double rho)
      : Error(what), gap_(gap), rho_(rho) {}
  double gap() const { return gap_; }
  double rho() const { return rho_; }

 private:
  double gap_;
  double rho_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

namespace vec {

inline void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionMismatch("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
}

inline void require_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) throw InvalidInput("non-finite vector entry");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

inline double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

/// General p-norm for p >= 1 (p = inf handled by norm_inf).
inline double norm_p(std::span<const double> a, double p) {
  if (std::isinf(p)) return norm_inf(a);
  if (p == 2.0) return norm2(a);
  if (p == 1.0) return norm1(a);
  // scale by the max entry so large q exponents do not overflow
  const double m = norm_inf(a);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : a) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

inline Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

/// a += s * b
inline void axpy(double s, std::span<const double> b, std::span<double> a) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline Vector scaled(std::span<const double> a, double s) {
  Vector r(a.begin(), a.end());
  for (double& v : r) v *= s;
  return r;
}

inline double sum(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

}  // namespace vec
}  // namespace delayoco
