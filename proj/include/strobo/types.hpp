#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace strobo {

inline constexpr const char* kVersion = "0.1.0";

// Largest state dimension handled by the field algebra (augmented 3D case needs 7).
inline constexpr int kMaxDim = 8;

using Complex = std::complex<double>;

template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Vec = VecT<double>;
using Mat = MatT<double>;
using CVec = VecT<Complex>;
using CMat = MatT<Complex>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// bad arguments, dimension mismatch
class UsageError : public Error {
 public:
  using Error::Error;
};

// point or parameter outside the admissible set (omega <= 0, |B| too small, ...)
class DomainError : public Error {
 public:
  using Error::Error;
};

// integrator failure, singular Jacobian, imaginary residue, root not found
class NumericError : public Error {
 public:
  using Error::Error;
};

class CostGuardError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace strobo
