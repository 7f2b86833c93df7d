#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vpm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a scattering channel cannot be processed (grazing threshold,
/// stiff ODE, singular Wronskian, complex log-det). The message always
/// carries the channel coordinates.
class ChannelError : public Error {
 public:
  using Error::Error;
};

}  // namespace vpm
