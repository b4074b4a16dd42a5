#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace tnlab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DerivativeUnavailable : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DegeneratePlane : public Error {
 public:
  using Error::Error;
};

class AmbiguousSignature : public Error {
 public:
  AmbiguousSignature(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class SingularResidual : public Error {
 public:
  SingularResidual(const std::string& what, std::complex<double> point)
      : Error(what), point_(point) {}
  std::complex<double> point() const { return point_; }

 private:
  std::complex<double> point_;
};

class SingularCoefficient : public Error {
 public:
  using Error::Error;
};

/// Raised when A2 = 0 is handed to the stationary-family constructor;
/// that case belongs to degenerate_family.
class RedirectToDegenerate : public Error {
 public:
  using Error::Error;
};

class EmptyDomain : public Error {
 public:
  using Error::Error;
};

class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

class ChartError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

std::string format_point(std::complex<double> z);

}  // namespace tnlab
