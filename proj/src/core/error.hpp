#pragma once

#include <stdexcept>
#include <string>

namespace kp2 {

enum class ErrorCode {
  InvalidArgument = 1,
  NonzeroXMean,
  AmplitudeCollapse,
  NonFinite,
  TailNotDecayed,
  SingularP,
  ResolutionExceeded,
  NoCrest,
  NoConvergence,
  ConeEmpty,
  Io,
};

/// Base class for every failure raised by the library. The code is what the
/// C API reports; the message carries the numbers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

class NonzeroXMean : public Error {
 public:
  explicit NonzeroXMean(double magnitude)
      : Error(ErrorCode::NonzeroXMean,
              "field has nonzero x-mean on some transverse line (max |coefficient| = " +
                  std::to_string(magnitude) + ")"),
        magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

class AmplitudeCollapse : public Error {
 public:
  explicit AmplitudeCollapse(double c)
      : Error(ErrorCode::AmplitudeCollapse,
              "soliton amplitude is non-positive on some line (c = " + std::to_string(c) + ")") {}
};

class NonFinite : public Error {
 public:
  explicit NonFinite(const std::string& where)
      : Error(ErrorCode::NonFinite, "non-finite value produced in " + where) {}
};

class TailNotDecayed : public Error {
 public:
  explicit TailNotDecayed(double tail)
      : Error(ErrorCode::TailNotDecayed,
              "weighted tail did not decay on the window (relative tail " + std::to_string(tail) +
                  ")") {}
};

class SingularP : public Error {
 public:
  explicit SingularP(double eta)
      : Error(ErrorCode::SingularP,
              "diagonalizing matrix is singular at eta = " + std::to_string(eta)) {}
};

class ResolutionExceeded : public Error {
 public:
  explicit ResolutionExceeded(const std::string& what)
      : Error(ErrorCode::ResolutionExceeded, what) {}
};

class NoCrest : public Error {
 public:
  explicit NoCrest(double peak)
      : Error(ErrorCode::NoCrest, "profile has no dominant crest (peak " + std::to_string(peak) + ")") {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(int iterations)
      : Error(ErrorCode::NoConvergence,
              "iteration did not converge after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

class ConeEmpty : public Error {
 public:
  ConeEmpty() : Error(ErrorCode::ConeEmpty, "no grid points inside the propagation cone") {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace kp2
