#pragma once

#include <stdexcept>
#include <string>

namespace wvtilt {

/// Base of every error raised by the library. Catch this to handle all
/// validation and domain failures uniformly (the CLI maps it to exit 2).
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate a documented invariant (negative power, bad grid...).
class validation_error : public error {
 public:
  using error::error;
};

class grid_too_narrow : public validation_error {
 public:
  using validation_error::validation_error;
};

class non_uniform_grid : public validation_error {
 public:
  using validation_error::validation_error;
};

/// Relative phase below the weak-value floor (cot(phi/2) diverges).
class singular_phase : public error {
 public:
  using error::error;
};

/// Minimum measurable tilt is infinite (cos(phi/2) = 0, fully bright port).
class divergent_mmt : public error {
 public:
  using error::error;
};

class infeasible_postselection : public error {
 public:
  using error::error;
};

class insufficient_data : public error {
 public:
  using error::error;
};

class degenerate_fit : public error {
 public:
  using error::error;
};

class infeasible : public error {
 public:
  using error::error;
};

}  // namespace wvtilt
