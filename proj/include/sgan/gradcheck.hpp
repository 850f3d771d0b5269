#pragma once

#include "sgan/tensor.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sgan {

struct GradCheckReport {
  Scalar max_rel_err = 0.0;
  bool pass = true;
  Index coordinates_checked = 0;
};

/// Compares analytic gradients of `f` with respect to `params` against central
/// differences (f(p+h) - f(p-h)) / 2h, coordinate by coordinate. The relative
/// error of one coordinate is |a - n| / max(|a|, |n|, 1e-6), so coordinates
/// whose gradient is essentially zero are judged on absolute error.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params, Scalar h = 1e-4,
                           Scalar tol = 1e-3);

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

struct GradCheckSuiteOptions {
  Scalar h = 1e-4;
  Scalar tol = 1e-3;
  int seeds = 100;
  // Adds a sigmoid whose backward rule is deliberately wrong (negative control).
  bool inject_fault = false;
};

/// Runs every catalog op over randomized inputs plus the five network forward
/// passes. One entry per op / network. Network inputs are redrawn until every
/// hidden pre-activation is at least 0.05 from zero, so no ReLU switches inside
/// the finite-difference interval.
std::vector<GradCheckCase> run_gradcheck_suite(const GradCheckSuiteOptions& options = {});

}  // namespace sgan
