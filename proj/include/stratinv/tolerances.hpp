#pragma once

// Numerical tolerances shared by the LP kernel, the branch-and-bound and the
// decomposition loop. Everything that compares floating point values against
// zero should take its threshold from here.

namespace stratinv::tol {

inline constexpr double kPrimalFeasibility = 1e-8;
inline constexpr double kDualFeasibility = 1e-8;
inline constexpr double kPivot = 1e-10;

inline constexpr int kRefactorInterval = 100;
inline constexpr int kMaxSimplexIterations = 50000;
// Consecutive degenerate pivots before switching to Bland's rule.
inline constexpr int kDegenerateStall = 50;

inline constexpr double kProbabilitySum = 1e-12;

// Complementarity products are accepted when u*v <= kComplementarity * U*V,
// with U, V the ranges of the two sides.
inline constexpr double kComplementarity = 1e-7;
inline constexpr double kRelativeGap = 1e-6;

}  // namespace stratinv::tol
