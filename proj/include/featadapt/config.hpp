#pragma once

#include <cstdint>

namespace featadapt {

// Numerical tolerances shared by every module.
struct Tolerances {
  double symmetry = 1e-12;          // relative, per entry
  double psd = 1e-9;                // eigenvalues >= -psd * |lambda|_max
  double sigma_norm_clamp = 1e-12;  // quadratic forms in [-clamp, 0] become 0
  double gram_schmidt = 1e-10;      // skip images below this * max input norm
  double sqrt_clamp = 1e-10;        // clamp eigenvalues below this * lambda_max
  double kernel = 1e-10;            // eigenvalues treated as zero in kernels
  double ridge = 1e-12;             // ridge for near-singular normal equations
};

inline const Tolerances& tolerances() {
  static const Tolerances t{};
  return t;
}

// Hard cap on enumerated subsets (C(|S|, t) and similar).
inline constexpr std::uint64_t kDefaultSubsetCap = 1'000'000;

}  // namespace featadapt
