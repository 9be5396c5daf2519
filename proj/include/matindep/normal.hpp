#pragma once

namespace matindep {

// Standard normal CDF.
double normal_cdf(double x);

// Upper tail 1 - Phi(x), computed without cancellation for large x.
double normal_sf(double x);

// Inverse of the standard normal CDF (Wichura's AS241, PPND16), relative
// accuracy about 1e-16 over (0, 1). Returns -inf/+inf at 0/1.
double normal_quantile(double p);

}  // namespace matindep
