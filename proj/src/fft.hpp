#pragma once

// Thin RAII layer over FFTW's real transforms. FFTW's planner is not
// re-entrant, so plan creation and destruction are serialized; execution of
// distinct plans is safe from any thread.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace memschaos::detail {

// Forward real-to-half-complex transform, unnormalized: out has n/2 + 1 bins.
std::vector<std::complex<double>> forward_real(std::span<const double> in);

// Inverse of forward_real for an even length n, unnormalized (returns n * x).
std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n);

}  // namespace memschaos::detail
