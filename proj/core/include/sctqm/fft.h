#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

namespace sctqm {

using cplx = std::complex<double>;

// Transform convention, pinned because cached features depend on it:
// forward X[k] = Σ_n x[n] e^{-2πi k·n/N} (unnormalized),
// inverse x[n] = (1/N^d) Σ_k X[k] e^{+2πi k·n/N}.
inline constexpr std::string_view kFftConvention = "fwd-unnormalized/inv-1overN";

constexpr bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place 2D transforms of an n x n row-major array. n must be a power of two.
void fft2(std::span<cplx> data, int n);
void ifft2(std::span<cplx> data, int n);

// In-place batched 1D transforms of `count` sequences of length `length`;
// element t of sequence b lives at data[b * dist + t * stride].
void fft_batch(std::span<cplx> data, int length, int count, int stride, int dist);
void ifft_batch(std::span<cplx> data, int length, int count, int stride, int dist);

// Backward transforms without the 1/N^d factor, for callers that fold the
// normalization into an earlier pass.
void ifft2_unscaled(std::span<cplx> data, int n);
void ifft_batch_unscaled(std::span<cplx> data, int length, int count, int stride, int dist);

// Single 1D sequence, contiguous.
void fft1(std::span<cplx> data);
void ifft1(std::span<cplx> data);

// a·b without the C99 Annex G special-value handling of operator*.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Signed frequency index of bin k on an n-point grid: k for k < n/2, k - n otherwise.
constexpr int signed_frequency(int k, int n) { return k < n / 2 ? k : k - n; }

}  // namespace sctqm
