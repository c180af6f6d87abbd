#pragma once

// Thin wrapper over FFTW3. Plans are created once per size under a lock and
// executed through the new-array interface, which is thread-safe.

#include <complex>
#include <span>

namespace mrsi::fft {

using cplx = std::complex<double>;

/// In place, X[k] = sum_n x[n] exp(-i 2 pi k n / N), unnormalized.
void forward(std::span<cplx> data);
/// In place, x[n] = sum_k X[k] exp(+i 2 pi k n / N), unnormalized.
void backward(std::span<cplx> data);
/// In place 2D backward transform of a row-major rows x cols array, unnormalized.
void backward_2d(std::span<cplx> data, int rows, int cols);
/// In place 2D forward transform, unnormalized.
void forward_2d(std::span<cplx> data, int rows, int cols);
/// Real input of length N, output N/2 + 1 non-negative-frequency bins.
void real_forward(std::span<const double> in, std::span<cplx> out);

}  // namespace mrsi::fft
