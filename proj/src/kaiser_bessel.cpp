#include <cmath>

#include "mrsi/errors.hpp"
#include "mrsi/recon.hpp"

namespace mrsi {

double GriddingConfig::resolved_beta() const {
  if (beta > 0.0) return beta;
  // W / os * (os - 0.5) with W in oversampled cells
  const double a = kernel_width * (oversampling - 0.5);
  return kPi * std::sqrt(a * a - 0.8);
}

void GriddingConfig::validate() const {
  if (!(oversampling >= 1.0)) throw InvalidArgument("gridding oversampling must be >= 1");
  if (!(kernel_width >= 2.0)) throw InvalidArgument("gridding kernel width must be >= 2");
  const double a = kernel_width * (oversampling - 0.5);
  if (beta <= 0.0 && a * a <= 0.8) {
    throw InvalidArgument("kernel width/oversampling too small for the default beta formula");
  }
}

KaiserBessel::KaiserBessel(double width, double beta)
    : width_(width), beta_(beta), i0_beta_(std::cyl_bessel_i(0.0, beta)) {}

double KaiserBessel::operator()(double u) const {
  const double r = 2.0 * u / width_;
  if (std::abs(r) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta_ * std::sqrt(1.0 - r * r)) / i0_beta_;
}

// Integral of I0(beta sqrt(1 - (2u/W)^2)) exp(i 2 pi u nu) over |u| <= W/2,
// divided by I0(beta).
double KaiserBessel::transform(double nu) const {
  const double a = kPi * width_ * nu;
  const double d = beta_ * beta_ - a * a;
  double shape = 0.0;
  if (d > 1e-12) {
    const double s = std::sqrt(d);
    shape = std::sinh(s) / s;
  } else if (d < -1e-12) {
    const double s = std::sqrt(-d);
    shape = std::sin(s) / s;
  } else {
    shape = 1.0;
  }
  return width_ * shape / i0_beta_;
}

}  // namespace mrsi
