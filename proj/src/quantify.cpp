#include "mrsi/quantify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrsi/errors.hpp"
#include "mrsi/fft.hpp"

namespace mrsi {

void PeakModel::validate() const {
  if (lines.size() < 2) throw InvalidArgument("peak model needs a reference line and at least one more");
  if (!(global_shift_hz > 0.0)) throw InvalidArgument("global_shift_hz must be positive");
  for (const auto& l : lines) {
    if (!(l.halfwidth_ppm >= 0.0)) throw InvalidArgument("line '" + l.name + "': negative window");
    if (!(l.damping_min > 0.0 && l.damping_max > l.damping_min)) {
      throw InvalidArgument("line '" + l.name + "': damping bounds must satisfy 0 < min < max");
    }
  }
}

PeakModel PeakModel::muscle_default() {
  PeakModel m;
  m.lines = {
      {"water", 4.70, 0.0, 1.0, 200.0},
      {"imcl", 1.30, 0.06, 1.0, 200.0},
      // EMCL sits 0.2 (3 cos^2 - 1) / 2 ppm from IMCL: [-0.1, +0.2]
      {"emcl", 1.35, 0.25, 1.0, 200.0},
  };
  return m;
}

std::size_t PeakModel::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].name == name) return i;
  }
  throw InvalidArgument("no line named '" + name + "'");
}

const FitLine& FitResult::line(const std::string& name) const {
  for (const auto& l : lines) {
    if (l.name == name) return l;
  }
  throw InvalidArgument("no line named '" + name + "'");
}

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Parameter layout: [f_ref, d_0, delta_1, d_1, ..., delta_{L-1}, d_{L-1}],
// line k frequency = f_ref + delta_k (delta_0 == 0).
struct Problem {
  const CVec& s;
  RVec t;
  std::size_t L;
  RVec lo, hi;

  double freq(const RVec& p, std::size_t k) const { return k == 0 ? p[0] : p[0] + p[2 * k]; }
  double damp(const RVec& p, std::size_t k) const { return p[2 * k + 1]; }

  CMat basis(const RVec& p) const {
    CMat phi(t.size(), static_cast<Eigen::Index>(L));
    for (std::size_t k = 0; k < L; ++k) {
      const cplx rate(-damp(p, k), -kTwoPi * freq(p, k));
      for (Eigen::Index n = 0; n < t.size(); ++n) phi(n, k) = std::exp(rate * t[n]);
    }
    return phi;
  }

  // Derivative of Phi c with respect to every nonlinear parameter.
  CMat model_derivatives(const CMat& phi, const CVec& c) const {
    CMat d(t.size(), static_cast<Eigen::Index>(2 * L));
    d.setZero();
    const cplx mi2pi(0.0, -kTwoPi);
    for (std::size_t k = 0; k < L; ++k) {
      for (Eigen::Index n = 0; n < t.size(); ++n) {
        const cplx v = c[k] * phi(n, k) * t[n];
        d(n, 0) += mi2pi * v;                     // shared reference frequency
        if (k > 0) d(n, 2 * k) = mi2pi * v;       // own offset
        d(n, 2 * k + 1) = -v;                     // damping
      }
    }
    return d;
  }

  struct Eval {
    CMat phi;
    CVec c;
    CVec r;
    double cost = 0.0;
  };

  Eval evaluate(const RVec& p) const {
    Eval e;
    e.phi = basis(p);
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(e.phi);
    e.c = cod.solve(s);
    e.r = s - e.phi * e.c;
    e.cost = e.r.squaredNorm();
    return e;
  }

  RVec project(RVec p) const {
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    return p;
  }
};

RMat stack_real(const CMat& m) {
  RMat out(2 * m.rows(), m.cols());
  out.topRows(m.rows()) = m.real();
  out.bottomRows(m.rows()) = m.imag();
  return out;
}

RVec stack_real(const CVec& v) {
  RVec out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

struct Refined {
  RVec p;
  Problem::Eval e;
  int iterations = 0;
  bool converged = false;
};

Refined levenberg_marquardt(const Problem& pr, RVec p, const FitOptions& opt) {
  Refined out;
  auto e = pr.evaluate(p);
  const double floor = 1e-30 * pr.s.squaredNorm();
  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  while (it < opt.max_iterations && !converged) {
    ++it;
    if (e.cost <= floor) {
      converged = true;
      break;
    }
    // Kaufman approximation: dr/dp = -(I - P) dPhi/dp c
    const CMat dm = pr.model_derivatives(e.phi, e.c);
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(e.phi);
    const CMat proj = dm - e.phi * cod.solve(dm);
    const RMat J = -stack_real(proj);
    const RVec r = stack_real(e.r);
    const RMat JtJ = J.transpose() * J;
    const RVec g = J.transpose() * r;
    RVec diag = JtJ.diagonal().cwiseMax(1e-12 * std::max(1.0, JtJ.diagonal().maxCoeff()));
    // parameters held on a bound by the gradient are frozen for this step,
    // otherwise the projected step shrinks to nothing and LM crawls
    std::vector<bool> fixed(static_cast<std::size_t>(p.size()), false);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double tol = 1e-12 * std::max(1.0, pr.hi[i] - pr.lo[i]);
      fixed[static_cast<std::size_t>(i)] =
          (p[i] <= pr.lo[i] + tol && g[i] > 0.0) || (p[i] >= pr.hi[i] - tol && g[i] < 0.0);
    }

    bool accepted = false;
    while (!accepted) {
      RMat A = JtJ;
      A.diagonal() += lambda * diag;
      RVec rhs = -g;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!fixed[static_cast<std::size_t>(i)]) continue;
        A.row(i).setZero();
        A.col(i).setZero();
        A(i, i) = 1.0;
        rhs[i] = 0.0;
      }
      const RVec step = A.ldlt().solve(rhs);
      const RVec trial = pr.project(p + step);
      const auto et = pr.evaluate(trial);
      if (et.cost < e.cost) {
        const double rel = (e.cost - et.cost) / e.cost;
        p = trial;
        e = et;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < opt.rel_tol) converged = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e10) {
          // no descent left inside the box: stationary to working precision
          converged = true;
          break;
        }
      }
    }
  }
  out.p = p;
  out.e = e;
  out.iterations = it;
  out.converged = converged;
  return out;
}

double condition_estimate(const Problem& pr, const Problem::Eval& e) {
  const Eigen::Index n = pr.t.size();
  const auto L = static_cast<Eigen::Index>(pr.L);
  CMat full(n, 2 * L + 2 * L);
  for (Eigen::Index k = 0; k < L; ++k) {
    full.col(2 * k) = e.phi.col(k);
    full.col(2 * k + 1) = e.phi.col(k) * cplx(0.0, 1.0);
  }
  full.rightCols(2 * L) = pr.model_derivatives(e.phi, e.c);
  RMat J = stack_real(full);
  // Amplitude columns are scaled to unit norm. Nonlinear columns are scaled
  // as if their line carried the largest amplitude, so a line whose
  // amplitude vanishes leaves its frequency and damping unidentified and
  // shows up in the estimate.
  double cmax = 0.0;
  for (Eigen::Index k = 0; k < L; ++k) cmax = std::max(cmax, std::abs(e.c[k]));
  if (!(cmax > 0.0)) return std::numeric_limits<double>::infinity();
  const CVec unit = CVec::Constant(L, cplx(cmax, 0.0));
  const RMat ref = stack_real(pr.model_derivatives(e.phi, unit));
  for (Eigen::Index j = 0; j < J.cols(); ++j) {
    const double nrm = j < 2 * L ? J.col(j).norm() : ref.col(j - 2 * L).norm();
    if (!(nrm > 0.0)) return std::numeric_limits<double>::infinity();
    J.col(j) /= nrm;
  }
  Eigen::JacobiSVD<RMat> svd(J);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

// Frequency of the strongest conventional-spectrum bin within the window.
double strongest_offset(std::span<const cplx> fid, double dwell_s, double center, double half) {
  std::vector<cplx> buf(fid.size() * 2, cplx{});
  std::copy(fid.begin(), fid.end(), buf.begin());
  fft::backward(buf);
  const double df = 1.0 / (static_cast<double>(buf.size()) * dwell_s);
  double best_f = center, best_a = -1.0;
  const long n = static_cast<long>(buf.size());
  for (long k = 0; k < n; ++k) {
    const double f = static_cast<double>(k < n / 2 ? k : k - n) * df;
    if (std::abs(f - center) > half) continue;
    const double a = std::abs(buf[static_cast<std::size_t>(k)]);
    if (a > best_a) {
      best_a = a;
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace

FitResult fit_voxel(std::span<const cplx> fid, double dwell_s, const PeakModel& model,
                    const FieldConstants& field, const FitOptions& opt) {
  model.validate();
  field.validate();
  if (fid.size() < 8) throw InvalidArgument("FID too short to fit");
  if (!(dwell_s > 0.0)) throw InvalidArgument("dwell must be positive");
  if (std::all_of(fid.begin(), fid.end(), [](const cplx& z) { return z == cplx{}; })) {
    throw EmptySignalError("FID is identically zero");
  }

  const std::size_t L = model.lines.size();
  const auto n = static_cast<Eigen::Index>(fid.size());
  CVec s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = fid[static_cast<std::size_t>(i)];
  Problem pr{s, RVec(n), L, RVec(2 * L), RVec(2 * L)};
  for (Eigen::Index i = 0; i < n; ++i) pr.t[i] = static_cast<double>(i) * dwell_s;

  const double hz = field.hz_per_ppm();
  const double ref_prior = ppm_to_offset_hz(model.lines[0].prior_ppm, field);
  pr.lo[0] = ref_prior - model.global_shift_hz;
  pr.hi[0] = ref_prior + model.global_shift_hz;
  for (std::size_t k = 0; k < L; ++k) {
    pr.lo[2 * k + 1] = model.lines[k].damping_min;
    pr.hi[2 * k + 1] = model.lines[k].damping_max;
    if (k == 0) continue;
    const auto& l = model.lines[k];
    // offset below the reference line, positive-difference convention
    pr.lo[2 * k] = (model.lines[0].prior_ppm - (l.prior_ppm + l.halfwidth_ppm)) * hz;
    pr.hi[2 * k] = (model.lines[0].prior_ppm - (l.prior_ppm - l.halfwidth_ppm)) * hz;
  }

  // multi-start grid: reference frequency from the spectrum, line offsets on
  // a 0.05 ppm grid across each window, a shared damping on a coarse grid
  const double f0 = strongest_offset(fid, dwell_s, ref_prior, model.global_shift_hz);
  std::vector<std::vector<double>> offsets(L);
  for (std::size_t k = 1; k < L; ++k) {
    const auto& l = model.lines[k];
    const int m = static_cast<int>(std::floor(l.halfwidth_ppm / 0.05 + 1e-9));
    for (int j = -m; j <= m; ++j) {
      offsets[k].push_back((model.lines[0].prior_ppm - (l.prior_ppm + 0.05 * j)) * hz);
    }
    if (l.halfwidth_ppm > 0.05 * m + 1e-9) {
      offsets[k].push_back(pr.lo[2 * k]);
      offsets[k].push_back(pr.hi[2 * k]);
    }
  }
  const double damping_grid[] = {20.0, 50.0};

  std::vector<RVec> starts;
  std::vector<std::size_t> pos(L, 0);
  for (double d : damping_grid) {
    std::fill(pos.begin(), pos.end(), 0);
    while (true) {
      RVec p(2 * L);
      p[0] = f0;
      for (std::size_t k = 0; k < L; ++k) p[2 * k + 1] = d;
      for (std::size_t k = 1; k < L; ++k) p[2 * k] = offsets[k][pos[k]];
      starts.push_back(pr.project(p));
      std::size_t k = 1;
      while (k < L && ++pos[k] == offsets[k].size()) pos[k++] = 0;
      if (k == L) break;
    }
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) ranked.emplace_back(pr.evaluate(starts[i]).cost, i);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::size_t n_refine =
      std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(std::max(1, opt.refine_starts)));
  Refined best;
  bool have = false;
  for (std::size_t i = 0; i < n_refine; ++i) {
    auto r = levenberg_marquardt(pr, starts[ranked[i].second], opt);
    if (!have || r.e.cost < best.e.cost) {
      best = std::move(r);
      have = true;
    }
  }

  FitResult out;
  out.initial_residual_norm = std::sqrt(ranked.front().first);
  out.residual_norm = std::sqrt(best.e.cost);
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.condition = condition_estimate(pr, best.e);
  out.ill_conditioned = !(out.condition <= opt.condition_limit);
  for (std::size_t k = 0; k < L; ++k) {
    out.lines.push_back({model.lines[k].name, best.e.c[static_cast<Eigen::Index>(k)],
                         pr.freq(best.p, k), pr.damp(best.p, k)});
  }
  return out;
}

double imcl_percent(const FitResult& fit) {
  if (!fit.converged) throw UndefinedRatioError("fit did not converge");
  if (fit.ill_conditioned) throw UndefinedRatioError("fit is ill-conditioned");
  const double a = std::abs(fit.line("imcl").amplitude);
  const double b = std::abs(fit.line("emcl").amplitude);
  if (!(a + b > 0.0)) throw UndefinedRatioError("IMCL and EMCL amplitudes are both zero");
  return 100.0 * a / (a + b);
}

double ff_percent(const FitResult& fit) {
  if (!fit.converged) throw UndefinedRatioError("fit did not converge");
  const double a = std::abs(fit.line("imcl").amplitude);
  const double b = std::abs(fit.line("emcl").amplitude);
  const double w = std::abs(fit.line("water").amplitude);
  if (!(a + b + w > 0.0)) throw UndefinedRatioError("all amplitudes are zero");
  return 100.0 * (a + b) / (a + b + w);
}

}  // namespace mrsi
