// Copyright 2026 The sppt-analysis Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sppt/linalg.hpp"
#include "sppt/states.hpp"

namespace sppt {

/// Orthonormal basis (columns) of the eigenvectors of m with eigenvalue at or
/// below cutoff * ||m||_F.
inline CMat kernel_basis(const CMat &m, double cutoff = 1e-9) {
  const PsdCheck psd = psd_check(m, tol::kPsd);
  if (!psd.is_psd) throw Error(ErrorCode::NotPsd, "kernel_basis: input is not PSD");
  return spectral_split(m, cutoff).kernel;
}

/// Stereographic sampling of the qubit projective line. Interior points use
/// theta_j = pi (j+1)/(polar+1), phi_i = 2 pi i/azimuthal, giving
/// e = (cos(theta/2), e^{i phi} sin(theta/2)) ~ (1, t) with t = tan(theta/2) e^{i phi}.
/// Both t = 0 and the point at infinity e = (0, 1) are added.
struct GridSpec {
  int azimuthal = 720;
  int polar = 360;
};

struct RangeSearchOptions {
  GridSpec grid;
  double kernel_cutoff = 1e-9;        // relative eigenvalue cutoff for ker(rho), ker(rho^T_A)
  int seeds = 32;                     // grid local minima handed to refinement
  double refine_tol = 1e-12;          // stop refining below this combined residual
  int refine_max_iter = 60;           // outer iterations per seed
  double exclusion_threshold = 1e-6;  // NoneFound iff every refined minimum exceeds this
  int max_candidates = 16;            // cap on returned product vectors
};

struct ProductVector {
  CVec e;  // unit qubit vector
  CVec f;  // unit qudit vector
  double residual_range = 0.0;     // ||P_ker(rho) (e (x) f)||
  double residual_pt_range = 0.0;  // ||P_ker(rho^T_A) (conj(e) (x) f)||
  double combined() const { return std::hypot(residual_range, residual_pt_range); }
};

struct RefinedMinimum {
  cplx t;  // e ~ (1, t)
  bool at_infinity = false;
  double seed_residual = 0.0;
  double residual = 0.0;
};

enum class RangeConclusion { FoundProductVectors, NoneFound };

inline const char *to_string(RangeConclusion c) {
  return c == RangeConclusion::NoneFound ? "NoneFound" : "FoundProductVector";
}

/// Numerical search certificate, not a proof: NoneFound means every refined
/// local minimum of the combined residual stayed above the exclusion threshold.
struct RangeSearchCertificate {
  GridSpec grid;
  double exclusion_threshold = 0.0;
  double worst_min_residual = 0.0;  // smallest combined residual reached
  int kernel_dim = 0;
  int pt_kernel_dim = 0;
  std::vector<RefinedMinimum> refined_minima;  // sorted by (t, at_infinity)
  RangeConclusion conclusion = RangeConclusion::NoneFound;
  std::vector<ProductVector> found;
};

/// Linear constraints on the qudit vector f for range membership.
///
/// For a kernel vector w split as w = sum_a |a> (x) w_a, <w, e (x) f> =
/// sum_a e_a <w_a, f>. Stacking the rows w_a^dag over the kernel basis gives
/// matrices K_a with  P_ker (e (x) f) ~ (e_0 K_0 + e_1 K_1) f. The partial
/// transpose side uses conj(e) in place of e.
class RangeConstraints {
 public:
  RangeConstraints(const QubitQuditState &s, double kernel_cutoff) : d_(s.d) {
    const CMat ker = spectral_split(s.rho, kernel_cutoff).kernel;
    const CMat ker_pt = spectral_split(partial_transpose(s), kernel_cutoff).kernel;
    kernel_dim_ = static_cast<int>(ker.cols());
    pt_kernel_dim_ = static_cast<int>(ker_pt.cols());
    for (int a = 0; a < 2; ++a) {
      k_[a] = ker.middleRows(a * d_, d_).adjoint();
      l_[a] = ker_pt.middleRows(a * d_, d_).adjoint();
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        gk_[a][b] = k_[a].adjoint() * k_[b];
        gl_[a][b] = l_[a].adjoint() * l_[b];
      }
  }

  int d() const { return d_; }
  int kernel_dim() const { return kernel_dim_; }
  int pt_kernel_dim() const { return pt_kernel_dim_; }

  /// Rows of both constraint families for qubit vector e, shape (k1+k2) x d.
  CMat stacked(const CVec &e) const {
    CMat out(kernel_dim_ + pt_kernel_dim_, d_);
    if (kernel_dim_ > 0) out.topRows(kernel_dim_) = e(0) * k_[0] + e(1) * k_[1];
    if (pt_kernel_dim_ > 0)
      out.bottomRows(pt_kernel_dim_) = std::conj(e(0)) * l_[0] + std::conj(e(1)) * l_[1];
    return out;
  }

  /// Gram matrix K(e)^dag K(e); its smallest eigenvalue is the squared
  /// combined residual minimized over f.
  CMat gram(const CVec &e) const {
    CMat g = CMat::Zero(d_, d_);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const cplx wk = std::conj(e(a)) * e(b);
        g += wk * gk_[a][b] + std::conj(wk) * gl_[a][b];
      }
    return g;
  }

  /// Best f for fixed e and the combined residual it reaches.
  std::pair<CVec, double> best_f(const CVec &e) const {
    if (kernel_dim_ + pt_kernel_dim_ == 0) {
      CVec f = CVec::Zero(d_);
      f(0) = 1.0;
      return {f, 0.0};
    }
    const CMat k = stacked(e);
    Eigen::JacobiSVD<CMat> sv(k, Eigen::ComputeFullV);
    const CVec f = sv.matrixV().col(d_ - 1);
    const double res = k.rows() < d_ ? 0.0 : sv.singularValues()(d_ - 1);
    return {f, res};
  }

  /// Best e for fixed f: the residual is the quadratic form e^dag H e.
  std::pair<CVec, double> best_e(const CVec &f) const {
    Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
    if (kernel_dim_ > 0) {
      CMat c(kernel_dim_, 2);
      c.col(0) = k_[0] * f;
      c.col(1) = k_[1] * f;
      h += c.adjoint() * c;
    }
    if (pt_kernel_dim_ > 0) {
      CMat c(pt_kernel_dim_, 2);
      c.col(0) = l_[0] * f;
      c.col(1) = l_[1] * f;
      const CMat cc = c.conjugate();
      h += cc.adjoint() * cc;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    const double val = std::max(0.0, es.eigenvalues()(0));
    return {es.eigenvectors().col(0), std::sqrt(val)};
  }

  double residual_range(const CVec &e, const CVec &f) const {
    if (kernel_dim_ == 0) return 0.0;
    return ((e(0) * k_[0] + e(1) * k_[1]) * f).norm();
  }

  double residual_pt_range(const CVec &e, const CVec &f) const {
    if (pt_kernel_dim_ == 0) return 0.0;
    return ((std::conj(e(0)) * l_[0] + std::conj(e(1)) * l_[1]) * f).norm();
  }

 private:
  int d_;
  int kernel_dim_ = 0;
  int pt_kernel_dim_ = 0;
  std::array<CMat, 2> k_;
  std::array<CMat, 2> l_;
  std::array<std::array<CMat, 2>, 2> gk_;
  std::array<std::array<CMat, 2>, 2> gl_;
};

inline CVec qubit_from_angles(double theta, double phi) {
  CVec e(2);
  e(0) = std::cos(theta / 2.0);
  e(1) = std::polar(std::sin(theta / 2.0), phi);
  return e;
}

/// Stereographic coordinate of e; false when e is the point at infinity.
inline bool stereographic(const CVec &e, cplx &t) {
  if (std::abs(e(0)) <= 1e-14 * e.norm()) return false;
  t = e(1) / e(0);
  return true;
}

/// Recomputes both residuals of (e, f) from scratch against rho.
inline ProductVector replay_product_vector(const QubitQuditState &s, const CVec &e, const CVec &f,
                                           double kernel_cutoff = 1e-9) {
  const RangeConstraints rc(s, kernel_cutoff);
  const CVec en = e / e.norm();
  const CVec fn = f / f.norm();
  return {en, fn, rc.residual_range(en, fn), rc.residual_pt_range(en, fn)};
}

namespace detail {

struct Seed {
  CVec e;
  double value;
  std::size_t order;
};

/// One damped Gauss-Newton step on the joint residual
///   r(e, f) = [K(e) f ; L(conj e) f]
/// with e moved along its orthogonal complement and f along f^perp, so the
/// (irrelevant) global phases stay fixed. Returns false if no decrease.
inline bool gauss_newton_step(const RangeConstraints &rc, CVec &e, CVec &f, double &res) {
  const int d = rc.d();
  const int k1 = rc.kernel_dim();
  const int k2 = rc.pt_kernel_dim();
  const int rows = k1 + k2;
  CVec u(2);
  u << -std::conj(e(1)), std::conj(e(0));
  // Orthonormal basis of f^perp: last d-1 columns of a Householder completion.
  const CMat fcol = f;
  Eigen::HouseholderQR<CMat> qr(fcol);
  const CMat q = qr.householderQ() * CMat::Identity(d, d);
  const CMat nperp = q.rightCols(d - 1);

  const CMat k_e = rc.stacked(e);
  const CVec r0 = k_e * f;
  const CMat k_u = rc.stacked(u);
  const CVec du = k_u * f;  // rho rows scale with delta, PT rows with conj(delta)
  const CMat kn = k_e * nperp;

  const int nc = d - 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * rows, 2 + 2 * nc);
  Eigen::VectorXd rhs(2 * rows);
  for (int i = 0; i < rows; ++i) {
    const bool pt_row = i >= k1;
    const cplx a = du(i);
    // Re/Im parts of a*delta (rho rows) or a*conj(delta) (PT rows).
    const double sgn = pt_row ? -1.0 : 1.0;
    jac(i, 0) = a.real();
    jac(i, 1) = -sgn * a.imag();
    jac(rows + i, 0) = a.imag();
    jac(rows + i, 1) = sgn * a.real();
    for (int j = 0; j < nc; ++j) {
      const cplx b = kn(i, j);
      jac(i, 2 + j) = b.real();
      jac(i, 2 + nc + j) = -b.imag();
      jac(rows + i, 2 + j) = b.imag();
      jac(rows + i, 2 + nc + j) = b.real();
    }
    rhs(i) = -r0(i).real();
    rhs(rows + i) = -r0(i).imag();
  }
  const Eigen::VectorXd x = jac.completeOrthogonalDecomposition().solve(rhs);
  const cplx delta(x(0), x(1));
  CVec c(nc);
  for (int j = 0; j < nc; ++j) c(j) = cplx(x(2 + j), x(2 + nc + j));

  double step = 1.0;
  for (int tries = 0; tries < 12; ++tries, step *= 0.5) {
    CVec e_new = e + step * delta * u;
    CVec f_new = f + step * (nperp * c);
    e_new /= e_new.norm();
    f_new /= f_new.norm();
    const double res_new = (rc.stacked(e_new) * f_new).norm();
    if (res_new < res) {
      e = e_new;
      f = f_new;
      res = res_new;
      return true;
    }
  }
  return false;
}

/// Local minimization of the combined residual from a seed qubit vector:
/// alternating exact minimization over f and e (each half step is a small
/// eigenproblem, so the residual never increases), then Gauss-Newton polish.
inline ProductVector refine_product_vector(const RangeConstraints &rc, CVec e,
                                           const RangeSearchOptions &opt, double *seed_residual) {
  auto [f, res] = rc.best_f(e);
  if (seed_residual) *seed_residual = res;
  constexpr int kAlternating = 8;
  int it = 0;
  for (; it < kAlternating && it < opt.refine_max_iter && res > opt.refine_tol; ++it) {
    const CVec e_new = rc.best_e(f).first;
    auto [f_new, res_new] = rc.best_f(e_new);
    if (!(res_new < res)) break;
    e = e_new;
    f = f_new;
    res = res_new;
  }
  if (rc.kernel_dim() + rc.pt_kernel_dim() > 0 && rc.d() > 1)
    for (; it < opt.refine_max_iter && res > opt.refine_tol; ++it)
      if (!gauss_newton_step(rc, e, f, res)) break;
  ProductVector pv{e / e.norm(), f / f.norm(), 0.0, 0.0};
  // Fix the global phase so e(0) is real and nonnegative (or e(1) at the pole).
  const Eigen::Index lead = std::abs(pv.e(0)) > 1e-14 ? 0 : 1;
  const cplx ph = pv.e(lead) / std::abs(pv.e(lead));
  pv.e /= ph;
  pv.residual_range = rc.residual_range(pv.e, pv.f);
  pv.residual_pt_range = rc.residual_pt_range(pv.e, pv.f);
  return pv;
}

inline bool same_ray(const CVec &x, const CVec &y) {
  return std::abs(x.dot(y)) > 1.0 - 1e-9;
}

}  // namespace detail

struct RangeSearchResult {
  RangeSearchCertificate certificate;
  std::vector<ProductVector> candidates;  // refined vectors, ascending combined residual
};

/// Grid scan over the qubit projective line followed by refinement of the
/// lowest grid local minima. Looks for e (x) f in range(rho) with
/// conj(e) (x) f in range(rho^T_A).
inline RangeSearchResult range_search(const QubitQuditState &s, const RangeSearchOptions &opt = {}) {
  if (opt.grid.azimuthal < 1 || opt.grid.polar < 1)
    throw Error(ErrorCode::BadParameter, "grid must have at least one sample per axis");
  const RangeConstraints rc(s, opt.kernel_cutoff);
  const int na = opt.grid.azimuthal;
  const int np = opt.grid.polar;
  const double pi = std::numbers::pi;
  auto idx = [na](int i, int j) { return static_cast<std::size_t>(j) * na + i; };
  auto grid_e = [&](int i, int j) {
    return qubit_from_angles(pi * (j + 1) / (np + 1), 2.0 * pi * i / na);
  };
  auto value_at = [&](const CVec &e) {
    const double lam = herm_eigenvalues(rc.gram(e))(0);
    return std::sqrt(std::max(0.0, lam));
  };

  std::vector<detail::Seed> seeds;
  {
    CVec north(2), south(2);
    north << 1.0, 0.0;
    south << 0.0, 1.0;
    seeds.push_back({north, value_at(north), 0});
    seeds.push_back({south, value_at(south), 1});
  }
  if (rc.kernel_dim() + rc.pt_kernel_dim() == 0) {
    // Full-rank rho and rho^T_A: every product vector qualifies.
    for (int j = 0; j < np && static_cast<int>(seeds.size()) < opt.seeds + 2; j += std::max(1, np / 4))
      seeds.push_back({grid_e(0, j), 0.0, idx(0, j) + 2});
  } else {
    std::vector<double> values(static_cast<std::size_t>(na) * np);
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < na; ++i) values[idx(i, j)] = value_at(grid_e(i, j));
    std::vector<std::pair<double, std::size_t>> local;
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < na; ++i) {
        const double v = values[idx(i, j)];
        bool is_min = true;
        for (int dj = -1; dj <= 1 && is_min; ++dj)
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            const int jj = j + dj;
            if (jj < 0 || jj >= np) continue;
            const int ii = (i + di + na) % na;
            if (values[idx(ii, jj)] < v) {
              is_min = false;
              break;
            }
          }
        if (is_min) local.emplace_back(v, idx(i, j));
      }
    std::stable_sort(local.begin(), local.end(),
                     [](const auto &x, const auto &y) { return x.first < y.first; });
    if (static_cast<int>(local.size()) > opt.seeds) local.resize(opt.seeds);
    for (const auto &[v, k] : local)
      seeds.push_back({grid_e(static_cast<int>(k % na), static_cast<int>(k / na)), v, k + 2});
  }

  RangeSearchResult out;
  RangeSearchCertificate &cert = out.certificate;
  cert.grid = opt.grid;
  cert.exclusion_threshold = opt.exclusion_threshold;
  cert.kernel_dim = rc.kernel_dim();
  cert.pt_kernel_dim = rc.pt_kernel_dim();
  cert.worst_min_residual = std::numeric_limits<double>::infinity();

  std::vector<ProductVector> refined;
  for (const auto &seed : seeds) {
    double seed_res = 0.0;
    ProductVector pv = detail::refine_product_vector(rc, seed.e, opt, &seed_res);
    RefinedMinimum rm;
    rm.seed_residual = seed_res;
    rm.residual = pv.combined();
    rm.at_infinity = !stereographic(pv.e, rm.t);
    if (rm.at_infinity) rm.t = cplx(0.0, 0.0);
    cert.refined_minima.push_back(rm);
    cert.worst_min_residual = std::min(cert.worst_min_residual, rm.residual);
    refined.push_back(std::move(pv));
  }
  std::sort(cert.refined_minima.begin(), cert.refined_minima.end(),
            [](const RefinedMinimum &x, const RefinedMinimum &y) {
              if (x.at_infinity != y.at_infinity) return y.at_infinity;
              if (x.t.real() != y.t.real()) return x.t.real() < y.t.real();
              if (x.t.imag() != y.t.imag()) return x.t.imag() < y.t.imag();
              return x.residual < y.residual;
            });

  std::stable_sort(refined.begin(), refined.end(), [](const ProductVector &x, const ProductVector &y) {
    return x.combined() < y.combined();
  });
  for (auto &pv : refined) {
    bool dup = false;
    for (const auto &kept : out.candidates)
      if (detail::same_ray(kept.e, pv.e) && detail::same_ray(kept.f, pv.f)) dup = true;
    if (dup) continue;
    out.candidates.push_back(pv);
    if (pv.combined() <= opt.exclusion_threshold &&
        static_cast<int>(cert.found.size()) < opt.max_candidates)
      cert.found.push_back(pv);
  }
  cert.conclusion =
      cert.found.empty() ? RangeConclusion::NoneFound : RangeConclusion::FoundProductVectors;
  return out;
}

/// Qualifying product vectors (combined residual within the exclusion
/// threshold), best first.
inline std::vector<ProductVector> product_vectors_in_range(const QubitQuditState &s,
                                                           const RangeSearchOptions &opt = {}) {
  return range_search(s, opt).certificate.found;
}

inline RangeSearchCertificate edge_check(const QubitQuditState &s,
                                         const RangeSearchOptions &opt = {}) {
  return range_search(s, opt).certificate;
}

}  // namespace sppt
