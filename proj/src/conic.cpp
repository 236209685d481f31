// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iscap/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "iscap/error.hpp"

namespace iscap::conic {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd embed(const HermitianMatrix& a) {
  const Eigen::Index n = a.rows();
  MatrixXd y(2 * n, 2 * n);
  const MatrixXd re = a.real();
  const MatrixXd im = a.imag();
  y.topLeftCorner(n, n) = re;
  y.bottomRightCorner(n, n) = re;
  y.topRightCorner(n, n) = -im;
  y.bottomLeftCorner(n, n) = im;
  return y;
}

HermitianMatrix extract(const MatrixXd& y) {
  if (y.rows() != y.cols() || y.rows() % 2 != 0)
    throw ContractViolation("extract: block must be square with even dimension");
  const Eigen::Index n = y.rows() / 2;
  HermitianMatrix x(n, n);
  x.real() = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  x.imag() = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  return symmetrized(x);
}

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

void Problem::validate() const {
  const auto nb = psd_dims.size();
  if (c_psd.size() != nb) throw ContractViolation("conic: c_psd size differs from block count");
  for (std::size_t j = 0; j < nb; ++j) {
    if (psd_dims[j] < 1) throw ContractViolation("conic: block dimension must be positive");
    const auto& c = c_psd[j];
    if (c.size() != 0 && (c.rows() != psd_dims[j] || c.cols() != psd_dims[j]))
      throw ContractViolation("conic: objective block has wrong shape");
  }
  if (lp_dim < 0 || (lp_dim > 0 && c_lp.size() != lp_dim) || (lp_dim == 0 && c_lp.size() != 0))
    throw ContractViolation("conic: c_lp size differs from lp_dim");
  if (b.size() != num_rows()) throw ContractViolation("conic: b size differs from row count");
  for (const auto& r : rows) {
    for (const auto& [blk, a] : r.psd) {
      if (blk < 0 || blk >= static_cast<int>(nb)) throw ContractViolation("conic: bad block index");
      if (a.rows() != psd_dims[blk] || a.cols() != psd_dims[blk])
        throw ContractViolation("conic: row coefficient has wrong shape");
      const double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());
      if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ContractViolation("conic: row coefficient is not symmetric");
    }
    for (const auto& [idx, v] : r.lp) {
      if (idx < 0 || idx >= lp_dim) throw ContractViolation("conic: bad orthant index");
      if (!std::isfinite(v)) throw ContractViolation("conic: non-finite coefficient");
    }
  }
}

namespace {

// Internal, equilibrated copy of the problem with block-major row access.
struct Data {
  int m = 0;
  std::vector<int> dims;
  int p = 0;
  std::vector<MatrixXd> c;  // dense, possibly zero
  VectorXd c_lp;
  VectorXd b;
  // per block: (row, coefficient)
  std::vector<std::vector<std::pair<int, MatrixXd>>> by_block;
  // per row: sparse orthant coefficients
  std::vector<std::vector<std::pair<int, double>>> lp_rows;
  VectorXd row_scale;  // d_i
  double b_scale = 1.0;
  double c_scale = 1.0;
};

struct Point {
  std::vector<MatrixXd> x, z;
  VectorXd xl, zl, y;
};

Data equilibrate(const Problem& p) {
  Data d;
  d.m = p.num_rows();
  d.dims = p.psd_dims;
  d.p = p.lp_dim;
  const std::size_t nb = d.dims.size();
  d.by_block.resize(nb);
  d.lp_rows.resize(static_cast<std::size_t>(d.m));
  d.row_scale = VectorXd::Ones(d.m);

  for (int i = 0; i < d.m; ++i) {
    const auto& r = p.rows[static_cast<std::size_t>(i)];
    double nrm2 = 0.0;
    for (const auto& e : r.psd) nrm2 += e.second.squaredNorm();
    for (const auto& e : r.lp) nrm2 += e.second * e.second;
    const double nrm = std::sqrt(nrm2);
    if (nrm > 0.0) d.row_scale(i) = 1.0 / nrm;
  }
  d.b = p.b.cwiseProduct(d.row_scale);
  d.b_scale = std::max(1.0, d.b.norm());
  d.b /= d.b_scale;

  double cn2 = 0.0;
  for (const auto& c : p.c_psd) cn2 += c.squaredNorm();
  if (d.p > 0) cn2 += p.c_lp.squaredNorm();
  d.c_scale = cn2 > 0.0 ? std::sqrt(cn2) : 1.0;

  d.c.resize(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    if (p.c_psd[j].size() == 0)
      d.c[j] = MatrixXd::Zero(d.dims[j], d.dims[j]);
    else
      d.c[j] = 0.5 * (p.c_psd[j] + p.c_psd[j].transpose()) / d.c_scale;
  }
  d.c_lp = d.p > 0 ? VectorXd(p.c_lp / d.c_scale) : VectorXd();

  for (int i = 0; i < d.m; ++i) {
    const auto& r = p.rows[static_cast<std::size_t>(i)];
    const double s = d.row_scale(i);
    for (const auto& [blk, a] : r.psd)
      d.by_block[static_cast<std::size_t>(blk)].emplace_back(i, 0.5 * s * (a + a.transpose()));
    for (const auto& [idx, v] : r.lp) d.lp_rows[static_cast<std::size_t>(i)].emplace_back(idx, s * v);
  }
  return d;
}

// A(X) for a point's primal part.
VectorXd apply_a(const Data& d, const std::vector<MatrixXd>& x, const VectorXd& xl) {
  VectorXd out = VectorXd::Zero(d.m);
  for (std::size_t j = 0; j < d.by_block.size(); ++j)
    for (const auto& [i, a] : d.by_block[j]) out(i) += inner(a, x[j]);
  for (int i = 0; i < d.m; ++i)
    for (const auto& [idx, v] : d.lp_rows[static_cast<std::size_t>(i)]) out(i) += v * xl(idx);
  return out;
}

// A*(y), blockwise.
void apply_at(const Data& d, const VectorXd& y, std::vector<MatrixXd>& s, VectorXd& sl) {
  s.resize(d.dims.size());
  for (std::size_t j = 0; j < d.dims.size(); ++j) {
    s[j] = MatrixXd::Zero(d.dims[j], d.dims[j]);
    for (const auto& [i, a] : d.by_block[j]) s[j] += y(i) * a;
  }
  sl = VectorXd::Zero(d.p);
  for (int i = 0; i < d.m; ++i)
    for (const auto& [idx, v] : d.lp_rows[static_cast<std::size_t>(i)]) sl(idx) += v * y(i);
}

double block_norm2(const std::vector<MatrixXd>& s, const VectorXd& sl) {
  double acc = sl.squaredNorm();
  for (const auto& m : s) acc += m.squaredNorm();
  return acc;
}

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with x + alpha dx in the PSD cone (infinity if unbounded).
// Returns a negative value if x itself is not numerically positive definite.
double max_step_psd(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return -1.0;
  MatrixXd t = llt.matrixL().solve(dx);
  t = llt.matrixL().solve(t.transpose()).transpose();
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  return a;
}

double complementarity(const Point& pt) {
  double acc = pt.xl.dot(pt.zl);
  for (std::size_t j = 0; j < pt.x.size(); ++j) acc += inner(pt.x[j], pt.z[j]);
  return acc;
}

}  // namespace

Result solve(const Problem& prob, const Options& opt) {
  prob.validate();
  const Data d = equilibrate(prob);
  const std::size_t nb = d.dims.size();
  int n_total = d.p;
  for (int dim : d.dims) n_total += dim;
  if (n_total == 0) throw ContractViolation("conic: empty cone");

  Result res;
  const double norm_b = d.b.norm();
  double norm_c2 = d.c_lp.squaredNorm();
  for (const auto& c : d.c) norm_c2 += c.squaredNorm();
  const double norm_c = std::sqrt(norm_c2);

  // Starting point: scaled identities, in the spirit of standard SDP codes.
  double max_row = 0.0;
  for (int i = 0; i < d.m; ++i) max_row = std::max(max_row, (1.0 + std::abs(d.b(i))) / 2.0);
  const double xi = std::max({10.0, std::sqrt(static_cast<double>(n_total)),
                              static_cast<double>(n_total) * max_row});
  const double zeta = std::max({10.0, std::sqrt(static_cast<double>(n_total)), norm_c});

  Point pt;
  pt.x.resize(nb);
  pt.z.resize(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    pt.x[j] = xi * MatrixXd::Identity(d.dims[j], d.dims[j]);
    pt.z[j] = zeta * MatrixXd::Identity(d.dims[j], d.dims[j]);
  }
  pt.xl = VectorXd::Constant(d.p, xi);
  pt.zl = VectorXd::Constant(d.p, zeta);
  pt.y = VectorXd::Zero(d.m);

  std::vector<MatrixXd> aty;
  VectorXd atyl;
  std::vector<MatrixXd> zinv(nb);
  std::vector<MatrixXd> rd(nb);
  VectorXd rdl;

  double pinf = 0, dinf = 0, relgap = 0, pobj = 0, dobj = 0;
  int stall = 0;
  // Best iterate seen so far, by max(pinf, dinf, relgap).
  Point best;
  double best_merit = std::numeric_limits<double>::infinity();
  double best_pinf = 0, best_dinf = 0, best_gap = 0, best_pobj = 0, best_dobj = 0;
  // Smallest normalized Farkas residuals seen, for stalled infeasible runs.
  double best_ray_p = std::numeric_limits<double>::infinity();
  double best_ray_d = best_ray_p;
  int it = 0;
  auto finish = [&](SolveStatus st, std::string msg) {
    res.status = st;
    res.message = std::move(msg);
    res.iterations = it;
    res.primal_residual = pinf;
    res.dual_residual = dinf;
    res.gap = relgap;
    const double bs = d.b_scale, cs = d.c_scale;
    res.x_psd.resize(nb);
    res.z_psd.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      res.x_psd[j] = bs * pt.x[j];
      res.z_psd[j] = cs * pt.z[j];
    }
    res.x_lp = bs * pt.xl;
    res.z_lp = cs * pt.zl;
    res.y = cs * pt.y.cwiseProduct(d.row_scale);
    res.primal_objective = bs * cs * pobj;
    res.dual_objective = bs * cs * dobj;
    return res;
  };
  // Falls back to the best iterate when it meets the loose tolerance.
  auto fail = [&](std::string msg) {
    if (best_merit > opt.fallback_tol) {
      const double ray = std::min(best_ray_p, best_ray_d);
      if (ray <= opt.fallback_tol) {
        std::ostringstream os;
        os << (best_ray_p <= best_ray_d ? "primal" : "dual")
           << " infeasible (approximate certificate, normalized residual " << ray << "; " << msg << ")";
        return finish(SolveStatus::Infeasible, os.str());
      }
      return finish(SolveStatus::NumericalFailure, std::move(msg));
    }
    pt = std::move(best);
    pinf = best_pinf;
    dinf = best_dinf;
    relgap = best_gap;
    pobj = best_pobj;
    dobj = best_dobj;
    std::ostringstream os;
    os << "reduced accuracy (" << msg << "); best iterate has max residual " << best_merit;
    return finish(SolveStatus::Optimal, os.str());
  };

  for (it = 0; it <= opt.max_iterations; ++it) {
    // Residuals and objectives.
    const VectorXd ax = apply_a(d, pt.x, pt.xl);
    const VectorXd rp = d.b - ax;
    apply_at(d, pt.y, aty, atyl);
    for (std::size_t j = 0; j < nb; ++j) rd[j] = d.c[j] - aty[j] - pt.z[j];
    rdl = d.c_lp - atyl - pt.zl;

    pobj = d.c_lp.dot(pt.xl);
    for (std::size_t j = 0; j < nb; ++j) pobj += inner(d.c[j], pt.x[j]);
    dobj = d.b.dot(pt.y);
    const double xz = complementarity(pt);
    pinf = rp.norm() / (1.0 + norm_b);
    dinf = std::sqrt(block_norm2(rd, rdl)) / (1.0 + norm_c);
    relgap = std::max(std::abs(pobj - dobj), xz) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (pinf <= opt.tol && dinf <= opt.tol && relgap <= opt.tol)
      return finish(SolveStatus::Optimal, "converged");

    const double merit = std::max({pinf, dinf, relgap});
    if (merit < best_merit) {
      best_merit = merit;
      best = pt;
      best_pinf = pinf;
      best_dinf = dinf;
      best_gap = relgap;
      best_pobj = pobj;
      best_dobj = dobj;
    } else if (best_merit <= opt.fallback_tol && merit > 1e3 * best_merit) {
      break;  // rounding has taken over
    }

    if (std::getenv("ISCAP_CONIC_TRACE"))
      std::fprintf(stderr, "it %d pobj %.6e dobj %.6e pinf %.3e dinf %.3e gap %.3e\n", it, pobj, dobj, pinf, dinf, relgap);
    // Farkas checks on the normalized iterates.
    if (dobj > 0.0) {
      // ||A*(y) + Z|| / b^T y -> 0 certifies primal infeasibility.
      std::vector<MatrixXd> cert(nb);
      for (std::size_t j = 0; j < nb; ++j) cert[j] = aty[j] + pt.z[j];
      const double r = std::sqrt(block_norm2(cert, VectorXd(atyl + pt.zl))) / dobj;
      best_ray_p = std::min(best_ray_p, r);
      if (r < opt.infeasibility_tol) {
        std::ostringstream os;
        os << "primal infeasible: dual ray with b^T y = 1 and ||A*(y) + Z|| = " << r;
        return finish(SolveStatus::Infeasible, os.str());
      }
    }
    if (pobj < 0.0) {
      const double r = ax.norm() / -pobj;
      best_ray_d = std::min(best_ray_d, r);
      if (r < opt.infeasibility_tol) {
        std::ostringstream os;
        os << "dual infeasible: primal ray with <C, X> = -1 and ||A(X)|| = " << r;
        return finish(SolveStatus::Infeasible, os.str());
      }
    }
    if (it == opt.max_iterations) break;

    // Schur complement M_ij = sum_blocks tr(A_i X A_j Z^-1) + LP part.
    MatrixXd schur = MatrixXd::Zero(d.m, d.m);
    bool ok = true;
    for (std::size_t j = 0; j < nb; ++j) {
      Eigen::LLT<MatrixXd> llt(pt.z[j]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv[j] = llt.solve(MatrixXd::Identity(d.dims[j], d.dims[j]));
      zinv[j] = sym(zinv[j]);
      const auto& rows = d.by_block[j];
      for (std::size_t b2 = 0; b2 < rows.size(); ++b2) {
        const MatrixXd pj = pt.x[j] * rows[b2].second * zinv[j];
        for (std::size_t a2 = 0; a2 <= b2; ++a2) {
          const double v = inner(rows[a2].second, pj);
          schur(rows[a2].first, rows[b2].first) += v;
          if (a2 != b2) schur(rows[b2].first, rows[a2].first) += v;
        }
      }
    }
    if (!ok) return fail("dual iterate lost positive definiteness");
    const VectorXd dl = d.p > 0 ? VectorXd(pt.xl.cwiseQuotient(pt.zl)) : VectorXd();
    for (int a = 0; a < d.m; ++a)
      for (const auto& [ia, va] : d.lp_rows[static_cast<std::size_t>(a)])
        for (int b = 0; b < d.m; ++b)
          for (const auto& [ib, vb] : d.lp_rows[static_cast<std::size_t>(b)])
            if (ia == ib) schur(a, b) += va * vb * dl(ia);
    schur = sym(schur);

    Eigen::LDLT<MatrixXd> ldlt(schur);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      const double reg = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
      ldlt.compute(schur + reg * MatrixXd::Identity(d.m, d.m));
      if (ldlt.info() != Eigen::Success)
        return fail("Schur complement factorization failed");
    }

    // X R_d Z^-1 contribution shared by both right-hand sides.
    std::vector<MatrixXd> xrdz(nb);
    for (std::size_t j = 0; j < nb; ++j) xrdz[j] = pt.x[j] * rd[j] * zinv[j];
    const VectorXd xrdzl = d.p > 0 ? VectorXd(pt.xl.cwiseProduct(rdl).cwiseQuotient(pt.zl)) : VectorXd();
    const VectorXd a_xrdz = apply_a(d, xrdz, xrdzl);

    // Solves for one right-hand side given T Z^-1 (PSD part) and its LP analogue.
    std::vector<MatrixXd> dx(nb), dz(nb);
    VectorXd dxl, dzl, dy;
    auto direction = [&](const std::vector<MatrixXd>& tz, const VectorXd& tzl) {
      const VectorXd rhs = rp - apply_a(d, tz, tzl) + a_xrdz;
      dy = ldlt.solve(rhs);
      // One step of iterative refinement.
      dy += ldlt.solve(rhs - schur * dy);
      std::vector<MatrixXd> ady;
      VectorXd adyl;
      apply_at(d, dy, ady, adyl);
      for (std::size_t j = 0; j < nb; ++j) {
        dz[j] = rd[j] - ady[j];
        dx[j] = sym(tz[j] - pt.x[j] * dz[j] * zinv[j]);
      }
      if (d.p > 0) {
        dzl = rdl - adyl;
        dxl = tzl - pt.xl.cwiseProduct(dzl).cwiseQuotient(pt.zl);
      } else {
        dzl = VectorXd();
        dxl = VectorXd();
      }
    };
    auto step_lengths = [&](double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t j = 0; j < nb; ++j) {
        const double sp = max_step_psd(pt.x[j], dx[j]);
        const double sd = max_step_psd(pt.z[j], dz[j]);
        if (sp < 0.0 || sd < 0.0) {
          ap = ad = -1.0;
          return;
        }
        ap = std::min(ap, sp);
        ad = std::min(ad, sd);
      }
      if (d.p > 0) {
        ap = std::min(ap, max_step_lp(pt.xl, dxl));
        ad = std::min(ad, max_step_lp(pt.zl, dzl));
      }
    };

    const double mu = xz / n_total;

    // Predictor (affine scaling): T = -XZ, so T Z^-1 = -X.
    std::vector<MatrixXd> tz(nb);
    for (std::size_t j = 0; j < nb; ++j) tz[j] = -pt.x[j];
    VectorXd tzl = -pt.xl;
    direction(tz, tzl);
    double ap = 0, ad = 0;
    step_lengths(ap, ad);
    if (ap < 0.0) return fail("primal iterate lost positive definiteness");
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j)
      xz_aff += inner(pt.x[j] + ap * dx[j], pt.z[j] + ad * dz[j]);
    if (d.p > 0) xz_aff += (pt.xl + ap * dxl).dot(pt.zl + ad * dzl);
    const double mu_aff = xz_aff / n_total;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector: T = sigma mu I - XZ - dXa dZa.
    for (std::size_t j = 0; j < nb; ++j)
      tz[j] = sigma * mu * zinv[j] - pt.x[j] - dx[j] * dz[j] * zinv[j];
    if (d.p > 0)
      tzl = (VectorXd::Constant(d.p, sigma * mu) - dxl.cwiseProduct(dzl)).cwiseQuotient(pt.zl) - pt.xl;
    direction(tz, tzl);
    step_lengths(ap, ad);
    if (ap < 0.0) return fail("primal iterate lost positive definiteness");
    const double gamma = std::max(opt.step_fraction, 1.0 - 10.0 * std::max(pinf, std::max(dinf, relgap)));
    const double gfrac = std::min(gamma, 0.99);
    ap = std::min(1.0, gfrac * ap);
    ad = std::min(1.0, gfrac * ad);

    for (std::size_t j = 0; j < nb; ++j) {
      pt.x[j] = sym(pt.x[j] + ap * dx[j]);
      pt.z[j] = sym(pt.z[j] + ad * dz[j]);
    }
    if (d.p > 0) {
      pt.xl += ap * dxl;
      pt.zl += ad * dzl;
    }
    pt.y += ad * dy;
    if (std::getenv("ISCAP_CONIC_TRACE")) std::fprintf(stderr, "   ap %.3e ad %.3e sigma %.3e\n", ap, ad, sigma);

    if (std::max(ap, ad) < 1e-10) {
      if (++stall >= 5) break;
    } else {
      stall = 0;
    }
  }

  std::ostringstream os;
  os << "no convergence after " << it << " iterations (pinf " << pinf << ", dinf " << dinf
     << ", gap " << relgap << ")";
  return fail(os.str());
}

}  // namespace iscap::conic
