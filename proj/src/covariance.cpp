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

#include "iscap/covariance.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>

#include "iscap/error.hpp"
#include "iscap/parallel.hpp"

namespace iscap {

namespace {

HermitianMatrix outer(const ComplexVector& h) { return h * h.adjoint(); }

// Accumulates sum_i w_i h(p_i) h(p_i)^H into the lower triangle.
class Accumulator {
 public:
  Accumulator(const ArrayGeometry& g) : g_(g), elements_(element_positions(g)) {
    sum_ = HermitianMatrix::Zero(g.elements, g.elements);
  }
  void add(const Point2D& p, double w) {
    const ComplexVector h = channel_vector(g_, elements_, p);
    sum_.selfadjointView<Eigen::Lower>().rankUpdate(h, w);
    total_weight_ += w;
  }
  HermitianMatrix normalized(double norm) const {
    HermitianMatrix out = sum_.selfadjointView<Eigen::Lower>();
    return out / norm;
  }
  double total_weight() const { return total_weight_; }

 private:
  const ArrayGeometry& g_;
  std::vector<Point2D> elements_;
  HermitianMatrix sum_;
  double total_weight_ = 0.0;
};

HermitianMatrix disc_level(const ArrayGeometry& g, const UncertaintyRegion& r, int n_radial,
                           int n_angular) {
  const QuadratureRule radial = gauss_legendre(n_radial);
  const QuadratureRule angular = gauss_legendre(n_angular);
  Accumulator acc(g);
  const double R = r.radius;
  for (int i = 0; i < n_radial; ++i) {
    const double rho = 0.5 * R * (radial.nodes[i] + 1.0);
    const double wr = 0.5 * R * radial.weights[i] * rho;
    for (int j = 0; j < n_angular; ++j) {
      const double theta = std::numbers::pi * (angular.nodes[j] + 1.0);
      const double wt = std::numbers::pi * angular.weights[j];
      acc.add({r.center.x + rho * std::cos(theta), r.center.y + rho * std::sin(theta)}, wr * wt);
    }
  }
  return acc.normalized(std::numbers::pi * R * R);
}

struct GaussianFrame {
  Eigen::Matrix2d scale;  // p = mu + scale * z, z ~ N(0, I)
};

GaussianFrame gaussian_frame(const Eigen::Matrix2d& cov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return {es.eigenvectors() * s.asDiagonal()};
}

constexpr double kGaussianHalfWidth = 5.0;

HermitianMatrix gaussian_level(const ArrayGeometry& g, const UncertaintyRegion& r, int n) {
  const QuadratureRule rule = gauss_legendre(n);
  const GaussianFrame frame = gaussian_frame(r.covariance);
  Accumulator acc(g);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    const double z1 = kGaussianHalfWidth * rule.nodes[i];
    const double w1 = kGaussianHalfWidth * rule.weights[i] * inv_sqrt_2pi * std::exp(-0.5 * z1 * z1);
    for (int j = 0; j < n; ++j) {
      const double z2 = kGaussianHalfWidth * rule.nodes[j];
      const double w2 = kGaussianHalfWidth * rule.weights[j] * inv_sqrt_2pi * std::exp(-0.5 * z2 * z2);
      const Eigen::Vector2d off = frame.scale * Eigen::Vector2d(z1, z2);
      acc.add({r.center.x + off(0), r.center.y + off(1)}, w1 * w2);
    }
  }
  // renormalize the truncated density to unit mass
  return acc.normalized(acc.total_weight());
}

void check_region_clear_of_array(const ArrayGeometry& g, const UncertaintyRegion& r) {
  const auto elems = element_positions(g);
  if (r.kind == UncertaintyRegion::Kind::UniformDisc) {
    for (const auto& q : elems)
      if (distance(q, r.center) <= r.radius)
        throw SingularityError("compute_G: uncertainty disc contains an array element");
  } else if (r.kind == UncertaintyRegion::Kind::Gaussian) {
    const GaussianFrame frame = gaussian_frame(r.covariance);
    if (std::abs(frame.scale.determinant()) > 0.0) {
      const Eigen::Matrix2d inv = frame.scale.inverse();
      for (const auto& q : elems) {
        const Eigen::Vector2d z = inv * Eigen::Vector2d(q.x - r.center.x, q.y - r.center.y);
        if (z.cwiseAbs().maxCoeff() <= kGaussianHalfWidth)
          throw SingularityError("compute_G: Gaussian integration box contains an array element");
      }
    }
  }
}

}  // namespace

CovarianceG compute_G(const ArrayGeometry& g, const UncertaintyRegion& region, double tol) {
  if (!(tol > 0.0)) throw DomainError("compute_G: tol must be positive");
  region.validate();
  CovarianceG out;
  if (region.is_point()) {
    out.matrix = outer(channel_vector(g, region.center));
    out.nodes = 1;
    return out;
  }
  check_region_clear_of_array(g, region);

  const bool disc = region.kind == UncertaintyRegion::Kind::UniformDisc;
  int n1 = 8;
  int n2 = disc ? 16 : 8;
  auto level = [&](int a, int b) { return disc ? disc_level(g, region, a, b) : gaussian_level(g, region, a); };
  HermitianMatrix prev = level(n1, n2);
  double change = 0.0;
  constexpr int kMaxNodes = 1024;
  while (true) {
    n1 *= 2;
    n2 *= 2;
    HermitianMatrix next = level(n1, n2);
    change = (next - prev).norm();
    prev = std::move(next);
    if (change <= tol * prev.norm()) break;
    if (n2 >= kMaxNodes)
      throw ToleranceError("compute_G: quadrature did not converge", change / prev.norm());
  }
  out.matrix = prev;
  out.nodes = disc ? n1 * n2 : n1 * n1;
  out.estimated_error = change;
  return out;
}

MonteCarloG monte_carlo_G(const ArrayGeometry& g, const UncertaintyRegion& region, long samples,
                          std::uint64_t seed) {
  if (samples < 1) throw DomainError("monte_carlo_G: samples must be at least 1");
  region.validate();
  const auto elems = element_positions(g);
  const Eigen::Index n = g.elements;
  MonteCarloG out;
  out.samples = samples;
  if (region.is_point()) {
    out.mean = outer(channel_vector(g, elems, region.center));
    out.standard_error = Eigen::MatrixXd::Zero(n, n);
    return out;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const GaussianFrame frame = region.kind == UncertaintyRegion::Kind::Gaussian
                                  ? gaussian_frame(region.covariance)
                                  : GaussianFrame{Eigen::Matrix2d::Zero()};

  // Welford updates per entry
  HermitianMatrix mean = HermitianMatrix::Zero(n, n);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(n, n);
  for (long s = 1; s <= samples; ++s) {
    Point2D p;
    if (region.kind == UncertaintyRegion::Kind::UniformDisc) {
      const double rho = region.radius * std::sqrt(uni(rng));
      const double theta = 2.0 * std::numbers::pi * uni(rng);
      p = {region.center.x + rho * std::cos(theta), region.center.y + rho * std::sin(theta)};
    } else {
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      const Eigen::Vector2d off = frame.scale * Eigen::Vector2d(z1, z2);
      p = {region.center.x + off(0), region.center.y + off(1)};
    }
    const ComplexVector h = channel_vector(g, elems, p);
    const double inv = 1.0 / static_cast<double>(s);
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index a = 0; a < n; ++a) {
        const Complex x = h(a) * std::conj(h(b));
        const Complex delta = x - mean(a, b);
        mean(a, b) += delta * inv;
        m2(a, b) += std::real(std::conj(delta) * (x - mean(a, b)));
      }
    }
  }
  out.mean = mean;
  if (samples > 1)
    out.standard_error = (m2.cwiseMax(0.0) / (static_cast<double>(samples - 1) * samples)).cwiseSqrt();
  else
    out.standard_error = Eigen::MatrixXd::Zero(n, n);
  return out;
}

const CovarianceG& CovarianceSet::entry(int bs, int er) const {
  if (bs < 0 || er < 0 || bs >= k_ || er >= k_)
    throw MissingDataError("covariance index out of range");
  const auto& e = entries_[static_cast<std::size_t>(bs * k_ + er)];
  if (!e)
    throw MissingDataError("missing G for BS " + std::to_string(bs) + ", ER " + std::to_string(er));
  return *e;
}

const HermitianMatrix& CovarianceSet::at(int bs, int er) const { return entry(bs, er).matrix; }

void CovarianceSet::set(int bs, int er, CovarianceG g) {
  if (bs < 0 || er < 0 || bs >= k_ || er >= k_)
    throw MissingDataError("covariance index out of range");
  g.bs_index = bs;
  g.er_index = er;
  entries_[static_cast<std::size_t>(bs * k_ + er)] = std::move(g);
}

bool CovarianceSet::complete() const {
  for (const auto& e : entries_)
    if (!e) return false;
  return k_ > 0;
}

namespace {

std::string cache_key(const ArrayGeometry& g, const UncertaintyRegion& r, double tol) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%d|%.17g|%.17g|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                g.center.x, g.center.y, g.boresight, g.elements, g.spacing, g.wavelength,
                static_cast<int>(r.kind), r.center.x, r.center.y, r.radius, r.covariance(0, 0),
                r.covariance(0, 1), r.covariance(1, 1), tol);
  return buf;
}

}  // namespace

CovarianceG CovarianceCache::get_or_compute(const ArrayGeometry& g, const UncertaintyRegion& region,
                                            double tol) {
  const std::string key = cache_key(g, region, tol);
  {
    std::shared_lock lock(mutex_);
    if (auto it = items_.find(key); it != items_.end()) return it->second;
  }
  CovarianceG value = compute_G(g, region, tol);
  std::unique_lock lock(mutex_);
  return items_.try_emplace(key, std::move(value)).first->second;
}

std::size_t CovarianceCache::size() const {
  std::shared_lock lock(mutex_);
  return items_.size();
}

CovarianceSet compute_covariance_set(const Scenario& s, double tol, CovarianceCache* cache) {
  const int k = s.num_bs();
  CovarianceSet set(k);
  std::vector<CovarianceG> results(static_cast<std::size_t>(k * k));
  parallel_for(results.size(), [&](std::size_t idx) {
    const int l = static_cast<int>(idx) / k;
    const int e = static_cast<int>(idx) % k;
    const auto& region = s.ers[static_cast<std::size_t>(e)].region;
    results[idx] = cache ? cache->get_or_compute(s.bs[static_cast<std::size_t>(l)], region, tol)
                         : compute_G(s.bs[static_cast<std::size_t>(l)], region, tol);
  });
  for (int l = 0; l < k; ++l)
    for (int e = 0; e < k; ++e) set.set(l, e, std::move(results[static_cast<std::size_t>(l * k + e)]));
  return set;
}

namespace {

constexpr char kCacheMagic[8] = {'I', 'S', 'C', 'A', 'P', 'G', '0', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((value >> (8 * i)) & 0xff));
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <class T>
bool get_le(std::istream& in, T& value) {
  value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) return false;
    value |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(c)) << (8 * i));
  }
  return true;
}

bool get_f64(std::istream& in, double& v) {
  std::uint64_t bits = 0;
  if (!get_le(in, bits)) return false;
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

void write_covariance_cache(const std::string& path, std::uint64_t scenario_hash,
                            const CovarianceSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open covariance cache for writing");
  out.write(kCacheMagic, sizeof kCacheMagic);
  put_le(out, scenario_hash);
  put_le(out, static_cast<std::uint32_t>(set.size()));
  for (int l = 0; l < set.size(); ++l) {
    for (int e = 0; e < set.size(); ++e) {
      const HermitianMatrix& g = set.at(l, e);
      put_le(out, static_cast<std::uint32_t>(g.rows()));
      for (Eigen::Index a = 0; a < g.rows(); ++a) {
        for (Eigen::Index b = 0; b < g.cols(); ++b) {
          put_f64(out, g(a, b).real());
          put_f64(out, g(a, b).imag());
        }
      }
    }
  }
  if (!out) throw IoError(path, "write failed");
}

std::optional<CovarianceSet> read_covariance_cache(const std::string& path,
                                                   std::uint64_t scenario_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kCacheMagic)) throw IoError(path, "not a covariance cache file");
  std::uint64_t hash = 0;
  std::uint32_t k = 0;
  if (!get_le(in, hash) || !get_le(in, k)) throw IoError(path, "truncated header");
  if (hash != scenario_hash) return std::nullopt;
  CovarianceSet set(static_cast<int>(k));
  for (std::uint32_t l = 0; l < k; ++l) {
    for (std::uint32_t e = 0; e < k; ++e) {
      std::uint32_t n = 0;
      if (!get_le(in, n)) throw IoError(path, "truncated record");
      CovarianceG g;
      g.matrix.resize(n, n);
      for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) {
          double re = 0.0, im = 0.0;
          if (!get_f64(in, re) || !get_f64(in, im)) throw IoError(path, "truncated matrix data");
          g.matrix(a, b) = Complex(re, im);
        }
      }
      set.set(static_cast<int>(l), static_cast<int>(e), std::move(g));
    }
  }
  return set;
}

}  // namespace iscap
