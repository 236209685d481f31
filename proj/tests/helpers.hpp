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

// Shared test fixtures and independent oracles.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "iscap/covariance.hpp"
#include "iscap/geometry.hpp"
#include "iscap/numerics.hpp"
#include "iscap/scenario.hpp"
#include "iscap/sdr.hpp"

namespace iscap::testing {

/// Gaussian upper tail by composite Simpson on [x, x + 40] with fine steps.
inline double q_oracle(double x) {
  const int n = 400000;
  const double a = x, b = x + 40.0, h = (b - a) / n;
  auto f = [](double t) { return std::exp(-0.5 * t * t); };
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

/// Power iteration on M + shift I, run to a 1e-12 residual.
inline std::pair<double, ComplexVector> power_iteration(const HermitianMatrix& m) {
  const double shift = m.cwiseAbs().sum();
  const HermitianMatrix a = m + shift * HermitianMatrix::Identity(m.rows(), m.cols());
  ComplexVector v = ComplexVector::Ones(m.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 200000; ++it) {
    ComplexVector w = a * v;
    lambda = std::real(v.dot(w));
    const double res = (w - lambda * v).norm();
    v = w.normalized();
    if (res < 1e-12 * shift) break;
  }
  return {lambda - shift, v};
}

inline HermitianMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HermitianMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

inline ComplexVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

/// First K BSs of case 3 at N elements, with point ER regions.
inline Scenario subset(const Scenario& base, int k) {
  Scenario s = base;
  s.bs.resize(static_cast<std::size_t>(k));
  s.cus.resize(static_cast<std::size_t>(k));
  s.ers.resize(static_cast<std::size_t>(k));
  return s;
}

/// Random desk-scale instance: CU, ER and sensing positions drawn inside the
/// shared coverage area; thresholds moderate so most draws are feasible.
inline Scenario random_instance(int k, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(15.0, 75.0), uy(8.0, 55.0);
  std::uniform_real_distribution<double> ug(0.0, 10.0), uo(-55.0, -45.0);
  Scenario s = subset(with_elements(builtin_case(3), n), k);
  for (auto& cu : s.cus) cu.position = {ux(rng), uy(rng)};
  for (auto& er : s.ers) er.region = UncertaintyRegion::point({ux(rng), uy(rng)});
  s.sensing.center = {ux(rng), uy(rng)};
  s.sensing.points = discretize_sensing_area(s.sensing.center, s.sensing.side, 5);
  s = with_sinr_db(s, ug(rng));
  s = with_harvest_dbm(s, uo(rng));
  s.label = "random";
  s.validate();
  return s;
}

/// Single-BS, two-element, single-sensing-point oracle: maximizes the echo
/// over w = sqrt(t P) u and R = (1 - t) P v v^H with unit u, v parameterized as
/// (cos a, e^{jb} sin a). Coarse grid, then repeated local zooming. Returns
/// the best feasible echo found (a lower bound on the true optimum), or -1.
inline double brute_force_k1n2(const Scenario& s) {
  if (s.num_bs() != 1 || s.elements() != 2 || s.sensing.points.size() != 1 || !s.ers[0].region.is_point())
    throw std::invalid_argument("brute_force_k1n2: needs K = 1, N = 2, M = 1 and a point ER");
  const ArrayGeometry& g = s.bs[0];
  const ComplexVector hc = channel_vector(g, s.cus[0].position);
  const ComplexVector he = channel_vector(g, s.ers[0].region.center);
  const ComplexVector hs = channel_vector(g, s.sensing.points[0]);
  double c = 0.0;
  for (const auto& q : element_positions(g)) {
    const double r = distance(q, s.sensing.points[0]);
    c += g.wavelength * g.wavelength / (16.0 * std::numbers::pi * std::numbers::pi * r * r);
  }
  c *= s.params.rcs_magnitude * s.params.rcs_magnitude;
  const double p = s.params.power_budget, n0 = s.params.noise_comm, gam = s.cus[0].sinr_threshold;
  const double eta = s.params.eh_efficiency, om = s.ers[0].harvest_threshold;
  const bool dual_hurts = s.cus[0].type == CuType::TypeI;

  struct Gains {
    double cu, er, se;
  };
  auto gains = [&](double a, double b) {
    const Complex u0(std::cos(a), 0.0);
    const Complex u1 = std::polar(std::sin(a), b);
    // |h^H u|^2 for CU and ER, |h^T u|^2 for the echo.
    const double gc = std::norm(std::conj(hc(0)) * u0 + std::conj(hc(1)) * u1);
    const double ge = std::norm(std::conj(he(0)) * u0 + std::conj(he(1)) * u1);
    const double gs = std::norm(hs(0) * u0 + hs(1) * u1);
    return Gains{gc, ge, gs};
  };
  auto value = [&](double t, const Gains& u, const Gains& v) {
    const double pc = t * p, pr = (1.0 - t) * p;
    const double interf = (dual_hurts ? pr * v.cu : 0.0) + n0;
    if (pc * u.cu < gam * interf * (1.0 - 1e-12)) return -1.0;
    if (eta * (pc * u.er + pr * v.er) < om * (1.0 - 1e-12)) return -1.0;
    return c * (pc * u.se + pr * v.se);
  };

  const double half_pi = std::numbers::pi / 2.0, two_pi = 2.0 * std::numbers::pi;
  const int na = 61, nb = 60, nt = 41;
  std::vector<Gains> table;
  std::vector<std::pair<double, double>> ang;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const double a = half_pi * i / (na - 1), b = two_pi * j / nb;
      table.push_back(gains(a, b));
      ang.emplace_back(a, b);
    }
  double best = -1.0;
  double x[5] = {0, 0, 0, 0, 0};  // a_u, b_u, a_v, b_v, t
  for (int it = 0; it < nt; ++it) {
    const double t = static_cast<double>(it) / (nt - 1);
    for (std::size_t iu = 0; iu < table.size(); ++iu)
      for (std::size_t iv = 0; iv < table.size(); ++iv) {
        const double v = value(t, table[iu], table[iv]);
        if (v > best) {
          best = v;
          x[0] = ang[iu].first;
          x[1] = ang[iu].second;
          x[2] = ang[iv].first;
          x[3] = ang[iv].second;
          x[4] = t;
        }
      }
  }
  if (best < 0.0) return best;
  double step[5] = {half_pi / (na - 1), two_pi / nb, half_pi / (na - 1), two_pi / nb, 1.0 / (nt - 1)};
  for (int round = 0; round < 12; ++round) {
    double cur[5];
    std::copy(x, x + 5, cur);
    for (int i0 = -3; i0 <= 3; ++i0)
      for (int i1 = -3; i1 <= 3; ++i1)
        for (int i2 = -3; i2 <= 3; ++i2)
          for (int i3 = -3; i3 <= 3; ++i3)
            for (int i4 = -3; i4 <= 3; ++i4) {
              const double au = std::clamp(cur[0] + i0 * step[0] / 3, 0.0, half_pi);
              const double bu = cur[1] + i1 * step[1] / 3;
              const double av = std::clamp(cur[2] + i2 * step[2] / 3, 0.0, half_pi);
              const double bv = cur[3] + i3 * step[3] / 3;
              const double t = std::clamp(cur[4] + i4 * step[4] / 3, 0.0, 1.0);
              const double v = value(t, gains(au, bu), gains(av, bv));
              if (v > best) {
                best = v;
                x[0] = au;
                x[1] = bu;
                x[2] = av;
                x[3] = bv;
                x[4] = t;
              }
            }
    for (double& st : step) st /= 2.0;
  }
  return best;
}

/// K = 1, N = 2, M = 1 instance from case 3 with thresholds at the given
/// fractions of their single-constraint maxima.
inline Scenario tiny_instance(double sinr_frac, double harvest_frac, CuType type) {
  Scenario s = subset(with_elements(builtin_case(3), 2), 1);
  s.sensing.points = {s.sensing.center};
  s.cus[0].type = type;
  const ComplexVector hc = channel_vector(s.bs[0], s.cus[0].position);
  const ComplexVector he = channel_vector(s.bs[0], s.ers[0].region.center);
  s.cus[0].sinr_threshold = sinr_frac * s.params.power_budget * hc.squaredNorm() / s.params.noise_comm;
  s.ers[0].harvest_threshold = harvest_frac * s.params.eh_efficiency * s.params.power_budget * he.squaredNorm();
  return s;
}

}  // namespace iscap::testing
