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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "iscap/geometry.hpp"
#include "iscap/region.hpp"
#include "iscap/scenario.hpp"

namespace iscap {

/// Location-averaged ER channel covariance E{h(p) h(p)^H}.
struct CovarianceG {
  HermitianMatrix matrix;
  int bs_index = -1;
  int er_index = -1;
  int nodes = 0;                 // quadrature nodes used at the accepted level
  double estimated_error = 0.0;  // Frobenius change between the last two levels
};

inline constexpr double kDefaultQuadratureTol = 1e-7;

/// Quadrature of the region average of h h^H.
///
/// Discs are integrated in polar coordinates about the center with tensor
/// Gauss-Legendre nodes, doubling both node counts until the Frobenius change
/// falls below tol * ||G||_F. Gaussian regions use the same refinement on the
/// +-5 sigma box in principal coordinates. Point regions return h h^H exactly.
///
/// Throws SingularityError if the region contains an array element and
/// ToleranceError if refinement stalls.
CovarianceG compute_G(const ArrayGeometry& g, const UncertaintyRegion& region,
                      double tol = kDefaultQuadratureTol);

struct MonteCarloG {
  HermitianMatrix mean;
  /// Per-entry standard error of the complex mean, sqrt(E|x - mean|^2 / n).
  Eigen::MatrixXd standard_error;
  long samples = 0;
};

/// Sample mean of h h^H over i.i.d. positions drawn from the region density.
/// Deterministic for a given seed.
MonteCarloG monte_carlo_G(const ArrayGeometry& g, const UncertaintyRegion& region, long samples,
                          std::uint64_t seed);

/// G_{l,e_k} for every (BS l, ER k) pair of a scenario.
class CovarianceSet {
 public:
  CovarianceSet() = default;
  explicit CovarianceSet(int k) : k_(k), entries_(static_cast<std::size_t>(k * k)) {}

  int size() const { return k_; }
  /// Throws MissingDataError if the pair was never filled in.
  const HermitianMatrix& at(int bs, int er) const;
  const CovarianceG& entry(int bs, int er) const;
  void set(int bs, int er, CovarianceG g);
  bool complete() const;

 private:
  int k_ = 0;
  std::vector<std::optional<CovarianceG>> entries_;
};

/// Thread-safe memo of computed G matrices keyed by geometry, region and tol.
class CovarianceCache {
 public:
  CovarianceG get_or_compute(const ArrayGeometry& g, const UncertaintyRegion& region, double tol);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, CovarianceG> items_;
};

/// All K*K covariances, computed concurrently. `cache` may be null.
CovarianceSet compute_covariance_set(const Scenario& s, double tol = kDefaultQuadratureTol,
                                     CovarianceCache* cache = nullptr);

/// Binary cache layout (little-endian):
///   8 bytes  magic "ISCAPG01"
///   u64      scenario hash
///   u32      K
///   K*K records in (bs, er) row-major order, each:
///     u32 dimension N, then N*N row-major entries as (re f64, im f64)
void write_covariance_cache(const std::string& path, std::uint64_t scenario_hash,
                            const CovarianceSet& set);
/// Returns nullopt if the file is absent or belongs to another scenario.
std::optional<CovarianceSet> read_covariance_cache(const std::string& path,
                                                   std::uint64_t scenario_hash);

}  // namespace iscap
