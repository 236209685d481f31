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

#include "iscap/region.hpp"

#include <cmath>
#include <numbers>

#include "iscap/error.hpp"

namespace iscap {

UncertaintyRegion UncertaintyRegion::disc(Point2D c, double r) {
  UncertaintyRegion out{Kind::UniformDisc, c, r, Eigen::Matrix2d::Zero()};
  out.validate();
  return out;
}

UncertaintyRegion UncertaintyRegion::disc_with_area(Point2D c, double area_m2) {
  if (!(area_m2 >= 0.0) || !std::isfinite(area_m2))
    throw ValidationError("area_m2", "must be finite and nonnegative");
  if (area_m2 == 0.0) return point(c);
  return disc(c, std::sqrt(area_m2 / std::numbers::pi));
}

UncertaintyRegion UncertaintyRegion::gaussian(Point2D mean, const Eigen::Matrix2d& cov) {
  UncertaintyRegion out{Kind::Gaussian, mean, 0.0, cov};
  out.validate();
  return out;
}

double UncertaintyRegion::area() const {
  return kind == Kind::UniformDisc ? std::numbers::pi * radius * radius : 0.0;
}

void UncertaintyRegion::validate() const {
  if (!std::isfinite(center.x) || !std::isfinite(center.y))
    throw ValidationError("region.center", "coordinates must be finite");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw ValidationError("region.radius", "must be finite and nonnegative");
  if (kind == Kind::Gaussian) {
    if (!covariance.allFinite() || std::abs(covariance(0, 1) - covariance(1, 0)) > 1e-12)
      throw ValidationError("region.covariance", "must be a finite symmetric 2x2 matrix");
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(covariance);
    if (es.eigenvalues()(0) < -1e-12)
      throw ValidationError("region.covariance", "must be positive semidefinite");
  }
}

const char* to_string(UncertaintyRegion::Kind k) {
  switch (k) {
    case UncertaintyRegion::Kind::Point: return "point";
    case UncertaintyRegion::Kind::UniformDisc: return "disc";
    case UncertaintyRegion::Kind::Gaussian: return "gaussian";
  }
  return "unknown";
}

}  // namespace iscap
