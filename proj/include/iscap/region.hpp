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

#include <Eigen/Dense>

#include "iscap/geometry.hpp"

namespace iscap {

/// Spatial distribution of an energy receiver's position.
struct UncertaintyRegion {
  enum class Kind { Point, UniformDisc, Gaussian };

  Kind kind = Kind::Point;
  Point2D center;
  double radius = 0.0;                                   // UniformDisc
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // Gaussian

  static UncertaintyRegion point(Point2D c) { return {Kind::Point, c, 0.0, {}}; }
  static UncertaintyRegion disc(Point2D c, double r);
  /// Disc with the given area; area 0 collapses to a point region.
  static UncertaintyRegion disc_with_area(Point2D c, double area_m2);
  static UncertaintyRegion gaussian(Point2D mean, const Eigen::Matrix2d& cov);

  /// pi r^2 for discs, 0 for points; Gaussian regions report 0.
  double area() const;
  bool is_point() const { return kind == Kind::Point || (kind == Kind::UniformDisc && radius == 0.0); }

  void validate() const;
};

const char* to_string(UncertaintyRegion::Kind k);

}  // namespace iscap
