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

#include <vector>

#include "iscap/numerics.hpp"

namespace iscap {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

double distance(const Point2D& a, const Point2D& b);

/// One base station's uniform linear array.
///
/// `boresight` is the direction of the outward array normal, in radians,
/// measured counterclockwise from +x. Elements lie on the perpendicular line
/// and are centered on `center`, which is therefore the phase center.
struct ArrayGeometry {
  Point2D center;
  double boresight = 0.0;
  int elements = 1;
  double spacing = 0.0;
  double wavelength = 0.0;

  /// Throws ValidationError unless N >= 1, d > 0, lambda > 0 and all finite.
  void validate() const;

  double aperture() const { return (elements - 1) * spacing; }
  double wavenumber() const;
};

enum class FieldRegion { ReactiveNear, RadiativeNear, Far };

const char* to_string(FieldRegion r);

std::vector<Point2D> element_positions(const ArrayGeometry& g);

// Distances below this count as coincident with an element (metres).
inline constexpr double kCoincidenceDistance = 1e-9;

/// Spherical-wavefront channel: entry n = exp(-j k r_n) / (2 k r_n).
/// Throws SingularityError if `p` coincides with an element.
ComplexVector channel_vector(const ArrayGeometry& g, const Point2D& p);

/// Same as channel_vector, reusing precomputed element positions.
ComplexVector channel_vector(const ArrayGeometry& g, const std::vector<Point2D>& elements,
                             const Point2D& p);

/// Sum over elements of lambda^2 / (16 pi^2 r_n^2): the per-BS round-trip
/// echo weight at `p`.
double echo_path_weight(const ArrayGeometry& g, const Point2D& p);

/// 2 D^2 / lambda.
double rayleigh_distance(const ArrayGeometry& g);

/// (D^4 / (8 lambda))^(1/3).
double reactive_distance(const ArrayGeometry& g);

/// Classification by distance from `p` to the array center.
FieldRegion field_region(const ArrayGeometry& g, const Point2D& p);

}  // namespace iscap
