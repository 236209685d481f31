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

#include "iscap/geometry.hpp"

#include <cmath>
#include <numbers>

#include "iscap/error.hpp"

namespace iscap {

double distance(const Point2D& a, const Point2D& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ArrayGeometry::validate() const {
  if (!std::isfinite(center.x) || !std::isfinite(center.y))
    throw ValidationError("center", "coordinates must be finite");
  if (!std::isfinite(boresight)) throw ValidationError("boresight", "must be finite");
  if (elements < 1) throw ValidationError("elements", "must be at least 1");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ValidationError("spacing", "must be positive");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw ValidationError("wavelength", "must be positive");
}

double ArrayGeometry::wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

const char* to_string(FieldRegion r) {
  switch (r) {
    case FieldRegion::ReactiveNear: return "reactive";
    case FieldRegion::RadiativeNear: return "radiative-near";
    case FieldRegion::Far: return "far";
  }
  return "unknown";
}

std::vector<Point2D> element_positions(const ArrayGeometry& g) {
  // unit vector along the array axis, perpendicular to the boresight
  const double tx = std::sin(g.boresight);
  const double ty = -std::cos(g.boresight);
  std::vector<Point2D> out(static_cast<std::size_t>(g.elements));
  const double mid = 0.5 * (g.elements - 1);
  for (int n = 0; n < g.elements; ++n) {
    const double s = (n - mid) * g.spacing;
    out[static_cast<std::size_t>(n)] = {g.center.x + s * tx, g.center.y + s * ty};
  }
  return out;
}

ComplexVector channel_vector(const ArrayGeometry& g, const std::vector<Point2D>& elements,
                             const Point2D& p) {
  const double k = g.wavenumber();
  ComplexVector h(static_cast<Eigen::Index>(elements.size()));
  for (std::size_t n = 0; n < elements.size(); ++n) {
    const double r = distance(elements[n], p);
    if (r < kCoincidenceDistance) throw SingularityError("channel_vector: point coincides with an array element");
    h(static_cast<Eigen::Index>(n)) = std::polar(1.0 / (2.0 * k * r), -k * r);
  }
  return h;
}

ComplexVector channel_vector(const ArrayGeometry& g, const Point2D& p) {
  return channel_vector(g, element_positions(g), p);
}

double echo_path_weight(const ArrayGeometry& g, const Point2D& p) {
  const double c = g.wavelength * g.wavelength / (16.0 * std::numbers::pi * std::numbers::pi);
  double sum = 0.0;
  for (const auto& q : element_positions(g)) {
    const double r = distance(q, p);
    if (r < kCoincidenceDistance) throw SingularityError("echo_path_weight: point coincides with an array element");
    sum += c / (r * r);
  }
  return sum;
}

double rayleigh_distance(const ArrayGeometry& g) {
  const double d = g.aperture();
  return 2.0 * d * d / g.wavelength;
}

double reactive_distance(const ArrayGeometry& g) {
  const double d = g.aperture();
  return std::cbrt(d * d * d * d / (8.0 * g.wavelength));
}

FieldRegion field_region(const ArrayGeometry& g, const Point2D& p) {
  const double r = distance(g.center, p);
  if (r <= reactive_distance(g) && g.elements > 1) return FieldRegion::ReactiveNear;
  if (r < rayleigh_distance(g)) return FieldRegion::RadiativeNear;
  return FieldRegion::Far;
}

}  // namespace iscap
