/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#ifndef IMPACTREG_IO_TRANSFORM_IO_HPP
#define IMPACTREG_IO_TRANSFORM_IO_HPP

#include <memory>
#include <string>

#include "impactreg/transform/affine_transform.hpp"
#include "impactreg/transform/bspline_transform.hpp"

namespace impactreg {

/**
 * A transform read from or written to disk: an optional frozen affine, an
 * optional B-spline, and `transform` exposing their composition
 * T(x) = T_bspline(T_affine(x)) (or whichever part is present alone).
 */
struct TransformChain {
  std::shared_ptr<const AffineTransform> affine;
  std::shared_ptr<const BSplineTransform> bspline;
  std::shared_ptr<const Transform> transform;
};

/**
 * Transform files use the parameter-file syntax with these entries:
 *
 *   (TransformFormat 1)
 *   (AffineMatrix m00 ... m22)          row major; with AffineTranslation
 *   (AffineTranslation tx ty tz)        and AffineCenter when an affine part
 *   (AffineCenter cx cy cz)             is present
 *   (GridOrigin ox oy oz)               control grid; with GridSpacing,
 *   (GridSpacing hx hy hz)              GridDims and Coefficients when a
 *   (GridDims nx ny nz)                 B-spline part is present
 *   (Coefficients c0 c1 ...)            3 interleaved values per control
 *                                       point, x fastest
 *
 * All numbers are written with 17 significant digits, so a write/read cycle
 * reproduces the transform bit-for-bit.  At least one part must be present;
 * non-finite parameters are rejected on write, malformed or incomplete
 * entries on read.
 */
void write_transform_chain(const std::string& path, const AffineTransform* affine,
                           const BSplineTransform* bspline);

TransformChain read_transform_chain(const std::string& path);

}  // namespace impactreg

#endif  // IMPACTREG_IO_TRANSFORM_IO_HPP
