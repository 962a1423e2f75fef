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
#include "impactreg/io/transform_io.hpp"

#include <cmath>
#include <vector>

#include "impactreg/io/parameter_file.hpp"
#include "impactreg/io/text_format.hpp"

namespace impactreg {

namespace {

ParameterMap::Values values_of(std::span<const double> v, const char* what) {
  ParameterMap::Values out;
  out.reserve(v.size());
  for (double x : v) {
    if (!std::isfinite(x))
      throw IoError(std::string("write_transform_chain: non-finite ") + what);
    out.push_back(format_g17(x));
  }
  return out;
}

std::vector<double> need_doubles(const ParameterMap& map, const std::string& key,
                                 std::size_t count, const std::string& path) {
  const std::vector<double> v = map.get_doubles(key);
  if (v.size() != count)
    throw IoError("'" + path + "': transform entry " + key + " needs " +
                  std::to_string(count) + " values, got " + std::to_string(v.size()));
  return v;
}

}  // namespace

void write_transform_chain(const std::string& path, const AffineTransform* affine,
                           const BSplineTransform* bspline) {
  if (!affine && !bspline)
    throw IoError("write_transform_chain: nothing to write (both parts are null)");
  ParameterMap map;
  map.set("TransformFormat", {"1"});
  if (affine) {
    const std::span<const double> p = affine->parameters();
    map.set("AffineMatrix", values_of(p.subspan(0, 9), "affine matrix"));
    map.set("AffineTranslation", values_of(p.subspan(9, 3), "affine translation"));
    const Vec3 c = affine->center();
    map.set("AffineCenter", values_of(std::vector<double>{c.x, c.y, c.z}, "affine center"));
  }
  if (bspline) {
    const Vec3 o = bspline->grid_origin();
    const Vec3 h = bspline->grid_spacing();
    const Index3 d = bspline->grid_dims();
    map.set("GridOrigin", values_of(std::vector<double>{o.x, o.y, o.z}, "grid origin"));
    map.set("GridSpacing", values_of(std::vector<double>{h.x, h.y, h.z}, "grid spacing"));
    map.set("GridDims", {std::to_string(d.x), std::to_string(d.y), std::to_string(d.z)});
    map.set("Coefficients", values_of(bspline->parameters(), "coefficients"));
  }
  write_parameter_file(path, map);
}

TransformChain read_transform_chain(const std::string& path) {
  const ParameterMap map = read_parameter_file(path);
  if (map.get_int("TransformFormat", 0) != 1)
    throw IoError("'" + path + "': not a transform file (missing TransformFormat 1)");

  TransformChain chain;
  if (map.has("AffineMatrix") || map.has("AffineTranslation") || map.has("AffineCenter")) {
    const std::vector<double> m = need_doubles(map, "AffineMatrix", 9, path);
    const std::vector<double> t = need_doubles(map, "AffineTranslation", 3, path);
    const std::vector<double> c = need_doubles(map, "AffineCenter", 3, path);
    Mat3 matrix;
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) matrix(r, col) = m[r * 3 + col];
    chain.affine = std::make_shared<AffineTransform>(matrix, Vec3{t[0], t[1], t[2]},
                                                     Vec3{c[0], c[1], c[2]});
  }
  if (map.has("GridDims") || map.has("Coefficients")) {
    const std::vector<double> o = need_doubles(map, "GridOrigin", 3, path);
    const std::vector<double> h = need_doubles(map, "GridSpacing", 3, path);
    const std::vector<int> d = map.get_ints("GridDims");
    if (d.size() != 3 || d[0] < 4 || d[1] < 4 || d[2] < 4)
      throw IoError("'" + path + "': GridDims needs 3 integers >= 4");
    if (h[0] <= 0 || h[1] <= 0 || h[2] <= 0)
      throw IoError("'" + path + "': GridSpacing must be positive");
    auto bspline = std::make_shared<BSplineTransform>(
        Vec3{o[0], o[1], o[2]}, Vec3{h[0], h[1], h[2]}, Index3{d[0], d[1], d[2]});
    const std::vector<double> coeffs = map.get_doubles("Coefficients");
    if (coeffs.size() != bspline->parameter_count())
      throw IoError("'" + path + "': Coefficients has " + std::to_string(coeffs.size()) +
                    " values; the " + std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" +
                    std::to_string(d[2]) + " grid needs " +
                    std::to_string(bspline->parameter_count()));
    bspline->set_parameters(coeffs);
    chain.bspline = std::move(bspline);
  }

  if (chain.affine && chain.bspline) {
    chain.transform = std::make_shared<CompositeTransform>(*chain.affine, *chain.bspline);
  } else if (chain.bspline) {
    chain.transform = chain.bspline;
  } else if (chain.affine) {
    chain.transform = chain.affine;
  } else {
    throw IoError("'" + path + "': transform file has neither an affine nor a B-spline part");
  }
  return chain;
}

}  // namespace impactreg
