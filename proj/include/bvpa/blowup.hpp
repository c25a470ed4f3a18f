#pragma once

#include <cmath>
#include <memory>
#include <numbers>

#include "bvpa/error.hpp"
#include "bvpa/fields.hpp"
#include "bvpa/functionals.hpp"

namespace bvpa {

enum class BlowupMode { Smooth, Singular };

struct Blowup {
  FieldPtr field;
  RotatedRect cube;
  Value mean;          ///< subtracted value (u(x0) in smooth mode)
  double alpha = 0.0;  ///< |Du|(cube) / r^2, singular mode
};

/// Rescales u around x0 to the reference cube. Smooth mode:
/// (u(x0 + r y) - u(x0)) / r. Singular mode, on the cube with axis n shifted
/// by r theta n: (u(x0 + r theta n + r y) - mean) / (r alpha).
/// The cube must fit in the domain in every orientation (radius r sqrt 2).
inline Blowup blowup(const FieldPtr& u, Point x0, double r, BlowupMode mode, const Box& domain = {{0, 0}, {1, 1}},
                     Vec2 n = {1, 0}, double theta = 0.0, const QuadratureSpec& q = {}) {
  if (!(r > 0.0)) throw PreconditionError("positive_radius", "blow-up radius must be > 0");
  const Point c = x0 + (r * theta) * n;
  const double dist = std::min({c.x - domain.lo.x, domain.hi.x - c.x, c.y - domain.lo.y, domain.hi.y - c.y});
  if (r * std::numbers::sqrt2 > dist * (1.0 + 1e-12))
    throw PreconditionError("cube_in_domain", "blow-up cube is not contained in the domain");
  const RotatedRect cube(c, n, r, r);
  Blowup b{nullptr, cube, Value(u->components()), 0.0};
  using M = PullbackField::Mat2;
  if (mode == BlowupMode::Smooth) {
    b.mean = u->eval(x0);
    b.field = std::make_shared<PullbackField>(u, M::scaling(r), x0, b.mean, r);
    return b;
  }
  const Region region{ConvexPolygon(cube)};
  Value mean(u->components());
  const double area = cube.measure();
  for (int i = 0; i < u->components(); ++i)
    mean[i] = integrate_region(region, {u.get()}, q, [&](Point p) { return u->eval(p)[i]; }) / area;
  b.mean = mean;
  b.alpha = total_variation(*u, region, q).total / (r * r);
  if (!(b.alpha > 0.0)) throw PreconditionError("positive_alpha", "singular blow-up needs |Du|(cube) > 0");
  b.field = std::make_shared<PullbackField>(u, M::scaling(r), c, mean, r * b.alpha);
  return b;
}

}  // namespace bvpa
