#pragma once

// Constants fitted by tools/calibrate. Each bound using them multiplies by
// kHeadroom.

namespace bvpa {

inline constexpr double kHeadroom = 1.5;

/// Largest gradient error / (diam^2 * vertex-weighted Hessian) over the
/// random C^2 triangle corpus (seed 1, 200 samples).
inline constexpr double kInterpolationConstant = 0.0674158;
/// Same corpus, error over inf_z of the integral of |grad u - z| on the
/// simplex inflated by its diameter.
inline constexpr double kInterpolationConstantRaw = 0.0294502;
/// Largest gradient error / omega(3k) over the Sobolev corpus.
inline constexpr double kModulusConstant = 0.548681;
/// Largest annulus cell-trace sum / |Du|(A) over the Heaviside jump cubes.
inline constexpr double kTraceConstant = 2.85217;

}  // namespace bvpa
