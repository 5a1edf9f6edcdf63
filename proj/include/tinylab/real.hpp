#pragma once

// Scalar type used for every tensor in the library.
//
// Training builds use 32-bit floats. Defining TINYLAB_REAL_DOUBLE switches the
// whole library to 64-bit so finite-difference gradient checks have enough
// headroom; the CMake target tinylab_f64 is that build.

namespace tinylab {

#ifdef TINYLAB_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

inline constexpr bool kDoublePrecision = sizeof(Real) == sizeof(double);

}  // namespace tinylab
