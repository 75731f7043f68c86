#pragma once

// Frozen reference values. Regenerate with generate_fixtures.py (mpmath,
// 80 digits); do not edit by hand.

namespace fixtures {

inline constexpr double kGamma0_75 = 1.2254167024651776451;
inline constexpr double kGamma0_625 = 1.4345188480905567756;
inline constexpr double kGamma2_75 = 1.6083594219855456592;
inline constexpr double kGammaMinus2_5 = -0.94530872048294188123;
inline constexpr double kGamma30_3 = 2.4442850291542563295e+31;
inline constexpr double kBeta0_625 = 2.2703427865865220083;
inline constexpr double kMl_075_075_m1 = 0.23223772010096143194;
inline constexpr double kMl_075_075_m2 = 0.084363572245660564019;
inline constexpr double kMl_075_1_m1 = 0.39310830281575406177;
inline constexpr double kMl_06_1_m10 = 0.046589654426804280962;
inline constexpr double kMl_09_09_m5 = 0.010212790452992133215;
inline constexpr double kMl_075_075_3 = 145.57961543706038234;
inline constexpr double kMl_08_08_m1_5 = 0.14981952192974851778;

// Mittag-Leffler comparison tolerance against the fixtures.
inline constexpr double kMlRelTol = 1e-12;

}  // namespace fixtures
