#pragma once

#include <array>

namespace mhsolve::coefficients {

// Blanes & Moan, "Practical symplectic partitioned Runge-Kutta and
// Runge-Kutta-Nystrom methods", J. Comput. Appl. Math. 142 (2002), the
// six-stage fourth-order symmetric scheme S6:
//   e^{a1 A} e^{b1 B} e^{a2 A} e^{b2 B} e^{a3 A} e^{b3 B} e^{a4 A} e^{b3 B} ... e^{a1 A}
// Only the independent values are transcribed; the rest follow from
// consistency (sum a = sum b = 1) and symmetry. The order tests in
// tests/test_expo.cpp certify the transcription.
inline constexpr double kBmA1 = 0.0792036964311957;
inline constexpr double kBmA2 = 0.353172906049774;
inline constexpr double kBmA3 = -0.0420650803577195;
inline constexpr double kBmA4 = 1.0 - 2.0 * (kBmA1 + kBmA2 + kBmA3);
inline constexpr double kBmB1 = 0.209515106613362;
inline constexpr double kBmB2 = -0.143851773179818;
inline constexpr double kBmB3 = 0.5 - (kBmB1 + kBmB2);

/// Kinetic weights (7) and potential weights (6), interleaved a b a b ... a.
inline constexpr std::array<double, 7> kBlanesMoanKinetic = {kBmA1, kBmA2, kBmA3, kBmA4,
                                                             kBmA3, kBmA2, kBmA1};
inline constexpr std::array<double, 6> kBlanesMoanPotential = {kBmB1, kBmB2, kBmB3,
                                                               kBmB3, kBmB2, kBmB1};

inline constexpr std::array<double, 2> kStrangKinetic = {0.5, 0.5};
inline constexpr std::array<double, 1> kStrangPotential = {1.0};

// S. A. Chin and C. R. Chen, fourth-order forward (gradient) symplectic
// integrators, scheme 4A:
//   e^{h/6 V} e^{h/2 T} e^{2h/3 V~} e^{h/2 T} e^{h/6 V},
//   V~ = V + (h^2/48) [V, [T, V]].
inline constexpr double kChinChenOuterPotential = 1.0 / 6.0;
inline constexpr double kChinChenKinetic = 0.5;
inline constexpr double kChinChenMiddlePotential = 2.0 / 3.0;
inline constexpr double kChinChenGradientWeight = 1.0 / 48.0;

}  // namespace mhsolve::coefficients
