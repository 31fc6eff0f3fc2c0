#pragma once

// Scalar plumbing shared by the double-precision path and the multiprecision
// oracles. Chaotic segments lose one decimal digit every couple of
// collisions, so reversal and finite-difference checks on long segments run
// the same templated code in MPFR arithmetic.

#include <cmath>

#include <boost/multiprecision/mpfr.hpp>

namespace hardball {

template <unsigned Digits10>
using Multiprecision = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<Digits10>, boost::multiprecision::et_off>;

/// Enough digits to follow a few dozen collisions of a desk-scale chaotic orbit.
using Extended = Multiprecision<120>;

/// Oracle precision: 10^3 collisions forward and backward at up to ~3
/// e-folds of error growth per collision, or finite differences across 30
/// strongly expanding collisions.
using Deep = Multiprecision<1500>;

template <class T>
inline double to_double(const T& x) {
  return static_cast<double>(x);
}

template <class T>
inline long floor_to_long(const T& x) {
  using std::floor;
  return static_cast<long>(floor(x));
}

template <class T>
inline T sqrt_of(const T& x) {
  using std::sqrt;
  return sqrt(x);
}

template <class T>
inline T abs_of(const T& x) {
  using std::abs;
  return abs(x);
}

}  // namespace hardball
