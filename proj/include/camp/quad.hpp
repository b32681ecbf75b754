#pragma once

// Extended-precision scalar for the tap recursion internals.
//
// The moment-driven recursion subtracts quantities of size O(mu_max) to
// produce taps of size O(1); the cancellation grows like the spectral
// radius raised to the iteration index, so double precision is exhausted
// after roughly ten iterations at large condition numbers. The table is
// therefore built in IEEE binary128 and rounded to double once, on output.

#if defined(CAMP_HAVE_FLOAT128)
#include <quadmath.h>

namespace camp {
using qreal = __float128;
inline qreal qlog(qreal x) { return logq(x); }
inline qreal qfabs(qreal x) { return fabsq(x); }
inline bool qfinite(qreal x) { return finiteq(x) != 0; }
}  // namespace camp

#else
#include <cmath>

namespace camp {
// Fallback: long double. On platforms where long double is not binary128
// the deep-iteration accuracy of the recursion degrades accordingly; the
// closed form remains exact in double and is unaffected.
using qreal = long double;
inline qreal qlog(qreal x) { return std::log(x); }
inline qreal qfabs(qreal x) { return std::fabs(x); }
inline bool qfinite(qreal x) { return std::isfinite(x); }
}  // namespace camp

#endif
