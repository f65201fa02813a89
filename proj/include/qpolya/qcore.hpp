#pragma once

#include "qpolya/composition.hpp"
#include "qpolya/qbase.hpp"
#include "qpolya/scalar.hpp"

namespace qpolya {

/*
 * q-arithmetic layer.  Everything reduces to products of factors
 * (1 - q^a) / (1 - q^b); the *_scaled primitives below work directly on the
 * integer exponent pairs (a, b), which is what keeps ExactRational evaluation
 * available for the distribution formulas even when the nominal argument
 * (a/b) is not an integer.
 */

// q^e for integer e
Scalar q_power(const QBase& q, long e);
// q^x for real x (LogFloat; exact only when x is integral)
Scalar q_power_real(const QBase& q, double x);
// 1 - q^e, stable for |e log q| near 0 and huge alike
Scalar one_minus_q_power(const QBase& q, long e);
Scalar one_minus_q_power_real(const QBase& q, double x);

// q-number [x]_q = (1 - q^x)/(1 - q); [x]_q -> x as q -> 1
Scalar q_number(double x, const QBase& q);
Scalar q_number(long x, const QBase& q);

/*
 * q-factorial of order r:
 *     [x]_{r,q}  = [x]_q [x-1]_q ... [x-r+1]_q        (r >= 0, empty = 1)
 *     [x]_{-r,q} = 1 / [x+r]_{r,q}                    (r > 0)
 * The negative-order form divides; a vanishing factor there raises
 * DivisionByZeroError.
 */
Scalar q_factorial_order(double x, long r, const QBase& q);
Scalar q_factorial_order(long x, long r, const QBase& q);

// [r]_q! = [r]_{r,q}, r >= 0
Scalar q_factorial(long r, const QBase& q);

// Gaussian binomial [x over r]_q = [x]_{r,q} / [r]_q!, r >= 0
Scalar q_binomial(double x, long r, const QBase& q);
Scalar q_binomial(long x, long r, const QBase& q);

// q-multinomial [x over r_1..r_k]_q = [x]_{s_k,q} / ([r_1]_q! ... [r_k]_q!)
Scalar q_multinomial(double x, const Composition& parts, const QBase& q);
Scalar q_multinomial(long x, const Composition& parts, const QBase& q);

/*
 * Base inversion: the same multinomial evaluated at base 1/q equals a power
 * of q times the base-q value.  The exponent can be written over tail gaps
 * (x - m_j) or prefix gaps (x - s_j); both spellings are identities and must
 * agree, which the tests pin down.
 */
enum class ExponentForm { tail_gaps, prefix_gaps };
Scalar q_multinomial_base_invert(long x, const Composition& parts, const QBase& q,
				 ExponentForm form = ExponentForm::tail_gaps);

/*
 * The four weighted Pascal recurrences on [x over r_1..r_k]_q, distinguished
 * by where the q-weights sit.  Writing s_j for prefix sums, m_j for tail
 * sums, and V(x, r) for the multinomial, each reduces x by one:
 *
 *   upper_tail_gap:    V(x,r) = V(x-1,r) + sum_j q^{x-m_j}   V(x-1, r_j-1)
 *   prefix_shifted:    V(x,r) = q^{s_k} V(x-1,r)
 *                             + sum_j q^{s_{j-1}} V(x-1, r_j-1)
 *   tail_shifted:      V(x,r) = q^{m_1} V(x-1,r)
 *                             + sum_j q^{m_{j+1}} V(x-1, r_j-1)
 *   upper_prefix_gap:  V(x,r) = V(x-1,r) + sum_j q^{x-s_j}   V(x-1, r_j-1)
 *
 * (r_j - 1 means the j-th part decremented.)  All four evaluate the same
 * function; the enum picks which recursion drives the memoized sweep.
 */
enum class PascalVariant { upper_tail_gap, prefix_shifted, tail_shifted, upper_prefix_gap };
Scalar q_multinomial_via_recurrence(long x, const Composition& parts, const QBase& q,
				    PascalVariant variant);

/*
 * Exponent-pair primitives.  With p = q^b (b a nonzero integer, possibly
 * negative):
 *
 *   q_number_scaled(e, b, q)        = (1 - q^e)/(1 - q^b)        = [e/b]_p
 *   q_factorial_scaled(e, b, t, q)  = prod_{i=0}^{t-1} [e/b - i]_p
 *   q_binomial_scaled(e, b, t, q)   = [e/b over t]_p
 *   q_multinomial_scaled(n, r, b, q)= [n over r_1..r_k]_p  (n integer)
 *
 * e/b need not be an integer; the factors stay rational in q because only
 * the products b*i and the offsets e enter the exponents.
 */
Scalar q_number_scaled(long e, long b, const QBase& q);
Scalar q_factorial_scaled(long e, long b, long t, const QBase& q);
Scalar q_binomial_scaled(long e, long b, long t, const QBase& q);
Scalar q_multinomial_scaled(long n, const Composition& parts, long b, const QBase& q);

}	// namespace qpolya
