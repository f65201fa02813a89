#pragma once

#include "qpolya/composition.hpp"
#include "qpolya/qbase.hpp"
#include "qpolya/qcore.hpp"

#include <vector>

namespace qpolya {

/*
 * Multi-index convolution identities.  An instance fixes the order n >= 0,
 * the upper arguments x_1..x_{k+1} (real; integral values admit exact
 * evaluation) and the base.  The sums run over r_1..r_k >= 0 with
 * r_1+..+r_k <= n and r_{k+1} = n - (r_1+..+r_k).
 */
struct IdentityInstance {
	long n;
	std::vector<double> xs;	// k+1 entries, k >= 1
	QBase q;
};

/*
 * The four weight layouts the convolution identities come in, named for how
 * the q-exponent is assembled (s_j = r_1+..+r_j, z_j = x_{j+1}+..+x_{k+1}):
 *
 *   falling_complement:  q^{sum_j (n-s_j)(x_j-r_j)}, falling factors
 *   rising_tail:         q^{sum_j r_j z_j},          rising factors
 *   falling_residual:    q^{sum_j r_j(z_j-(n-s_j))}, falling factors
 *   rising_complement:   q^{sum_j x_j(n-s_j)},       rising factors
 *
 * Falling forms close to [x_1+..+x_{k+1}]_{n,q}; rising forms close to
 * [x_1+..+x_{k+1}+n-1]_{n,q}.
 */
enum class ConvolutionForm { falling_complement, rising_tail, falling_residual, rising_complement };

// closed side / sum side of the factorial-product convolution
Scalar vandermonde_lhs(const IdentityInstance& inst, ConvolutionForm form);
Scalar vandermonde_sum(const IdentityInstance& inst, ConvolutionForm form);

// binomial-coefficient version: the same weights over products of Gaussian
// binomials, closing to [X over n]_q (falling) or [X+n-1 over n]_q (rising)
Scalar cauchy_lhs(const IdentityInstance& inst, ConvolutionForm form);
Scalar cauchy_sum(const IdentityInstance& inst, ConvolutionForm form);

/*
 * Bounded-index convolution: for integer 0 <= x_j with y_k <= n <= r the sum
 * runs over r_j >= x_j, r_1+..+r_k <= r, with r_{k+1} = r - s_k and
 * x_{k+1} = n - y_k, closing to [r+k over n+k]_q.  Writing y_j for the
 * prefix sums of x:
 *
 *   excess_weighted:      q^{sum_j (r_j-x_j)(n-y_j+k-j+1)}
 *   complement_weighted:  q^{sum_j (x_j+1)((r-s_j)-(n-y_j))}
 */
enum class BoundedForm { excess_weighted, complement_weighted };
Scalar bounded_cauchy_lhs(long r, long n, const Composition& xs, const QBase& q);
Scalar bounded_cauchy_sum(long r, long n, const Composition& xs, const QBase& q,
			  BoundedForm form);

/*
 * Reciprocal factorial expansion: with x_{k+1} the target argument,
 *
 *   1/[x_{k+1}]_{n,q} = sum_{r_1..r_k >= 0} [n+s_k-1 over r_1..r_k]_q W(r)
 *                       prod_j [x_j]_{r_j,q} / [x_1+..+x_{k+1}]_{n+s_k,q}
 *
 *   complement_weighted: W = q^{sum_j (n+s_k-s_j)(x_j-r_j)}
 *   tail_weighted:       W = q^{sum_j r_j(z_j-s_k+s_j-n+1)}
 *
 * When every x_1..x_k is a nonnegative integer the series terminates (all
 * factors beyond r_j = x_j vanish) and the identity holds for any q and any
 * real target.  Otherwise the multi-index series is evaluated as an iterated
 * sum, coordinate j = k outermost to j = 1 innermost: the multinomial factors
 * as a chain of binomials [nu_j + r_j - 1 over r_j]_q with
 * nu_j = n + r_{j+1} + .. + r_k, and each coordinate's 1-d series is a
 * q-Gauss sum in disguise.  That per-level sum equals its closed side only
 * under 0 < q < 1 (complement weights) resp. q > 1 (tail weights), and only
 * when the arguments placed after the coordinate add up to a negative total;
 * outside this region the series can converge to a different value, and such
 * instances are rejected.  Since the expansion is symmetric in x_1..x_k, the
 * evaluator reorders them largest first, which makes every such running tail
 * as negative as the instance allows.
 *
 * Each level truncates once its measured geometric tail drops below
 * tail_tolerance relative to the running level sum; the returned tail_bound
 * rolls the per-level remainders and float slack up to an absolute bound on
 * |value - full sum|.
 */
enum class InverseForm { complement_weighted, tail_weighted };

struct TruncationPolicy {
	double tail_tolerance = 1e-12;	// per-level relative cutoff
	long max_terms_per_level = 512;
};

struct TruncatedSum {
	Scalar value;
	double tail_bound;	// bound on |value - full sum|, 0 for exact exhaustion
	long terms;		// number of summand evaluations
	bool terminated;	// the series was finite and fully consumed
};

Scalar inverse_vandermonde_lhs(const IdentityInstance& inst);
TruncatedSum inverse_vandermonde_sum(const IdentityInstance& inst, InverseForm form,
				     const TruncationPolicy& policy = {});

}	// namespace qpolya
