#pragma once

#include "qpolya/composition.hpp"
#include "qpolya/qbase.hpp"
#include "qpolya/qcore.hpp"

#include <optional>
#include <vector>

namespace qpolya {

/*
 * Urn with k+1 ordered colors holding counts r_1..r_{k+1}.  A drawing picks a
 * position by the law q^{x-1}/[r]_q over the r occupied positions; the drawn
 * ball goes back together with m balls of its color (m < 0 removes instead,
 * m = 0 is plain replacement).  s_nu = r_1 + .. + r_nu are the color
 * boundaries every exponent below is written in.
 */
struct UrnSpec {
	std::vector<long> counts;	// r_1..r_{k+1}, each >= 1, at least two colors
	long m = 0;
	QBase q;

	UrnSpec(std::vector<long> counts_, long m_, QBase q_);

	size_t colors() const { return counts.size(); }
	long total() const;
	// s_nu, 1-based; prefix(0) = 0
	long prefix(size_t nu) const;
};

/*
 * Parameters (n, alpha_1..alpha_k, alpha, q) of the n-draw law.  Built from
 * an urn, alpha_j = -r_j/m and the parameters are guaranteed to define a
 * probability law; the urn is retained because every PMF factor then reduces
 * to (1 - q^a)/(1 - q^b) with integer a, b, which keeps ExactRational
 * evaluation available even though alpha_j itself is fractional.  Free-form
 * real parameters are accepted but unvalidated: evaluation raises rather
 * than silently normalizing when they drive a probability negative.
 */
struct PolyaParams {
	long n = 0;
	std::vector<double> alphas;	// alpha_1..alpha_k
	double alpha = 0;
	QBase q;
	long m = 0;	// nonzero; the m = 0 urn is the multinomial reduction below
	bool validated = false;
	std::optional<UrnSpec> urn;

	static PolyaParams from_urn(const UrnSpec& spec, long n);
	static PolyaParams free_form(long n, std::vector<double> alphas, double alpha,
				     QBase q, long m);

	size_t k() const { return alphas.size(); }
};

/*
 * Materialized finite (or truncated) PMF.  probs[i] belongs to support[i];
 * normalization_defect = |sum probs - 1|.  For truncated tables of a proper
 * law the defect IS the mass outside the enumerated window and tail_bound
 * covers it; a defective law (one that places mass on never returning) gets
 * proper = false and the trivial bound 1.
 */
struct PmfTable {
	std::vector<std::vector<long>> support;
	std::vector<Scalar> probs;
	double normalization_defect = 0;
	bool truncated = false;
	double tail_bound = 0;
	bool proper = true;
};

inline constexpr long default_table_cap = 1L << 20;

/*
 * Limit parametrization reached by growing every color count to infinity.
 * theta_sub_unit keeps 0 < q < 1 with rates theta_j; lambda_super_unit keeps
 * q > 1 with rates lambda_j.  Rates are Scalars so an exact-rational rate
 * keeps exact evaluation available.  For negative m the rates must stay
 * below q^{-m(nu-1)} (resp. q^{m(nu-1)}) for a stated horizon nu >= n, which
 * is why nu travels with the parameters.
 */
struct LimitParams {
	enum class Kind { theta_sub_unit, lambda_super_unit };
	Kind kind;
	std::vector<Scalar> rates;
	QBase q;
	long m = 0;
	std::optional<long> nu;

	// checks the regime inequalities for an n-draw evaluation
	void validate(long n) const;
};

// q^{position-1}/[r]_q, position in 1..r
Scalar q_uniform_draw_pmf(long position, long r, const QBase& q);

// P(first draw is color nu) = q^{s_{nu-1}}[r_nu]_q/[r]_q, nu 1-based
Scalar color_draw_prob(const UrnSpec& spec, size_t color);

/*
 * P(draw i is color nu | j_prev prior draws of color nu, i_prev prior draws
 * of colors below nu) = q^{s_{nu-1}+m i_prev}(1-q^{r_nu+m j_prev})
 * / (1-q^{r+m(i-1)}).  Under removal the implied counts must stay positive.
 */
Scalar conditional_draw_prob(const UrnSpec& spec, long i, size_t color, long j_prev,
			     long i_prev);

// the two printed spellings of the n-draw PMF; they agree pointwise
enum class PmfForm { multinomial, binomial_product };

/*
 * P(X_1=x_1,..,X_k=x_k) after n drawings.  In multinomial form
 *
 *     [n; x_1..x_k]_{q^{-m}} q^E prod_j [alpha_j]_{x_j,q^{-m}} / [alpha]_{n,q^{-m}},
 *
 * E = -m sum_j (n-y_j)(alpha_j-x_j), y_j = x_1+..+x_j, with the (k+1)-th
 * coordinate derived as n - y_k.  Under urn parameters -m(alpha_j-x_j)
 * = r_j + m x_j, so E and every factor exponent are integers.  Outcomes a
 * removal urn cannot produce return zero; sum x_j > n is a domain error.
 */
Scalar qpolya_pmf(const PolyaParams& params, const Composition& x,
		  PmfForm form = PmfForm::multinomial);

// full table over sum x_j <= n; SizeError past cap entries
PmfTable qpolya_table(const PolyaParams& params, long cap = default_table_cap);

// drop all but the first `keep` coordinates; trailing colors merge into the
// remainder color
PolyaParams marginal_params(const PolyaParams& params, size_t keep);

/*
 * Law of the next `span` coordinates given observed values for the first
 * given.size() of them: a span-variate law with n' = n - sum(given),
 * alpha' = alpha - sum of conditioned alphas.  Infeasible given values are
 * a domain error.
 */
PolyaParams conditional_params(const PolyaParams& params, const std::vector<long>& given,
			       size_t span);

/*
 * Removal-by-one urn (m = -1) after n drawings:
 *
 *     [n; x]_q q^{sum_j (n-y_j)(r_j-x_j)} prod_j [r_j]_{x_j,q} / [r]_{n,q},
 *
 * the product running over all k+1 coordinates.  Must match qpolya_pmf at
 * m = -1; requires n <= r.
 */
Scalar qhypergeometric_pmf(const UrnSpec& spec, long n, const Composition& x);

/*
 * Duplication urn (m = +1) after n drawings:
 *
 *     [n; x]_q q^{sum_j r_j(n-y_j)} prod_j [r_j+x_j-1]_{x_j,q} / [r+n-1]_{n,q}.
 *
 * Must match qpolya_pmf at m = +1.
 */
Scalar negative_qhypergeometric_pmf(const UrnSpec& spec, long n, const Composition& x);

// m = 0: classical multinomial with cell probabilities q^{s_{nu-1}}[r_nu]_q/[r]_q
Scalar multinomial_reduction_pmf(const UrnSpec& spec, long n, const Composition& x);
PmfTable multinomial_reduction_table(const UrnSpec& spec, long n,
				     long cap = default_table_cap);

/*
 * Infinite-urn limit of the n-draw law.  theta form (0 < q < 1):
 *
 *     [n; x]_{q^m} prod_j theta_j^{n-y_j} prod_{i=1}^{x_j} (1 - theta_j q^{m(i-1)});
 *
 * lambda form (q > 1) swaps the roles of x_j and n-y_j:
 *
 *     [n; x]_{q^{-m}} prod_j lambda_j^{x_j} prod_{i=1}^{n-y_j} (1 - lambda_j q^{-m(i-1)}).
 */
Scalar q_multinomial_2nd_pmf(const LimitParams& lim, long n, const Composition& x);
PmfTable q_multinomial_2nd_table(const LimitParams& lim, long n,
				 long cap = default_table_cap);

/*
 * Numbers of balls of colors 1..k drawn before the n-th ball of the last
 * color.  With u_j = w_1+..+w_j:
 *
 *     [n+u_k-1; w]_{q^{-m}} q^{E} prod_j [alpha_j]_{w_j,q^{-m}}
 *         [alpha_{k+1}]_{n,q^{-m}} / [alpha]_{n+u_k,q^{-m}},
 *
 * E = -m sum_j (n+u_k-u_j)(alpha_j-w_j).  Equals the n+u_k-1 drawing law at
 * outcome w times the closing-draw probability, which the tests pin down.
 * Outcomes a removal urn cannot produce return zero.
 */
Scalar inverse_qpolya_pmf(const PolyaParams& params, const Composition& w);

/*
 * Truncated table over the box w_j <= w_max.  The full law sums to one in
 * the proper regimes (any m < 0; m >= 1 with q > 1), so the recorded
 * tail_bound max(0, 1 - sum) is the exact missing mass up to float slack.
 * For m >= 1 with q < 1 the law is defective (the last color may never
 * reach n draws) and the bound degrades to the trivial 1.
 */
PmfTable inverse_qpolya_table(const PolyaParams& params, long w_max,
			      long cap = default_table_cap);

/*
 * Infinite-urn limit of the inverse law.  theta form (0 < q < 1):
 *
 *     [n+u_k-1; w]_{q^m} prod_j theta_j^{n+u_k-u_j} q^{m w_j}
 *         prod_{i=1}^{w_j} (1 - theta_j q^{m(i-1)});
 *
 * lambda form (q > 1):
 *
 *     [n+u_k-1; w]_{q^{-m}} prod_j lambda_j^{w_j}
 *         prod_{i=1}^{n+u_k-u_j} (1 - lambda_j q^{-m(i-1)}).
 *
 * For negative m the factor exponents grow with the index and the support
 * is gated: outcomes whose factors cross zero carry no mass.  A rate equal
 * to a q-power closes its gate through an exact zero factor (these are the
 * rates finite urns actually produce) and the gated law then sums to one;
 * other rates leave a genuine defect, which the table reports.
 */
Scalar negative_q_multinomial_2nd_pmf(const LimitParams& lim, long n,
				      const Composition& w);

/*
 * Window-truncated table over w in [0..w_max]^k, lexicographic.  Only the
 * lambda form with positive m is a proper law with a certifiable tail; the
 * theta form with positive m leaks mass to escape, and negative m is gated
 * (see above), so both get the trivial bound.
 */
PmfTable negative_q_multinomial_2nd_table(const LimitParams& lim, long n, long w_max,
					  long cap = default_table_cap);

/*
 * Conditional law of k+1 independent first-kind q-binomial blocks given
 * their total.  Block j covers trials s_{j-1}+1..s_j of one Bernoulli
 * sequence with per-trial success odds theta q^{i-1} : 1, so
 *
 *     P(X_j = x_j) = [r_j over x_j]_q (theta q^{s_{j-1}})^{x_j} q^{C(x_j,2)}
 *                    / prod_{i=1}^{r_j} (1 + theta q^{s_{j-1}+i-1}).
 *
 * The ratio prod_j P(X_j=x_j) / P(sum = n) is evaluated literally, with no
 * pre-cancellation: that it comes out theta-free (and equal to the removal
 * urn law) is the point, and the tests assert it.
 */
Scalar conditional_given_sum_qbinomial(const std::vector<long>& blocks, const Scalar& theta,
				       const QBase& q, long n, const Composition& x);

/*
 * Same construction from second-kind negative q-binomial blocks: W_j counts
 * failures between successes s_{j-1} and s_j of a sequence with success
 * probability 1 - theta q^{j-1} after j-1 successes, so
 *
 *     P(W_j = w_j) = [r_j+w_j-1 over w_j]_q (theta q^{s_{j-1}})^{w_j}
 *                    prod_{i=1}^{r_j} (1 - theta q^{s_{j-1}+i-1}).
 *
 * For q > 1 the success count is capped at -log(theta)/log(q); block sizes
 * past the cap are a domain error.  The conditional given sum = n is
 * theta-free and equals the duplication urn law.
 */
Scalar conditional_given_sum_negqbinomial(const std::vector<long>& blocks,
					  const Scalar& theta, const QBase& q, long n,
					  const Composition& w);

/*
 * Posterior over the unknown color counts of an r_total-ball population
 * after a removal q-sample of size n showed x, under the q-uniform prior
 * prod_j q^{(k-j+1)r_j} / [r_total+k over k]_q:
 *
 *     q^{sum_j (r_j-x_j)(n-y_j+k-j+1)} prod_{j=1}^{k+1} [r_j over x_j]_q
 *         / [r_total+k over n+k]_q.
 *
 * Hypotheses with r_j < x_j or sum r_j > r_total get zero.
 */
Scalar posterior_r_given_x(long r_total, long n, const Composition& x,
			   const Composition& r_hypothesis, const QBase& q);
PmfTable posterior_table(long r_total, long n, const Composition& x, const QBase& q,
			 long cap = default_table_cap);

}	// namespace qpolya
