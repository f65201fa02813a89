#include "qpolya/qidentities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qpolya {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool integral(double x) {
	return std::floor(x) == x && std::fabs(x) < 9.007199254740992e15;
}

void validate_instance(const IdentityInstance& inst) {
	if (inst.xs.size() < 2)
		throw DomainError("identity instance: xs must hold k+1 >= 2 entries");
	if (inst.n < 0)
		throw DomainError("identity instance: negative order");
	if (inst.q.is_exact())
		for (double x : inst.xs)
			if (!integral(x))
				throw UnsupportedExactInputError(
					"identity instance: exact evaluation needs integral upper arguments");
}

bool rising_form(ConvolutionForm form) {
	return form == ConvolutionForm::rising_tail ||
	       form == ConvolutionForm::rising_complement;
}

// z_j = x_{j+1} + .. + x_{k+1}, 1-based j
double tail_after(const std::vector<double>& xs, size_t j) {
	double z = 0;
	for (size_t i = j; i < xs.size(); ++i)
		z += xs[i];
	return z;
}

double weight_exponent(ConvolutionForm form, long n, const std::vector<double>& xs,
		       const std::vector<long>& r) {
	size_t k = r.size();
	double e = 0;
	long s = 0;
	for (size_t j = 1; j <= k; ++j) {
		s += r[j - 1];
		switch (form) {
		case ConvolutionForm::falling_complement:
			e += static_cast<double>(n - s) * (xs[j - 1] - static_cast<double>(r[j - 1]));
			break;
		case ConvolutionForm::rising_tail:
			e += static_cast<double>(r[j - 1]) * tail_after(xs, j);
			break;
		case ConvolutionForm::falling_residual:
			e += static_cast<double>(r[j - 1]) *
			     (tail_after(xs, j) - static_cast<double>(n - s));
			break;
		case ConvolutionForm::rising_complement:
			e += xs[j - 1] * static_cast<double>(n - s);
			break;
		}
	}
	return e;
}

}	// namespace

Scalar vandermonde_lhs(const IdentityInstance& inst, ConvolutionForm form) {
	validate_instance(inst);
	double X = tail_after(inst.xs, 0);
	double upper = rising_form(form) ? X + static_cast<double>(inst.n) - 1.0 : X;
	return q_factorial_order(upper, inst.n, inst.q);
}

Scalar vandermonde_sum(const IdentityInstance& inst, ConvolutionForm form) {
	validate_instance(inst);
	size_t k = inst.xs.size() - 1;
	bool rising = rising_form(form);
	std::vector<Scalar> terms;
	for_each_bounded_composition(k, inst.n, [&](const std::vector<long>& r) {
		long sk = 0;
		for (long v : r)
			sk += v;
		Scalar t = q_multinomial(inst.n, Composition(r), inst.q) *
			   q_power_real(inst.q, weight_exponent(form, inst.n, inst.xs, r));
		for (size_t j = 0; j <= k; ++j) {
			long rj = (j < k) ? r[j] : inst.n - sk;
			double upper = rising ? inst.xs[j] + static_cast<double>(rj) - 1.0
					      : inst.xs[j];
			t *= q_factorial_order(upper, rj, inst.q);
		}
		terms.push_back(std::move(t));
	});
	return sum_pairwise(std::move(terms));
}

Scalar cauchy_lhs(const IdentityInstance& inst, ConvolutionForm form) {
	validate_instance(inst);
	double X = tail_after(inst.xs, 0);
	double upper = rising_form(form) ? X + static_cast<double>(inst.n) - 1.0 : X;
	return q_binomial(upper, inst.n, inst.q);
}

Scalar cauchy_sum(const IdentityInstance& inst, ConvolutionForm form) {
	validate_instance(inst);
	size_t k = inst.xs.size() - 1;
	bool rising = rising_form(form);
	std::vector<Scalar> terms;
	for_each_bounded_composition(k, inst.n, [&](const std::vector<long>& r) {
		long sk = 0;
		for (long v : r)
			sk += v;
		Scalar t = q_power_real(inst.q, weight_exponent(form, inst.n, inst.xs, r));
		for (size_t j = 0; j <= k; ++j) {
			long rj = (j < k) ? r[j] : inst.n - sk;
			double upper = rising ? inst.xs[j] + static_cast<double>(rj) - 1.0
					      : inst.xs[j];
			t *= q_binomial(upper, rj, inst.q);
		}
		terms.push_back(std::move(t));
	});
	return sum_pairwise(std::move(terms));
}

Scalar bounded_cauchy_lhs(long r, long n, const Composition& xs, const QBase& q) {
	if (xs.empty())
		throw DomainError("bounded convolution: k >= 1 required");
	long k = static_cast<long>(xs.size());
	return q_binomial(r + k, n + k, q);
}

Scalar bounded_cauchy_sum(long r, long n, const Composition& xs, const QBase& q,
			  BoundedForm form) {
	size_t k = xs.size();
	if (k == 0)
		throw DomainError("bounded convolution: k >= 1 required");
	long yk = xs.total();
	if (yk > n || n > r)
		throw DomainError("bounded convolution needs y_k <= n <= r");
	std::vector<Scalar> terms;
	// substitute r_j = x_j + t_j; the constraint s_k <= r becomes sum t <= r - y_k
	for_each_bounded_composition(k, r - yk, [&](const std::vector<long>& t) {
		long e = 0;
		long s = 0;	// s_j = r_1 + .. + r_j
		long y = 0;	// y_j = x_1 + .. + x_j
		for (size_t j = 1; j <= k; ++j) {
			long rj = xs[j - 1] + t[j - 1];
			s += rj;
			y += xs[j - 1];
			if (form == BoundedForm::excess_weighted)
				e += t[j - 1] * (n - y + static_cast<long>(k - j) + 1);
			else
				e += (xs[j - 1] + 1) * ((r - s) - (n - y));
		}
		Scalar term = q_power(q, e);
		for (size_t j = 0; j < k; ++j)
			term *= q_binomial(xs[j] + t[j], xs[j], q);
		term *= q_binomial(r - s, n - yk, q);
		terms.push_back(std::move(term));
	});
	return sum_pairwise(std::move(terms));
}

Scalar inverse_vandermonde_lhs(const IdentityInstance& inst) {
	validate_instance(inst);
	Scalar denom = q_factorial_order(inst.xs.back(), inst.n, inst.q);
	if (denom.is_zero())
		throw DivisionByZeroError("inverse convolution target is infinite");
	return Scalar::one(inst.q.backend()) / denom;
}

namespace {

/*
 * Nested evaluator.  level(j, nu) sums coordinate j under the inflated
 * order nu = n + r_{j+1} + .. + r_k:
 *
 *   level(j, nu) = sum_{r >= 0} [nu+r-1 over r]_q W_j(nu, r) [x_j]_{r,q}
 *                  level(j-1, nu+r)
 *   level(0, nu) = 1 / [x_1+..+x_{k+1}]_{nu,q}
 *
 * with W_j = q^{nu(x_j - r)} (complement form) or q^{r(T_{j+1} - nu + 1)},
 * T_{j+1} = x_{j+1}+..+x_{k+1} (tail form).  Expanding the binomial chain
 * reproduces the joint multinomial form exactly.
 */
struct InverseEval {
	const IdentityInstance& inst;
	InverseForm form;
	const TruncationPolicy& policy;
	size_t k;
	double X;
	std::vector<double> ys;	// summation arguments reordered, target appended
	long terms = 0;
	bool truncated_somewhere = false;

	struct Level {
		Scalar value;
		LogReal abs_bound;	// absolute error bound, 0 under exact
	};

	LogReal float_slack(const LogReal& magnitude) const {
		if (inst.q.is_exact())
			return LogReal();
		return LogReal::from_log(1, magnitude.log_abs() + std::log(1e-14));
	}

	Level base(long nu) {
		Scalar den = q_factorial_order(X, nu, inst.q);
		if (den.is_zero())
			throw DivisionByZeroError(
				"inverse convolution: denominator order exhausts the total argument");
		Scalar v = Scalar::one(inst.q.backend()) / den;
		return {v, float_slack(abs(v).to_logreal())};
	}

	Level level(size_t j, long nu) {
		if (j == 0)
			return base(nu);
		const QBase& q = inst.q;
		double xj = ys[j - 1];
		bool finite = integral(xj) && xj >= 0;
		long rmax = finite ? static_cast<long>(xj) : policy.max_terms_per_level;

		Scalar sum = q.zero();
		LogReal bound;		// inherited inner bounds, weighted
		LogReal abs_acc;	// sum of |a_r|, for the float slack
		double scale_lg = -kInf;	// log max(|a_r|, |partial sums|)
		double last_lg = std::nan("");
		double ratio_win[3] = {std::nan(""), std::nan(""), std::nan("")};
		int silent = 0;

		for (long r = 0;; ++r) {
			if (finite && r > rmax)
				return {sum, bound + float_slack(abs_acc)};
			if (r >= policy.max_terms_per_level) {
				truncated_somewhere = true;
				double est = (!std::isnan(last_lg) && last_lg > -kInf)
						     ? std::exp(last_lg)
						     : kInf;
				throw TruncationError(
					"inverse convolution: level tolerance not reached "
					"within the term cap",
					est);
			}
			Level inner = level(j - 1, nu + r);
			double w = (form == InverseForm::complement_weighted)
					   ? static_cast<double>(nu) * (xj - static_cast<double>(r))
					   : static_cast<double>(r) *
						     (tail_after(ys, j) -
						      static_cast<double>(nu) + 1.0);
			Scalar c = q_binomial(nu + r - 1, r, q) * q_power_real(q, w) *
				   q_factorial_order(xj, r, q);
			Scalar a = c * inner.value;
			sum += a;
			bound = bound + abs(c).to_logreal() * inner.abs_bound;
			LogReal amag = abs(a).to_logreal();
			abs_acc = abs_acc + amag;
			++terms;
			if (finite)
				continue;

			double lg = amag.log_abs();
			scale_lg = std::max(scale_lg, std::max(lg, abs(sum).to_logreal().log_abs()));
			if (lg == -kInf) {
				if (++silent >= 3)
					return {sum, bound + float_slack(abs_acc)};
				last_lg = std::nan("");
				continue;
			}
			silent = 0;
			if (!std::isnan(last_lg)) {
				ratio_win[0] = ratio_win[1];
				ratio_win[1] = ratio_win[2];
				ratio_win[2] = lg - last_lg;
			}
			last_lg = lg;
			double rho = 0;
			bool full_win = true;
			for (double p : ratio_win) {
				if (std::isnan(p))
					full_win = false;
				else
					rho = std::max(rho, std::exp(p));
			}
			if (r >= 4 && full_win && rho > 0 && rho < 1.0) {
				// remainder <= |a_r| rho/(1-rho), doubled for safety
				double tail_lg = lg + std::log(2.0 * rho / (1.0 - rho));
				if (tail_lg <= std::log(policy.tail_tolerance) + scale_lg) {
					truncated_somewhere = true;
					return {sum, bound + LogReal::from_log(1, tail_lg) +
							    float_slack(abs_acc)};
				}
			}
		}
	}
};

}	// namespace

TruncatedSum inverse_vandermonde_sum(const IdentityInstance& inst, InverseForm form,
				     const TruncationPolicy& policy) {
	validate_instance(inst);
	size_t k = inst.xs.size() - 1;
	const QBase& q = inst.q;

	/*
	 * The expansion is invariant under permuting the summation arguments,
	 * so they are reordered largest first: each level's validity condition
	 * involves only the arguments summed after it, and this order makes
	 * those running tails as negative as possible.
	 */
	std::vector<double> ys(inst.xs.begin(), inst.xs.end() - 1);
	std::sort(ys.begin(), ys.end(), std::greater<double>());
	ys.push_back(inst.xs.back());

	bool all_finite = true;
	for (size_t j = 0; j < k; ++j)
		if (!integral(ys[j]) || ys[j] < 0) {
			all_finite = false;
			break;
		}
	if (!all_finite) {
		if (q.is_exact())
			throw UnsupportedExactInputError(
				"inverse convolution: exact evaluation needs nonnegative "
				"integer summation arguments");
		/*
		 * Each non-terminating coordinate contributes a q-Gauss series
		 * whose sum equals the closed side only for q below one
		 * (complement weights) or above one (tail weights), and only
		 * when the arguments remaining after that coordinate sum to a
		 * negative total.  Outside this region the series may still
		 * converge, but to a different value, so it is rejected.
		 */
		bool regime_ok = (form == InverseForm::complement_weighted)
					 ? q.regime() == Regime::sub_unit
					 : q.regime() == Regime::super_unit;
		if (!regime_ok)
			throw DomainError(
				"inverse convolution: non-terminating expansion needs q < 1 "
				"for complement weights or q > 1 for tail weights");
		for (size_t j = 1; j <= k; ++j) {
			if (integral(ys[j - 1]) && ys[j - 1] >= 0)
				continue;
			if (!(tail_after(ys, j) < 0))
				throw DomainError(
					"inverse convolution: arguments after a non-integer "
					"coordinate must sum below zero");
		}
		double X = tail_after(ys, 0);
		if (integral(X) && X >= 0)
			throw DomainError(
				"inverse convolution: total argument is a nonnegative integer, "
				"the expansion hits a zero denominator");
	}

	InverseEval eval{inst, form, policy, k, tail_after(ys, 0), std::move(ys)};
	InverseEval::Level top = eval.level(k, inst.n);
	double bound = top.abs_bound.is_zero() ? 0.0 : std::exp(top.abs_bound.log_abs());
	return {top.value, bound, eval.terms, !eval.truncated_somewhere};
}

}	// namespace qpolya
