#include "qpolya/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpolya {

namespace {

/*
 * Classical multinomial coefficient over ALL parts (the remainder part is
 * the caller's job to append).  Exact backend builds it as a product of
 * binomials of prefix sums; float backend goes through lgamma.
 */
Scalar classical_multinomial(const std::vector<long>& parts, const QBase& q) {
	long total = 0;
	if (q.is_exact()) {
		mpz_class c = 1;
		for (long p : parts) {
			total += p;
			mpz_class b;
			mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(total),
				     static_cast<unsigned long>(p));
			c *= b;
		}
		return Scalar::exact(mpq_class(c));
	}
	double lg = 0;
	for (long p : parts) {
		total += p;
		lg -= std::lgamma(static_cast<double>(p) + 1.0);
	}
	lg += std::lgamma(static_cast<double>(total) + 1.0);
	return Scalar::real_log(1, lg);
}

Scalar table_sum(const PmfTable& t) {
	std::vector<Scalar> terms(t.probs.begin(), t.probs.end());
	return sum_pairwise(std::move(terms));
}

// [t]_{q^b}! as an exponent pair product
Scalar q_factorial_base(long t, long b, const QBase& q) {
	return q_factorial_scaled(b * t, b, t, q);
}

}	// namespace

UrnSpec::UrnSpec(std::vector<long> counts_, long m_, QBase q_)
	: counts(std::move(counts_)), m(m_), q(std::move(q_)) {
	if (counts.size() < 2)
		throw DomainError("UrnSpec: at least two colors are required");
	for (long r : counts)
		if (r < 1)
			throw DomainError("UrnSpec: every color needs at least one ball");
}

long UrnSpec::total() const {
	return std::accumulate(counts.begin(), counts.end(), 0L);
}

long UrnSpec::prefix(size_t nu) const {
	long s = 0;
	for (size_t i = 0; i < nu && i < counts.size(); ++i)
		s += counts[i];
	return s;
}

PolyaParams PolyaParams::from_urn(const UrnSpec& spec, long n) {
	if (n < 0)
		throw DomainError("PolyaParams: the number of drawings must be nonnegative");
	if (spec.m == 0)
		throw DomainError("PolyaParams: m = 0 has no alpha parametrization; "
				  "use the multinomial reduction");
	long r = spec.total();
	if (n >= 1 && spec.m < 0 && r + spec.m * (n - 1) < 1)
		throw DomainError("PolyaParams: the urn runs out of balls before the final drawing");
	std::vector<double> alphas;
	for (size_t j = 0; j + 1 < spec.counts.size(); ++j)
		alphas.push_back(-static_cast<double>(spec.counts[j]) /
				 static_cast<double>(spec.m));
	double alpha = -static_cast<double>(r) / static_cast<double>(spec.m);
	return PolyaParams{n, std::move(alphas), alpha, spec.q, spec.m, true, spec};
}

PolyaParams PolyaParams::free_form(long n, std::vector<double> alphas, double alpha,
				   QBase q, long m) {
	if (n < 0)
		throw DomainError("PolyaParams: the number of drawings must be nonnegative");
	if (m == 0)
		throw DomainError("PolyaParams: m must be a nonzero integer");
	if (alphas.empty())
		throw DomainError("PolyaParams: at least one coordinate is required");
	double s = 0;
	for (double a : alphas) {
		if (!std::isfinite(a))
			throw InputError("PolyaParams: parameters must be finite");
		s += a;
	}
	if (!std::isfinite(alpha) || !std::isfinite(alpha - s))
		throw InputError("PolyaParams: parameters must be finite");
	return PolyaParams{n, std::move(alphas), alpha, std::move(q), m, false, std::nullopt};
}

Scalar q_uniform_draw_pmf(long position, long r, const QBase& q) {
	if (r < 1 || position < 1 || position > r)
		throw DomainError("q_uniform_draw_pmf: position must lie in 1..r");
	return q_power(q, position - 1) / q_number(r, q);
}

Scalar color_draw_prob(const UrnSpec& spec, size_t color) {
	if (color < 1 || color > spec.colors())
		throw DomainError("color_draw_prob: color index out of range");
	return q_power(spec.q, spec.prefix(color - 1)) *
	       q_number(spec.counts[color - 1], spec.q) / q_number(spec.total(), spec.q);
}

Scalar conditional_draw_prob(const UrnSpec& spec, long i, size_t color, long j_prev,
			     long i_prev) {
	if (color < 1 || color > spec.colors())
		throw DomainError("conditional_draw_prob: color index out of range");
	if (i < 1 || j_prev < 0 || i_prev < 0 || j_prev + i_prev > i - 1)
		throw DomainError("conditional_draw_prob: prior-draw counts exceed the draw index");
	long r = spec.total();
	long rv = spec.counts[color - 1];
	if (spec.m < 0) {
		if (rv + spec.m * j_prev < 1)
			throw DomainError("conditional_draw_prob: color exhausted under removal");
		if (r + spec.m * (i - 1) < 1)
			throw DomainError("conditional_draw_prob: urn exhausted under removal");
	}
	return q_power(spec.q, spec.prefix(color - 1) + spec.m * i_prev) *
	       one_minus_q_power(spec.q, rv + spec.m * j_prev) /
	       one_minus_q_power(spec.q, r + spec.m * (i - 1));
}

Scalar qpolya_pmf(const PolyaParams& params, const Composition& x, PmfForm form) {
	size_t k = params.k();
	if (x.size() != k)
		throw InputError("qpolya_pmf: outcome length must match the parameter count");
	long yk = x.total();
	if (yk > params.n)
		throw DomainError("qpolya_pmf: outcome total exceeds the number of drawings");
	long xk1 = params.n - yk;
	const QBase& q = params.q;

	if (params.urn) {
		const UrnSpec& u = *params.urn;
		long m = u.m;
		long r = u.total();
		// removal support: every color keeps a ball through its last draw
		if (m < 0) {
			for (size_t j = 0; j < k; ++j)
				if (x[j] > 0 && u.counts[j] + m * (x[j] - 1) < 1)
					return q.zero();
			if (xk1 > 0 && u.counts[k] + m * (xk1 - 1) < 1)
				return q.zero();
		}
		long E = 0, y = 0;
		for (size_t j = 0; j < k; ++j) {
			y += x[j];
			E += (params.n - y) * (u.counts[j] + m * x[j]);
		}
		Scalar num = q.one();
		for (size_t j = 0; j < k; ++j)
			num *= q_factorial_scaled(u.counts[j], -m, x[j], q);
		num *= q_factorial_scaled(r - u.prefix(k), -m, xk1, q);
		Scalar den = q_factorial_scaled(r, -m, params.n, q);
		if (form == PmfForm::multinomial)
			return q_multinomial_scaled(params.n, x, -m, q) * q_power(q, E) * num / den;
		for (size_t j = 0; j < k; ++j)
			num /= q_factorial_base(x[j], -m, q);
		num /= q_factorial_base(xk1, -m, q);
		den /= q_factorial_base(params.n, -m, q);
		return q_power(q, E) * num / den;
	}

	QBase p = q.power(-params.m);
	double E = 0;
	long y = 0;
	for (size_t j = 0; j < k; ++j) {
		y += x[j];
		E += -static_cast<double>(params.m) * static_cast<double>(params.n - y) *
		     (params.alphas[j] - static_cast<double>(x[j]));
	}
	double a_last = params.alpha;
	for (double a : params.alphas)
		a_last -= a;
	Scalar num = q.one();
	for (size_t j = 0; j < k; ++j)
		num *= q_factorial_order(params.alphas[j], x[j], p);
	num *= q_factorial_order(a_last, xk1, p);
	Scalar den = q_factorial_order(params.alpha, params.n, p);
	Scalar out;
	if (form == PmfForm::multinomial) {
		out = q_multinomial_scaled(params.n, x, -params.m, q) * q_power_real(q, E) *
		      num / den;
	} else {
		for (size_t j = 0; j < k; ++j)
			num /= q_factorial(x[j], p);
		num /= q_factorial(xk1, p);
		den /= q_factorial(params.n, p);
		out = q_power_real(q, E) * num / den;
	}
	if (out.sign() < 0)
		throw DomainError("qpolya_pmf: free-form parameters produced a negative probability");
	return out;
}

PmfTable qpolya_table(const PolyaParams& params, long cap) {
	bounded_composition_count(params.k(), params.n, cap);
	PmfTable t;
	for_each_bounded_composition(params.k(), params.n, [&](const std::vector<long>& xs) {
		t.support.push_back(xs);
		t.probs.push_back(qpolya_pmf(params, Composition(xs)));
	});
	t.normalization_defect = std::fabs((table_sum(t) - params.q.one()).to_double());
	return t;
}

PolyaParams marginal_params(const PolyaParams& params, size_t keep) {
	if (keep < 1 || keep > params.k())
		throw DomainError("marginal_params: kept prefix must lie in 1..k");
	if (keep == params.k())
		return params;
	if (params.urn) {
		const UrnSpec& u = *params.urn;
		std::vector<long> counts(u.counts.begin(), u.counts.begin() + keep);
		counts.push_back(u.total() - u.prefix(keep));
		return PolyaParams::from_urn(UrnSpec(std::move(counts), u.m, u.q), params.n);
	}
	std::vector<double> alphas(params.alphas.begin(), params.alphas.begin() + keep);
	return PolyaParams::free_form(params.n, std::move(alphas), params.alpha, params.q,
				      params.m);
}

PolyaParams conditional_params(const PolyaParams& params, const std::vector<long>& given,
			       size_t span) {
	size_t fixed = given.size();
	if (span < 1 || fixed + span > params.k())
		throw DomainError("conditional_params: span exceeds the remaining coordinates");
	long consumed = 0;
	for (long g : given) {
		if (g < 0)
			throw DomainError("conditional_params: given values must be nonnegative");
		consumed += g;
	}
	if (consumed > params.n)
		throw DomainError("conditional_params: given values exceed the number of drawings");
	if (params.urn) {
		const UrnSpec& u = *params.urn;
		if (u.m < 0)
			for (size_t j = 0; j < fixed; ++j)
				if (given[j] > 0 && u.counts[j] + u.m * (given[j] - 1) < 1)
					throw DomainError("conditional_params: given values are "
							  "infeasible for this urn");
		std::vector<long> counts(u.counts.begin() + fixed,
					 u.counts.begin() + fixed + span);
		counts.push_back(u.total() - u.prefix(fixed + span));
		return PolyaParams::from_urn(UrnSpec(std::move(counts), u.m, u.q),
					     params.n - consumed);
	}
	std::vector<double> alphas(params.alphas.begin() + fixed,
				   params.alphas.begin() + fixed + span);
	double alpha = params.alpha;
	for (size_t j = 0; j < fixed; ++j)
		alpha -= params.alphas[j];
	return PolyaParams::free_form(params.n - consumed, std::move(alphas), alpha, params.q,
				      params.m);
}

Scalar qhypergeometric_pmf(const UrnSpec& spec, long n, const Composition& x) {
	if (spec.m != -1)
		throw DomainError("qhypergeometric_pmf: needs the removal-by-one urn (m = -1)");
	long r = spec.total();
	if (n < 0 || n > r)
		throw DomainError("qhypergeometric_pmf: sample size must lie in 0..r");
	size_t k = spec.colors() - 1;
	if (x.size() != k)
		throw InputError("qhypergeometric_pmf: outcome length must match the urn");
	long yk = x.total();
	if (yk > n)
		throw DomainError("qhypergeometric_pmf: outcome total exceeds the sample size");
	const QBase& q = spec.q;
	long E = 0, y = 0;
	for (size_t j = 0; j < k; ++j) {
		y += x[j];
		E += (n - y) * (spec.counts[j] - x[j]);
	}
	Scalar num = q.one();
	for (size_t j = 0; j < k; ++j)
		num *= q_factorial_order(spec.counts[j], x[j], q);
	num *= q_factorial_order(spec.counts[k], n - yk, q);
	return q_multinomial(n, x, q) * q_power(q, E) * num / q_factorial_order(r, n, q);
}

Scalar negative_qhypergeometric_pmf(const UrnSpec& spec, long n, const Composition& x) {
	if (spec.m != 1)
		throw DomainError("negative_qhypergeometric_pmf: needs the duplication urn (m = +1)");
	if (n < 0)
		throw DomainError("negative_qhypergeometric_pmf: sample size must be nonnegative");
	size_t k = spec.colors() - 1;
	if (x.size() != k)
		throw InputError("negative_qhypergeometric_pmf: outcome length must match the urn");
	long yk = x.total();
	if (yk > n)
		throw DomainError("negative_qhypergeometric_pmf: outcome total exceeds the sample size");
	const QBase& q = spec.q;
	long r = spec.total();
	long E = 0, y = 0;
	for (size_t j = 0; j < k; ++j) {
		y += x[j];
		E += spec.counts[j] * (n - y);
	}
	Scalar num = q.one();
	for (size_t j = 0; j < k; ++j)
		num *= q_factorial_order(spec.counts[j] + x[j] - 1, x[j], q);
	num *= q_factorial_order(spec.counts[k] + (n - yk) - 1, n - yk, q);
	return q_multinomial(n, x, q) * q_power(q, E) * num /
	       q_factorial_order(r + n - 1, n, q);
}

Scalar multinomial_reduction_pmf(const UrnSpec& spec, long n, const Composition& x) {
	if (spec.m != 0)
		throw DomainError("multinomial_reduction_pmf: needs the replacement urn (m = 0)");
	if (n < 0)
		throw DomainError("multinomial_reduction_pmf: sample size must be nonnegative");
	size_t k = spec.colors() - 1;
	if (x.size() != k)
		throw InputError("multinomial_reduction_pmf: outcome length must match the urn");
	long yk = x.total();
	if (yk > n)
		throw DomainError("multinomial_reduction_pmf: outcome total exceeds the sample size");
	std::vector<long> parts(x.begin(), x.end());
	parts.push_back(n - yk);
	Scalar out = classical_multinomial(parts, spec.q);
	for (size_t nu = 1; nu <= spec.colors(); ++nu)
		out *= color_draw_prob(spec, nu).pow_int(parts[nu - 1]);
	return out;
}

PmfTable multinomial_reduction_table(const UrnSpec& spec, long n, long cap) {
	size_t k = spec.colors() - 1;
	bounded_composition_count(k, n, cap);
	PmfTable t;
	for_each_bounded_composition(k, n, [&](const std::vector<long>& xs) {
		t.support.push_back(xs);
		t.probs.push_back(multinomial_reduction_pmf(spec, n, Composition(xs)));
	});
	t.normalization_defect = std::fabs((table_sum(t) - spec.q.one()).to_double());
	return t;
}

void LimitParams::validate(long n) const {
	if (m == 0)
		throw DomainError("LimitParams: m must be a nonzero integer");
	if (rates.empty())
		throw DomainError("LimitParams: at least one rate is required");
	bool sub = q.regime() == Regime::sub_unit;
	if (kind == Kind::theta_sub_unit && !sub)
		throw DomainError("LimitParams: theta rates need 0 < q < 1");
	if (kind == Kind::lambda_super_unit && sub)
		throw DomainError("LimitParams: lambda rates need q > 1");
	long e = 0;
	if (m < 0) {
		if (!nu || *nu < n)
			throw DomainError("LimitParams: negative m needs a horizon nu >= n");
		e = (kind == Kind::theta_sub_unit ? -m : m) * (*nu - 1);
	}
	for (const Scalar& rate : rates) {
		bool ok;
		if (rate.is_exact() && q.is_exact()) {
			// an exact rate can sit far below double resolution;
			// bouncing it through a double would misread it as 0
			Scalar cap = m < 0 ? q_power(q, e) : q.one();
			ok = rate.sign() > 0 && rate < cap;
		} else {
			double cap = m < 0 ? std::exp(q.log_value() * static_cast<double>(e))
					   : 1.0;
			double v = rate.to_double();
			ok = v > 0.0 && v < cap;
		}
		if (!ok)
			throw DomainError("LimitParams: rates must be positive and below the "
					  "regime bound");
	}
}

Scalar q_multinomial_2nd_pmf(const LimitParams& lim, long n, const Composition& x) {
	if (n < 0)
		throw DomainError("q_multinomial_2nd_pmf: sample size must be nonnegative");
	lim.validate(n);
	size_t k = lim.rates.size();
	if (x.size() != k)
		throw InputError("q_multinomial_2nd_pmf: outcome length must match the rates");
	if (x.total() > n)
		throw DomainError("q_multinomial_2nd_pmf: outcome total exceeds the sample size");
	const QBase& q = lim.q;
	bool theta = lim.kind == LimitParams::Kind::theta_sub_unit;
	Scalar out = q_multinomial_scaled(n, x, theta ? lim.m : -lim.m, q);
	long y = 0;
	for (size_t j = 0; j < k; ++j) {
		y += x[j];
		const Scalar& rate = lim.rates[j];
		if (theta) {
			out *= rate.pow_int(n - y);
			for (long i = 1; i <= x[j]; ++i)
				out *= q.one() - rate * q_power(q, lim.m * (i - 1));
		} else {
			out *= rate.pow_int(x[j]);
			for (long i = 1; i <= n - y; ++i)
				out *= q.one() - rate * q_power(q, -lim.m * (i - 1));
		}
	}
	return out;
}

PmfTable q_multinomial_2nd_table(const LimitParams& lim, long n, long cap) {
	size_t k = lim.rates.size();
	bounded_composition_count(k, n, cap);
	PmfTable t;
	for_each_bounded_composition(k, n, [&](const std::vector<long>& xs) {
		t.support.push_back(xs);
		t.probs.push_back(q_multinomial_2nd_pmf(lim, n, Composition(xs)));
	});
	t.normalization_defect = std::fabs((table_sum(t) - lim.q.one()).to_double());
	return t;
}

Scalar inverse_qpolya_pmf(const PolyaParams& params, const Composition& w) {
	size_t k = params.k();
	if (w.size() != k)
		throw InputError("inverse_qpolya_pmf: outcome length must match the parameter count");
	long n = params.n;
	if (n < 1)
		throw DomainError("inverse_qpolya_pmf: needs at least one target draw");
	long uk = w.total();
	const QBase& q = params.q;

	if (params.urn) {
		const UrnSpec& u = *params.urn;
		long m = u.m;
		long r = u.total();
		if (m < 0) {
			for (size_t j = 0; j < k; ++j)
				if (w[j] > 0 && u.counts[j] + m * (w[j] - 1) < 1)
					return q.zero();
			if (u.counts[k] + m * (n - 1) < 1)
				return q.zero();
			if (r + m * (n + uk - 1) < 1)
				return q.zero();
		}
		long E = 0, uj = 0;
		for (size_t j = 0; j < k; ++j) {
			uj += w[j];
			E += (n + uk - uj) * (u.counts[j] + m * w[j]);
		}
		Scalar num = q.one();
		for (size_t j = 0; j < k; ++j)
			num *= q_factorial_scaled(u.counts[j], -m, w[j], q);
		num *= q_factorial_scaled(r - u.prefix(k), -m, n, q);
		return q_multinomial_scaled(n + uk - 1, w, -m, q) * q_power(q, E) * num /
		       q_factorial_scaled(r, -m, n + uk, q);
	}

	QBase p = q.power(-params.m);
	double E = 0;
	long uj = 0;
	for (size_t j = 0; j < k; ++j) {
		uj += w[j];
		E += -static_cast<double>(params.m) * static_cast<double>(n + uk - uj) *
		     (params.alphas[j] - static_cast<double>(w[j]));
	}
	double a_last = params.alpha;
	for (double a : params.alphas)
		a_last -= a;
	Scalar num = q.one();
	for (size_t j = 0; j < k; ++j)
		num *= q_factorial_order(params.alphas[j], w[j], p);
	num *= q_factorial_order(a_last, n, p);
	Scalar out = q_multinomial_scaled(n + uk - 1, w, -params.m, q) * q_power_real(q, E) *
		     num / q_factorial_order(params.alpha, n + uk, p);
	if (out.sign() < 0)
		throw DomainError("inverse_qpolya_pmf: free-form parameters produced a "
				  "negative probability");
	return out;
}

PmfTable inverse_qpolya_table(const PolyaParams& params, long w_max, long cap) {
	size_t k = params.k();
	if (w_max < 0)
		throw DomainError("inverse_qpolya_table: the window bound must be nonnegative");
	long count = 1;
	for (size_t j = 0; j < k; ++j) {
		if (count > cap / (w_max + 1))
			throw SizeError("inverse_qpolya_table: window exceeds the size cap");
		count *= w_max + 1;
	}
	PmfTable t;
	t.truncated = true;
	std::vector<long> w(k, 0);
	auto rec = [&](auto&& self, size_t idx) -> void {
		if (idx == k) {
			t.support.push_back(w);
			t.probs.push_back(inverse_qpolya_pmf(params, Composition(w)));
			return;
		}
		for (long v = 0; v <= w_max; ++v) {
			w[idx] = v;
			self(self, idx + 1);
		}
		w[idx] = 0;
	};
	rec(rec, 0);
	Scalar sum = table_sum(t);
	t.normalization_defect = std::fabs((sum - params.q.one()).to_double());
	t.proper = params.m < 0 || params.q.regime() == Regime::super_unit;
	if (t.proper)
		t.tail_bound = std::max(0.0, (params.q.one() - sum).to_double()) +
			       (params.q.is_exact() ? 0.0 : 1e-12);
	else
		t.tail_bound = 1.0;
	return t;
}

Scalar negative_q_multinomial_2nd_pmf(const LimitParams& lim, long n,
				      const Composition& w) {
	if (n < 1)
		throw DomainError("negative_q_multinomial_2nd_pmf: needs at least one target draw");
	lim.validate(n);
	size_t k = lim.rates.size();
	if (w.size() != k)
		throw InputError("negative_q_multinomial_2nd_pmf: outcome length must match the rates");
	long uk = w.total();
	const QBase& q = lim.q;
	bool theta = lim.kind == LimitParams::Kind::theta_sub_unit;
	Scalar out = q_multinomial_scaled(n + uk - 1, w, theta ? lim.m : -lim.m, q);
	long uj = 0;
	for (size_t j = 0; j < k; ++j) {
		uj += w[j];
		const Scalar& rate = lim.rates[j];
		/*
		 * For negative m the factor exponents grow with the index, so
		 * past a horizon the factors cross zero: outcomes there are
		 * unreachable (a rate hitting a q-power gates the support
		 * exactly) and get zero mass rather than the junk the bare
		 * algebra would produce.
		 */
		if (theta) {
			out *= rate.pow_int(n + uk - uj) * q_power(q, lim.m * w[j]);
			for (long i = 1; i <= w[j]; ++i) {
				Scalar factor = q.one() - rate * q_power(q, lim.m * (i - 1));
				if (lim.m < 0 && factor.sign() <= 0)
					return q.zero();
				out *= factor;
			}
		} else {
			out *= rate.pow_int(w[j]);
			for (long i = 1; i <= n + uk - uj; ++i) {
				Scalar factor =
					q.one() - rate * q_power(q, -lim.m * (i - 1));
				if (lim.m < 0 && factor.sign() <= 0)
					return q.zero();
				out *= factor;
			}
		}
	}
	return out;
}

PmfTable negative_q_multinomial_2nd_table(const LimitParams& lim, long n, long w_max,
					  long cap) {
	if (w_max < 0)
		throw DomainError("negative_q_multinomial_2nd_table: the window bound "
				  "must be nonnegative");
	size_t k = lim.rates.size();
	long count = 1;
	for (size_t j = 0; j < k; ++j) {
		if (count > cap / (w_max + 1))
			throw SizeError("negative_q_multinomial_2nd_table: window exceeds "
					"the size cap");
		count *= w_max + 1;
	}
	PmfTable t;
	t.truncated = true;
	std::vector<long> w(k, 0);
	auto rec = [&](auto&& self, size_t idx) -> void {
		if (idx == k) {
			t.support.push_back(w);
			t.probs.push_back(
				negative_q_multinomial_2nd_pmf(lim, n, Composition(w)));
			return;
		}
		for (long v = 0; v <= w_max; ++v) {
			w[idx] = v;
			self(self, idx + 1);
		}
		w[idx] = 0;
	};
	rec(rec, 0);
	Scalar sum = table_sum(t);
	t.normalization_defect = std::fabs((sum - lim.q.one()).to_double());
	t.proper = lim.kind == LimitParams::Kind::lambda_super_unit && lim.m > 0;
	if (t.proper)
		t.tail_bound = std::max(0.0, (lim.q.one() - sum).to_double()) +
			       (lim.q.is_exact() ? 0.0 : 1e-12);
	else
		t.tail_bound = 1.0;
	return t;
}

namespace {

// first-kind q-binomial block on trials s_prev+1..s_prev+size, success odds
// theta q^{i-1} : 1 at trial i
Scalar qbinomial_block_pmf(long size, long s_prev, long x, const Scalar& theta,
			   const QBase& q) {
	if (x < 0 || x > size)
		return q.zero();
	Scalar out = q_binomial(size, x, q);
	out *= (theta * q_power(q, s_prev)).pow_int(x);
	out *= q_power(q, x * (x - 1) / 2);
	for (long i = 1; i <= size; ++i)
		out /= q.one() + theta * q_power(q, s_prev + i - 1);
	return out;
}

// second-kind negative q-binomial block: failures between successes s_prev
// and s_prev+size, success probability 1 - theta q^{j-1} after j-1 successes
Scalar negqbinomial_block_pmf(long size, long s_prev, long w, const Scalar& theta,
			      const QBase& q) {
	if (w < 0)
		return q.zero();
	Scalar out = q_binomial(size + w - 1, w, q);
	out *= (theta * q_power(q, s_prev)).pow_int(w);
	for (long i = 1; i <= size; ++i)
		out *= q.one() - theta * q_power(q, s_prev + i - 1);
	return out;
}

void validate_blocks(const std::vector<long>& blocks, const Scalar& theta) {
	if (blocks.size() < 2)
		throw DomainError("conditional_given_sum: needs at least two blocks");
	for (long b : blocks)
		if (b < 1)
			throw DomainError("conditional_given_sum: block sizes must be positive");
	if (theta.sign() <= 0)
		throw DomainError("conditional_given_sum: theta must be positive");
}

}	// namespace

Scalar conditional_given_sum_qbinomial(const std::vector<long>& blocks, const Scalar& theta,
				       const QBase& q, long n, const Composition& x) {
	validate_blocks(blocks, theta);
	size_t k = blocks.size() - 1;
	if (x.size() != k)
		throw InputError("conditional_given_sum_qbinomial: outcome length must match "
				 "the blocks");
	long r = std::accumulate(blocks.begin(), blocks.end(), 0L);
	if (n < 0 || n > r)
		throw DomainError("conditional_given_sum_qbinomial: total successes must lie in 0..r");
	long xk1 = n - x.total();
	if (xk1 < 0)
		throw DomainError("conditional_given_sum_qbinomial: outcome total exceeds the "
				  "conditioning sum");
	Scalar num = q.one();
	long s_prev = 0;
	for (size_t j = 0; j < k; ++j) {
		num *= qbinomial_block_pmf(blocks[j], s_prev, x[j], theta, q);
		s_prev += blocks[j];
	}
	num *= qbinomial_block_pmf(blocks[k], s_prev, xk1, theta, q);
	Scalar den = q_binomial(r, n, q) * theta.pow_int(n) * q_power(q, n * (n - 1) / 2);
	for (long i = 1; i <= r; ++i)
		den /= q.one() + theta * q_power(q, i - 1);
	return num / den;
}

Scalar conditional_given_sum_negqbinomial(const std::vector<long>& blocks,
					  const Scalar& theta, const QBase& q, long n,
					  const Composition& w) {
	validate_blocks(blocks, theta);
	double tv = theta.to_double();
	if (!(tv < 1.0))
		throw DomainError("conditional_given_sum_negqbinomial: theta must lie in (0, 1)");
	long r = std::accumulate(blocks.begin(), blocks.end(), 0L);
	if (q.regime() == Regime::super_unit &&
	    static_cast<double>(r) * q.log_value() > -std::log(tv))
		throw DomainError("conditional_given_sum_negqbinomial: q > 1 caps the success "
				  "count at -log(theta)/log(q)");
	size_t k = blocks.size() - 1;
	if (w.size() != k)
		throw InputError("conditional_given_sum_negqbinomial: outcome length must match "
				 "the blocks");
	if (n < 0)
		throw DomainError("conditional_given_sum_negqbinomial: the conditioning sum must "
				  "be nonnegative");
	long wk1 = n - w.total();
	if (wk1 < 0)
		throw DomainError("conditional_given_sum_negqbinomial: outcome total exceeds the "
				  "conditioning sum");
	Scalar num = q.one();
	long s_prev = 0;
	for (size_t j = 0; j < k; ++j) {
		num *= negqbinomial_block_pmf(blocks[j], s_prev, w[j], theta, q);
		s_prev += blocks[j];
	}
	num *= negqbinomial_block_pmf(blocks[k], s_prev, wk1, theta, q);
	Scalar den = q_binomial(r + n - 1, n, q) * theta.pow_int(n);
	for (long i = 1; i <= r; ++i)
		den *= q.one() - theta * q_power(q, i - 1);
	return num / den;
}

Scalar posterior_r_given_x(long r_total, long n, const Composition& x,
			   const Composition& r_hypothesis, const QBase& q) {
	size_t k = x.size();
	if (r_hypothesis.size() != k)
		throw InputError("posterior_r_given_x: hypothesis length must match the outcome");
	if (n < 0 || n > r_total)
		throw DomainError("posterior_r_given_x: sample size must lie in 0..r_total");
	if (x.total() > n)
		throw DomainError("posterior_r_given_x: outcome total exceeds the sample size");
	if (r_hypothesis.total() > r_total)
		return q.zero();
	long E = 0, y = 0;
	Scalar num = q.one();
	for (size_t j = 0; j < k; ++j) {
		if (r_hypothesis[j] < x[j])
			return q.zero();
		y += x[j];
		E += (r_hypothesis[j] - x[j]) * (n - y + static_cast<long>(k - j));
		num *= q_binomial(r_hypothesis[j], x[j], q);
	}
	num *= q_binomial(r_total - r_hypothesis.total(), n - x.total(), q);
	return q_power(q, E) * num /
	       q_binomial(r_total + static_cast<long>(k), n + static_cast<long>(k), q);
}

PmfTable posterior_table(long r_total, long n, const Composition& x, const QBase& q,
			 long cap) {
	size_t k = x.size();
	if (n < 0 || n > r_total)
		throw DomainError("posterior_table: sample size must lie in 0..r_total");
	if (x.total() > n)
		throw DomainError("posterior_table: outcome total exceeds the sample size");
	long slack = r_total - x.total();
	bounded_composition_count(k, slack, cap);
	PmfTable t;
	for_each_bounded_composition(k, slack, [&](const std::vector<long>& extra) {
		std::vector<long> hyp(k);
		for (size_t j = 0; j < k; ++j)
			hyp[j] = x[j] + extra[j];
		t.probs.push_back(posterior_r_given_x(r_total, n, x, Composition(hyp), q));
		t.support.push_back(std::move(hyp));
	});
	t.normalization_defect = std::fabs((table_sum(t) - q.one()).to_double());
	return t;
}

}	// namespace qpolya
