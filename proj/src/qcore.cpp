#include "qpolya/qcore.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace qpolya {

namespace {

bool integral(double x) {
	return std::floor(x) == x && std::fabs(x) < 9.007199254740992e15;
}

long as_long(double x) {
	return static_cast<long>(x);
}

}	// namespace

Scalar q_power(const QBase& q, long e) {
	if (q.is_exact())
		return Scalar::exact(q.rational()).pow_int(e);
	return Scalar::real_log(1, static_cast<double>(e) * q.log_value());
}

Scalar q_power_real(const QBase& q, double x) {
	if (q.is_exact()) {
		if (!integral(x))
			throw UnsupportedExactInputError(
				"q_power_real: non-integer exponent under the exact backend");
		return q_power(q, as_long(x));
	}
	return Scalar::real_log(1, x * q.log_value());
}

Scalar one_minus_q_power(const QBase& q, long e) {
	if (q.is_exact())
		return Scalar::exact(1) - q_power(q, e);
	if (e == 0)
		return Scalar::zero(Backend::log_float);
	double t = static_cast<double>(e) * q.log_value();
	// 1 - e^t: positive for t < 0, negative for t > 0
	return Scalar::real_log(t < 0 ? 1 : -1, log_abs_expm1(t));
}

Scalar one_minus_q_power_real(const QBase& q, double x) {
	if (q.is_exact()) {
		if (!integral(x))
			throw UnsupportedExactInputError(
				"one_minus_q_power_real: non-integer exponent under the exact backend");
		return one_minus_q_power(q, as_long(x));
	}
	double t = x * q.log_value();
	if (t == 0.0)
		return Scalar::zero(Backend::log_float);
	return Scalar::real_log(t < 0 ? 1 : -1, log_abs_expm1(t));
}

Scalar q_number(long x, const QBase& q) {
	return one_minus_q_power(q, x) / one_minus_q_power(q, 1);
}

Scalar q_number(double x, const QBase& q) {
	if (integral(x))
		return q_number(as_long(x), q);
	return one_minus_q_power_real(q, x) / one_minus_q_power(q, 1);
}

Scalar q_factorial_order(double x, long r, const QBase& q) {
	if (r < 0) {
		Scalar denom = q_factorial_order(x + static_cast<double>(-r), -r, q);
		if (denom.is_zero())
			throw DivisionByZeroError(
				"q_factorial_order: vanishing factor under a negative order");
		return Scalar::one(q.backend()) / denom;
	}
	Scalar prod = Scalar::one(q.backend());
	for (long i = 0; i < r; ++i)
		prod *= q_number(x - static_cast<double>(i), q);
	return prod;
}

Scalar q_factorial_order(long x, long r, const QBase& q) {
	return q_factorial_order(static_cast<double>(x), r, q);
}

Scalar q_factorial(long r, const QBase& q) {
	if (r < 0)
		throw DomainError("q_factorial: negative argument");
	return q_factorial_order(static_cast<double>(r), r, q);
}

Scalar q_binomial(double x, long r, const QBase& q) {
	if (r < 0)
		throw DomainError("q_binomial: negative lower index");
	return q_factorial_order(x, r, q) / q_factorial(r, q);
}

Scalar q_binomial(long x, long r, const QBase& q) {
	return q_binomial(static_cast<double>(x), r, q);
}

Scalar q_multinomial(double x, const Composition& parts, const QBase& q) {
	Scalar v = q_factorial_order(x, parts.total(), q);
	for (long p : parts)
		v /= q_factorial(p, q);
	return v;
}

Scalar q_multinomial(long x, const Composition& parts, const QBase& q) {
	return q_multinomial(static_cast<double>(x), parts, q);
}

Scalar q_multinomial_base_invert(long x, const Composition& parts, const QBase& q,
				 ExponentForm form) {
	long e = 0;
	size_t k = parts.size();
	for (size_t j = 1; j <= k; ++j) {
		long gap = (form == ExponentForm::tail_gaps) ? x - parts.tail(j)
							     : x - parts.prefix(j);
		e += parts[j - 1] * gap;
	}
	return q_power(q, -e) * q_multinomial(x, parts, q);
}

namespace {

struct RecurrenceEval {
	const QBase& q;
	PascalVariant variant;
	std::map<std::pair<long, std::vector<long>>, Scalar> memo;

	Scalar run(long x, std::vector<long> r) {
		long total = 0;
		for (long p : r)
			total += p;
		if (total > x)
			return q.zero();
		if (x == 0)
			return total == 0 ? q.one() : q.zero();
		auto key = std::make_pair(x, r);
		if (auto it = memo.find(key); it != memo.end())
			return it->second;

		size_t k = r.size();
		auto tail = [&](size_t j) {	// m_j, 1-based; m_{k+1} = 0
			long s = 0;
			for (size_t i = j; i <= k; ++i)
				s += r[i - 1];
			return s;
		};
		auto prefix = [&](size_t j) {	// s_j, 1-based; s_0 = 0
			long s = 0;
			for (size_t i = 1; i <= j; ++i)
				s += r[i - 1];
			return s;
		};

		Scalar carry_weight = q.one();
		switch (variant) {
		case PascalVariant::upper_tail_gap:
		case PascalVariant::upper_prefix_gap:
			break;
		case PascalVariant::prefix_shifted:
			carry_weight = q_power(q, prefix(k));
			break;
		case PascalVariant::tail_shifted:
			carry_weight = q_power(q, tail(1));
			break;
		}
		Scalar acc = carry_weight * run(x - 1, r);

		for (size_t j = 1; j <= k; ++j) {
			if (r[j - 1] == 0)
				continue;
			long e = 0;
			switch (variant) {
			case PascalVariant::upper_tail_gap:
				e = x - tail(j);
				break;
			case PascalVariant::prefix_shifted:
				e = prefix(j - 1);
				break;
			case PascalVariant::tail_shifted:
				e = tail(j + 1);
				break;
			case PascalVariant::upper_prefix_gap:
				e = x - prefix(j);
				break;
			}
			std::vector<long> dec = r;
			--dec[j - 1];
			acc += q_power(q, e) * run(x - 1, std::move(dec));
		}
		memo.emplace(std::move(key), acc);
		return acc;
	}
};

}	// namespace

Scalar q_multinomial_via_recurrence(long x, const Composition& parts, const QBase& q,
				    PascalVariant variant) {
	if (x < 0)
		throw DomainError("q_multinomial_via_recurrence: negative upper argument");
	RecurrenceEval eval{q, variant, {}};
	return eval.run(x, parts.parts());
}

Scalar q_number_scaled(long e, long b, const QBase& q) {
	if (b == 0)
		throw DomainError("q_number_scaled: zero base exponent");
	return one_minus_q_power(q, e) / one_minus_q_power(q, b);
}

Scalar q_factorial_scaled(long e, long b, long t, const QBase& q) {
	if (t < 0)
		throw DomainError("q_factorial_scaled: negative order");
	Scalar prod = Scalar::one(q.backend());
	for (long i = 0; i < t; ++i)
		prod *= q_number_scaled(e - b * i, b, q);
	return prod;
}

Scalar q_binomial_scaled(long e, long b, long t, const QBase& q) {
	return q_factorial_scaled(e, b, t, q) / q_factorial_scaled(b * t, b, t, q);
}

Scalar q_multinomial_scaled(long n, const Composition& parts, long b, const QBase& q) {
	Scalar v = q_factorial_scaled(b * n, b, parts.total(), q);
	for (long p : parts)
		v /= q_factorial_scaled(b * p, b, p, q);
	return v;
}

}	// namespace qpolya
