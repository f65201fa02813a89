#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qpolya {

/*
 * Error taxonomy.  Everything thrown by this library derives from Error so
 * callers can catch the whole family; the concrete type says what went wrong,
 * the message says where.
 */
struct Error : std::runtime_error {
	using std::runtime_error::runtime_error;
};

// parameter or argument outside the mathematical domain of an operation
struct DomainError : Error {
	using Error::Error;
};

// operation requires the exact backend but the input is not representable
// exactly (e.g. a non-integer order where termination is needed)
struct UnsupportedExactInputError : Error {
	using Error::Error;
};

// exact division by a zero q-quantity (distinct from DomainError: the inputs
// were admissible but a denominator factor vanished)
struct DivisionByZeroError : Error {
	using Error::Error;
};

// an urn step would drive a colour count below zero
struct InfeasibleStateError : Error {
	using Error::Error;
};

// a truncated series could not reach the requested tail tolerance;
// `achieved` carries the bound that was reached
struct TruncationError : Error {
	double achieved;
	TruncationError(const std::string& what, double achieved_bound)
		: Error(what), achieved(achieved_bound) {}
};

// a sequential sampler exceeded its draw cap
struct NonterminationError : Error {
	long draws;
	NonterminationError(const std::string& what, long draw_count)
		: Error(what), draws(draw_count) {}
};

// an enumeration would exceed a caller-supplied size cap
struct SizeError : Error {
	using Error::Error;
};

// malformed user input (CLI strings, config values)
struct InputError : Error {
	using Error::Error;
};

/*
 * log|e^t - 1|, accurate for |t| near 0 and for large |t|.
 * t = 0 maps to -inf (the value is exactly 0).
 */
inline double log_abs_expm1(double t) {
	if (t == 0.0)
		return -std::numeric_limits<double>::infinity();
	if (t > 0.0)
		return t + std::log(-std::expm1(-t));	// e^t-1 = e^t(1-e^{-t})
	return std::log(-std::expm1(t));
}

/*
 * Signed log-domain float: value = sign * e^{lg}.  sign in {-1,0,+1}; when
 * sign == 0 the magnitude is ignored (kept at -inf).  Multiplication adds
 * logs; addition goes through the stable log1p forms so that magnitudes of
 * order e^{±10^5} survive where a plain double would overflow.
 */
class LogReal {
public:
	LogReal() : sign_(0), lg_(-std::numeric_limits<double>::infinity()) {}

	static LogReal from_double(double v) {
		if (v == 0.0)
			return LogReal();
		return LogReal(v > 0 ? 1 : -1, std::log(std::fabs(v)));
	}
	static LogReal from_log(int sign, double lg) {
		if (sign == 0 || lg == -std::numeric_limits<double>::infinity())
			return LogReal();
		return LogReal(sign, lg);
	}

	int sign() const { return sign_; }
	bool is_zero() const { return sign_ == 0; }
	// log of |value|; -inf when zero
	double log_abs() const { return lg_; }
	double to_double() const { return sign_ == 0 ? 0.0 : sign_ * std::exp(lg_); }

	LogReal operator-() const { return LogReal(-sign_, lg_); }

	friend LogReal operator*(const LogReal& a, const LogReal& b) {
		if (a.sign_ == 0 || b.sign_ == 0)
			return LogReal();
		return LogReal(a.sign_ * b.sign_, a.lg_ + b.lg_);
	}
	friend LogReal operator/(const LogReal& a, const LogReal& b) {
		if (b.sign_ == 0)
			throw DivisionByZeroError("LogReal: division by zero");
		if (a.sign_ == 0)
			return LogReal();
		return LogReal(a.sign_ * b.sign_, a.lg_ - b.lg_);
	}
	friend LogReal operator+(const LogReal& a, const LogReal& b) {
		if (a.sign_ == 0)
			return b;
		if (b.sign_ == 0)
			return a;
		const LogReal& hi = (a.lg_ >= b.lg_) ? a : b;
		const LogReal& lo = (a.lg_ >= b.lg_) ? b : a;
		double d = lo.lg_ - hi.lg_;	// <= 0
		if (hi.sign_ == lo.sign_)
			return LogReal(hi.sign_, hi.lg_ + std::log1p(std::exp(d)));
		if (d == 0.0)
			return LogReal();	// exact cancellation
		return LogReal(hi.sign_, hi.lg_ + std::log1p(-std::exp(d)));
	}
	friend LogReal operator-(const LogReal& a, const LogReal& b) { return a + (-b); }

	// integer power; negative exponents invert (zero base rejected)
	LogReal pow_int(long e) const {
		if (sign_ == 0) {
			if (e < 0)
				throw DivisionByZeroError("LogReal: 0 to a negative power");
			return e == 0 ? from_log(1, 0.0) : LogReal();
		}
		int s = (sign_ < 0 && (e & 1L)) ? -1 : 1;
		return LogReal(s, lg_ * static_cast<double>(e));
	}

	// real power; base must be positive (or zero with e > 0)
	LogReal pow_real(double e) const {
		if (sign_ == 0) {
			if (e > 0)
				return LogReal();
			throw DomainError("LogReal: 0 to a non-positive real power");
		}
		if (sign_ < 0)
			throw DomainError("LogReal: negative base with real exponent");
		return LogReal(1, lg_ * e);
	}

	friend bool operator==(const LogReal& a, const LogReal& b) {
		return a.sign_ == b.sign_ && (a.sign_ == 0 || a.lg_ == b.lg_);
	}
	friend bool operator<(const LogReal& a, const LogReal& b) {
		if (a.sign_ != b.sign_)
			return a.sign_ < b.sign_;
		if (a.sign_ == 0)
			return false;
		return a.sign_ > 0 ? a.lg_ < b.lg_ : b.lg_ < a.lg_;
	}
	friend bool operator<=(const LogReal& a, const LogReal& b) { return a < b || a == b; }

private:
	LogReal(int sign, double lg) : sign_(sign), lg_(lg) {}

	int sign_;
	double lg_;
};

inline LogReal abs(const LogReal& v) {
	return v.sign() >= 0 ? v : -v;
}

enum class Backend { exact_rational, log_float };

/*
 * Dual-backend scalar.  ExactRational carries a GMP rational in lowest terms
 * with positive denominator (mpq_class canonical form); LogFloat carries a
 * signed log-domain double.  Mixed-backend arithmetic demotes the exact side
 * to LogFloat; pure-exact arithmetic never leaves the rationals.
 */
class Scalar {
public:
	Scalar() : v_(LogReal()) {}

	static Scalar zero(Backend b) {
		return b == Backend::exact_rational ? exact(0) : Scalar(LogReal());
	}
	static Scalar one(Backend b) {
		return b == Backend::exact_rational ? exact(1) : real(1.0);
	}
	static Scalar exact(long v) { return Scalar(mpq_class(v)); }
	static Scalar exact(mpq_class v) {
		v.canonicalize();
		return Scalar(std::move(v));
	}
	static Scalar real(double v) { return Scalar(LogReal::from_double(v)); }
	static Scalar real_log(int sign, double lg) { return Scalar(LogReal::from_log(sign, lg)); }

	Backend backend() const {
		return std::holds_alternative<mpq_class>(v_) ? Backend::exact_rational
							     : Backend::log_float;
	}
	bool is_exact() const { return std::holds_alternative<mpq_class>(v_); }

	const mpq_class& rational() const {
		if (!is_exact())
			throw UnsupportedExactInputError("Scalar: rational() on a LogFloat value");
		return std::get<mpq_class>(v_);
	}
	const LogReal& logreal() const {
		if (is_exact())
			throw DomainError("Scalar: logreal() on an ExactRational value");
		return std::get<LogReal>(v_);
	}

	int sign() const {
		if (is_exact())
			return sgn(std::get<mpq_class>(v_));
		return std::get<LogReal>(v_).sign();
	}
	bool is_zero() const { return sign() == 0; }

	double to_double() const {
		if (is_exact())
			return std::get<mpq_class>(v_).get_d();
		return std::get<LogReal>(v_).to_double();
	}
	// log|value| as a double; exact values large beyond double range are
	// measured through GMP's 2^exp decomposition so nothing overflows
	double log_abs() const {
		if (!is_exact())
			return std::get<LogReal>(v_).log_abs();
		const mpq_class& r = std::get<mpq_class>(v_);
		if (r == 0)
			return -std::numeric_limits<double>::infinity();
		long en = 0, ed = 0;
		double mn = mpz_get_d_2exp(&en, r.get_num().get_mpz_t());
		double md = mpz_get_d_2exp(&ed, r.get_den().get_mpz_t());
		return std::log(std::fabs(mn / md)) +
		       static_cast<double>(en - ed) * std::log(2.0);
	}
	LogReal to_logreal() const {
		if (!is_exact())
			return std::get<LogReal>(v_);
		return LogReal::from_log(sign(), log_abs());
	}

	Scalar operator-() const {
		if (is_exact())
			return Scalar(mpq_class(-std::get<mpq_class>(v_)));
		return Scalar(-std::get<LogReal>(v_));
	}

	friend Scalar operator+(const Scalar& a, const Scalar& b) {
		if (a.is_exact() && b.is_exact())
			return Scalar(mpq_class(a.rational() + b.rational()));
		return Scalar(a.to_logreal() + b.to_logreal());
	}
	friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
	friend Scalar operator*(const Scalar& a, const Scalar& b) {
		if (a.is_exact() && b.is_exact())
			return Scalar(mpq_class(a.rational() * b.rational()));
		return Scalar(a.to_logreal() * b.to_logreal());
	}
	friend Scalar operator/(const Scalar& a, const Scalar& b) {
		if (b.is_zero())
			throw DivisionByZeroError("Scalar: division by zero");
		if (a.is_exact() && b.is_exact())
			return Scalar(mpq_class(a.rational() / b.rational()));
		return Scalar(a.to_logreal() / b.to_logreal());
	}

	Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
	Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
	Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
	Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

	// integer power; 0^0 = 1, 0^negative rejected
	Scalar pow_int(long e) const {
		if (is_exact()) {
			const mpq_class& b = std::get<mpq_class>(v_);
			if (e == 0)
				return exact(1);
			if (b == 0) {
				if (e < 0)
					throw DivisionByZeroError("Scalar: 0 to a negative power");
				return exact(0);
			}
			unsigned long a = static_cast<unsigned long>(e < 0 ? -e : e);
			mpz_class num, den;
			mpz_pow_ui(num.get_mpz_t(), b.get_num().get_mpz_t(), a);
			mpz_pow_ui(den.get_mpz_t(), b.get_den().get_mpz_t(), a);
			mpq_class r = (e > 0) ? mpq_class(num, den) : mpq_class(den, num);
			r.canonicalize();
			return Scalar(std::move(r));
		}
		return Scalar(std::get<LogReal>(v_).pow_int(e));
	}

	friend bool operator==(const Scalar& a, const Scalar& b) {
		if (a.is_exact() && b.is_exact())
			return a.rational() == b.rational();
		return a.to_logreal() == b.to_logreal();
	}
	friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }
	friend bool operator<(const Scalar& a, const Scalar& b) {
		if (a.is_exact() && b.is_exact())
			return a.rational() < b.rational();
		return a.to_logreal() < b.to_logreal();
	}
	friend bool operator<=(const Scalar& a, const Scalar& b) { return a < b || a == b; }
	friend bool operator>(const Scalar& a, const Scalar& b) { return b < a; }
	friend bool operator>=(const Scalar& a, const Scalar& b) { return b <= a; }

	std::string numerator_str() const { return rational().get_num().get_str(); }
	std::string denominator_str() const { return rational().get_den().get_str(); }

private:
	explicit Scalar(mpq_class v) : v_(std::move(v)) {}
	explicit Scalar(LogReal v) : v_(v) {}

	std::variant<mpq_class, LogReal> v_;
};

inline Scalar abs(const Scalar& v) {
	return v.sign() >= 0 ? v : -v;
}

/*
 * Pairwise (tree) summation: deterministic grouping, error growth
 * O(log n · eps) instead of O(n · eps) for left folds.  Exact inputs sum
 * exactly.  Empty input sums to the LogFloat zero.
 */
inline Scalar sum_pairwise(std::vector<Scalar> terms) {
	if (terms.empty())
		return Scalar::zero(Backend::log_float);
	while (terms.size() > 1) {
		std::vector<Scalar> next;
		next.reserve((terms.size() + 1) / 2);
		for (size_t i = 0; i + 1 < terms.size(); i += 2)
			next.push_back(terms[i] + terms[i + 1]);
		if (terms.size() & 1)
			next.push_back(terms.back());
		terms = std::move(next);
	}
	return terms[0];
}

// |a-b| / max(|a|,|b|,1e-300), computed in the log domain so that huge and
// tiny magnitudes compare sanely; exact pairs compare exactly (0 when equal)
inline double relative_gap(const Scalar& a, const Scalar& b) {
	if (a.is_exact() && b.is_exact()) {
		if (a == b)
			return 0.0;
		Scalar d = abs(a - b);
		Scalar m = std::max(abs(a), abs(b));
		if (m.is_zero())
			return d.to_double();
		return (d / m).to_double();
	}
	LogReal d = abs(a.to_logreal() - b.to_logreal());
	if (d.is_zero())
		return 0.0;
	double m = std::max(a.log_abs(), b.log_abs());
	if (m == -std::numeric_limits<double>::infinity())
		return std::exp(d.log_abs());
	return std::exp(d.log_abs() - m);
}

}	// namespace qpolya
