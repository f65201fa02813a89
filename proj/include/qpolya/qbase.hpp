#pragma once

#include "qpolya/scalar.hpp"

#include <string>
#include <string_view>

namespace qpolya {

enum class Regime { sub_unit, super_unit };

/*
 * The deformation base q > 0, q != 1, tagged with the numeric backend every
 * computation built on it must use.  Under ExactRational q is a bona fide
 * rational and all q-arithmetic with integer arguments stays exact; under
 * LogFloat only the double value and log q are kept.
 */
class QBase {
public:
	static QBase exact(long num, long den = 1) { return exact(mpq_class(num, den)); }
	static QBase exact(mpq_class q) {
		q.canonicalize();
		// pull the double out before the move below can hollow q
		double v = q.get_d();
		validate(v);
		double lg = Scalar::exact(q).log_abs();
		return QBase(Backend::exact_rational, v, lg, std::move(q));
	}
	static QBase real(double q) {
		validate(q);
		return QBase(Backend::log_float, q, std::log(q), mpq_class());
	}

	/*
	 * Parse "a/b" (integers) or a decimal literal.  For the exact backend a
	 * decimal string becomes the rational it denotes ("0.3" -> 3/10), never
	 * the nearest double.
	 */
	static QBase parse(std::string_view text, Backend backend);

	Backend backend() const { return backend_; }
	bool is_exact() const { return backend_ == Backend::exact_rational; }
	Regime regime() const { return value_ < 1.0 ? Regime::sub_unit : Regime::super_unit; }

	double value() const { return value_; }
	double log_value() const { return log_value_; }
	const mpq_class& rational() const {
		if (!is_exact())
			throw UnsupportedExactInputError("QBase: rational() on a LogFloat base");
		return rat_;
	}

	QBase inverted() const {
		if (is_exact())
			return exact(mpq_class(rat_.get_den(), rat_.get_num()));
		return real(1.0 / value_);
	}

	// q^e as a base in its own right (e != 0); exact stays exact
	QBase power(long e) const {
		if (e == 0)
			throw DomainError("QBase: q^0 is not a usable base");
		if (is_exact()) {
			unsigned long a = static_cast<unsigned long>(e < 0 ? -e : e);
			mpz_class num, den;
			mpz_pow_ui(num.get_mpz_t(), rat_.get_num().get_mpz_t(), a);
			mpz_pow_ui(den.get_mpz_t(), rat_.get_den().get_mpz_t(), a);
			return exact(e < 0 ? mpq_class(den, num) : mpq_class(num, den));
		}
		double lg = log_value_ * static_cast<double>(e);
		return QBase(Backend::log_float, std::exp(lg), lg, mpq_class());
	}

	Scalar scalar() const {
		return is_exact() ? Scalar::exact(rat_) : Scalar::real(value_);
	}
	Scalar zero() const { return Scalar::zero(backend_); }
	Scalar one() const { return Scalar::one(backend_); }
	Scalar from_long(long v) const {
		return is_exact() ? Scalar::exact(v) : Scalar::real(static_cast<double>(v));
	}

	// printable form: the exact rational, or the double with full precision
	std::string str() const;

private:
	QBase(Backend b, double v, double lg, mpq_class r)
		: backend_(b), value_(v), log_value_(lg), rat_(std::move(r)) {}

	static void validate(double q) {
		if (!(q > 0.0) || q == 1.0)
			throw DomainError("QBase: q must be positive and distinct from 1");
	}

	Backend backend_;
	double value_;
	double log_value_;
	mpq_class rat_;
};

}	// namespace qpolya
