#include "qpolya/qbase.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace qpolya {

namespace {

bool all_digits(std::string_view s) {
	if (s.empty())
		return false;
	for (char c : s)
		if (!std::isdigit(static_cast<unsigned char>(c)))
			return false;
	return true;
}

/*
 * A decimal literal denotes an exact rational: "0.35" is 35/100 before
 * canonicalization, not the nearest double.
 */
mpq_class decimal_to_rational(std::string_view text) {
	size_t dot = text.find('.');
	std::string digits;
	size_t frac = 0;
	if (dot == std::string_view::npos) {
		if (!all_digits(text))
			throw InputError("QBase: malformed number '" + std::string(text) + "'");
		digits = std::string(text);
	} else {
		std::string_view whole = text.substr(0, dot);
		std::string_view part = text.substr(dot + 1);
		if ((whole.empty() && part.empty()) ||
		    (!whole.empty() && !all_digits(whole)) ||
		    (!part.empty() && !all_digits(part)))
			throw InputError("QBase: malformed number '" + std::string(text) + "'");
		digits = std::string(whole) + std::string(part);
		frac = part.size();
	}
	if (digits.empty())
		throw InputError("QBase: malformed number '" + std::string(text) + "'");
	mpz_class num(digits, 10);
	mpz_class den;
	mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
	mpq_class r(num, den);
	r.canonicalize();
	return r;
}

mpq_class parse_rational(std::string_view text) {
	size_t slash = text.find('/');
	if (slash == std::string_view::npos)
		return decimal_to_rational(text);
	std::string_view num = text.substr(0, slash);
	std::string_view den = text.substr(slash + 1);
	if (!all_digits(num) || !all_digits(den))
		throw InputError("QBase: malformed rational '" + std::string(text) + "'");
	mpq_class r(mpz_class(std::string(num), 10), mpz_class(std::string(den), 10));
	if (r.get_den() == 0)
		throw InputError("QBase: zero denominator in '" + std::string(text) + "'");
	r.canonicalize();
	return r;
}

}	// namespace

QBase QBase::parse(std::string_view text, Backend backend) {
	while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
		text.remove_prefix(1);
	while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
		text.remove_suffix(1);
	if (text.empty())
		throw InputError("QBase: empty value");
	if (backend == Backend::exact_rational)
		return QBase::exact(parse_rational(text));
	size_t slash = text.find('/');
	if (slash != std::string_view::npos) {
		mpq_class r = parse_rational(text);
		return QBase::real(r.get_d());
	}
	std::string buf(text);
	char* end = nullptr;
	double v = std::strtod(buf.c_str(), &end);
	if (end == nullptr || *end != '\0')
		throw InputError("QBase: malformed number '" + buf + "'");
	return QBase::real(v);
}

std::string QBase::str() const {
	if (is_exact())
		return rat_.get_str();
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", value_);
	return std::string(buf);
}

}	// namespace qpolya
