/*
 * Python face of the library.  Thin by design: lists in, floats out, exact
 * values as "num/den" strings ready for fractions.Fraction.  The base q
 * arrives as text ("0.5", "1/2") so the exact backend sees the rational the
 * caller wrote, never a rounded double.  Config mistakes surface as
 * ValueError, exact-backend misuse as TypeError, computations that gave up
 * as RuntimeError.
 */

#include "qpolya/distributions.hpp"
#include "qpolya/urnsim.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;

namespace {

using namespace qpolya;

QBase base(const std::string& qtext, bool exact) {
	return QBase::parse(qtext, exact ? Backend::exact_rational : Backend::log_float);
}

UrnSpec spec_of(const std::vector<long>& counts, long m, const std::string& qtext,
		bool exact) {
	return UrnSpec(counts, m, base(qtext, exact));
}

std::string fraction_str(const Scalar& v) {
	return v.numerator_str() + "/" + v.denominator_str();
}

py::dict table_dict(const PmfTable& t, bool exact) {
	py::list support, probs;
	for (const std::vector<long>& row : t.support)
		support.append(py::cast(row));
	for (const Scalar& p : t.probs)
		probs.append(p.to_double());
	py::dict d;
	d["support"] = support;
	d["probs"] = probs;
	d["defect"] = t.normalization_defect;
	d["truncated"] = t.truncated;
	d["tail_bound"] = t.tail_bound;
	d["proper"] = t.proper;
	if (exact) {
		py::list fractions;
		for (const Scalar& p : t.probs)
			fractions.append(fraction_str(p));
		d["fractions"] = fractions;
	}
	return d;
}

}	// namespace

PYBIND11_MODULE(_qpolya, m) {
	m.doc() = "q-deformed urn distributions: exact and floating PMFs, stopped "
		  "laws, limits, sampling";

	py::register_exception_translator([](std::exception_ptr p) {
		try {
			if (p)
				std::rethrow_exception(p);
		} catch (const UnsupportedExactInputError& e) {
			PyErr_SetString(PyExc_TypeError, e.what());
		} catch (const DomainError& e) {
			PyErr_SetString(PyExc_ValueError, e.what());
		} catch (const InputError& e) {
			PyErr_SetString(PyExc_ValueError, e.what());
		} catch (const SizeError& e) {
			PyErr_SetString(PyExc_ValueError, e.what());
		}
	});

	m.def("version", [] { return std::string("0.1.0"); });

	m.def(
		"q_number",
		[](double x, const std::string& q) {
			return q_number(x, base(q, false)).to_double();
		},
		py::arg("x"), py::arg("q"), "(1 - q^x)/(1 - q)");

	m.def(
		"q_number_exact",
		[](long x, const std::string& q) {
			return fraction_str(q_number(x, base(q, true)));
		},
		py::arg("x"), py::arg("q"));

	m.def(
		"q_binomial",
		[](double x, long r, const std::string& q) {
			return q_binomial(x, r, base(q, false)).to_double();
		},
		py::arg("x"), py::arg("r"), py::arg("q"),
		"Gaussian binomial [x over r]_q");

	m.def(
		"q_binomial_exact",
		[](long x, long r, const std::string& q) {
			return fraction_str(q_binomial(x, r, base(q, true)));
		},
		py::arg("x"), py::arg("r"), py::arg("q"));

	m.def(
		"qpolya_pmf",
		[](const std::vector<long>& counts, long m, long n,
		   const std::vector<long>& x, const std::string& q) {
			UrnSpec spec = spec_of(counts, m, q, false);
			return qpolya_pmf(PolyaParams::from_urn(spec, n), Composition(x))
				.to_double();
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("x"), py::arg("q"),
		"P(X_1..X_k = x) after n drawings from the urn (counts, m)");

	m.def(
		"qpolya_pmf_exact",
		[](const std::vector<long>& counts, long m, long n,
		   const std::vector<long>& x, const std::string& q) {
			UrnSpec spec = spec_of(counts, m, q, true);
			return fraction_str(
				qpolya_pmf(PolyaParams::from_urn(spec, n), Composition(x)));
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("x"), py::arg("q"));

	m.def(
		"qpolya_table",
		[](const std::vector<long>& counts, long m, long n, const std::string& q,
		   bool exact) {
			UrnSpec spec = spec_of(counts, m, q, exact);
			return table_dict(qpolya_table(PolyaParams::from_urn(spec, n)),
					  exact);
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("q"),
		py::arg("exact") = false,
		"full n-draw law over sum x_j <= n as a dict");

	m.def(
		"inverse_qpolya_pmf",
		[](const std::vector<long>& counts, long m, long n,
		   const std::vector<long>& w, const std::string& q) {
			UrnSpec spec = spec_of(counts, m, q, false);
			return inverse_qpolya_pmf(PolyaParams::from_urn(spec, n),
						  Composition(w))
				.to_double();
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("w"), py::arg("q"),
		"P(W = w) where W counts other-color draws before the n-th draw "
		"of the last color");

	m.def(
		"inverse_qpolya_pmf_exact",
		[](const std::vector<long>& counts, long m, long n,
		   const std::vector<long>& w, const std::string& q) {
			UrnSpec spec = spec_of(counts, m, q, true);
			return fraction_str(inverse_qpolya_pmf(
				PolyaParams::from_urn(spec, n), Composition(w)));
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("w"), py::arg("q"));

	m.def(
		"inverse_qpolya_table",
		[](const std::vector<long>& counts, long m, long n, long w_max,
		   const std::string& q, bool exact) {
			UrnSpec spec = spec_of(counts, m, q, exact);
			return table_dict(
				inverse_qpolya_table(PolyaParams::from_urn(spec, n), w_max),
				exact);
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("w_max"),
		py::arg("q"), py::arg("exact") = false,
		"stopped law truncated to the box w_j <= w_max; the dict records "
		"the tail bound and whether the full law is proper");

	m.def(
		"posterior_table",
		[](long r_total, long n, const std::vector<long>& x, const std::string& q,
		   bool exact) {
			return table_dict(posterior_table(r_total, n, Composition(x),
							  base(q, exact)),
					  exact);
		},
		py::arg("r_total"), py::arg("n"), py::arg("x"), py::arg("q"),
		py::arg("exact") = false,
		"posterior over color counts after a removal sample showed x");

	m.def(
		"sample_qpolya",
		[](const std::vector<long>& counts, long m, long n, const std::string& q,
		   long size, std::uint64_t seed) {
			UrnSpec spec = spec_of(counts, m, q, false);
			RandomStream rng(seed);
			std::vector<std::vector<long>> out;
			out.reserve(static_cast<size_t>(size));
			for (long i = 0; i < size; ++i)
				out.push_back(sample_qpolya(spec, n, rng));
			return out;
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("q"),
		py::arg("size"), py::arg("seed"),
		"simulate the n-draw process; deterministic in the seed");

	m.def(
		"sample_inverse_qpolya",
		[](const std::vector<long>& counts, long m, long n, const std::string& q,
		   long size, std::uint64_t seed, long draw_cap) {
			UrnSpec spec = spec_of(counts, m, q, false);
			RandomStream rng(seed);
			std::vector<std::vector<long>> out;
			out.reserve(static_cast<size_t>(size));
			for (long i = 0; i < size; ++i)
				out.push_back(sample_inverse_qpolya(spec, n, rng, draw_cap));
			return out;
		},
		py::arg("counts"), py::arg("m"), py::arg("n"), py::arg("q"),
		py::arg("size"), py::arg("seed"), py::arg("draw_cap") = default_draw_cap,
		"simulate runs until the n-th last-color draw; a run past "
		"draw_cap raises RuntimeError (defective regimes do escape)");
}
