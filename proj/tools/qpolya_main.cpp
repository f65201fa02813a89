/*
 * Command-line front end: PMF tables, seeded sampling runs with fit reports,
 * identity suites, doubling-sweep convergence checks, and the posterior demo.
 * Artifacts go to stdout as CSV or JSON with identical numeric payloads.
 *
 * Exit codes: 0 success, 1 a requested check failed its tolerance, 2 the
 * configuration was unusable, 3 the computation itself gave up.
 */

#include "qpolya/distributions.hpp"
#include "qpolya/qidentities.hpp"
#include "qpolya/urnsim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace qpolya;

constexpr const char* cli_version = "0.1.0";

/*
 * Pre-rendered output cell.  Reals are formatted exactly once (%.16e, 17
 * significant digits) so the CSV and JSON encodings of a run carry byte
 * identical numeric payloads; `quoted` marks values JSON must wrap as strings
 * (names, arbitrary-precision integers).
 */
struct Cell {
	std::string text;
	bool quoted = false;
};

struct Artifact {
	std::vector<std::pair<std::string, Cell>> meta;
	std::vector<std::string> columns;
	std::vector<std::vector<Cell>> rows;
};

std::string fmt_real(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.16e", v);
	return std::string(buf);
}

// non-finite values have no JSON number form; they travel as strings
Cell cell(double v) { return {fmt_real(v), !std::isfinite(v)}; }
Cell cell(long v) { return {std::to_string(v), false}; }
Cell cell(bool v) { return {v ? "true" : "false", false}; }
Cell cell(std::string s) { return {std::move(s), true}; }

std::string join_longs(const std::vector<long>& v) {
	std::string out;
	for (size_t i = 0; i < v.size(); ++i) {
		if (i)
			out += ',';
		out += std::to_string(v[i]);
	}
	return out;
}

void emit_csv(const Artifact& a) {
	std::printf("# qpolya %s\n", cli_version);
	for (const auto& [key, value] : a.meta)
		std::printf("# %s=%s\n", key.c_str(), value.text.c_str());
	for (size_t i = 0; i < a.columns.size(); ++i)
		std::printf("%s%s", i ? "," : "", a.columns[i].c_str());
	std::printf("\n");
	for (const auto& row : a.rows) {
		for (size_t i = 0; i < row.size(); ++i)
			std::printf("%s%s", i ? "," : "", row[i].text.c_str());
		std::printf("\n");
	}
}

void emit_json(const Artifact& a) {
	// cell texts never contain characters needing JSON escapes
	std::printf("{\n  \"meta\": {\"version\": \"%s\"", cli_version);
	for (const auto& [key, value] : a.meta) {
		if (value.quoted)
			std::printf(", \"%s\": \"%s\"", key.c_str(), value.text.c_str());
		else
			std::printf(", \"%s\": %s", key.c_str(), value.text.c_str());
	}
	std::printf("},\n  \"columns\": [");
	for (size_t i = 0; i < a.columns.size(); ++i)
		std::printf("%s\"%s\"", i ? ", " : "", a.columns[i].c_str());
	std::printf("],\n  \"rows\": [");
	for (size_t r = 0; r < a.rows.size(); ++r) {
		std::printf("%s\n    [", r ? "," : "");
		for (size_t i = 0; i < a.rows[r].size(); ++i) {
			const Cell& c = a.rows[r][i];
			if (c.quoted)
				std::printf("%s\"%s\"", i ? ", " : "", c.text.c_str());
			else
				std::printf("%s%s", i ? ", " : "", c.text.c_str());
		}
		std::printf("]");
	}
	std::printf("%s]\n}\n", a.rows.empty() ? "" : "\n  ");
}

void emit(const Artifact& a, const std::string& format) {
	if (format == "json")
		emit_json(a);
	else
		emit_csv(a);
}

/*
 * One bag of option values shared by every subcommand; each subcommand only
 * registers the flags it consumes.
 */
struct Opts {
	std::string dist;
	std::string qtext;
	std::string format = "csv";
	std::vector<long> r;
	std::vector<long> x;
	std::vector<std::string> theta;
	std::vector<std::string> lambda;
	long n = 0;
	long m = 0;
	bool m_given = false;
	long k = 0;
	bool k_given = false;
	long nu = 0;
	bool nu_given = false;
	long wmax = 8;
	long tmax = 6;
	long samples = 10000;
	long draw_cap = default_draw_cap;
	std::uint64_t seed = 0;
	long threads = 1;
	double tolerance = 1e-10;
	bool exact = false;

	Backend backend() const {
		return exact ? Backend::exact_rational : Backend::log_float;
	}
	QBase q() const { return QBase::parse(qtext, backend()); }
};

Scalar parse_rate(const std::string& text, Backend backend) {
	try {
		return QBase::parse(text, backend).scalar();
	} catch (const DomainError&) {
		throw InputError("rate '" + text + "' must be positive and distinct from 1");
	}
}

/*
 * --k is redundant (the count lists carry the dimension) but accepted; a
 * mismatch is a config error, not something to silently reconcile.
 */
void check_k(const Opts& o, size_t k) {
	if (o.k_given && o.k != static_cast<long>(k))
		throw InputError("--k disagrees with the parameter lists (k = " +
				 std::to_string(k) + ")");
}

LimitParams limit_params(const Opts& o, const QBase& q) {
	if (o.theta.empty() == o.lambda.empty())
		throw InputError("limit laws take exactly one of --theta or --lambda");
	bool theta = !o.theta.empty();
	std::vector<Scalar> rates;
	for (const std::string& t : theta ? o.theta : o.lambda)
		rates.push_back(parse_rate(t, o.backend()));
	std::optional<long> nu;
	if (o.nu_given)
		nu = o.nu;
	return LimitParams{theta ? LimitParams::Kind::theta_sub_unit
			       : LimitParams::Kind::lambda_super_unit,
			   std::move(rates), q, o.m, nu};
}

std::string rates_text(const Opts& o) {
	std::string out;
	for (const std::string& t : o.theta.empty() ? o.lambda : o.theta) {
		if (!out.empty())
			out += ',';
		out += t;
	}
	return out;
}

// full table of a closed-form specialization over sum x_j <= n
PmfTable specialization_table(const UrnSpec& spec, long n, bool negative) {
	size_t k = spec.colors() - 1;
	bounded_composition_count(k, n, default_table_cap);
	PmfTable t;
	for_each_bounded_composition(k, n, [&](const std::vector<long>& xs) {
		Composition x(xs);
		t.probs.push_back(negative ? negative_qhypergeometric_pmf(spec, n, x)
					   : qhypergeometric_pmf(spec, n, x));
		t.support.push_back(xs);
	});
	Scalar sum = spec.q.zero();
	for (const Scalar& p : t.probs)
		sum = sum + p;
	t.normalization_defect = std::fabs((sum - spec.q.one()).to_double());
	return t;
}

void require_implied_m(const Opts& o, long implied) {
	if (o.m_given && o.m != implied)
		throw InputError("--dist " + o.dist + " fixes m = " +
				 std::to_string(implied) + "; drop --m or match it");
}

/*
 * Builds the exact reference table for a distribution choice.  Urn-backed
 * choices also hand back the urn so the sampler can run the same process.
 */
PmfTable reference_table(const Opts& o, const QBase& q, std::optional<UrnSpec>& urn,
			 bool& inverse, std::string& prefix) {
	inverse = false;
	prefix = "x";
	if (o.dist == "qmult2" || o.dist == "neg-qmult2")
		check_k(o, std::max(o.theta.size(), o.lambda.size()));
	else
		check_k(o, o.r.empty() ? 0 : o.r.size() - 1);
	if (o.dist == "qpolya") {
		UrnSpec spec(o.r, o.m, q);
		urn = spec;
		if (o.m == 0)
			return multinomial_reduction_table(spec, o.n);
		return qpolya_table(PolyaParams::from_urn(spec, o.n));
	}
	if (o.dist == "inverse-qpolya") {
		UrnSpec spec(o.r, o.m, q);
		urn = spec;
		inverse = true;
		prefix = "w";
		return inverse_qpolya_table(PolyaParams::from_urn(spec, o.n), o.wmax);
	}
	if (o.dist == "qhyper") {
		require_implied_m(o, -1);
		UrnSpec spec(o.r, -1, q);
		urn = spec;
		return specialization_table(spec, o.n, false);
	}
	if (o.dist == "neg-qhyper") {
		require_implied_m(o, 1);
		UrnSpec spec(o.r, 1, q);
		urn = spec;
		return specialization_table(spec, o.n, true);
	}
	if (o.dist == "qmult2")
		return q_multinomial_2nd_table(limit_params(o, q), o.n);
	if (o.dist == "neg-qmult2") {
		prefix = "w";
		return negative_q_multinomial_2nd_table(limit_params(o, q), o.n, o.wmax);
	}
	throw InputError("unknown distribution '" + o.dist + "'");
}

void push_common_meta(Artifact& a, const Opts& o, const QBase& q) {
	a.meta.emplace_back("dist", cell(o.dist));
	a.meta.emplace_back("backend", cell(std::string(
					    o.exact ? "exact-rational" : "log-float")));
	a.meta.emplace_back("q", cell(q.str()));
	a.meta.emplace_back("n", cell(o.n));
	if (!o.r.empty()) {
		a.meta.emplace_back("r", cell(join_longs(o.r)));
		a.meta.emplace_back("m", cell(o.m));
	} else {
		a.meta.emplace_back("rates", cell(rates_text(o)));
		a.meta.emplace_back("m", cell(o.m));
		if (o.nu_given)
			a.meta.emplace_back("nu", cell(o.nu));
	}
}

void push_table_rows(Artifact& a, const PmfTable& t, const std::string& prefix,
		     bool exact) {
	size_t k = t.support.empty() ? 0 : t.support.front().size();
	for (size_t j = 1; j <= k; ++j)
		a.columns.push_back(prefix + std::to_string(j));
	a.columns.push_back("prob");
	if (exact) {
		a.columns.push_back("num");
		a.columns.push_back("den");
	}
	for (size_t i = 0; i < t.support.size(); ++i) {
		std::vector<Cell> row;
		for (long v : t.support[i])
			row.push_back(cell(v));
		row.push_back(cell(t.probs[i].to_double()));
		if (exact) {
			row.push_back(cell(t.probs[i].numerator_str()));
			row.push_back(cell(t.probs[i].denominator_str()));
		}
		a.rows.push_back(std::move(row));
	}
}

int run_pmf(const Opts& o) {
	QBase q = o.q();
	std::optional<UrnSpec> urn;
	bool inverse = false;
	std::string prefix;
	PmfTable t = reference_table(o, q, urn, inverse, prefix);
	Artifact a;
	a.meta.emplace_back("command", cell(std::string("pmf")));
	push_common_meta(a, o, q);
	if (inverse || o.dist == "neg-qmult2")
		a.meta.emplace_back("wmax", cell(o.wmax));
	a.meta.emplace_back("defect", cell(t.normalization_defect));
	a.meta.emplace_back("proper", cell(t.proper));
	a.meta.emplace_back("truncated", cell(t.truncated));
	if (t.truncated)
		a.meta.emplace_back("tail_bound", cell(t.tail_bound));
	push_table_rows(a, t, prefix, o.exact);
	emit(a, o.format);
	return 0;
}

/*
 * Sampling runs on 64 fixed logical streams; stream i owns the samples whose
 * index is congruent to i and worker threads pick up whole streams, so the
 * tallies (and every downstream statistic) are invariant in --threads.
 */
constexpr int logical_streams = 64;

struct StreamResult {
	std::vector<std::vector<long>> outcomes;
	long escaped = 0;
	std::exception_ptr error;
};

int run_sample(const Opts& o) {
	if (o.dist == "qmult2" || o.dist == "neg-qmult2")
		throw InputError("sampling follows the urn process; limit laws have no urn");
	if (o.samples < 1)
		throw InputError("--samples must be at least 1");
	if (o.threads < 1 || o.threads > logical_streams)
		throw InputError("--threads must lie in 1.." +
				 std::to_string(logical_streams));
	QBase q = o.q();
	std::optional<UrnSpec> urn;
	bool inverse = false;
	std::string prefix;
	PmfTable t = reference_table(o, q, urn, inverse, prefix);

	std::vector<StreamResult> streams(logical_streams);
	size_t k = urn->colors() - 1;
	auto run_stream = [&](int i) {
		StreamResult& res = streams[i];
		long count = o.samples / logical_streams +
			     (i < o.samples % logical_streams ? 1 : 0);
		RandomStream rng(o.seed, static_cast<std::uint64_t>(i));
		try {
			res.outcomes.reserve(count);
			for (long s = 0; s < count; ++s) {
				if (!inverse) {
					res.outcomes.push_back(sample_qpolya(*urn, o.n, rng));
					continue;
				}
				try {
					res.outcomes.push_back(sample_inverse_qpolya(
						*urn, o.n, rng, o.draw_cap));
				} catch (const NonterminationError&) {
					// a run past the cap counts as escaped mass
					res.outcomes.emplace_back(k, -1);
					res.escaped += 1;
				}
			}
		} catch (...) {
			res.error = std::current_exception();
		}
	};
	std::vector<std::thread> workers;
	for (long w = 0; w < o.threads; ++w)
		workers.emplace_back([&, w] {
			for (int i = static_cast<int>(w); i < logical_streams;
			     i += static_cast<int>(o.threads))
				run_stream(i);
		});
	for (std::thread& w : workers)
		w.join();
	for (const StreamResult& res : streams)
		if (res.error)
			std::rethrow_exception(res.error);

	std::vector<std::vector<long>> all;
	all.reserve(o.samples);
	long escaped = 0;
	for (StreamResult& res : streams) {
		escaped += res.escaped;
		for (auto& outcome : res.outcomes)
			all.push_back(std::move(outcome));
	}
	GofReport rep = goodness_of_fit(all, t);

	std::map<std::vector<long>, long> tally;
	for (const auto& outcome : all)
		tally[outcome] += 1;
	long matched = 0;

	Artifact a;
	a.meta.emplace_back("command", cell(std::string("sample")));
	push_common_meta(a, o, q);
	if (inverse) {
		a.meta.emplace_back("wmax", cell(o.wmax));
		a.meta.emplace_back("draw_cap", cell(o.draw_cap));
	}
	a.meta.emplace_back("samples", cell(o.samples));
	a.meta.emplace_back("seed", cell(static_cast<long>(o.seed)));
	a.meta.emplace_back("threads", cell(o.threads));
	a.meta.emplace_back("defect", cell(t.normalization_defect));

	size_t width = t.support.empty() ? k : t.support.front().size();
	for (size_t j = 1; j <= width; ++j)
		a.columns.push_back(prefix + std::to_string(j));
	a.columns.push_back("count");
	a.columns.push_back("freq");
	a.columns.push_back("prob");
	for (size_t i = 0; i < t.support.size(); ++i) {
		std::vector<Cell> row;
		for (long v : t.support[i])
			row.push_back(cell(v));
		auto it = tally.find(t.support[i]);
		long count = it == tally.end() ? 0 : it->second;
		matched += count;
		row.push_back(cell(count));
		row.push_back(cell(static_cast<double>(count) /
				   static_cast<double>(o.samples)));
		row.push_back(cell(t.probs[i].to_double()));
		a.rows.push_back(std::move(row));
	}
	if (inverse) {
		a.meta.emplace_back("escaped", cell(escaped));
		a.meta.emplace_back("outside_window", cell(o.samples - matched - escaped));
	}
	a.meta.emplace_back("tv_distance", cell(rep.tv_distance));
	a.meta.emplace_back("chi_square_stat", cell(rep.chi_square_stat));
	a.meta.emplace_back("degrees_of_freedom", cell(rep.degrees_of_freedom));
	a.meta.emplace_back("p_value", cell(rep.p_value));
	a.meta.emplace_back("merged_cells", cell(rep.merged_cells));
	emit(a, o.format);
	return 0;
}

/*
 * Identity suite over a deterministic grid: the factorial and binomial
 * convolutions in all four weight layouts, the bounded convolution in both,
 * and the reciprocal expansion in the form its regime admits.  Exact runs
 * must land exact equality; float runs must stay inside --tolerance.
 */
struct ConvInstance {
	long n;
	std::vector<double> xs;
};

int run_identity_check(const Opts& o) {
	Backend backend = o.backend();
	std::vector<QBase> qs;
	if (!o.qtext.empty())
		qs.push_back(o.q());
	else
		for (const char* text : {"0.3", "0.7", "1.5", "3"})
			qs.push_back(QBase::parse(text, backend));

	std::vector<ConvInstance> integral = {
		{2, {2, 3}}, {3, {3, 2}}, {2, {1, 2, 2}}, {3, {2, 1, 3}}};
	std::vector<ConvInstance> fractional = {
		{2, {1.5, 2.75}}, {2, {0.5, 1.25, 2.0}}};

	Artifact a;
	a.meta.emplace_back("command", cell(std::string("identity-check")));
	a.meta.emplace_back("backend", cell(std::string(
					    o.exact ? "exact-rational" : "log-float")));
	a.meta.emplace_back("tolerance", cell(o.tolerance));
	a.columns = {"identity", "form", "instances", "max_rel_gap", "pass"};

	bool all_pass = true;
	auto push_row = [&](const char* identity, const char* form, long instances,
			    double gap) {
		bool pass = o.exact ? gap == 0.0 : gap <= o.tolerance;
		all_pass = all_pass && pass;
		a.rows.push_back({cell(std::string(identity)), cell(std::string(form)),
				  cell(instances), cell(gap), cell(pass)});
	};

	struct NamedForm {
		ConvolutionForm form;
		const char* name;
	};
	std::vector<NamedForm> conv_forms = {
		{ConvolutionForm::falling_complement, "falling-complement"},
		{ConvolutionForm::rising_tail, "rising-tail"},
		{ConvolutionForm::falling_residual, "falling-residual"},
		{ConvolutionForm::rising_complement, "rising-complement"}};

	for (const NamedForm& nf : conv_forms) {
		long count = 0;
		double gap = 0;
		for (const QBase& q : qs) {
			for (const ConvInstance& ci : integral) {
				IdentityInstance inst{ci.n, ci.xs, q};
				gap = std::max(gap, relative_gap(vandermonde_lhs(inst, nf.form),
								 vandermonde_sum(inst, nf.form)));
				count += 1;
			}
			if (!o.exact)
				for (const ConvInstance& ci : fractional) {
					IdentityInstance inst{ci.n, ci.xs, q};
					gap = std::max(gap,
						       relative_gap(vandermonde_lhs(inst, nf.form),
								    vandermonde_sum(inst, nf.form)));
					count += 1;
				}
		}
		push_row("vandermonde", nf.name, count, gap);
	}
	for (const NamedForm& nf : conv_forms) {
		long count = 0;
		double gap = 0;
		for (const QBase& q : qs) {
			for (const ConvInstance& ci : integral) {
				IdentityInstance inst{ci.n, ci.xs, q};
				gap = std::max(gap, relative_gap(cauchy_lhs(inst, nf.form),
								 cauchy_sum(inst, nf.form)));
				count += 1;
			}
			if (!o.exact)
				for (const ConvInstance& ci : fractional) {
					IdentityInstance inst{ci.n, ci.xs, q};
					gap = std::max(gap,
						       relative_gap(cauchy_lhs(inst, nf.form),
								    cauchy_sum(inst, nf.form)));
					count += 1;
				}
		}
		push_row("cauchy", nf.name, count, gap);
	}

	struct BoundedInstance {
		long r, n;
		std::vector<long> xs;
	};
	std::vector<BoundedInstance> bounded = {
		{4, 2, {1}}, {5, 3, {1, 1}}, {6, 4, {2, 1}}};
	struct NamedBounded {
		BoundedForm form;
		const char* name;
	};
	for (const NamedBounded& nf : {NamedBounded{BoundedForm::excess_weighted,
						    "excess-weighted"},
				       NamedBounded{BoundedForm::complement_weighted,
						    "complement-weighted"}}) {
		long count = 0;
		double gap = 0;
		for (const QBase& q : qs)
			for (const BoundedInstance& bi : bounded) {
				Composition xs(bi.xs);
				gap = std::max(gap,
					       relative_gap(bounded_cauchy_lhs(bi.r, bi.n, xs, q),
							    bounded_cauchy_sum(bi.r, bi.n, xs, q,
									       nf.form)));
				count += 1;
			}
		push_row("bounded-cauchy", nf.name, count, gap);
	}

	// terminating instances only: integral x_1..x_k, any real target
	std::vector<ConvInstance> inv_integral = {{2, {2, 3}}, {3, {1, 2, 4}}};
	std::vector<ConvInstance> inv_fractional = {{2, {2, 3.5}}};
	for (bool sub : {true, false}) {
		InverseForm form = sub ? InverseForm::complement_weighted
				       : InverseForm::tail_weighted;
		long count = 0;
		double gap = 0;
		for (const QBase& q : qs) {
			if ((q.regime() == Regime::sub_unit) != sub)
				continue;
			for (const ConvInstance& ci : inv_integral) {
				IdentityInstance inst{ci.n, ci.xs, q};
				gap = std::max(gap,
					       relative_gap(inverse_vandermonde_lhs(inst),
							    inverse_vandermonde_sum(inst, form)
								    .value));
				count += 1;
			}
			if (!o.exact)
				for (const ConvInstance& ci : inv_fractional) {
					IdentityInstance inst{ci.n, ci.xs, q};
					gap = std::max(
						gap,
						relative_gap(inverse_vandermonde_lhs(inst),
							     inverse_vandermonde_sum(inst, form)
								     .value));
					count += 1;
				}
		}
		if (count > 0)
			push_row("inverse-vandermonde",
				 sub ? "complement-weighted" : "tail-weighted", count, gap);
	}

	a.meta.emplace_back("pass", cell(all_pass));
	emit(a, o.format);
	return all_pass ? 0 : 1;
}

/*
 * Doubling sweep: every color count is scaled by 2^t and the urn law is
 * compared against the limit law whose rates are matched exactly at each t
 * (theta_j from inverted-base number ratios, lambda_j from plain ones).  The
 * recipe drives the gap to zero only when the urn grows, i.e. for m >= 1.
 */
int run_converge(const Opts& o) {
	bool inverse;
	if (o.dist == "qmult2")
		inverse = false;
	else if (o.dist == "neg-qmult2")
		inverse = true;
	else
		throw InputError("converge compares an urn with its limit law; "
				 "pick --dist qmult2 or neg-qmult2");
	if (o.m < 1)
		throw InputError("the doubling sweep approaches the limit only for m >= 1");
	if (o.tmax < 0 || o.tmax > 16)
		throw InputError("--tmax must lie in 0..16");
	if (o.r.size() < 2)
		throw InputError("--r needs at least two base counts");
	QBase q = o.q();
	bool sub = q.regime() == Regime::sub_unit;
	size_t k = o.r.size() - 1;
	check_k(o, k);

	Artifact a;
	a.meta.emplace_back("command", cell(std::string("converge")));
	push_common_meta(a, o, q);
	a.meta.emplace_back("tmax", cell(o.tmax));
	if (inverse)
		a.meta.emplace_back("wmax", cell(o.wmax));
	a.meta.emplace_back("tolerance", cell(o.tolerance));
	a.columns = {"t", "r_total", "sup_error"};

	double final_sup = 0;
	for (long t = 0; t <= o.tmax; ++t) {
		std::vector<long> counts(o.r.size());
		for (size_t j = 0; j < o.r.size(); ++j) {
			if (o.r[j] < 1 || o.r[j] > (1L << 40))
				throw InputError("base counts must lie in 1..2^40");
			counts[j] = o.r[j] << t;
		}
		UrnSpec spec(counts, o.m, q);
		long r_total = spec.total();
		PolyaParams fin = PolyaParams::from_urn(spec, o.n);

		std::vector<Scalar> rates;
		if (sub) {
			QBase qinv = q.inverted();
			for (size_t j = 1; j <= k; ++j)
				rates.push_back(q_number(r_total - spec.prefix(j), qinv) /
						q_number(r_total - spec.prefix(j - 1), qinv));
		} else {
			for (size_t j = 1; j <= k; ++j)
				rates.push_back(q_number(counts[j - 1], q) /
						q_number(r_total - spec.prefix(j - 1), q));
		}
		LimitParams lim{sub ? LimitParams::Kind::theta_sub_unit
				    : LimitParams::Kind::lambda_super_unit,
				std::move(rates), q, o.m, std::nullopt};

		double sup = 0;
		if (!inverse) {
			for_each_bounded_composition(k, o.n, [&](const std::vector<long>& xs) {
				Composition x(xs);
				sup = std::max(sup,
					       std::fabs(qpolya_pmf(fin, x).to_double() -
							 q_multinomial_2nd_pmf(lim, o.n, x)
								 .to_double()));
			});
		} else {
			std::vector<long> w(k, 0);
			auto rec = [&](auto&& self, size_t idx) -> void {
				if (idx == k) {
					Composition wc(w);
					sup = std::max(
						sup,
						std::fabs(inverse_qpolya_pmf(fin, wc).to_double() -
							  negative_q_multinomial_2nd_pmf(lim, o.n,
											 wc)
								  .to_double()));
					return;
				}
				for (long v = 0; v <= o.wmax; ++v) {
					w[idx] = v;
					self(self, idx + 1);
				}
				w[idx] = 0;
			};
			rec(rec, 0);
		}
		final_sup = sup;
		a.rows.push_back({cell(t), cell(r_total), cell(sup)});
	}
	bool pass = final_sup <= o.tolerance;
	a.meta.emplace_back("final_sup_error", cell(final_sup));
	a.meta.emplace_back("pass", cell(pass));
	emit(a, o.format);
	return pass ? 0 : 1;
}

int run_posterior(const Opts& o) {
	if (o.r.size() != 1)
		throw InputError("posterior takes a single population total via --r");
	check_k(o, o.x.size());
	QBase q = o.q();
	Composition x(o.x);
	PmfTable t = posterior_table(o.r[0], o.n, x, q);
	Artifact a;
	a.meta.emplace_back("command", cell(std::string("posterior")));
	a.meta.emplace_back("backend", cell(std::string(
					    o.exact ? "exact-rational" : "log-float")));
	a.meta.emplace_back("q", cell(q.str()));
	a.meta.emplace_back("r_total", cell(o.r[0]));
	a.meta.emplace_back("n", cell(o.n));
	a.meta.emplace_back("x", cell(join_longs(o.x)));
	a.meta.emplace_back("defect", cell(t.normalization_defect));
	push_table_rows(a, t, "r", o.exact);
	emit(a, o.format);
	return 0;
}

}	// namespace

int main(int argc, char** argv) {
	CLI::App app{"q-deformed urn distributions: tables, samples, and checks"};
	app.require_subcommand(1);
	Opts o;

	auto add_format = [&](CLI::App* sub) {
		sub->add_option("--format", o.format, "csv or json")
			->check(CLI::IsMember({"csv", "json"}));
		sub->add_flag("--exact", o.exact,
			      "exact rational arithmetic (q and rates parsed as rationals)");
	};
	auto add_dist = [&](CLI::App* sub, bool with_limits) {
		sub->add_option("--dist", o.dist, "distribution")->required();
		sub->add_option("--q", o.qtext, "base, rational a/b or decimal")->required();
		sub->add_option("--n", o.n, "number of draws / target count")->required();
		sub->add_option("--k", o.k, "number of tracked colors (cross-checked)")
			->each([&](const std::string&) { o.k_given = true; });
		sub->add_option("--r", o.r, "color counts r_1..r_{k+1}")->delimiter(',');
		sub->add_option("--m", o.m, "balls added per draw (negative removes)")
			->each([&](const std::string&) { o.m_given = true; });
		sub->add_option("--wmax", o.wmax, "window bound for unbounded supports");
		if (with_limits) {
			sub->add_option("--theta", o.theta, "limit rates, 0 < q < 1")
				->delimiter(',');
			sub->add_option("--lambda", o.lambda, "limit rates, q > 1")
				->delimiter(',');
			sub->add_option("--nu", o.nu, "horizon for negative m")
				->each([&](const std::string&) { o.nu_given = true; });
		}
	};

	CLI::App* pmf = app.add_subcommand("pmf", "exact or floating PMF table");
	add_dist(pmf, true);
	add_format(pmf);

	CLI::App* sample = app.add_subcommand("sample", "seeded urn sampling with a fit report");
	add_dist(sample, false);
	sample->add_option("--samples", o.samples, "number of runs");
	sample->add_option("--seed", o.seed, "stream seed");
	sample->add_option("--threads", o.threads, "worker threads (statistics invariant)");
	sample->add_option("--draw-cap", o.draw_cap, "per-run draw budget for stopped sampling");
	add_format(sample);

	CLI::App* identity = app.add_subcommand("identity-check",
						"verify the convolution identity suite");
	identity->add_option("--q", o.qtext, "single base; default grid otherwise");
	identity->add_option("--tolerance", o.tolerance, "relative gap bound (float runs)");
	add_format(identity);

	CLI::App* converge = app.add_subcommand("converge",
						"doubling sweep against the limit law");
	add_dist(converge, false);
	converge->add_option("--tmax", o.tmax, "largest doubling exponent");
	converge->add_option("--tolerance", o.tolerance, "sup-norm bound at tmax");
	add_format(converge);

	CLI::App* posterior = app.add_subcommand("posterior",
						 "composition posterior after a removal sample");
	posterior->add_option("--r", o.r, "population total")->delimiter(',')->required();
	posterior->add_option("--n", o.n, "sample size")->required();
	posterior->add_option("--k", o.k, "number of tracked colors (cross-checked)")
		->each([&](const std::string&) { o.k_given = true; });
	posterior->add_option("--x", o.x, "observed counts x_1..x_k")
		->delimiter(',')
		->required();
	posterior->add_option("--q", o.qtext, "base, rational a/b or decimal")->required();
	add_format(posterior);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		int code = app.exit(e);
		return code == 0 ? 0 : 2;
	}

	try {
		if (pmf->parsed())
			return run_pmf(o);
		if (sample->parsed())
			return run_sample(o);
		if (identity->parsed())
			return run_identity_check(o);
		if (converge->parsed())
			return run_converge(o);
		return run_posterior(o);
	} catch (const InputError& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 2;
	} catch (const DomainError& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 2;
	} catch (const SizeError& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 2;
	} catch (const Error& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 3;
	} catch (const std::exception& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 3;
	}
}
