#include "qpolya/urnsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace qpolya {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
	std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

}	// namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
	: seed_(seed), stream_id_(stream_id) {
	/*
	 * Whiten the seed before folding in the stream id so (0, 1) and
	 * (1, 0) cannot collide, then expand four words; splitmix64 is a
	 * bijection per step, so distinct pairs give distinct material.
	 */
	std::uint64_t s = seed;
	std::uint64_t base = splitmix64(s);
	s = base ^ (0xD1B54A32D192ED03ULL * (stream_id + 1));
	std::uint64_t w[4];
	for (auto& word : w)
		word = splitmix64(s);
	std::seed_seq seq{
		static_cast<std::uint32_t>(w[0]), static_cast<std::uint32_t>(w[0] >> 32),
		static_cast<std::uint32_t>(w[1]), static_cast<std::uint32_t>(w[1] >> 32),
		static_cast<std::uint32_t>(w[2]), static_cast<std::uint32_t>(w[2] >> 32),
		static_cast<std::uint32_t>(w[3]), static_cast<std::uint32_t>(w[3] >> 32)};
	engine_.seed(seq);
}

double RandomStream::uniform() {
	return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_positive() {
	return 1.0 - uniform();
}

namespace {

/*
 * Smallest x in 1..r with CDF(x) = (1-q^x)/(1-q^r) >= u, for 0 < q < 1.
 * Solved in logs, then nudged against the CDF test itself because the
 * closed-form solve can land one off at cell boundaries.
 */
long position_by_inversion(long r, double q, RandomStream& rng) {
	double u = rng.uniform();
	double L = std::log(q);
	double A = -std::expm1(static_cast<double>(r) * L);
	double t = std::log1p(-u * A);
	long x = static_cast<long>(std::ceil(t / L));
	x = std::clamp(x, 1L, r);
	auto cdf_covers = [&](long y) {
		return -std::expm1(static_cast<double>(y) * L) >= u * A;
	};
	while (x > 1 && cdf_covers(x - 1))
		--x;
	while (x < r && !cdf_covers(x))
		++x;
	return x;
}

/*
 * The passing mechanism: balls go by in order 1..r cyclically, each caught
 * with probability 1-q.  The index of the first catch is geometric, so the
 * position is its residue.  Position x is reached by catching pass x-1+jr,
 * total probability (1-q)q^{x-1}/(1-q^r).
 */
long position_by_passing(long r, double q, RandomStream& rng) {
	double u = rng.uniform_positive();
	double g = std::floor(std::log(u) / std::log(q));
	long passes = g < 0 ? 0 : static_cast<long>(g);
	return passes % r + 1;
}

}	// namespace

long q_position_draw(long r, const QBase& q, RandomStream& rng, DrawMethod method) {
	if (r < 1)
		throw DomainError("q_position_draw: need at least one position");
	// a base above one is the reverse passing order: draw with 1/q, mirror
	bool mirrored = q.regime() == Regime::super_unit;
	double qv = mirrored ? 1.0 / q.value() : q.value();
	long x = method == DrawMethod::inverse_cdf ? position_by_inversion(r, qv, rng)
						   : position_by_passing(r, qv, rng);
	return mirrored ? r + 1 - x : x;
}

UrnState::UrnState(const UrnSpec& spec)
	: counts(spec.counts),
	  m(spec.m),
	  q(spec.q),
	  per_color_drawn(spec.counts.size(), 0) {}

long UrnState::total() const {
	return std::accumulate(counts.begin(), counts.end(), 0L);
}

size_t q_draw(const UrnState& state, RandomStream& rng, DrawMethod method) {
	long r = state.total();
	if (r < 1)
		throw InfeasibleStateError("q_draw: the urn is empty");
	long pos = q_position_draw(r, state.q, rng, method);
	long boundary = 0;
	for (size_t nu = 0; nu + 1 < state.counts.size(); ++nu) {
		boundary += state.counts[nu];
		if (pos <= boundary)
			return nu;
	}
	return state.counts.size() - 1;
}

void step(UrnState& state, size_t color) {
	if (color >= state.counts.size())
		throw InputError("step: color index out of range");
	if (state.counts[color] < 1)
		throw InfeasibleStateError("step: the drawn color has no balls left");
	long next = state.counts[color] + state.m;
	if (next < 0)
		throw InfeasibleStateError("step: removal would drive a color count "
					   "below zero");
	state.counts[color] = next;
	state.draws_made += 1;
	state.per_color_drawn[color] += 1;
}

namespace {

size_t draw_and_step(UrnState& state, RandomStream& rng, DrawMethod method) {
	size_t color = q_draw(state, rng, method);
	step(state, color);
	return color;
}

[[noreturn]] void rethrow_with_draw(const InfeasibleStateError& e, long draw) {
	throw InfeasibleStateError("draw " + std::to_string(draw) + ": " + e.what());
}

}	// namespace

std::vector<long> sample_qpolya(const UrnSpec& spec, long n, RandomStream& rng,
				DrawMethod method) {
	if (n < 0)
		throw DomainError("sample_qpolya: the number of draws must be "
				  "nonnegative");
	UrnState state(spec);
	for (long i = 1; i <= n; ++i) {
		try {
			draw_and_step(state, rng, method);
		} catch (const InfeasibleStateError& e) {
			rethrow_with_draw(e, i);
		}
	}
	return {state.per_color_drawn.begin(), state.per_color_drawn.end() - 1};
}

std::vector<long> sample_inverse_qpolya(const UrnSpec& spec, long n, RandomStream& rng,
					long draw_cap, DrawMethod method) {
	if (n < 1)
		throw DomainError("sample_inverse_qpolya: the target count must be "
				  "positive");
	if (draw_cap < 1)
		throw DomainError("sample_inverse_qpolya: the draw cap must be positive");
	UrnState state(spec);
	size_t last = state.colors() - 1;
	while (state.per_color_drawn[last] < n) {
		if (state.draws_made >= draw_cap)
			throw NonterminationError(
				"sample_inverse_qpolya: cap of " + std::to_string(draw_cap) +
					" draws hit before the last color reached " +
					std::to_string(n),
				state.draws_made);
		try {
			draw_and_step(state, rng, method);
		} catch (const InfeasibleStateError& e) {
			rethrow_with_draw(e, state.draws_made + 1);
		}
	}
	return {state.per_color_drawn.begin(), state.per_color_drawn.end() - 1};
}

namespace {

void validate_block_sizes(const std::vector<long>& sizes, const char* who) {
	if (sizes.size() < 2)
		throw DomainError(std::string(who) + ": needs at least two blocks");
	for (long b : sizes)
		if (b < 1)
			throw DomainError(std::string(who) +
					  ": block sizes must be positive");
}

}	// namespace

std::vector<long> sample_bernoulli_blocks(const std::vector<long>& block_sizes,
					  double theta, const QBase& q,
					  RandomStream& rng) {
	validate_block_sizes(block_sizes, "sample_bernoulli_blocks");
	if (!(theta > 0.0) || !std::isfinite(theta))
		throw DomainError("sample_bernoulli_blocks: theta must be positive "
				  "and finite");
	double L = q.log_value();
	double lt = std::log(theta);
	std::vector<long> successes(block_sizes.size(), 0);
	long trial = 0;
	for (size_t j = 0; j < block_sizes.size(); ++j)
		for (long t = 0; t < block_sizes[j]; ++t) {
			++trial;
			// logistic form of theta q^{i-1}/(1 + theta q^{i-1});
			// exp may saturate, the ratio still lands on 0 or 1
			double z = lt + static_cast<double>(trial - 1) * L;
			double p = 1.0 / (1.0 + std::exp(-z));
			if (rng.uniform() < p)
				successes[j] += 1;
		}
	return successes;
}

std::vector<long> sample_negative_blocks(const std::vector<long>& block_sizes,
					 double theta, const QBase& q,
					 RandomStream& rng) {
	validate_block_sizes(block_sizes, "sample_negative_blocks");
	if (!(theta > 0.0 && theta < 1.0))
		throw DomainError("sample_negative_blocks: theta must lie in (0, 1)");
	long r = std::accumulate(block_sizes.begin(), block_sizes.end(), 0L);
	if (q.regime() == Regime::super_unit &&
	    static_cast<double>(r) * q.log_value() > -std::log(theta))
		throw DomainError("sample_negative_blocks: q > 1 caps the success "
				  "count at -log(theta)/log(q)");
	double L = q.log_value();
	double lt = std::log(theta);
	std::vector<long> failures(block_sizes.size(), 0);
	long stage = 0;
	for (size_t j = 0; j < block_sizes.size(); ++j)
		for (long t = 0; t < block_sizes[j]; ++t) {
			++stage;
			/*
			 * Failures before the stage-th success are geometric
			 * with failure weight f = theta q^{stage-1}; counting
			 * trials one by one and jumping by the inverse CDF
			 * floor(log u / log f) agree in law, and log f < 0 on
			 * the whole admitted domain (the q > 1 cap keeps
			 * f <= 1/q at the last stage).
			 */
			double lf = lt + static_cast<double>(stage - 1) * L;
			double u = rng.uniform_positive();
			double g = std::floor(std::log(u) / lf);
			if (g > 0)
				failures[j] += static_cast<long>(g);
		}
	return failures;
}

GofReport goodness_of_fit(const std::vector<std::vector<long>>& samples,
			  const PmfTable& exact) {
	if (samples.empty())
		throw InputError("goodness_of_fit: no samples");
	if (exact.support.empty())
		throw InputError("goodness_of_fit: the exact table is empty");

	std::map<std::vector<long>, size_t> row;
	for (size_t i = 0; i < exact.support.size(); ++i)
		row[exact.support[i]] = i;

	std::vector<long> observed(exact.support.size(), 0);
	long overflow_observed = 0;
	for (const auto& s : samples) {
		auto it = row.find(s);
		if (it == row.end())
			overflow_observed += 1;
		else
			observed[it->second] += 1;
	}

	const double n = static_cast<double>(samples.size());
	std::vector<double> p(exact.probs.size());
	double covered = 0;
	for (size_t i = 0; i < exact.probs.size(); ++i) {
		p[i] = exact.probs[i].to_double();
		covered += p[i];
	}
	// mass the table does not enumerate (truncation tail or escape mass)
	double overflow_p = std::max(0.0, 1.0 - covered);

	GofReport report;
	report.sample_count = static_cast<long>(samples.size());

	double tv = std::fabs(overflow_observed / n - overflow_p);
	for (size_t i = 0; i < p.size(); ++i)
		tv += std::fabs(observed[i] / n - p[i]);
	report.tv_distance = std::clamp(tv / 2.0, 0.0, 1.0);

	/*
	 * Chi-square over the table cells with small-expectation pooling:
	 * cells expecting fewer than five samples merge into the overflow
	 * cell, which also absorbs out-of-table outcomes.  A pooled cell
	 * expecting nothing but observing something means the samples hit
	 * an impossible outcome, reported as an infinite statistic.
	 */
	double pooled_expected = n * overflow_p;
	long pooled_observed = overflow_observed;
	double stat = 0;
	long cells = 0;
	for (size_t i = 0; i < p.size(); ++i) {
		double expected = n * p[i];
		if (expected < 5.0) {
			pooled_expected += expected;
			pooled_observed += observed[i];
			report.merged_cells += 1;
			continue;
		}
		double d = observed[i] - expected;
		stat += d * d / expected;
		cells += 1;
	}
	if (pooled_expected > 0.0) {
		double d = pooled_observed - pooled_expected;
		stat += d * d / pooled_expected;
		cells += 1;
	} else if (pooled_observed > 0) {
		stat = std::numeric_limits<double>::infinity();
		cells += 1;
	}

	report.chi_square_stat = stat;
	report.degrees_of_freedom = cells - 1;
	if (report.degrees_of_freedom < 1)
		report.p_value = 1.0;
	else if (!std::isfinite(stat))
		report.p_value = 0.0;
	else
		report.p_value = regularized_gamma_q(
			static_cast<double>(report.degrees_of_freedom) / 2.0, stat / 2.0);
	return report;
}

/*
 * Q(a, x) via the standard split: the lower series for x < a+1, the Lentz
 * continued fraction for the upper tail otherwise.  Both converge fast on
 * the chi-square arguments used here (a = dof/2, x = stat/2).
 */
double regularized_gamma_q(double a, double x) {
	if (!(a > 0.0) || !std::isfinite(a))
		throw DomainError("regularized_gamma_q: the shape must be positive "
				  "and finite");
	if (std::isnan(x) || x < 0.0)
		throw DomainError("regularized_gamma_q: the argument must be "
				  "nonnegative");
	if (x == 0.0)
		return 1.0;
	if (std::isinf(x))
		return 0.0;
	double log_scale = -x + a * std::log(x) - std::lgamma(a);
	if (x < a + 1.0) {
		double term = 1.0 / a;
		double sum = term;
		double ap = a;
		for (int i = 0; i < 1000; ++i) {
			ap += 1.0;
			term *= x / ap;
			sum += term;
			if (std::fabs(term) < std::fabs(sum) * 1e-16)
				break;
		}
		double lower = sum * std::exp(log_scale);
		return std::clamp(1.0 - lower, 0.0, 1.0);
	}
	const double tiny = 1e-300;
	double b = x + 1.0 - a;
	double c = 1.0 / tiny;
	double d = 1.0 / b;
	double h = d;
	for (int i = 1; i <= 1000; ++i) {
		double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
		b += 2.0;
		d = an * d + b;
		if (std::fabs(d) < tiny)
			d = tiny;
		c = b + an / c;
		if (std::fabs(c) < tiny)
			c = tiny;
		d = 1.0 / d;
		double delta = d * c;
		h *= delta;
		if (std::fabs(delta - 1.0) < 1e-16)
			break;
	}
	return std::clamp(h * std::exp(log_scale), 0.0, 1.0);
}

}	// namespace qpolya
