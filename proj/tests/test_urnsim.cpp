#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpolya/urnsim.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace qpolya;

namespace {

const QBase qf_half = QBase::real(0.5);
const QBase qf_two = QBase::real(2.0);

// TV distance between empirical counts over n trials and exact cell masses
double tv_against(const std::map<std::vector<long>, long>& emp, const PmfTable& tab,
		  long n) {
	double tv = 0;
	double covered = 0;
	std::set<std::vector<long>> seen;
	for (size_t i = 0; i < tab.support.size(); ++i) {
		auto it = emp.find(tab.support[i]);
		double f = it == emp.end() ? 0.0 : it->second / static_cast<double>(n);
		double p = tab.probs[i].to_double();
		tv += std::fabs(f - p);
		covered += p;
		seen.insert(tab.support[i]);
	}
	double outside = 0;
	for (const auto& [key, hits] : emp)
		if (!seen.count(key))
			outside += hits / static_cast<double>(n);
	tv += std::fabs(outside - std::max(0.0, 1.0 - covered));
	return tv / 2;
}

}	// namespace

TEST_CASE("streams replay deterministically and separate by id") {
	RandomStream a(2024, 7), b(2024, 7), c(2024, 8), d(2025, 7);
	bool all_equal = true, c_differs = false, d_differs = false;
	for (int i = 0; i < 1000; ++i) {
		double ua = a.uniform(), ub = b.uniform(), uc = c.uniform(), ud = d.uniform();
		all_equal = all_equal && ua == ub;
		c_differs = c_differs || uc != ua;
		d_differs = d_differs || ud != ua;
		CHECK(ua >= 0.0);
		CHECK(ua < 1.0);
	}
	CHECK(all_equal);
	CHECK(c_differs);
	CHECK(d_differs);

	// seed and id must not collapse into one another through the mixing
	RandomStream e(0, 1), f(1, 0);
	bool distinct = false;
	for (int i = 0; i < 64; ++i)
		distinct = distinct || e.uniform() != f.uniform();
	CHECK(distinct);

	RandomStream g(5, 5);
	for (int i = 0; i < 1000; ++i) {
		double u = g.uniform_positive();
		CHECK(u > 0.0);
		CHECK(u <= 1.0);
	}
}

TEST_CASE("position draws follow the q-uniform law under both mechanisms") {
	const long r = 5, n = 1000000;
	for (const QBase& q : {qf_half, qf_two})
		for (DrawMethod method : {DrawMethod::inverse_cdf, DrawMethod::ball_passing}) {
			RandomStream rng(31, static_cast<std::uint64_t>(method));
			std::vector<long> hits(r + 1, 0);
			for (long i = 0; i < n; ++i) {
				long x = q_position_draw(r, q, rng, method);
				REQUIRE(x >= 1);
				REQUIRE(x <= r);
				hits[x]++;
			}
			double tv = 0;
			for (long x = 1; x <= r; ++x)
				tv += std::fabs(hits[x] / static_cast<double>(n) -
						q_uniform_draw_pmf(x, r, q).to_double());
			CHECK(tv / 2 <= 0.005);
		}

	// a single position is deterministic
	RandomStream rng(1, 1);
	for (int i = 0; i < 10; ++i)
		CHECK(q_position_draw(1, qf_half, rng) == 1);
	CHECK_THROWS_AS(q_position_draw(0, qf_half, rng), DomainError);

	// near q = 1 the law flattens to the classical uniform
	{
		QBase q1 = QBase::real(0.999999);
		RandomStream r1(77, 0);
		std::vector<long> hits(6, 0);
		const long n1 = 200000;
		for (long i = 0; i < n1; ++i)
			hits[q_position_draw(5, q1, r1)]++;
		double tv = 0;
		for (long x = 1; x <= 5; ++x)
			tv += std::fabs(hits[x] / static_cast<double>(n1) - 0.2);
		CHECK(tv / 2 <= 0.01);
	}
}

TEST_CASE("color draws match the urn conditional law at any history") {
	// fresh urn: the first-draw law
	{
		UrnSpec spec({2, 1, 2}, 1, QBase::real(0.7));
		UrnState state(spec);
		RandomStream rng(5, 2);
		const long n = 1000000;
		std::vector<long> hits(3, 0);
		for (long i = 0; i < n; ++i)
			hits[q_draw(state, rng)]++;
		double tv = 0;
		for (size_t nu = 1; nu <= 3; ++nu)
			tv += std::fabs(hits[nu - 1] / static_cast<double>(n) -
					color_draw_prob(spec, nu).to_double());
		CHECK(tv / 2 <= 0.005);
		CHECK(state.draws_made == 0);	// q_draw leaves the state alone
	}

	// mid-history state, removal regime: both mechanisms, exact law from
	// the closed-form conditional
	{
		UrnSpec spec({3, 2}, -1, QBase::real(0.5));
		UrnState state(spec);
		step(state, 0);
		step(state, 1);
		// i = 3, color 1 drawn once, color 2 once (after one earlier color)
		double p0 = conditional_draw_prob(spec, 3, 1, 1, 0).to_double();
		double p1 = conditional_draw_prob(spec, 3, 2, 1, 1).to_double();
		CHECK(std::fabs(p0 + p1 - 1.0) <= 1e-12);
		for (DrawMethod method :
		     {DrawMethod::inverse_cdf, DrawMethod::ball_passing}) {
			RandomStream rng(6, static_cast<std::uint64_t>(method));
			const long n = 400000;
			long c0 = 0;
			for (long i = 0; i < n; ++i)
				if (q_draw(state, rng, method) == 0)
					c0++;
			CHECK(std::fabs(c0 / static_cast<double>(n) - p0) <= 0.005);
		}
	}

	// an exhausted color never comes up even though its block is empty
	{
		UrnSpec spec({1, 1}, -1, qf_half);
		UrnState state(spec);
		step(state, 0);
		RandomStream rng(8, 0);
		for (int i = 0; i < 200; ++i)
			CHECK(q_draw(state, rng) == 1);
	}
}

TEST_CASE("reinforcement conserves counts and rejects infeasible removals") {
	UrnSpec spec({2, 3}, 2, qf_half);
	UrnState state(spec);
	RandomStream rng(3, 9);
	for (long i = 1; i <= 50; ++i) {
		size_t color = q_draw(state, rng);
		step(state, color);
		CHECK(state.draws_made == i);
		CHECK(state.total() == spec.total() + spec.m * i);
		long drawn_total = 0;
		for (size_t nu = 0; nu < state.colors(); ++nu) {
			CHECK(state.counts[nu] ==
			      spec.counts[nu] + spec.m * state.per_color_drawn[nu]);
			CHECK(state.counts[nu] >= 0);
			drawn_total += state.per_color_drawn[nu];
		}
		CHECK(drawn_total == state.draws_made);
	}

	// plain replacement leaves the urn unchanged
	{
		UrnSpec rep({2, 3}, 0, qf_half);
		UrnState s2(rep);
		step(s2, 0);
		step(s2, 1);
		CHECK(s2.counts == rep.counts);
		CHECK(s2.draws_made == 2);
	}

	// removal below zero is refused before mutating anything
	{
		UrnSpec rm({1, 3}, -2, qf_half);
		UrnState s3(rm);
		CHECK_THROWS_AS(step(s3, 0), InfeasibleStateError);
		CHECK(s3.counts[0] == 1);
		CHECK(s3.draws_made == 0);
		step(s3, 1);	// 3 - 2 = 1 is fine
		CHECK(s3.counts[1] == 1);
	}

	{
		UrnSpec ex({1, 1}, -1, qf_half);
		UrnState s4(ex);
		step(s4, 0);
		CHECK_THROWS_AS(step(s4, 0), InfeasibleStateError);
		CHECK_THROWS_AS(step(s4, 5), InputError);
	}
}

TEST_CASE("fixed-draw sampling reproduces the closed-form law") {
	// the n = 0 sample is the zero vector
	{
		RandomStream rng(1, 0);
		CHECK(sample_qpolya(UrnSpec({1, 2}, 1, qf_half), 0, rng) ==
		      std::vector<long>{0});
	}

	// removal without replacement empties the urn into the type vector
	{
		RandomStream rng(2, 0);
		for (int rep = 0; rep < 50; ++rep)
			CHECK(sample_qpolya(UrnSpec({2, 3}, -1, qf_half), 5, rng) ==
			      std::vector<long>{2});
	}

	// Monte-Carlo agreement with the exact table, plus the fit report
	{
		UrnSpec spec({1, 1, 1}, 1, qf_half);
		PmfTable tab = qpolya_table(PolyaParams::from_urn(spec, 3));
		const long n = 1000000;
		RandomStream rng(11, 0);
		std::vector<std::vector<long>> samples;
		samples.reserve(n);
		std::map<std::vector<long>, long> emp;
		for (long i = 0; i < n; ++i) {
			samples.push_back(sample_qpolya(spec, 3, rng));
			emp[samples.back()]++;
		}
		CHECK(tv_against(emp, tab, n) <= 0.005);

		GofReport rep = goodness_of_fit(samples, tab);
		CHECK(rep.sample_count == n);
		CHECK(rep.tv_distance <= 0.005);
		CHECK(rep.merged_cells == 0);
		CHECK(rep.p_value > 0.001);
		CHECK(rep.tv_distance >= 0.0);
		CHECK(rep.tv_distance <= 1.0);
	}

	// infeasible removal mid-run names the draw that failed
	{
		RandomStream rng(4, 4);
		try {
			sample_qpolya(UrnSpec({1, 1}, -2, qf_half), 1, rng);
			FAIL("expected InfeasibleStateError");
		} catch (const InfeasibleStateError& e) {
			CHECK(std::string(e.what()).find("draw 1") != std::string::npos);
		}
		try {
			sample_qpolya(UrnSpec({1, 1}, -1, qf_half), 3, rng);
			FAIL("expected InfeasibleStateError");
		} catch (const InfeasibleStateError& e) {
			CHECK(std::string(e.what()).find("draw 3") != std::string::npos);
		}
		CHECK_THROWS_AS(sample_qpolya(UrnSpec({1, 2}, 1, qf_half), -1, rng),
				DomainError);
	}
}

TEST_CASE("stopped sampling terminates, reports caps, and matches the law") {
	// without replacement the stop happens within r draws
	{
		UrnSpec spec({2, 3}, -1, qf_half);
		RandomStream rng(21, 0);
		for (int rep = 0; rep < 200; ++rep) {
			auto w = sample_inverse_qpolya(spec, 3, rng);
			REQUIRE(w.size() == 1);
			CHECK(w[0] >= 0);
			CHECK(w[0] <= 2);
		}
	}

	// super-unit base: the law is proper, empirical matches the table
	{
		UrnSpec spec({1, 1}, 1, qf_two);
		PmfTable tab = inverse_qpolya_table(PolyaParams::from_urn(spec, 2), 30);
		CHECK(tab.proper);
		const long n = 200000;
		RandomStream rng(22, 1);
		std::map<std::vector<long>, long> emp;
		for (long i = 0; i < n; ++i)
			emp[sample_inverse_qpolya(spec, 2, rng)]++;
		CHECK(tv_against(emp, tab, n) <= 0.01);
	}

	/*
	 * Sub-unit base with duplication is the defective regime: mass
	 * escapes to never stopping.  Completed runs still land on each
	 * outcome with its closed-form probability, and the cap-hit rate
	 * reproduces the table's disclosed defect.
	 */
	{
		UrnSpec spec({1, 2}, 1, qf_half);
		PmfTable tab = inverse_qpolya_table(PolyaParams::from_urn(spec, 2), 40);
		CHECK_FALSE(tab.proper);
		const long n = 1000000;
		RandomStream rng(13, 1);
		std::map<std::vector<long>, long> emp;
		long capped = 0;
		long worst_draws = 0;
		for (long i = 0; i < n; ++i) {
			try {
				// a run alive after 200 draws has escaped up to ~q^200
				emp[sample_inverse_qpolya(spec, 2, rng, 200)]++;
			} catch (const NonterminationError& e) {
				capped++;
				worst_draws = std::max(worst_draws, e.draws);
			}
		}
		CHECK(worst_draws == 200);
		double escape = capped / static_cast<double>(n);
		CHECK(std::fabs(escape - tab.normalization_defect) <= 0.01);
		double tv = 0;
		for (size_t i = 0; i < tab.support.size(); ++i) {
			auto it = emp.find(tab.support[i]);
			double f = it == emp.end() ? 0.0
						   : it->second / static_cast<double>(n);
			tv += std::fabs(f - tab.probs[i].to_double());
		}
		CHECK(tv / 2 <= 0.01);
	}

	{
		RandomStream rng(1, 1);
		CHECK_THROWS_AS(sample_inverse_qpolya(UrnSpec({1, 2}, 1, qf_half), 0, rng),
				DomainError);
		CHECK_THROWS_AS(
			sample_inverse_qpolya(UrnSpec({1, 2}, 1, qf_half), 1, rng, 0),
			DomainError);
		// exhaustion before the nth target draw strands the run
		CHECK_THROWS_AS(
			sample_inverse_qpolya(UrnSpec({2, 1}, -1, qf_half), 2, rng),
			InfeasibleStateError);
	}
}

TEST_CASE("success-odds trials produce the right blocks") {
	// per-trial success probabilities, checked on a two-trial sequence
	{
		const double theta = 0.7;
		const long n = 400000;
		RandomStream rng(41, 0);
		long first = 0, second = 0;
		for (long i = 0; i < n; ++i) {
			auto x = sample_bernoulli_blocks({1, 1}, theta, qf_half, rng);
			first += x[0];
			second += x[1];
		}
		CHECK(std::fabs(first / static_cast<double>(n) - theta / (1 + theta)) <=
		      0.005);
		CHECK(std::fabs(second / static_cast<double>(n) -
				theta * 0.5 / (1 + theta * 0.5)) <= 0.005);
	}

	// saturated odds give certain successes, vanishing odds none
	{
		RandomStream rng(42, 0);
		CHECK(sample_bernoulli_blocks({2, 3}, 1e300, qf_half, rng) ==
		      std::vector<long>{2, 3});
		CHECK(sample_bernoulli_blocks({2, 3}, 1e-300, qf_half, rng) ==
		      std::vector<long>{0, 0});
	}

	// conditioned on the total, the blocks follow the removal-urn law
	{
		std::vector<long> blocks{2, 3};
		UrnSpec spec({2, 3}, -1, qf_half);
		const long n = 2, total = 2000000;
		RandomStream rng(17, 2);
		std::map<long, long> emp;
		long kept = 0;
		for (long i = 0; i < total; ++i) {
			auto x = sample_bernoulli_blocks(blocks, 0.7, qf_half, rng);
			if (x[0] + x[1] == n) {
				emp[x[0]]++;
				kept++;
			}
		}
		double tv = 0;
		for (long x0 = 0; x0 <= n; ++x0)
			tv += std::fabs(emp[x0] / static_cast<double>(kept) -
					qhypergeometric_pmf(spec, n, Composition({x0}))
						.to_double());
		CHECK(tv / 2 <= 0.01);
	}

	{
		RandomStream rng(1, 0);
		CHECK_THROWS_AS(sample_bernoulli_blocks({2, 3}, 0.0, qf_half, rng),
				DomainError);
		CHECK_THROWS_AS(sample_bernoulli_blocks({2}, 1.0, qf_half, rng),
				DomainError);
		CHECK_THROWS_AS(sample_bernoulli_blocks({2, 0}, 1.0, qf_half, rng),
				DomainError);
	}
}

TEST_CASE("decaying-success trials produce the right failure blocks") {
	// theta near zero succeeds immediately: no failures anywhere
	{
		RandomStream rng(51, 0);
		CHECK(sample_negative_blocks({2, 2}, 1e-12, qf_half, rng) ==
		      std::vector<long>{0, 0});
	}

	// conditioned on the total failures, blocks follow the duplication law
	{
		std::vector<long> blocks{1, 1};
		UrnSpec spec({1, 1}, 1, qf_half);
		const long n = 2, total = 2000000;
		RandomStream rng(19, 5);
		std::map<long, long> emp;
		long kept = 0;
		for (long i = 0; i < total; ++i) {
			auto w = sample_negative_blocks(blocks, 0.5, qf_half, rng);
			if (w[0] + w[1] == n) {
				emp[w[0]]++;
				kept++;
			}
		}
		double tv = 0;
		for (long w0 = 0; w0 <= n; ++w0)
			tv += std::fabs(
				emp[w0] / static_cast<double>(kept) -
				negative_qhypergeometric_pmf(spec, n, Composition({w0}))
					.to_double());
		CHECK(tv / 2 <= 0.01);
	}

	// the q > 1 regime caps the total success count
	{
		RandomStream rng(1, 0);
		QBase q2 = QBase::real(2.0);
		CHECK_NOTHROW(sample_negative_blocks({1, 2}, 1.0 / 9.0, q2, rng));
		CHECK_THROWS_AS(sample_negative_blocks({2, 2}, 1.0 / 9.0, q2, rng),
				DomainError);
		CHECK_THROWS_AS(sample_negative_blocks({1, 1}, 1.5, qf_half, rng),
				DomainError);
		CHECK_THROWS_AS(sample_negative_blocks({1, 1}, 0.0, qf_half, rng),
				DomainError);
	}
}

TEST_CASE("fit reports expose mismatches and honor their invariants") {
	UrnSpec spec({1, 2}, 1, qf_half);
	PmfTable tab = qpolya_table(PolyaParams::from_urn(spec, 2));

	// all mass on one point vs the exact law: TV = 1 - p(point)
	{
		std::vector<std::vector<long>> samples(10000, std::vector<long>{0});
		GofReport rep = goodness_of_fit(samples, tab);
		double p0 = tab.probs[0].to_double();
		CHECK(tab.support[0] == std::vector<long>{0});
		CHECK(std::fabs(rep.tv_distance - (1.0 - p0)) <= 1e-9);
		CHECK(rep.p_value <= 1e-6);
		CHECK(rep.p_value >= 0.0);
	}

	// samples outside the table of a complete law: infinite statistic
	{
		std::vector<std::vector<long>> samples(1000, std::vector<long>{0});
		samples.push_back({7});
		GofReport rep = goodness_of_fit(samples, tab);
		CHECK(std::isinf(rep.chi_square_stat));
		CHECK(rep.p_value == 0.0);
	}

	// tiny sample counts pool everything into the overflow cell
	{
		std::vector<std::vector<long>> samples(3, std::vector<long>{1});
		GofReport rep = goodness_of_fit(samples, tab);
		CHECK(rep.merged_cells == static_cast<long>(tab.support.size()));
		CHECK(rep.p_value == 1.0);	// one pooled cell leaves no freedom
		CHECK(rep.tv_distance <= 1.0);
	}

	CHECK_THROWS_AS(goodness_of_fit({}, tab), InputError);
	CHECK_THROWS_AS(goodness_of_fit({{0}}, PmfTable{}), InputError);
}

TEST_CASE("the chi-square tail function matches its pinned anchors") {
	// Q(1, x) = exp(-x)
	for (double x : {0.5, 2.0, 10.0})
		CHECK(std::fabs(regularized_gamma_q(1.0, x) - std::exp(-x)) <= 1e-12);
	// the classic 95th percentile of chi-square with one degree of freedom
	CHECK(std::fabs(regularized_gamma_q(0.5, 3.841458820694124 / 2) - 0.05) <= 1e-9);
	CHECK(regularized_gamma_q(2.5, 0.0) == 1.0);
	CHECK(regularized_gamma_q(3.0, std::numeric_limits<double>::infinity()) == 0.0);
	// monotone decreasing in x across the series/fraction switch
	double prev = 1.0;
	for (double x = 0.25; x <= 12.0; x += 0.25) {
		double v = regularized_gamma_q(2.0, x);
		CHECK(v < prev);
		prev = v;
	}
	CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), DomainError);
	CHECK_THROWS_AS(regularized_gamma_q(1.0, -1.0), DomainError);
}
