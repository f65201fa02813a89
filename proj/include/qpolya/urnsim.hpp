#pragma once

#include "qpolya/distributions.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace qpolya {

/*
 * Deterministic uniform stream.  The pair (seed, stream_id) is whitened
 * through splitmix64 into a seed sequence for a mt19937_64 engine, so the
 * same pair always replays the same uniforms (the engine and seed_seq
 * expansions are pinned by the standard) and distinct stream ids of one
 * seed give unrelated streams for parallel workers.
 */
class RandomStream {
public:
	RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

	std::uint64_t seed() const { return seed_; }
	std::uint64_t stream_id() const { return stream_id_; }

	// uniform on [0, 1), 53 bits
	double uniform();
	// uniform on (0, 1], safe under log
	double uniform_positive();

private:
	std::uint64_t seed_;
	std::uint64_t stream_id_;
	std::mt19937_64 engine_;
};

/*
 * The two ways of realizing a drawing.  inverse_cdf solves
 * [x]_q/[r]_q >= u directly in one uniform; ball_passing runs the didactic
 * mechanism (balls pass in order, each caught with probability 1 - q,
 * wrapping around until a catch).  Both produce the position law
 * q^{x-1}(1-q)/(1-q^r); a base above one is handled by drawing with 1/q in
 * the reverse passing order and mirroring the position.
 */
enum class DrawMethod { inverse_cdf, ball_passing };

// one position from q^{x-1}(1-q)/(1-q^r) on 1..r
long q_position_draw(long r, const QBase& q, RandomStream& rng,
		     DrawMethod method = DrawMethod::inverse_cdf);

/*
 * Evolving urn.  counts[nu] = r_nu + m * per_color_drawn[nu] stays
 * nonnegative throughout; draws_made is the total number of completed
 * draw/reinforce cycles.  Colors keep the UrnSpec order, so position blocks
 * are cumulative over counts.
 */
struct UrnState {
	std::vector<long> counts;
	long m = 0;
	QBase q;
	long draws_made = 0;
	std::vector<long> per_color_drawn;

	explicit UrnState(const UrnSpec& spec);

	size_t colors() const { return counts.size(); }
	long total() const;
};

/*
 * One q-drawing from the current counts; returns the 0-based color index
 * and does not mutate the state.  The induced color law is
 * q^{p_{nu-1}}(1-q^{c_nu})/(1-q^R) with p the running prefix of current
 * counts, which is the urn process conditional law at this history.
 */
size_t q_draw(const UrnState& state, RandomStream& rng,
	      DrawMethod method = DrawMethod::inverse_cdf);

// reinforce after a draw: the drawn color gains m balls (m < 0 removes)
void step(UrnState& state, size_t color);

/*
 * n draw/reinforce cycles from a fresh urn; returns the drawn counts of
 * colors 1..k (the last color's count is n minus their total).  A removal
 * regime that strands the process mid-run raises InfeasibleStateError
 * naming the failing draw.
 */
std::vector<long> sample_qpolya(const UrnSpec& spec, long n, RandomStream& rng,
				DrawMethod method = DrawMethod::inverse_cdf);

inline constexpr long default_draw_cap = 10'000'000;

/*
 * Draw/reinforce until the last color has been drawn n times; returns the
 * counts w_1..w_k of the other colors.  The returned history always ends
 * on the last color.  Defective regimes can run forever, so the cap bounds
 * the total number of draws and NonterminationError reports it.
 */
std::vector<long> sample_inverse_qpolya(const UrnSpec& spec, long n, RandomStream& rng,
					long draw_cap = default_draw_cap,
					DrawMethod method = DrawMethod::inverse_cdf);

/*
 * r = sum block_sizes independent Bernoulli trials with success probability
 * theta q^{i-1}/(1 + theta q^{i-1}) at trial i; returns successes per block
 * (all k+1 blocks).  Conditioned on their sum the blocks follow the
 * q-hypergeometric law, which is what the cross-validation tests exploit.
 */
std::vector<long> sample_bernoulli_blocks(const std::vector<long>& block_sizes,
					  double theta, const QBase& q,
					  RandomStream& rng);

/*
 * Sequential trials whose success probability is 1 - theta q^{j-1} after
 * j-1 successes; returns the failure counts between consecutive block
 * boundaries (all k+1 blocks).  Needs 0 < theta < 1, and for q > 1 the
 * total success count r is capped by r log q <= -log theta so every stage
 * keeps a positive success probability.
 */
std::vector<long> sample_negative_blocks(const std::vector<long>& block_sizes,
					 double theta, const QBase& q,
					 RandomStream& rng);

/*
 * Empirical-vs-exact comparison.  tv_distance is the total variation
 * distance between the empirical law of the samples and the table plus an
 * overflow cell holding the table's missing mass.  The chi-square statistic
 * pools every cell with expected count below five into the overflow cell
 * (merged_cells counts them) and p_value is the upper chi-square tail of
 * the result.  Samples landing on outcomes of exact probability zero push
 * the statistic to infinity and the p-value to zero.
 */
struct GofReport {
	double tv_distance = 0;
	double chi_square_stat = 0;
	long degrees_of_freedom = 0;
	double p_value = 1;
	long sample_count = 0;
	long merged_cells = 0;
};

GofReport goodness_of_fit(const std::vector<std::vector<long>>& samples,
			  const PmfTable& exact);

// upper regularized incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a), a > 0
double regularized_gamma_q(double a, double x);

}	// namespace qpolya
