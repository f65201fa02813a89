#pragma once

#include "qpolya/scalar.hpp"

#include <numeric>
#include <optional>
#include <vector>

namespace qpolya {

/*
 * A vector of nonnegative integer counts (x_1..x_k).  Prefix sums s_j and
 * tail sums m_j are the two partial-sum families the weighted recurrences
 * and exponents are written in:
 *
 *     prefix(j) = x_1 + ... + x_j          (prefix(0) = 0)
 *     tail(j)   = x_j + ... + x_k          (tail(k+1) = 0)
 *
 * An optional cap bounds the total at construction time.
 */
class Composition {
public:
	Composition() = default;
	explicit Composition(std::vector<long> parts, std::optional<long> cap = std::nullopt)
		: parts_(std::move(parts)) {
		for (long p : parts_)
			if (p < 0)
				throw DomainError("Composition: parts must be nonnegative");
		if (cap && total() > *cap)
			throw DomainError("Composition: total exceeds the cap");
	}

	size_t size() const { return parts_.size(); }
	bool empty() const { return parts_.empty(); }
	long operator[](size_t i) const { return parts_[i]; }
	const std::vector<long>& parts() const { return parts_; }

	long total() const {
		return std::accumulate(parts_.begin(), parts_.end(), 0L);
	}
	// s_j, 1-based; prefix(0) = 0
	long prefix(size_t j) const {
		long s = 0;
		for (size_t i = 0; i < j && i < parts_.size(); ++i)
			s += parts_[i];
		return s;
	}
	// m_j, 1-based; tail(size()+1) = 0
	long tail(size_t j) const {
		long s = 0;
		for (size_t i = (j == 0 ? 0 : j - 1); i < parts_.size(); ++i)
			s += parts_[i];
		return s;
	}

	auto begin() const { return parts_.begin(); }
	auto end() const { return parts_.end(); }

	friend bool operator==(const Composition& a, const Composition& b) {
		return a.parts_ == b.parts_;
	}

private:
	std::vector<long> parts_;
};

/*
 * Visit every composition (r_1..r_k) of nonnegative integers with total <= n
 * in lexicographic order.  The callback receives the parts vector (borrowed,
 * valid for the duration of the call).
 */
template <typename F>
void for_each_bounded_composition(size_t k, long n, F&& visit) {
	std::vector<long> r(k, 0);
	auto rec = [&](auto&& self, size_t idx, long remaining) -> void {
		if (idx == k) {
			visit(static_cast<const std::vector<long>&>(r));
			return;
		}
		for (long v = 0; v <= remaining; ++v) {
			r[idx] = v;
			self(self, idx + 1, remaining - v);
		}
		r[idx] = 0;
	};
	rec(rec, 0, n);
}

/*
 * Visit every composition (r_1..r_k) with total exactly d, lexicographically.
 */
template <typename F>
void for_each_exact_composition(size_t k, long d, F&& visit) {
	std::vector<long> r(k, 0);
	auto rec = [&](auto&& self, size_t idx, long remaining) -> void {
		if (idx + 1 == k) {
			r[idx] = remaining;
			visit(static_cast<const std::vector<long>&>(r));
			r[idx] = 0;
			return;
		}
		for (long v = 0; v <= remaining; ++v) {
			r[idx] = v;
			self(self, idx + 1, remaining - v);
		}
		r[idx] = 0;
	};
	if (k == 0)
		return;
	rec(rec, 0, d);
}

// number of compositions of length k with total <= n, i.e. C(n+k, k);
// throws SizeError past `cap`
inline long bounded_composition_count(size_t k, long n, long cap) {
	long count = 1;
	for (size_t i = 1; i <= k; ++i) {
		count = count * (n + static_cast<long>(i)) / static_cast<long>(i);
		if (count > cap)
			throw SizeError("composition enumeration exceeds the size cap");
	}
	return count;
}

}	// namespace qpolya
