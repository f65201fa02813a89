"""q-deformed urn distributions.

Exact and floating PMFs of the drawing and stopped-drawing laws, their
infinite-urn limits, posterior tables, and seeded simulation.  Exact values
cross the boundary as "num/den" strings; the helpers below lift them to
fractions.Fraction.
"""

from fractions import Fraction

try:
	from . import _qpolya as _impl	# installed layout
except ImportError:	# build-tree layout: the extension sits next to the package
	import _qpolya as _impl

__version__ = _impl.version()

q_number = _impl.q_number
q_binomial = _impl.q_binomial
qpolya_pmf = _impl.qpolya_pmf
qpolya_table = _impl.qpolya_table
inverse_qpolya_pmf = _impl.inverse_qpolya_pmf
inverse_qpolya_table = _impl.inverse_qpolya_table
posterior_table = _impl.posterior_table
sample_qpolya = _impl.sample_qpolya
sample_inverse_qpolya = _impl.sample_inverse_qpolya


def q_number_fraction(x, q):
	return Fraction(_impl.q_number_exact(x, q))


def q_binomial_fraction(x, r, q):
	return Fraction(_impl.q_binomial_exact(x, r, q))


def qpolya_pmf_fraction(counts, m, n, x, q):
	return Fraction(_impl.qpolya_pmf_exact(counts, m, n, x, q))


def inverse_qpolya_pmf_fraction(counts, m, n, w, q):
	return Fraction(_impl.inverse_qpolya_pmf_exact(counts, m, n, w, q))
