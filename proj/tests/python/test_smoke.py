import math
from fractions import Fraction

import pytest

import qpolya


def test_q_number_matches_hand_value():
	assert math.isclose(qpolya.q_number(3, "0.5"), 1.75, rel_tol=1e-15)
	assert qpolya.q_number_fraction(3, "1/2") == Fraction(7, 4)


def test_pmf_exact_and_float_agree():
	exact = qpolya.qpolya_pmf_fraction([1, 2], 1, 2, [1], "1/2")
	assert exact == Fraction(12, 35)
	assert math.isclose(qpolya.qpolya_pmf([1, 2], 1, 2, [1], "0.5"), 12 / 35,
			    rel_tol=1e-12)


def test_table_normalizes():
	t = qpolya.qpolya_table([1, 1, 1], 1, 3, "0.3")
	assert t["defect"] <= 1e-12
	assert not t["truncated"]
	assert len(t["support"]) == 10	# compositions of <= 3 into 2 parts
	assert math.isclose(sum(t["probs"]), 1.0, rel_tol=1e-12)
	te = qpolya.qpolya_table([1, 1, 1], 1, 3, "0.3", exact=True)
	assert te["defect"] == 0.0
	assert sum(Fraction(f) for f in te["fractions"]) == 1


def test_stopped_law_reports_its_tail():
	t = qpolya.inverse_qpolya_table([1, 2], -1, 2, 6, "1/2", exact=True)
	assert t["truncated"]
	assert t["proper"]
	assert t["defect"] <= t["tail_bound"]


def test_posterior_is_a_distribution():
	t = qpolya.posterior_table(2, 1, [1], "1/2", exact=True)
	assert t["fractions"] == ["4/7", "3/7"]


def test_sampling_is_seed_deterministic():
	a = qpolya.sample_qpolya([1, 1], 1, 2, "0.5", 200, seed=42)
	b = qpolya.sample_qpolya([1, 1], 1, 2, "0.5", 200, seed=42)
	assert a == b
	assert len(a) == 200
	assert all(len(row) == 1 and 0 <= row[0] <= 2 for row in a)
	c = qpolya.sample_qpolya([1, 1], 1, 2, "0.5", 200, seed=43)
	assert a != c


def test_config_errors_are_value_errors():
	with pytest.raises(ValueError):
		qpolya.qpolya_pmf([1, 1], -1, 3, [1], "0.5")	# urn runs dry
	with pytest.raises(ValueError):
		qpolya.qpolya_pmf([1, 1], 1, 2, [1], "1")	# q = 1 is not a base
	with pytest.raises(RuntimeError):
		# reinforcement with q < 1 escapes; a tight cap must not spin
		qpolya.sample_inverse_qpolya([1, 2], 1, 2, "0.5", 500, seed=7,
					     draw_cap=50)
