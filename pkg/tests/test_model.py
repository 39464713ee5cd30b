import math
from fractions import Fraction

import numpy as np
import pytest

from exseq.jumps import HorizonError, parse_rule
from exseq.model import (
    full_block_prob,
    halting_pmf,
    interval_full_block_prob,
    interval_ratio,
    model_moments,
    multinomial,
    square_closed_form_pmf,
    surjection_count,
    tail_bound,
)

from oracles import composition_full_sum, composition_surjection_count, multinomial_naive


def test_multinomial_examples():
    assert multinomial((1, 1, 1)) == 6
    assert multinomial((2, 0)) == 1
    assert multinomial((3, 2, 1)) == 60
    with pytest.raises(ValueError):
        multinomial((2, -1))


def test_multinomial_matches_factorial_form():
    cases = [(0, 0), (4, 1), (2, 3, 4), (5, 5, 5), (1, 0, 2, 7)]
    for ks in cases:
        assert multinomial(ks) == multinomial_naive(ks)


def test_multinomial_theorem_sums_to_power():
    # the full composition sum over the level equals d^n, exactly
    for d in range(2, 6):
        for n in range(0, 13):
            assert composition_full_sum(n, d) == d**n


def test_binary_level_three_sum():
    assert composition_full_sum(3, 2) == 8


def test_surjection_identity_against_composition_sum():
    # inclusion-exclusion equals the positive-composition multinomial sum
    for d in range(2, 7):
        for c in range(0, d + 7):
            assert surjection_count(c, d) == composition_surjection_count(c, d)


def test_full_block_prob_examples():
    assert full_block_prob(2, 2) == Fraction(1, 2)
    assert full_block_prob(3, 3) == Fraction(6, 27)
    for d in range(2, 8):
        assert full_block_prob(d, d - 1) == 0


def test_p_values_strictly_increasing_to_one():
    for d in range(2, 26):
        prev = Fraction(0)
        for i in range(1, 201):
            p = interval_full_block_prob(d, i)
            assert p > prev
            assert p < 1
            prev = p
        assert 1 - prev < Fraction(1, 100)


def test_tail_bound_holds_exactly():
    # exact comparison: 1 - p_i <= d(1-1/d)^(d-1+i), equality exactly at d=2
    for d in range(2, 26):
        base = Fraction(d - 1, d)
        for i in range(1, 201):
            gap = 1 - interval_full_block_prob(d, i)
            bound = d * base ** (d - 1 + i)
            if d == 2:
                assert gap == bound
            else:
                assert gap < bound


def test_tail_bound_example_d3():
    assert 1 - interval_full_block_prob(3, 1) == Fraction(21, 27)
    assert math.isclose(tail_bound(3, 1), 24 / 27)


def test_tail_bound_ratio_is_geometric():
    for i in range(1, 30):
        assert math.isclose(tail_bound(5, i + 1) / tail_bound(5, i), 4 / 5)


def test_tail_bound_no_asymptotic_gap():
    # (1 - p_i) / bound approaches 1; conservatively it must exceed 0.5 late
    for d in (5, 10, 15):
        for i in range(150, 201, 10):
            gap = float(1 - interval_full_block_prob(d, i))
            assert gap / tail_bound(d, i) > 0.5


def test_interval_ratio_exceeds_one_then_stays_below():
    ratios = [interval_ratio(10, i) for i in range(1, 40)]
    assert any(r > 1 for r in ratios[:10])
    assert all(r < 1 for r in ratios[25:])


def test_interval_ratio_matches_pmf_steps():
    # r_i equals pmf((d+i)^2+1) / pmf((d+i)^2) on the square rule
    d = 6
    m = halting_pmf(d, parse_rule("square", 10000))
    for i in range(1, 6):  # (d+5)^2 + 1 = 122 is still inside the truncated support
        step = m.pmf[(d + i) ** 2 + 1] / m.pmf[(d + i) ** 2]
        assert math.isclose(step, interval_ratio(d, i), rel_tol=1e-9)


def test_pmf_zero_before_first_block_site():
    for d in (3, 5, 8):
        m = halting_pmf(d, parse_rule("square", 20000))
        assert m.first_site == d * d + 1
        assert np.all(m.pmf[: d * d + 1] == 0)
        assert m.pmf[d * d + 1] > 0


def test_pmf_normalisation_within_tolerance():
    for d in (3, 5, 10, 15):
        m = halting_pmf(d, parse_rule("square", 64 * d * d + 4096))
        assert m.tail_mass < 1e-12
        assert abs(m.total_mass() + m.tail_mass - 1.0) < 1e-12


def test_closed_form_matches_running_product():
    # three-branch closed form vs generic product, site for site
    for d in range(4, 16):
        m = halting_pmf(d, parse_rule("square", 64 * d * d + 4096))
        p_floats = [float(p) for p in m.p_values]
        for j in range(1, m.last_site + 1):
            closed = square_closed_form_pmf(d, j, p_floats)
            generic = m.pmf[j]
            if generic > 0:
                assert abs(closed - generic) / generic < 1e-10
            else:
                assert closed == 0.0


def test_model_moments_d4():
    m = halting_pmf(4, parse_rule("square", 20000))
    mm = model_moments(m)
    assert math.isclose(mm.mean, 23.99195, rel_tol=1e-5)
    assert math.isclose(mm.std, 5.239238, rel_tol=1e-5)


def test_model_peak_d10():
    m = halting_pmf(10, parse_rule("square", 20000))
    assert m.argmax == 197
    assert abs(m.peak - 0.0150393) < 1e-6


def test_exact_moments_regression():
    # frozen values of this implementation (exact p table, tail below 1e-12),
    # including the alphabet sizes whose reference table has gaps
    expected = {
        4: (23.991950272269378, 5.239237683355888),
        5: (39.217189828626566, 8.225161139108677),
        6: (59.36660885137839, 11.971327759981214),
        7: (84.98196088747393, 16.51126247857177),
        10: (199.60520100109636, 35.16883201415615),
        15: (543.1608820711828, 84.31950647950497),
        20: (1119.2585484062336, 157.70889138285102),
    }
    for d, (mean, std) in expected.items():
        m = halting_pmf(d, parse_rule("square", 64 * d * d + 4096))
        assert math.isclose(m.mean, mean, rel_tol=1e-10)
        assert math.isclose(m.std, std, rel_tol=1e-10)
        assert m.tail_mean_bound < 1e-6


def test_generic_rule_pmf_factorial():
    # non-square rules go through the generic c(j)-driven product
    m = halting_pmf(4, parse_rule("factorial", 10**6))
    assert m.first_site == 25
    assert m.total_mass() + m.tail_mass == pytest.approx(1.0, abs=1e-12)
    # within-interval decay is geometric, so the mass piles up right after 25
    assert m.argmax == 25
    assert 25 < m.mean < 121


def test_tail_tolerance_unreachable_raises():
    with pytest.raises(HorizonError):
        halting_pmf(5, parse_rule("square", 150), tail_tol=1e-12, max_sites=50)
    with pytest.raises(HorizonError):
        halting_pmf(5, parse_rule("square", 40), tail_tol=1e-12)


def test_model_csv_shape(tmp_path):
    from io import StringIO

    from exseq.model import write_model_csv

    m = halting_pmf(4, parse_rule("square", 20000))
    buf = StringIO()
    write_model_csv(m, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "j,pmf,survival"
    assert len(lines) == m.last_site + 1
    j, pmf, surv = lines[-1].split(",")
    assert int(j) == m.last_site
    assert float(surv) < 1e-12
