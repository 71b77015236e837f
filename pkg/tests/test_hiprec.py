import mpmath
import numpy as np
import pytest

from arimoto_speed.catalog import equalized_rows, equalized_weight, get_channel
from arimoto_speed.hiprec import (
    degeneracy_oracle,
    equalize,
    mp_divergences,
    mp_matrix,
    mp_mutual_information,
    mp_step,
    to_mp,
)


def test_decimal_conversion_is_exact():
    assert to_mp(0.238) == mpmath.mpf("0.238")


def test_equalized_point_has_equal_divergences_to_working_precision():
    ch = get_channel("phi1")
    with mpmath.workdps(60):
        lam = equalize(ch, (0, 1, 2), dps=60)
        d = mp_divergences(mp_matrix(ch), lam)
        assert abs(d[0] - d[2]) < mpmath.mpf(10) ** -55
        assert abs(mpmath.fsum(lam) - 1) < mpmath.mpf(10) ** -55


def test_equalized_point_is_fixed_under_extended_precision_update():
    ch = get_channel("phi4")
    with mpmath.workdps(50):
        lam = equalize(ch, (0, 1, 2), dps=50)
        nxt = mp_step(mp_matrix(ch), lam)
        assert max(abs(a - b) for a, b in zip(lam, nxt)) < mpmath.mpf(10) ** -45


def test_oracle_finds_interior_optimum_for_rounded_right_triangle_channel():
    out = degeneracy_oracle(get_channel("phi2"), "phi2", dps=40)
    assert out.support == (0, 1, 2)
    assert float(out.lambda_star[2]) == pytest.approx(1.35755386397e-3, rel=1e-9)


def test_oracle_finds_small_gap_for_rounded_five_symbol_channel():
    out = degeneracy_oracle(get_channel("phi5"), "phi5", dps=40)
    assert out.support == (0, 1)
    gaps = out.as_floats()["divergence_gaps"]
    assert gaps[2] == pytest.approx(-8.11185600007e-4, rel=1e-9)
    assert gaps[2] == gaps[3] == gaps[4]


@pytest.mark.parametrize("name", ["phi2_exact", "phi5_exact"])
def test_equalized_variants_put_the_extra_symbols_on_the_capacity(name):
    ch = get_channel(name)
    with mpmath.workdps(40):
        P = mp_matrix(ch)
        m = len(P)
        lam = [mpmath.mpf(1) / 2, mpmath.mpf(1) / 2] + [mpmath.mpf(0)] * (m - 2)
        d = mp_divergences(P, lam)
        cap = mp_mutual_information(P, lam)
    assert all(abs(float(di - cap)) < 1e-15 for di in d)


def test_equalized_weight_is_stable_in_precision():
    a40 = mpmath.mpf(equalized_weight("phi2_exact", dps=40))
    a60 = mpmath.mpf(equalized_weight("phi2_exact", dps=60))
    assert abs(a40 - a60) < mpmath.mpf(10) ** -35
    rows = equalized_rows("phi5_exact")
    assert np.allclose(np.sum(rows, axis=1), 1.0, atol=1e-15)
