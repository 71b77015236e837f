import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import rel_entr
from scipy.stats import entropy as scipy_entropy

from arimoto_speed.catalog import CHANNEL_ROWS, get_channel, identity_channel
from arimoto_speed.channel import (
    ChannelError,
    ChannelMatrix,
    InfiniteDivergenceError,
    MatrixParseError,
    divergences,
    entropy,
    format_matrix,
    kl_divergence,
    kuhn_tucker_check,
    matrix_rank,
    mutual_information,
    mutual_information_direct,
    output_distribution,
    parse_matrix,
    parse_vector,
)

from conftest import random_channel


def test_builtin_matrix_text_round_trips_bit_exactly():
    for name, rows in CHANNEL_ROWS.items():
        text = format_matrix(get_channel(name), comment=name)
        parsed = parse_matrix(text)
        assert np.array_equal(parsed.probabilities, np.array(rows))


def test_parse_ignores_comments_and_blank_lines():
    text = "# header\n\n2 2\n# row one\n0.5 0.5\n  0.25   0.75\n"
    ch = parse_matrix(text)
    assert ch.m == 2 and ch.n == 2
    assert ch.probabilities[1, 1] == 0.75


def test_parse_error_reports_line_and_column():
    with pytest.raises(MatrixParseError) as err:
        parse_matrix("2 2\n0.5 0.5\n0.5 abc\n", source="m.txt")
    assert err.value.line == 3 and err.value.column == 5
    assert str(err.value).startswith("m.txt:3:5")


@pytest.mark.parametrize("text, fragment", [
    ("", "empty"),
    ("2\n0.5 0.5\n", "header"),
    ("2 2\n0.5 0.5\n", "expected 2 rows"),
    ("2 2\n0.5 0.5\n1.0\n", "expected 2 entries"),
])
def test_parse_structural_errors(text, fragment):
    with pytest.raises(MatrixParseError, match=fragment):
        parse_matrix(text)


def test_row_sum_violation_names_the_row():
    with pytest.raises(ChannelError, match="row 2 sums to 0.900"):
        ChannelMatrix(np.array([[0.8, 0.1, 0.1], [0.3, 0.3, 0.3], [0.25, 0.25, 0.5]]))


def test_tiny_row_sum_error_is_renormalized():
    ch = ChannelMatrix(np.array([[0.5, 0.5 + 5e-10], [0.2, 0.8]]))
    assert abs(ch.probabilities[0].sum() - 1) < 1e-15


def test_negative_entries_rejected():
    with pytest.raises(ChannelError, match="negative"):
        ChannelMatrix(np.array([[1.1, -0.1], [0.2, 0.8]]))


def test_rank_deficient_rejected():
    with pytest.raises(ChannelError, match="rank"):
        ChannelMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))


def test_matrix_is_read_only():
    ch = get_channel("phi1")
    with pytest.raises(ValueError):
        ch.probabilities[0, 0] = 0.0


def test_matrix_rank_agrees_with_numpy(rng):
    for _ in range(20):
        m, n = rng.integers(2, 6), rng.integers(2, 7)
        A = rng.normal(size=(m, n))
        if rng.random() < 0.3 and m > 1:
            A[-1] = A[0] * 2.0
        assert matrix_rank(A) == np.linalg.matrix_rank(A)


def test_kl_against_scipy(rng):
    for _ in range(20):
        p, q = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
        assert kl_divergence(p, q) == pytest.approx(np.sum(rel_entr(p, q)), rel=1e-12)


def test_kl_infinite_when_support_escapes():
    with pytest.raises(InfiniteDivergenceError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])


def test_kl_zero_terms_contribute_nothing():
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))


def test_entropy_against_scipy(rng):
    p = rng.dirichlet(np.ones(6))
    assert entropy(p) == pytest.approx(scipy_entropy(p), rel=1e-12)


def test_identity_channel_capacity_is_log_m():
    for m in (2, 3, 7):
        lam = np.full(m, 1.0 / m)
        assert mutual_information(lam, identity_channel(m)) == pytest.approx(math.log(m), abs=1e-14)


@given(st.integers(2, 5), st.integers(2, 6), st.integers(0, 2**31))
def test_mutual_information_matches_direct_double_sum(m, n, seed):
    rng = np.random.default_rng(seed)
    if n < m:
        m, n = n, m
    P = random_channel(rng, m, n)
    lam = rng.dirichlet(np.ones(m))
    fast = mutual_information(lam, P)
    assert fast == pytest.approx(mutual_information_direct(lam, P), rel=1e-10, abs=1e-14)
    assert -1e-12 <= fast <= min(math.log(m), math.log(n)) + 1e-12


def test_divergences_weighted_sum_is_mutual_information(rng):
    P = random_channel(rng, 4, 5)
    lam = rng.dirichlet(np.ones(4))
    assert np.dot(lam, divergences(lam, P)) == pytest.approx(mutual_information(lam, P), rel=1e-12)
    assert np.allclose(output_distribution(lam, P), lam @ P)


def test_kuhn_tucker_detects_optimum_and_non_optimum():
    P = get_channel("phi1")
    good = kuhn_tucker_check([0.4310793352249887, 0.4310793352249887, 0.1378413295500226], P)
    assert good.is_optimal(1e-9)
    bad = kuhn_tucker_check([1 / 3, 1 / 3, 1 / 3], P)
    assert not bad.is_optimal(1e-3)
    assert bad.max_violation > 0


def test_parse_vector_accepts_commas_and_spaces():
    assert np.array_equal(parse_vector("0.5, 0.25 0.25"), [0.5, 0.25, 0.25])
    with pytest.raises(MatrixParseError):
        parse_vector("# only a comment\n")
