import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractal_riesz.errors import BadProbabilities, IfsError, MissingZeroDigit, NonExpansive, TolUnreachable
from fractal_riesz.ifs_core import (
    attractor_radius,
    contraction_upper,
    ifs_from_dict,
    lipschitz_m,
    load_ifs,
    make_ifs,
    mu_hat,
    radix_digits,
    sample_measure,
    spec_hash,
    symbol_m,
)

COS_ORACLE_2 = math.prod(abs(math.cos(4 * math.pi / 3**k)) for k in range(1, 200))


def test_validate_examples():
    spec = make_ifs(3, [0, 2], [0.5, 0.5])
    assert spec.S == ((3,),)
    with pytest.raises(NonExpansive):
        make_ifs(1, [0, 1])
    with pytest.raises(MissingZeroDigit):
        make_ifs(2, [1, 2])


@pytest.mark.parametrize("p", [[0.3, 0.3], [1.0, 0.0], [0.5], [-0.5, 1.5]])
def test_bad_probabilities(p):
    with pytest.raises(BadProbabilities):
        make_ifs(3, [0, 2], p)


def test_other_invalid_inputs():
    with pytest.raises(IfsError):
        make_ifs(3, [0, 0])
    with pytest.raises(IfsError):
        make_ifs([[2, 0], [0, 2]], [[0, 0], [1]])
    with pytest.raises(NonExpansive):
        make_ifs([[2, 0], [0, 1]], [[0, 0], [1, 0]])


def test_symbol_examples(cantor):
    assert symbol_m(cantor, 0.0) == pytest.approx(1.0)
    assert abs(symbol_m(cantor, 0.25)) < 1e-15
    assert symbol_m(cantor, 1.0) == pytest.approx(1.0)


def test_symbol_vectorized(twodim):
    pts = np.array([[0.1, 0.2], [0.3, -0.4]])
    vals = symbol_m(twodim, pts)
    assert vals.shape == (2,)
    assert vals[1] == pytest.approx(symbol_m(twodim, pts[1]))


def test_lipschitz_examples(cantor):
    assert lipschitz_m(cantor) == pytest.approx(2 * math.pi)
    diag = make_ifs([[2, 0], [0, 2]], [[0, 0], [1, 1]])
    assert lipschitz_m(diag) == pytest.approx(2 * math.pi * 0.5 * math.sqrt(2))


def test_contraction_examples(cantor, lebesgue, twodim):
    assert contraction_upper(cantor) >= 1 / 3
    assert contraction_upper(cantor) == pytest.approx(1 / 3, rel=1e-15)
    assert contraction_upper(lebesgue) == pytest.approx(0.5, rel=1e-15)
    # S^-1 = [[.5, 0], [-.25, .5]]: l1 and linf norms are both 0.75
    assert contraction_upper(twodim) == pytest.approx(0.75, rel=1e-15)
    assert contraction_upper(twodim) >= math.sqrt(0.75 * 0.75)


def test_contraction_needs_power():
    # S^-1 has norm > 1 but its square contracts
    spec = make_ifs([[2, 10], [0, 2]], [[0, 0], [1, 0]])
    ct = spec.contraction
    assert ct.power > 1 and ct.c < 1
    sinv = np.linalg.inv(np.array(spec.S, float))
    for k in range(1, 12):
        assert np.linalg.norm(np.linalg.matrix_power(sinv, k), 2) <= ct.norm_power(k) * (1 + 1e-12)


def test_mu_hat_zero(cantor, twodim):
    assert mu_hat(cantor, 0).value == 1 and mu_hat(cantor, 0).err == 0
    assert mu_hat(twodim, (0, 0)).value == 1


def test_mu_hat_lebesgue_closed_form(lebesgue):
    r = mu_hat(lebesgue, 1, tol=1e-10)
    assert abs(r.value) < 1e-10
    x = 0.37
    closed = (cmath.exp(2j * math.pi * x) - 1) / (2j * math.pi * x)
    assert abs(mu_hat(lebesgue, x, tol=1e-10).value - closed) < 1e-10


def test_mu_hat_cantor_cosine_oracle(cantor):
    assert abs(abs(mu_hat(cantor, 2, tol=1e-10).value) - COS_ORACLE_2) < 1e-9


def test_mu_hat_huge_integer(cantor):
    x = 2 * 3**400 + 2
    # the first 400 factors see 2/3^k mod 1, the rest see 2/3^j: |mu_hat(2)|^2
    assert abs(abs(mu_hat(cantor, x).value) - COS_ORACLE_2**2) < 1e-9


def test_mu_hat_factor_cap(cantor):
    with pytest.raises(TolUnreachable):
        mu_hat(cantor, 0.3, tol=1e-10, max_factors=3)
    with pytest.raises(ValueError):
        mu_hat(cantor, 1, tol=0)


def test_radix_digits_small(cantor, twodim):
    assert radix_digits(cantor, [20]) == [(2,), (0,), (2,)]
    x = (123456789, -987654321)
    digs = radix_digits(twodim, x)
    S = np.array(twodim.S, dtype=object)
    acc = np.zeros(2, dtype=object)
    for d in reversed(digs):
        acc = S.dot(acc) + np.array(d, dtype=object)
    assert tuple(acc) == x


def test_sample_measure(cantor):
    pts = sample_measure(cantor, 500, 20, seed=7)
    assert pts.min() >= 0 and pts.max() <= 1
    assert np.array_equal(pts, sample_measure(cantor, 500, 20, seed=7))
    with pytest.raises(ValueError):
        sample_measure(cantor, 0, 5, 1)


def test_sample_measure_in_attractor_ball(twodim):
    pts = sample_measure(twodim, 300, 25, seed=1)
    assert np.sqrt((pts**2).sum(axis=1)).max() <= attractor_radius(twodim) + 1e-12


def test_spec_files(data_dir, tmp_path):
    spec = load_ifs(data_dir / "cantor3.json")
    assert spec_hash(spec) == spec_hash(make_ifs(3, [0, 2]))
    raw = {"dim": 1, "R": [[3]], "B": [[0], [2]]}
    assert ifs_from_dict(raw).probs == (0.5, 0.5)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec.to_dict()))
    assert load_ifs(path) == spec


SPECS = [make_ifs(3, [0, 2]), make_ifs(2, [0, 1]), make_ifs([[2, 1], [0, 2]], [[0, 0], [1, 0]]),
         make_ifs(4, [0, 1, 3], [0.2, 0.5, 0.3])]
reals = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SPECS), st.lists(reals, min_size=2, max_size=2),
       st.lists(st.integers(-1000, 1000), min_size=2, max_size=2))
def test_symbol_bounded_and_periodic(spec, x, z):
    x, z = np.array(x[: spec.dim]), np.array(z[: spec.dim])
    v = symbol_m(spec, x)
    assert abs(v) <= 1 + 1e-14
    assert abs(symbol_m(spec, x + z) - v) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SPECS), st.lists(reals, min_size=2, max_size=2))
def test_scaling_equation(spec, x):
    x = np.array(x[: spec.dim])
    y = spec.s_inv @ x
    tol = 1e-10
    lhs = mu_hat(spec, list(x), tol)
    rhs = mu_hat(spec, list(y), tol)
    # the factor m(S^-1 x) itself carries a few ulps
    assert abs(lhs.value - symbol_m(spec, y) * rhs.value) <= lhs.err + rhs.err + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SPECS), st.lists(st.integers(-10**12, 10**12), min_size=2, max_size=2))
def test_mu_hat_err_and_refinement(spec, x):
    x = x[: spec.dim]
    tol = 1e-8
    a = mu_hat(spec, x, tol)
    b = mu_hat(spec, x, tol / 10)
    assert a.err <= tol and b.err <= tol / 10
    assert abs(a.value) <= 1 + tol
    assert abs(a.value - b.value) <= 1.1 * tol


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 50), st.sampled_from([1, -1]))
def test_lebesgue_integer_zeros(n, sign):
    tol = 1e-10
    assert abs(mu_hat(make_ifs(2, [0, 1]), sign * n, tol).value) <= 2 * tol
