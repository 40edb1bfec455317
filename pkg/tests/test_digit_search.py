import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractal_riesz.digit_search import (
    DigitSystem,
    SearchBudget,
    amplification_needed,
    amplify,
    audit_sup,
    certify_rho,
    check_incongruence,
    difference_centers,
    find_digit_system,
    min_p_for_delta,
    reaudit,
)
from fractal_riesz.errors import CertificationFailed, SearchExhausted
from fractal_riesz.ifs_core import Contraction, abs_m_grid, make_ifs, sample_measure


def test_incongruence_examples():
    assert check_incongruence(3, 1, [1, 2])
    assert not check_incongruence(3, 1, [1, 4])
    assert check_incongruence(2, 2, [1, 2])
    assert not check_incongruence(3, 1, [3])
    with pytest.raises(ValueError):
        check_incongruence(3, 0, [1, 2])


def test_incongruence_matrix():
    S = ((2, 0), (1, 2))
    assert check_incongruence(S, 1, [(1, 0), (0, 1)])
    assert not check_incongruence(S, 1, [(2, 1), (0, 1)])


def test_min_p_examples():
    assert min_p_for_delta(1 / 3, 0.2) == 3
    assert min_p_for_delta(0.5, 0.5) == 4
    assert min_p_for_delta(0.1, 0.999) == 1
    assert min_p_for_delta(Contraction(0.5, 1.0), 0.5) == 4
    with pytest.raises(ValueError):
        min_p_for_delta(0.5, 1.5)


def test_certify_rho_regression(cantor):
    rho = certify_rho(cantor, 3, [1, 2])
    assert rho < 1
    assert rho == pytest.approx(0.9814747313446056, rel=1e-12)


def test_certify_rho_congruent(cantor):
    with pytest.raises(CertificationFailed):
        certify_rho(cantor, 1, [3])


def test_certify_rho_touching_unimodular(lebesgue):
    # 1/2 + 1/2 = 1: the pair difference sits at an integer, certified sup >= 1
    with pytest.raises(CertificationFailed):
        certify_rho(lebesgue, 1, [1, 3])


def test_audit_is_an_upper_bound(cantor):
    p, A = 3, [1, 2]
    audit = audit_sup(cantor, p, A)
    rng = np.random.default_rng(3)
    for c in difference_centers(cantor.S, p, A):
        u = rng.uniform(-audit.ball_radius, audit.ball_radius, size=(2000, 1))
        assert abs_m_grid(cantor, c + u).max() <= audit.rho


@pytest.mark.parametrize("fixture, p, amp, rho", [
    ("cantor", 12, 4, 0.17638569185961325),
    ("lebesgue", 16, 4, 0.20699388018767226),
    ("twodim", 40, 4, 0.22688407390813153),
])
def test_find_digit_system_regression(request, fixture, p, amp, rho):
    spec = request.getfixturevalue(fixture)
    ds = find_digit_system(spec, 0.25)
    assert (ds.p, ds.amplification) == (p, amp)
    assert ds.rho == pytest.approx(rho, rel=1e-12)
    assert ds.rho < 0.25
    assert check_incongruence(spec.S, ds.p, ds.A)
    assert len(ds.A) == 2


def test_cantor_digits(cantor):
    ds = find_digit_system(cantor, 0.25)
    assert ds.base_A == ((-9,), (9,)) and ds.base_p == 3
    assert ds.A == ((-183960,), (183960,))


def test_find_rejects_bad_target(cantor):
    with pytest.raises(ValueError):
        find_digit_system(cantor, 0.0)


def test_search_exhausted(lebesgue):
    with pytest.raises(SearchExhausted, match="budget"):
        find_digit_system(lebesgue, 0.24, SearchBudget(deltas=(0.3,), n_certify=0))


def test_tiny_budget_still_certified(lebesgue):
    ds = find_digit_system(lebesgue, 0.24, SearchBudget(deltas=(0.9,), n_certify=1, max_pairs=1))
    assert ds.rho < 0.24 and check_incongruence(lebesgue.S, ds.p, ds.A)


def test_amplify_examples(cantor):
    base = DigitSystem(p=1, A=((2,),), rho=0.6, M=1.0, ball_radius=0.5, amplification=1, S=((3,),),
                       contraction=cantor.contraction, base_p=1, base_A=((2,),), base_rho=0.6)
    assert amplify(base, 1) is base
    two = amplify(base, 2)
    assert two.A == ((8,),) and two.p == 2 and two.rho == pytest.approx(0.36)
    assert amplify(base, 3).rho == pytest.approx(0.216)
    assert amplification_needed(0.6, 0.25) == 3
    with pytest.raises(ValueError):
        amplify(base, 0)


def test_serialization_roundtrip(cantor_system):
    raw = json.loads(json.dumps(cantor_system.to_dict()))
    assert DigitSystem.from_dict(raw) == cantor_system


def test_reaudit_half_spacing(cantor, lebesgue, twodim):
    for spec in (cantor, lebesgue, twodim):
        ds = find_digit_system(spec, 0.24)
        fine = reaudit(spec, ds)
        assert fine ** (1 / ds.amplification) <= ds.base_rho + 1e-9


def test_stored_M_consistent(cantor_system, cantor):
    centers = difference_centers(cantor.S, cantor_system.p, cantor_system.A)
    top = max(float(np.sqrt((c**2).sum())) for c in centers)
    assert cantor_system.M <= top * (1 + 1e-12)
    assert cantor_system.rho < 1


def test_measure_samples_respect_bound(cantor, cantor_system):
    # Monte Carlo sanity: empirical |mu_hat| of a digit difference stays below rho
    pts = sample_measure(cantor, 4000, 30, seed=11)
    a = cantor_system.A[1][0] - cantor_system.A[0][0]
    emp = abs(np.exp(2j * np.pi * a * pts[:, 0]).mean())
    assert emp <= cantor_system.rho + 0.05


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([make_ifs(3, [0, 2]), make_ifs(2, [0, 1])]), st.integers(1, 4),
       st.integers(1, 4))
def test_amplify_composition(spec, l1, l2):
    ds = find_digit_system(spec, 0.99)
    a = amplify(amplify(ds, l1), l2)
    b = amplify(ds, l1 * l2)
    assert (a.p, a.A, a.amplification) == (b.p, b.A, b.amplification)
    assert a.rho == b.rho


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([((3,),), ((2,),), ((2, 0), (1, 2)), ((2, 1), (0, 2)), ((1, -2), (2, 1))]),
       st.integers(1, 3), st.data())
def test_incongruence_symmetries(S, p, data):
    d = len(S)
    digit = st.tuples(*[st.integers(-40, 40)] * d)
    A = data.draw(st.lists(digit, min_size=1, max_size=4, unique=True))
    base = check_incongruence(S, p, A)
    assert check_incongruence(S, p, list(reversed(A))) == base
    assert check_incongruence(S, p, [tuple(-v for v in a) for a in A]) == base
