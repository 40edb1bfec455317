import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractal_riesz import _kernels_py, kernels
from fractal_riesz.ifs_core import factor_error, make_ifs
from fractal_riesz.verifier import digit_tensor

ck = pytest.importorskip("fractal_riesz._ckernels", reason="compiled kernels not built")

SPECS = [make_ifs(3, [0, 2]), make_ifs(3, [0, 2], [0.3, 0.7]),
         make_ifs([[2, 1], [0, 2]], [[0, 0], [1, 0]])]


def _args(spec, dig, tol=1e-10):
    ct = spec.contraction
    ef = factor_error(spec, max(2 * float(np.abs(dig).max()), 1.0) * spec.dim)
    return (spec.s_inv, spec.b_array, spec.p_array, spec.lipschitz, ct.c, ct.kappa, tol / 2, tol / 4, ef,
            10**6)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_env_forces_fallback():
    env = dict(os.environ, FRACTAL_RIESZ_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import fractal_riesz.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(range(len(SPECS))),
       st.lists(st.integers(-10**15, 10**15), min_size=2, max_size=2), st.integers(0, 60))
def test_digit_product_parity(si, x, shift):
    spec = SPECS[si]
    pt = [v * 3**shift for v in x[: spec.dim]]
    dig = digit_tensor(spec, [pt])[0]
    a = _kernels_py.digit_product(dig, *_args(spec, dig))
    b = ck.digit_product(dig, *_args(spec, dig))
    assert a[2] == b[2] and a[3] == b[3]
    assert abs(a[0] - b[0]) <= 1e-13 and abs(a[1] - b[1]) <= 1e-13 * max(1.0, a[1])


@pytest.mark.parametrize("si", range(len(SPECS)))
def test_gram_parity(si):
    spec = SPECS[si]
    rng = np.random.default_rng(si)
    pts = [tuple(int(v) for v in rng.integers(-10**12, 10**12, size=spec.dim)) for _ in range(40)]
    dig = digit_tensor(spec, pts)
    Gp, Ep, okp = _kernels_py.gram_products(dig, *_args(spec, dig), chunk=97)
    Gc, Ec, okc = ck.gram_products(dig, *_args(spec, dig))
    assert okp == okc
    assert np.abs(Gp - Gc).max() <= 1e-13
    assert np.abs(Ep - Ec).max() <= 1e-20 + 1e-12 * np.abs(Ep).max()


def test_zero_digits_are_free():
    spec = SPECS[1]
    dig = np.zeros((5, 1))
    dig[4, 0] = 1.0
    v, err, nf, ok = _kernels_py.digit_product(dig, *_args(spec, dig))
    v2, err2, _, _ = _kernels_py.digit_product(dig[4:], *_args(spec, dig))
    assert ok and v != 1
    # mu_hat(81) = mu_hat(1): the first four factors are m at integers
    assert abs(v - v2) < 1e-12 and abs(err - err2) < 1e-15
