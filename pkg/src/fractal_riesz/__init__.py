"""Certified Riesz sequences of exponentials for self-affine measures."""
from .codes import Codebook, gv_greedy, min_k0, verify_code
from .digit_search import DigitSystem, amplify, find_digit_system
from .ifs_core import IfsSpec, load_ifs, make_ifs, mu_hat
from .kernels import BACKEND
from .spectrum import Schedule, Spectrum, build_spectrum, choose_q1, schur_tail
from .verifier import dim_lower_bound, gram_matrix, riesz_certificate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Codebook",
    "DigitSystem",
    "IfsSpec",
    "Schedule",
    "Spectrum",
    "amplify",
    "build_spectrum",
    "choose_q1",
    "dim_lower_bound",
    "find_digit_system",
    "gram_matrix",
    "gv_greedy",
    "load_ifs",
    "make_ifs",
    "min_k0",
    "mu_hat",
    "riesz_certificate",
    "schur_tail",
    "verify_code",
]
