"""Command line front end: analyze, build, verify, demo, beurling.

Machine-readable JSON goes to stdout, a short human summary to stderr.
Exit codes: 0 ok, 2 invalid input, 3 digit search exhausted,
4 certificate failure, 5 verification failure.
"""
from __future__ import annotations

import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click
import numpy as np

from . import __version__
from .codes import hamming, min_k0
from .digit_search import check_incongruence, find_digit_system, reaudit
from .errors import CertificationFailed, Divergent, IfsError, SearchExhausted, TolUnreachable, Unreachable
from .ifs_core import IfsSpec, contraction_upper, lipschitz_m, load_ifs, spec_hash
from .kernels import BACKEND
from .spectrum import Spectrum, build_spectrum, encode_word, plan_schedule, word_digits
from .verifier import (
    beurling_density,
    cantor_3n_demo,
    dim_lower_bound,
    lebesgue_identity_demo,
    pairwise_decay_audit,
    riesz_certificate,
    spectrum_tail,
)

EXIT_INVALID = 2
EXIT_SEARCH = 3
EXIT_CERT = 4
EXIT_VERIFY = 5


@dataclass
class RunConfig:
    ifs_path: str = ""
    rho_target: float = 0.24
    k: int = 0
    levels: int = 3
    per_level_cap: int = 256
    tol: float = 1e-10
    seed: int = 0
    out_dir: str = "."

    def validate(self) -> "RunConfig":
        if self.k == 0:
            self.k = min_k0()
        if not 0.0 < self.rho_target < 0.25:
            raise click.BadParameter(f"rho_target must lie in (0, 1/4), got {self.rho_target}")
        if self.k < min_k0():
            raise click.BadParameter(f"k must be >= {min_k0()}")
        if self.levels < 1:
            raise click.BadParameter("levels must be >= 1")
        if self.per_level_cap < 2:
            raise click.BadParameter("cap must be >= 2")
        if not 0.0 < self.tol < 1e-3:
            raise click.BadParameter("tol must lie in (0, 1e-3)")
        return self


def _emit(payload: dict, summary: str) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable))
    click.echo(summary, err=True)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _load_spec(path: str) -> IfsSpec:
    try:
        return load_ifs(path)
    except (IfsError, KeyError, TypeError, ValueError) as exc:
        _emit({"valid": False, "error": f"{type(exc).__name__}: {exc}"}, f"invalid IFS: {exc}")
        sys.exit(EXIT_INVALID)


@click.group()
@click.version_option(__version__)
def main():
    """Certified Riesz sequences of exponentials for self-affine measures."""


@main.command()
@click.argument("ifs_path", type=click.Path(exists=True, dir_okay=False))
def analyze(ifs_path):
    """Validate an IFS file and print its contraction and Lipschitz data."""
    spec = _load_spec(ifs_path)
    ct = spec.contraction
    out = {
        "valid": True,
        "spec_hash": spec_hash(spec),
        "dim": spec.dim,
        "c": contraction_upper(spec),
        "kappa": ct.kappa,
        "contraction_power": ct.power,
        "L": lipschitz_m(spec),
        "backend": BACKEND,
    }
    _emit(out, f"valid IFS in dimension {spec.dim}: ||S^-k|| <= {ct.kappa:.4g} * {ct.c:.6g}^k, "
               f"L = {out['L']:.6g}")


def _config_from(ctx_params: dict, config_file: str | None) -> RunConfig:
    cfg = RunConfig()
    if config_file:
        raw = json.loads(Path(config_file).read_text())
        names = {f.name for f in fields(RunConfig)}
        for key, val in raw.items():
            if key not in names:
                raise click.BadParameter(f"unknown config key {key!r}")
            setattr(cfg, key, val)
    for key, val in ctx_params.items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg.validate()


@main.command()
@click.argument("ifs_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--rho-target", type=float)
@click.option("--k", type=int)
@click.option("--levels", type=int)
@click.option("--cap", "per_level_cap", type=int)
@click.option("--tol", type=float)
@click.option("--seed", type=int)
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
def build(ifs_path, config_file, **opts):
    """Search digits, build the spectrum, certify it; writes spectrum.json and report.json."""
    cfg = _config_from({**opts, "ifs_path": ifs_path}, config_file)
    spec = _load_spec(cfg.ifs_path)
    t0 = time.perf_counter()
    try:
        ds0 = find_digit_system(spec, cfg.rho_target)
    except SearchExhausted as exc:
        _emit({"stage": "digit search", "error": str(exc), "best": exc.best},
              f"digit lemma stage failed: {exc}")
        sys.exit(EXIT_SEARCH)
    try:
        ds, sched = plan_schedule(ds0, cfg.levels, cfg.per_level_cap, cfg.rho_target)
        spectrum = build_spectrum(spec, ds, cfg.k, cfg.levels, sched, cfg.per_level_cap)
        rep = riesz_certificate(spec, spectrum, cfg.tol)
        dim = dim_lower_bound(ds, cfg.k, spec, spectrum)
    except (Divergent, Unreachable, TolUnreachable, CertificationFailed) as exc:
        _emit({"stage": "certificate", "error": f"{type(exc).__name__}: {exc}"},
              f"certificate stage failed: {exc}")
        sys.exit(EXIT_CERT)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "spectrum.json").write_text(json.dumps(spectrum.to_dict(), indent=1, sort_keys=True) + "\n")
    report = {
        "config": asdict(cfg),
        "spec_hash": spec_hash(spec),
        "digit_system": ds.to_dict(),
        "q_schedule": spectrum.q_schedule,
        "points": len(spectrum.points),
        "gram": rep.summary(),
        "dim_lower_bound": dim.to_dict(),
        "backend": BACKEND,
        "elapsed_s": time.perf_counter() - t0,
    }
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True, default=_jsonable) + "\n")
    ok = rep.riesz_ok and dim.witnesses_ok
    _emit(report, f"rho = {ds.rho:.6g} (p = {ds.p}), q = {spectrum.q_schedule}, "
                  f"{len(spectrum.points)} points, schur_tail = {rep.schur_tail:.6g}, "
                  f"eig in [{rep.eig_min:.12g}, {rep.eig_max:.12g}], "
                  f"riesz_ok = {rep.riesz_ok}, dim >= {dim.value:.6g}")
    if not ok:
        click.echo("certificate stage failed: Gram bounds or ball-count witnesses", err=True)
        sys.exit(EXIT_CERT)


def _structure_ok(spectrum: Spectrum) -> bool:
    """Words split into codeword blocks of length k*q_n at distance >= q_n."""
    k, qs = spectrum.k, spectrum.q_schedule
    seen: list[set] = [set() for _ in qs]
    for pt in spectrum.points:
        if not 1 <= pt.level <= len(qs) or len(pt.word) != k * sum(qs[: pt.level]):
            return False
        if any(s not in (1, 2) for s in pt.word):
            return False
        pos = 0
        for n in range(pt.level):
            seen[n].add(pt.word[pos:pos + k * qs[n]])
            pos += k * qs[n]
    for n, blocks in enumerate(seen):
        blocks = sorted(blocks)
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if hamming(blocks[i], blocks[j]) < qs[n]:
                    return False
    return True


@main.command()
@click.argument("ifs_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("spectrum_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=1e-10, show_default=True)
def verify(ifs_path, spectrum_path, tol):
    """Re-audit a stored spectrum from scratch."""
    spec = _load_spec(ifs_path)
    raw = json.loads(Path(spectrum_path).read_text())
    audits: dict[str, bool] = {}
    detail: dict = {}
    audits["spec_hash"] = raw.get("spec_hash") == spec_hash(spec)
    if not audits["spec_hash"]:
        _finish_verify(audits, detail)
    spectrum = Spectrum.from_dict(raw)
    ds = spectrum.digit_system
    audits["same_S"] = [list(r) for r in ds.S] == [list(r) for r in spec.S]
    audits["incongruence"] = (check_incongruence(spec.S, ds.base_p, ds.base_A)
                              and check_incongruence(spec.S, ds.p, ds.A))
    try:
        fine = reaudit(spec, ds)
        detail["rho_reaudit"] = fine
        audits["rho_recertified"] = fine < 0.25
    except CertificationFailed as exc:
        detail["rho_reaudit"] = str(exc)
        audits["rho_recertified"] = False
    audits["radix_identity"] = all(encode_word(word_digits(pt.word, ds), ds) == pt.freq
                                   for pt in spectrum.points)
    audits["code_structure"] = _structure_ok(spectrum)
    try:
        tail = spectrum_tail(spectrum)
        detail["schur_tail"] = tail
        audits["schur_tail"] = tail < 1.0
        rep = riesz_certificate(spec, spectrum, tol)
        detail["gram"] = rep.summary()
        audits["gram_bounds"] = bool(rep.riesz_ok)
        decay = pairwise_decay_audit(spec, spectrum, tol, report=rep)
        detail["decay_audit"] = decay
        audits["decay_audit"] = decay <= 2 * tol
    except (Divergent, TolUnreachable) as exc:
        detail["error"] = str(exc)
        audits["schur_tail"] = audits.get("schur_tail", False)
        audits["gram_bounds"] = audits["decay_audit"] = False
    dim = dim_lower_bound(ds, spectrum.k, spec, spectrum)
    detail["dim_lower_bound"] = dim.to_dict()
    audits["beurling_witnesses"] = dim.witnesses_ok
    _finish_verify(audits, detail)


def _finish_verify(audits: dict, detail: dict):
    failed = [name for name, ok in audits.items() if not ok]
    _emit({"audits": audits, "failed": failed, "detail": detail},
          "all audits passed" if not failed else "failed audits: " + ", ".join(failed))
    sys.exit(EXIT_VERIFY if failed else 0)


@main.command()
@click.argument("name")
@click.option("--n", "size", type=int, default=None, help="Demo size (12 for cantor-3n, 32 for lebesgue-identity).")
@click.option("--tol", type=float, default=1e-10, show_default=True)
def demo(name, size, tol):
    """Run a control experiment: cantor-3n or lebesgue-identity."""
    if name == "cantor-3n":
        n = size or 12
        seq = cantor_3n_demo(n, tol)
        inc = [b - a for a, b in zip(seq, seq[1:])]
        _emit({"demo": name, "N": n, "top_eigenvalues": seq, "increments": inc},
              f"top Gram eigenvalue of {{3^0..3^(n-1)}}: {seq[0]:.6f} -> {seq[-1]:.6f}, "
              f"min increment {min(inc):.4g}")
    elif name == "lebesgue-identity":
        n = size or 32
        rep = lebesgue_identity_demo(n, tol)
        dev = float(np.abs(rep.gram - np.eye(n)).max())
        _emit({"demo": name, "N": n, "max_deviation_from_identity": dev,
               "eig_enclosure": [rep.eig_min, rep.eig_max]},
              f"Gram of {{0..{n - 1}}} deviates from I by {dev:.3g}")
    else:
        raise click.BadParameter(f"unknown demo {name!r}; choose cantor-3n or lebesgue-identity",
                                 param_hint="NAME")


@main.command()
@click.argument("spectrum_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--r", type=float, default=None, help="Exponent (default: the certified dimension lower bound).")
def beurling(spectrum_path, r):
    """Dyadic window counts of a stored spectrum."""
    spectrum = Spectrum.from_dict(json.loads(Path(spectrum_path).read_text()))
    theo = dim_lower_bound(spectrum.digit_system, spectrum.k).value
    est = beurling_density(spectrum.points, r if r is not None else theo)
    est.dim_lower_theoretical = theo
    out = est.to_dict()
    _emit(out, f"sup count/h^r at the largest scale: {est.density_r:.6g} "
               f"(r = {est.r:.6g}, theoretical dim >= {theo:.6g})")


if __name__ == "__main__":  # pragma: no cover
    main()
