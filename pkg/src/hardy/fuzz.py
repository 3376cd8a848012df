"""Seeded random sequences and the invariant suite run by ``hardy fuzz``.

Trial ``i`` draws from ``PCG64(SeedSequence(seed).spawn(trials)[i])``, so a
trial's data depend only on ``(seed, i)`` and not on how trials are spread
over workers.  Aggregates are min/max/count reductions.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import verify_identity
from .families import FamilyParams, copson_verify, fkp_pair, power_pair
from .sequence import FinSeq
from .stability import critical_hardy_check, hardy_deficit, stability_report

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(seed).spawn(trials)"


def trial_rng(seed: int, trials: int, i: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed).spawn(trials)[i]))


def random_sequence(rng: np.random.Generator, support_max: int, real=False) -> FinSeq:
    """Support ``{1..L}`` with ``L`` uniform on ``[1, support_max]``; standard normal parts."""
    length = int(rng.integers(1, support_max + 1))
    vals = rng.standard_normal(length)
    if not real:
        vals = vals + 1j * rng.standard_normal(length)
    return FinSeq.from_array(vals)


@dataclass(frozen=True)
class FuzzConfig:
    p: float
    family: str = "power"
    alpha: float = 0.0
    beta: float = 0.5
    seed: int = 0
    trials: int = 100
    support_max: int = 50
    tol: float = 1e-9


def _pair(cfg: FuzzConfig):
    if cfg.family == "fkp":
        return fkp_pair(cfg.p)
    if cfg.family == "power":
        return power_pair(FamilyParams(cfg.p, cfg.alpha, cfg.beta))
    return None


def run_trial(cfg: FuzzConfig, i: int) -> dict:
    """All invariants for trial ``i``; returns scalar diagnostics and failures."""
    rng = trial_rng(cfg.seed, cfg.trials, i)
    u = random_sequence(rng, cfg.support_max)
    out = {"trial": i, "failures": []}
    tol = cfg.tol

    deficit = hardy_deficit(u, cfg.p)
    scale = float(np.sum(np.abs(u.values) ** cfg.p)) + 1.0
    out["deficit_rel"] = deficit / scale
    if deficit < -tol * scale:
        out["failures"].append("hardy_deficit")

    if cfg.family == "copson":
        if cfg.alpha < 0:
            rep = copson_verify(FinSeq(u.indices + 1, u.values), cfg.p, cfg.alpha)
            out["copson_slack_rel"] = rep.residual / max(rep.scale, 1e-300)
            if not rep.inequality_holds(tol):
                out["failures"].append("copson_inequality")
    else:
        pair = _pair(cfg)
        if pair is not None:
            rep = verify_identity(u, pair)
            out["identity_residual"] = rep.relative_residual
            out["min_remainder_rel"] = float(rep.remainder_terms.min()) / max(rep.scale, 1e-300)
            if not rep.identity_holds(tol):
                out["failures"].append("weighted_identity")
            if out["min_remainder_rel"] < -tol:
                out["failures"].append("remainder_sign")

    if cfg.p >= 2:
        st = stability_report(u, cfg.p)
        out["stability_margin_rel"] = st.margin / (abs(st.deficit) + 1.0)
        if out["stability_margin_rel"] < -tol:
            out["failures"].append("stability")

    v = FinSeq.from_array(rng.standard_normal(u.max_support))
    ch = critical_hardy_check(v, cfg.p)
    out["critical_slack_rel"] = ch.slack / (abs(ch.lhs) + 1.0)
    if out["critical_slack_rel"] < -tol or ch.rhs > ch.rhs_at_first * (1 + tol) + tol:
        out["failures"].append("critical_hardy")
    return out


def _chunk(args):
    cfg, lo, hi = args
    return [run_trial(cfg, i) for i in range(lo, hi)]


MIN_KEYS = ("deficit_rel", "copson_slack_rel", "min_remainder_rel", "stability_margin_rel",
            "critical_slack_rel")
MAX_KEYS = ("identity_residual",)


def run_fuzz(cfg: FuzzConfig, workers: int = 1) -> dict:
    """Run every trial and reduce; ``violations`` lists ``(trial, invariant)`` pairs."""
    if workers > 1 and cfg.trials > 1:
        step = math.ceil(cfg.trials / (4 * workers))
        jobs = [(cfg, lo, min(lo + step, cfg.trials)) for lo in range(0, cfg.trials, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_chunk, jobs) for r in chunk]
    else:
        results = _chunk((cfg, 0, cfg.trials))
    summary = {"trials": cfg.trials, "rng": RNG_ALGORITHM}
    for key in MIN_KEYS:
        vals = [r[key] for r in results if key in r]
        if vals:
            summary["min_" + key] = min(vals)
    for key in MAX_KEYS:
        vals = [r[key] for r in results if key in r]
        if vals:
            summary["max_" + key] = max(vals)
    violations = sorted((r["trial"], f) for r in results for f in r["failures"])
    summary["failed_trials"] = len({t for t, _ in violations})
    return {"summary": summary,
            "violations": [{"trial": t, "invariant": f} for t, f in violations]}
