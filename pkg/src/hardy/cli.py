"""``hardy`` command line: verification runs, weight tables, constants, fuzzing.

Every run writes one JSON report (or a CSV table for ``gen-weights`` and
``compare-weights`` when ``--output`` ends in ``.csv``).  Exit status is 0
when every checked identity or inequality held within ``--tol``, 1 when
some did not, and 2 on errors, which are reported as a JSON error record.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cp_core import cp_lower_constant
from .engine import WeightPair, hardy_weight, verify_identity, verify_inequality
from .errors import DomainError, HardyError, InvalidInputError
from .families import (
    FamilyParams,
    classical_weight,
    copson_constant,
    copson_verify,
    copson_weight,
    fkp_pair,
    fkp_weight,
    power_pair,
    power_weight,
)
from .fuzz import FuzzConfig, run_fuzz
from .seqfile import load_sequence_with_extras
from .stability import muckenhoupt_constant, stability_report

SCHEMA_VERSION = 1
COMMANDS = ("verify", "gen-weights", "stability", "constants", "compare-weights", "fuzz")
FAMILIES = ("power", "copson", "fkp", "classical", "custom")
DEFAULT_TOL = {
    "verify": 1e-9,
    "gen-weights": 0.0,
    "stability": 1e-10,
    "constants": 1e-6,
    "compare-weights": 0.0,
    "fuzz": 1e-9,
}

log = logging.getLogger("hardy")


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float = 2.0
    family: str = "power"
    alpha: float = 0.0
    beta: float = 0.5
    input_path: str | None = None
    output_path: str | None = None
    seed: int = 0
    trials: int = 100
    support_max: int = 50
    tol: float | None = None
    r_max: int = 10**4
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown family {self.family!r}")
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")
        if self.trials < 1 or self.support_max < 1 or self.r_max < 1 or self.workers < 1:
            raise InvalidInputError("trials, support-max, r-max and workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if self.tol is None:
            object.__setattr__(self, "tol", DEFAULT_TOL[self.command])

    def as_dict(self):
        d = asdict(self)
        d.pop("output_path")
        d.pop("workers")  # results do not depend on it
        return d


def _need_input(cfg: RunConfig):
    if cfg.input_path is None:
        raise InvalidInputError(f"{cfg.command} needs --input")
    return load_sequence_with_extras(cfg.input_path)


def _custom_pair(cfg, extras) -> WeightPair:
    if "v" not in extras or "phi" not in extras:
        raise InvalidInputError("custom family needs 'v' and 'phi' tables in the input JSON")
    return WeightPair(extras["v"], extras["phi"], cfg.p, name="custom")


def _family_pair(cfg, extras=None) -> WeightPair:
    if cfg.family == "power":
        return power_pair(FamilyParams(cfg.p, cfg.alpha, cfg.beta))
    if cfg.family in ("fkp", "classical"):
        return fkp_pair(cfg.p)
    if cfg.family == "custom":
        return _custom_pair(cfg, extras or {})
    raise DomainError(f"family {cfg.family!r} has no generic weight pair")


def cmd_verify(cfg):
    u, extras = _need_input(cfg)
    if cfg.family == "copson":
        rep = copson_verify(u, cfg.p, cfg.alpha)
        ok = rep.inequality_holds(cfg.tol)
        what = "copson_inequality"
    elif cfg.family == "classical":
        rep = verify_inequality(u, fkp_pair(cfg.p), lambda n: classical_weight(cfg.p, n))
        ok = rep.inequality_holds(cfg.tol)
        what = "classical_inequality"
    else:
        rep = verify_identity(u, _family_pair(cfg, extras))
        ok = rep.identity_holds(cfg.tol)
        what = "weighted_identity"
    results = rep.as_dict(per_index=True)
    violations = [] if ok else [{"invariant": what, "relative_residual": rep.relative_residual}]
    if rep.remainder_terms.size and rep.remainder_terms.min() < -cfg.tol * rep.scale:
        violations.append({"invariant": "remainder_sign",
                           "min_remainder": float(rep.remainder_terms.min())})
    return results, violations, None


def _family_weights(cfg, ns, extras=None):
    if cfg.family == "classical":
        return classical_weight(cfg.p, ns)
    if cfg.family == "fkp":
        return fkp_weight(cfg.p, ns)
    if cfg.family == "power":
        return power_weight(FamilyParams(cfg.p, cfg.alpha, cfg.beta), ns)
    if cfg.family == "copson":
        return copson_weight(cfg.p, cfg.alpha, ns)
    return hardy_weight(_custom_pair(cfg, extras or {}), ns)


def cmd_gen_weights(cfg):
    extras = _need_input(cfg)[1] if cfg.family == "custom" else None
    ns = np.arange(1, cfg.support_max + 1)
    w = np.asarray(_family_weights(cfg, ns, extras), dtype=float)
    table = {"columns": ["n", "w"], "rows": [[int(n), float(x)] for n, x in zip(ns, w)]}
    return {"family": cfg.family, "table": table}, [], table


def cmd_compare_weights(cfg):
    ns = np.arange(1, cfg.support_max + 1)
    wh = np.asarray(classical_weight(cfg.p, ns))
    wf = np.asarray(fkp_weight(cfg.p, ns))
    wpow = np.asarray(power_weight(FamilyParams(cfg.p, cfg.alpha, cfg.beta), ns))
    cols = ["n", "classical", "fkp", "power", "fkp_minus_classical", "power_minus_fkp"]
    rows = [[int(n), float(a), float(b), float(c), float(b - a), float(c - b)]
            for n, a, b, c in zip(ns, wh, wf, wpow)]
    table = {"columns": cols, "rows": rows}
    bad = [int(n) for n, a, b in zip(ns, wh, wf) if not b > a]
    violations = [{"invariant": "fkp_dominates_classical", "n": bad[:20], "count": len(bad)}] if bad else []
    return {"table": table}, violations, table


def cmd_stability(cfg):
    u, _ = _need_input(cfg)
    rep = stability_report(u, cfg.p)
    violations = [] if rep.holds(cfg.tol) else [{"invariant": "stability", "margin": rep.margin}]
    return rep.as_dict(), violations, None


def cmd_constants(cfg):
    results = {}
    violations = []
    if cfg.p >= 2:
        c1 = cp_lower_constant(cfg.p)
        results["c1"] = c1.as_dict()
        if not (0 < c1.lower and c1.upper <= 1 + cfg.tol):
            violations.append({"invariant": "c1_in_unit_interval", "c1": c1.as_dict()})
    else:
        results["c1"] = None
    mk = muckenhoupt_constant(cfg.p, cfg.r_max)
    results["muckenhoupt"] = mk.as_dict()
    if not mk.within_bound(cfg.tol):
        violations.append({"invariant": "muckenhoupt_bound", "sup_upper": mk.sup_upper,
                           "bound": mk.bound, "r_at_sup": mk.r_at_sup})
    results["copson_constant"] = {"alpha": cfg.alpha, "value": copson_constant(cfg.p, cfg.alpha)}
    results["hardy_constant"] = ((cfg.p - 1) / cfg.p) ** cfg.p
    return results, violations, None


def cmd_fuzz(cfg):
    fc = FuzzConfig(cfg.p, cfg.family, cfg.alpha, cfg.beta, cfg.seed, cfg.trials,
                    cfg.support_max, cfg.tol)
    out = run_fuzz(fc, cfg.workers)
    return out["summary"], out["violations"], None


HANDLERS = {
    "verify": cmd_verify,
    "gen-weights": cmd_gen_weights,
    "stability": cmd_stability,
    "constants": cmd_constants,
    "compare-weights": cmd_compare_weights,
    "fuzz": cmd_fuzz,
}


def _clean(x):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return repr(x)
    return x


def render_json(doc) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def render_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["columns"])
    for row in table["rows"]:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def run(cfg: RunConfig) -> int:
    """Execute one command and write its report; returns the exit status."""
    log.info("running %s with p=%g family=%s", cfg.command, cfg.p, cfg.family)
    results, violations, table = HANDLERS[cfg.command](cfg)
    if table is not None and cfg.output_path and cfg.output_path.lower().endswith(".csv"):
        _emit(render_csv(table), cfg.output_path)
    else:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": cfg.command,
            "config": cfg.as_dict(),
            "results": results,
            "violations": violations,
        }
        _emit(render_json(doc), cfg.output_path)
    for v in violations:
        log.warning("violation: %s", v)
    return 0 if not violations else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--family", choices=FAMILIES, default="power")
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--input", dest="input_path")
    ap.add_argument("--output", dest="output_path")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--support-max", type=int, default=50)
    ap.add_argument("--tol", type=float, default=None,
                    help="tolerance; the default depends on the command")
    ap.add_argument("--r-max", type=int, default=10**4, help="Muckenhoupt range (constants)")
    ap.add_argument("--workers", type=int, default=1, help="processes for fuzz")
    return ap


def _setup_logging():
    level = os.environ.get("HARDY_LOG", "error").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**vars(args))
        return run(cfg)
    except (HardyError, ValueError, OSError, OverflowError, RuntimeError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        record = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        for attr in ("line", "field", "bracket"):
            if getattr(exc, attr, None) is not None:
                record["error"][attr] = getattr(exc, attr)
        _emit(render_json(record), args.output_path)
        return 2


if __name__ == "__main__":
    sys.exit(main())
