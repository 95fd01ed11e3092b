"""Command line front end.

    thinbands widths  --config run.json --out results/
    thinbands rips    ...
    thinbands iet     ...
    thinbands section ...
    thinbands verify  ...

Configs are JSON.  Every file written under ``--out`` starts with comment
lines carrying the config hash and the seed, and contains nothing that
depends on the clock, so a rerun with the same config and seed reproduces
it byte for byte.

Exit codes: 0 success, 1 usage or configuration error, 2 accuracy not
reached, 3 critical level, 4 invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import band_core, invariants
from ._kernels import BACKEND
from .band_core import is_isomorphic, make_Z4, predicted_rips_output, rips_step
from .cone_solver import H_from_w, KSequence, area_sequence, lengths_recursion, solve_widths
from .errors import (
    AccuracyError,
    ConfigurationError,
    CriticalLevelError,
    DomainError,
    InvariantError,
    StructuralError,
)
from .iet_rauzy import IETStage, equidistribution_test, ergodic_cone, mat_R, orbit_csv
from .surface_sections import SurfaceModel, components_csv, gamma_svg, sample_components

log = logging.getLogger("thinbands")

EXIT_OK, EXIT_USAGE, EXIT_ACCURACY, EXIT_CRITICAL, EXIT_INVARIANT = 0, 1, 2, 3, 4
COMMANDS = ("widths", "rips", "iet", "section", "verify")


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one run.  Unknown keys in a config file are rejected."""

    command: str = ""
    ks: dict = None
    depth: int = 24
    prec: int = 128
    tol: float = 1e-12
    # rips
    rips_steps: int = 15
    l0: tuple = (1, 1, 1, 1)
    # iet
    orbit_length: int = 100_000
    eps: Optional[float] = None
    # section
    levels: Optional[tuple] = None
    level_count: int = 20
    per_level: int = 3
    radius: int = 200
    trace_steps: int = 100_000
    svg: bool = False
    # verify: entries (k, row, col, delta) added to mat_R, 1-based indices
    r_perturbation: tuple = ()
    # shared
    seed: int = 0
    jitter: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.ks is None:
            object.__setattr__(self, "ks", {"doubling": {"k0": 2}})
        KSequence.from_json(self.ks)
        ints = ("depth", "prec", "rips_steps", "orbit_length", "level_count",
                "per_level", "radius", "trace_steps", "threads")
        for name in ints:
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigurationError(f"{name} must be a nonnegative integer")
        for name in ("depth", "prec", "radius", "threads", "per_level"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise ConfigurationError("tol must be positive")
        if self.eps is not None and not self.eps > 0:
            raise ConfigurationError("eps must be positive")
        if len(self.l0) != 4 or any(Fraction(x) <= 0 for x in self.l0):
            raise ConfigurationError("l0 must be four positive numbers")
        if self.command and self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        doc = dict(doc)
        for key in ("l0", "levels", "r_perturbation"):
            if doc.get(key) is not None:
                v = doc[key]
                doc[key] = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        try:
            return cls(**doc)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"bad config value: {exc}") from exc

    @property
    def kseq(self) -> KSequence:
        return KSequence.from_json(self.ks)

    def canonical(self) -> str:
        d = asdict(self)
        d.pop("threads")  # worker count never changes results
        return json.dumps(d, sort_keys=True, separators=(",", ":"), default=list)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def header(self) -> List[str]:
        return [f"thinbands {self.command}", f"config_sha256={self.digest}", f"seed={self.seed}"]


class Report:
    """Collects printed lines and output files for one command."""

    def __init__(self, cfg: RunConfig, out: Optional[Path], stream=None):
        self.cfg = cfg
        self.out = out
        self.stream = stream or sys.stdout
        self.data: Dict[str, object] = {"command": cfg.command, "config_sha256": cfg.digest,
                                        "seed": cfg.seed}

    def line(self, text: str) -> None:
        print(text, file=self.stream)

    def write(self, name: str, text: str) -> None:
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)

    def csv(self, name: str, header: Sequence[str], rows) -> None:
        buf = io.StringIO()
        for h in self.cfg.header():
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self.write(name, buf.getvalue())

    def finish(self) -> None:
        self.write(f"{self.cfg.command}.json", json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def _g(x, digits: int = 17) -> str:
    return f"{float(x):.{digits}g}"


def _digits(s) -> str:
    """Decimal digits shared by both ends of an enclosure."""
    lo, hi = str(s.lo), str(s.hi)
    n = 0
    while n < min(len(lo), len(hi)) and lo[n] == hi[n]:
        n += 1
    return lo[:n] or "?"


# -- commands ------------------------------------------------------------

def cmd_widths(cfg: RunConfig, rep: Report) -> int:
    sol = solve_widths(cfg.kseq, cfg.depth, cfg.tol, cfg.prec)
    w0 = sol.w0
    H = H_from_w(sol.exact[0])
    diam = sol.diameters[0]
    rep.line(f"k-sequence: {json.dumps(cfg.ks)}  depth {cfg.depth}  backend {BACKEND}")
    for i, x in enumerate(w0, 1):
        rep.line(f"w0[{i}] in [{x.lo}, {x.hi}]  verified {_digits(x)}")
    rep.line(f"Hilbert diameter {float(diam.hi):.3e} (tolerance {cfg.tol:g})")
    rep.line("H = " + ", ".join(_g(h) for h in H))
    ineq = [sol.stage_inequalities(i) for i in range(cfg.depth + 1)]
    rep.line(f"stage inequalities w1 > w2 + w3, w2 > w3: {all(ineq)}")
    rep.csv("widths.csv", ["stage", "k", "w1", "w2", "w3", "diameter", "inequalities"],
            [[i, sol.ks[i], *(_g(x) for x in sol.stage(i)), _g(sol.diameters[i].hi), int(ineq[i])]
             for i in range(cfg.depth + 1)])
    rep.data.update(w0=[[str(x.lo), str(x.hi)] for x in w0], diameter=str(diam.hi),
                    H=[_g(h) for h in H], stage_inequalities=all(ineq))
    return EXIT_OK


def cmd_rips(cfg: RunConfig, rep: Report) -> int:
    ks = cfg.kseq
    n = cfg.rips_steps
    sol = solve_widths(ks, max(n + 1, 6), tol=1e300, prec=cfg.prec)
    l0 = tuple(Fraction(x) for x in cfg.l0)
    try:
        areas = area_sequence(ks, n, l0, widths=sol) if n else None
    except ConfigurationError:
        areas = area_sequence(ks, n, l0, widths=sol, certify=False)
    Z = make_Z4(sol.exact[0], l0)
    rep.line(f"Z(w0, l0): {len(Z.bands)} bands, area {_g(band_core.complex_area(Z))}")
    rows = []
    ok = True
    for i in range(n):
        k = ks[i]
        l = lengths_recursion(l0, ks, i)
        out = rips_step(Z, k)
        iso = is_isomorphic(out, predicted_rips_output(sol.exact[i + 1], l, k))
        cert = areas.certificates[i] and areas.matrix_certificates[i]
        ok = ok and iso and cert
        w = sol.exact[i + 1]
        rows.append([i, k, *(_g(x) for x in w), *(_g(x) for x in lengths_recursion(l0, ks, i + 1)),
                     _g(areas.areas[i]), _g(areas.areas[i + 1]), int(cert), int(iso)])
        rep.line(f"step {i:2d} k={k:<6d} S_i={_g(areas.areas[i], 8):<12s} "
                 f"S_i+1 > (1-2/k) S_i: {cert}  isomorphic: {iso}")
        Z = make_Z4(w, lengths_recursion(l0, ks, i + 1))
    rep.csv("rips.csv", ["step", "k", "w1", "w2", "w3", "l1", "l2", "l3", "l4", "S_i", "S_next",
                         "certificate", "isomorphic"], rows)
    rep.write("complex.json", band_core.to_json(Z) + "\n")
    rep.data.update(steps=n, all_certified=ok,
                    lower_bound=_g(areas.lower_bound) if areas else None)
    if n == 0:
        rep.line(band_core.to_json(Z, digits=12))
    if not ok:
        raise InvariantError("a Rips step failed its certificate")
    return EXIT_OK


def cmd_iet(cfg: RunConfig, rep: Report) -> int:
    ks = cfg.kseq
    depth = cfg.depth + cfg.depth % 2
    sol = solve_widths(ks, max(depth, 12), tol=1e300, prec=cfg.prec)
    cone = ergodic_cone(ks, max(depth, 12), widths=sol)
    rep.line(f"ergodic cone at depth {cone.depth}: sin angle {cone.sin_angle:.6f}, "
             f"Hilbert separation {cone.hilbert_separation:.6f}, error {cone.error:.3e}")
    rep.line(f"x0 = alpha u + beta v with alpha/beta = {cone.ratio:.15f}, residual {cone.residual:.3e}")
    rep.line(f"relation gap (u3+u6)-(u8+u9) = {cone.relation_gap:.6e}")
    stage = IETStage.from_w([float(x) for x in sol.exact[0]])
    w1 = float(sol.exact[0][0])
    eps = cfg.eps if cfg.eps is not None else 100 * w1 / cfg.orbit_length
    eq = equidistribution_test(stage, cfg.orbit_length, eps, seed=cfg.seed)
    rep.line(f"orbit of {eq.n_steps} points: {eq.total_bins - eq.empty_bins}/{eq.total_bins} "
             f"bins of width {eq.eps:.3e} visited; periodic: {eq.periodic}")
    rep.csv("frequencies.csv", ["label", "frequency", "u", "v"],
            [[j + 1, _g(eq.frequencies[j]), _g(cone.u[j]), _g(cone.v[j])] for j in range(9)])
    rng = np.random.default_rng(cfg.seed)
    start = (1, w1 * float(rng.uniform(0.1, 0.9)))
    rep.write("orbit.csv", orbit_csv(stage, start, min(cfg.orbit_length, 10_000), cfg.header()))
    rep.data.update(alpha=cone.alpha, beta=cone.beta, ratio=cone.ratio, sin_angle=cone.sin_angle,
                    error=cone.error, relation_gap=cone.relation_gap, dense=eq.dense,
                    empty_bins=eq.empty_bins, total_bins=eq.total_bins)
    return EXIT_OK


def cmd_section(cfg: RunConfig, rep: Report) -> int:
    ks = cfg.kseq
    sol = solve_widths(ks, cfg.depth, tol=1e300, prec=cfg.prec)
    model = SurfaceModel.from_solution(sol)
    levels = None if cfg.levels is None else [Fraction(x) for x in cfg.levels]
    res = sample_components(ks, cfg.depth, cfg.level_count, cfg.radius, per_level=cfg.per_level,
                            steps=cfg.trace_steps, seed=cfg.seed, threads=cfg.threads,
                            model=model, jitter=cfg.jitter, levels=levels)
    comps = res.components
    trees = sum(c.is_tree for c in comps)
    two = sum(c.end_estimate == 2 for c in comps)
    rep.line(f"{len(comps)} components on {len(res.levels)} levels, radius {cfg.radius}: "
             f"{trees} trees, {two} with two ends")
    rep.line(f"{res.n_clusters} direction clusters, antipodal: {res.antipodal}, "
             f"spreads (deg): {', '.join(f'{s:.3g}' for s in res.spreads)}")
    rep.line(f"max |d . H| = {res.max_h_component:.3e}")
    rep.write("components.csv", components_csv(comps, cfg.header()))
    rep.csv("directions.csv", ["index", "dir_x", "dir_y", "dir_z", "angle_deg", "cluster"],
            [[j, *(f"{x:.12g}" for x in d), f"{res.angles[j]:.9f}",
              next(c for c, members in enumerate(res.clusters) if j in members)]
             for j, d in enumerate(res.directions)])
    if cfg.svg and comps:
        c = comps[0]
        rep.write("gamma.svg", f"<!-- config_sha256={cfg.digest} seed={cfg.seed} -->\n"
                  + gamma_svg(model, c.seed, Fraction(c.a), min(cfg.radius, 60)))
    rep.data.update(components=len(comps), trees=trees, two_ended=two,
                    clusters=res.n_clusters, antipodal=res.antipodal,
                    spreads=list(res.spreads), max_h_component=res.max_h_component)
    return EXIT_OK


def perturbed_R(cfg: RunConfig) -> Callable[[int], np.ndarray]:
    """``mat_R`` with the configured test perturbations applied."""
    if not cfg.r_perturbation:
        return mat_R
    edits = [tuple(int(x) for x in e) for e in cfg.r_perturbation]
    for e in edits:
        if len(e) != 4 or not (1 <= e[1] <= 9 and 1 <= e[2] <= 9):
            raise ConfigurationError("r_perturbation entries are (k, row, col, delta)")

    def R(k: int) -> np.ndarray:
        M = mat_R(k).copy()
        for kk, i, j, d in edits:
            if kk in (0, k):
                M[i - 1, j - 1] += d
        return M

    return R


def cmd_verify(cfg: RunConfig, rep: Report) -> int:
    results = invariants.run_all(perturbed_R(cfg))
    rows = []
    for c in results:
        rep.line(f"{'PASS' if c.ok else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else ""))
        rows.append([c.name, int(c.ok), c.detail])
    rep.csv("verify.csv", ["check", "ok", "detail"], rows)
    failed = [c.name for c in results if not c.ok]
    rep.data.update(failed=failed, checks=len(results))
    if failed:
        raise InvariantError(f"{len(failed)} invariant check(s) failed: {', '.join(failed)}")
    return EXIT_OK


HANDLERS = {"widths": cmd_widths, "rips": cmd_rips, "iet": cmd_iet,
            "section": cmd_section, "verify": cmd_verify}


# -- entry point -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="thinbands", description="Thin band complexes and plane sections.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--out", type=Path, help="directory for CSV/JSON/SVG output")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--jitter", action="store_true", help="nudge levels that hit a critical value")
    p.add_argument("--threads", type=int, help="worker threads for section sampling")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(args) -> RunConfig:
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigurationError("config must be a JSON object")
    if doc.get("command", args.command) != args.command:
        raise ConfigurationError(f"config is for {doc['command']!r}, not {args.command!r}")
    doc["command"] = args.command
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.jitter:
        doc["jitter"] = True
    if args.threads is not None:
        doc["threads"] = args.threads
    return RunConfig.from_dict(doc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    rep = None
    try:
        cfg = load_config(args)
        log.info("command %s, config %s, kernels %s", cfg.command, cfg.digest, BACKEND)
        rep = Report(cfg, args.out)
        code = HANDLERS[cfg.command](cfg, rep)
        rep.finish()
        return code
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        achieved = getattr(exc, "achieved", None)
        extra = f" (achieved {float(achieved):.3e})" if achieved is not None else ""
        print(f"accuracy not reached: {exc}{extra}", file=sys.stderr)
        return EXIT_ACCURACY
    except CriticalLevelError as exc:
        print(f"critical level: {exc}", file=sys.stderr)
        return EXIT_CRITICAL
    except (InvariantError, StructuralError) as exc:
        if rep is not None:
            rep.finish()
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
