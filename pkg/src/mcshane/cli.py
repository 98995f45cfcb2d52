"""Command-line entry point: ``mcshane <command> [options]``.

Exit status: 0 all checks pass, 1 some check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .circle import ConsistencyError, gap_intervals, intervals_csv
from .cusp import LambdaForm, mcshane_term, spiral_observation
from .flips import (
    LabelTree,
    Slope,
    T0Edge,
    UnsupportedSurfaceError,
    build_surface,
    decode,
    encode,
    is_right_blocked,
    right_blocked_example,
)
from .harmonic import FormProvider, RatioForm, TableForm, gap_table, green_sum, total, validate_form
from .planar_tree import AddressError, EdgeAddress, parse_region

DEPTH_CAP = 20
SURFACE_ALIASES = {"torus": (1, 1), "torus2": (1, 2), "sphere3": (0, 3)}
NORMALIZATION_NOTE = (
    "oriented_sum = 2 * (sum of region gaps) / boundary mass; "
    "the factor 2 turns half-masses of oriented regions into gap-interval lengths, "
    "so the McShane sum over simple geodesics is the limit of oriented_sum"
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    genus: int = 1
    punctures: int = 1
    form: str = "modular-torus"
    split: float = 0.5
    depth: Optional[int] = None
    max_n: int = 200
    tol: Optional[float] = None
    emit: str = "text"
    seed: int = 0
    exact: bool = False
    unsafe: bool = False

    def validate(self):
        if self.depth is not None:
            if self.depth < 0:
                raise ConfigError("--depth must be >= 0")
            if self.depth > DEPTH_CAP and not self.unsafe:
                raise ConfigError(f"--depth above {DEPTH_CAP} needs --unsafe")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.max_n < 2:
            raise ConfigError("--max-n must be >= 2")
        if not 0 < self.split < 1:
            raise ConfigError("--split must lie in (0,1)")
        return self

    @property
    def is_torus(self) -> bool:
        return (self.genus, self.punctures) == (1, 1)


@dataclass
class Check:
    name: str
    status: str
    value: object
    target: object
    tolerance: object
    runtime: float = 0.0


@dataclass
class Report:
    command: str
    checks: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    text: str = ""

    def add(self, name, ok, value, target, tol, started):
        self.checks.append(Check(name, "pass" if ok else "fail", value, target, tol, round(time.perf_counter() - started, 6)))

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return "" if v is None else str(v)


def parse_surface(text: str) -> tuple:
    text = text.strip().lower()
    if text in SURFACE_ALIASES:
        return SURFACE_ALIASES[text]
    try:
        g, p = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad surface {text!r}; use genus,punctures or one of {sorted(SURFACE_ALIASES)}") from None
    return g, p


def parse_lambda(text: str, tri):
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text().strip()
        except OSError as exc:
            raise ConfigError(str(exc)) from None
    items = [s.strip() for s in text.split(",") if s.strip()]
    try:
        if all("=" in s for s in items):
            return {k.strip(): float(v) for k, v in (s.split("=", 1) for s in items)}
        return [float(s) for s in items]
    except ValueError:
        raise ConfigError(f"bad decoration {text!r}") from None


def build_form(cfg: RunConfig) -> FormProvider:
    try:
        tri = build_surface(cfg.genus, cfg.punctures)
    except UnsupportedSurfaceError as exc:
        raise ConfigError(str(exc)) from None
    kind, _, arg = cfg.form.partition(":")
    try:
        if kind == "ratio":
            n = LabelTree(tri).root_degree
            return RatioForm.uniform(n, split=cfg.split, exact=cfg.exact)
        if kind == "table":
            return TableForm.load(arg)
        if kind == "modular-torus":
            if not cfg.is_torus:
                raise ConfigError("modular-torus form needs --surface 1,1")
            return LambdaForm(tri, 1, exact=cfg.exact)
        if kind == "lambda":
            return LambdaForm(tri, parse_lambda(arg, tri))
        if kind == "random":
            rng = random.Random(cfg.seed)
            return LambdaForm(tri, [rng.uniform(0.1, 10.0) for _ in tri.edges()])
    except (OSError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot build form {cfg.form!r}: {exc}") from None
    raise ConfigError(f"unknown form {cfg.form!r}")


def cmd_verify_green(cfg: RunConfig) -> Report:
    form = build_form(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-9
    depth = cfg.depth if cfg.depth is not None else 6
    depth = min(depth, getattr(form, "max_depth", depth))
    rep = Report("verify-green", columns=["n", "green_sum", "deviation"])
    started = time.perf_counter()
    mass = form.boundary_mass
    worst = 0.0
    for n in range(1, depth + 1):
        try:
            s = green_sum(form, n)
        except (AddressError, ValueError) as exc:
            rep.add(f"green_sum[{n}]", False, str(exc), float(mass), tol, started)
            return rep
        dev = abs(float(s - mass))
        worst = max(worst, dev)
        rep.rows.append([n, float(s), dev])
    rep.add("green_max_deviation", worst < tol, worst, 0.0, tol, started)
    started = time.perf_counter()
    problems = validate_form(form, depth)
    rep.add("form_valid", not problems, len(problems), 0, getattr(form, "harmonic_tol", tol), started)
    rep.notes.extend(problems[:10])
    return rep


def cmd_sum(cfg: RunConfig, regions: bool = False) -> Report:
    form = build_form(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-9
    depth = cfg.depth if cfg.depth is not None else 5
    mass = float(form.boundary_mass)
    started = time.perf_counter()
    reports = gap_table(form, depth, cfg.max_n, min(tol, 1e-12))
    rep = Report("sum", notes=[NORMALIZATION_NOTE])
    if regions:
        with_trace = isinstance(form, LambdaForm) and cfg.is_torus
        rep.columns = ["region", "depth", "gap_estimate", "interval_fraction", "trace", "length", "term", "residual"]
        for r in reports:
            row = [str(r.region), r.region.depth, float(r.gap_estimate), r.interval_fraction]
            if with_trace:
                term = mcshane_term(form.region_trace(r.region))
                row += [term.trace, term.length, term.term, abs(r.interval_fraction - term.term)]
            else:
                row += [None, None, None, None]
            rep.rows.append(row)
    rep_cols = ["depth", "regions", "oriented_sum", "error_x2"]
    sums = []
    per_depth = []
    for d in range(depth + 1):
        chosen = [r.gap_estimate for r in reports if r.region.depth <= d]
        s = 2 * float(total(chosen, form.exact)) / mass
        sums.append(s)
        per_depth.append([d, len(chosen), s, 1.0 - s])
    if not regions:
        rep.columns, rep.rows = rep_cols, per_depth
    monotone = all(b >= a - tol for a, b in zip(sums, sums[1:]))
    rep.add("oriented_sum_monotone", monotone, sums[-1], "non-decreasing", tol, started)
    rep.add("oriented_sum_at_most_one", sums[-1] <= 1 + tol, sums[-1], 1.0, tol, started)
    rep.add("gaps_converged", all(r.converged for r in reports), sum(not r.converged for r in reports), 0, None, started)
    if isinstance(form, LambdaForm) and cfg.is_torus:
        worst = max(abs(r.interval_fraction - mcshane_term(form.region_trace(r.region)).term) for r in reports)
        rep.add("gap_equals_mcshane_term", worst < max(tol, 1e-9), worst, 0.0, max(tol, 1e-9), started)
    return rep


def cmd_partition(cfg: RunConfig, intervals: bool = False) -> Report:
    form = build_form(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-12
    depth = cfg.depth if cfg.depth is not None else 5
    rep = Report("partition", columns=["depth", "intervals", "covered", "uncovered"])
    started = time.perf_counter()
    last, uncovered_seq = None, []
    mass = form.boundary_mass
    for d in range(depth + 1):
        try:
            found = gap_intervals(form, d, cfg.max_n, tol)
        except ConsistencyError as exc:
            rep.add(f"disjoint[{d}]", False, str(exc), "disjoint", tol, started)
            return rep
        covered = total((g.length for g in found), form.exact)
        unc = float(mass - covered)
        uncovered_seq.append(unc)
        rep.rows.append([d, len(found), float(covered), unc])
        last = found
    rep.add("intervals_disjoint", True, depth, "disjoint", tol, started)
    mono = all(b <= a + 1e-12 for a, b in zip(uncovered_seq, uncovered_seq[1:]))
    rep.add("uncovered_non_increasing", mono, uncovered_seq[-1], "non-increasing", 1e-12, started)
    if intervals and last is not None:
        rep.text = intervals_csv(last)
    return rep


def cmd_code(cfg: RunConfig, encode_arg: Optional[str] = None, decode_arg: Optional[str] = None) -> Report:
    if not cfg.is_torus:
        raise ConfigError("coding is implemented for the once-punctured torus")
    if (encode_arg is None) == (decode_arg is None):
        raise ConfigError("give exactly one of --encode or --decode")
    tree = LabelTree(build_surface(1, 1))
    rep = Report("code")
    started = time.perf_counter()
    try:
        if encode_arg is not None:
            slope = Slope.parse(encode_arg)
            code = encode(tree, slope)
            back = slope if isinstance(code, T0Edge) else decode(tree, code)
            rep.text = str(code)
            rep.add("roundtrip", back == slope, str(back), str(slope), 0, started)
        else:
            addr = EdgeAddress.parse(decode_arg)
            slope = decode(tree, addr)
            back = encode(tree, slope)
            rep.text = str(slope)
            rep.add("roundtrip", back == addr, str(back), str(addr), 0, started)
    except (ValueError, AddressError) as exc:
        raise ConfigError(str(exc)) from None
    return rep


def cmd_blocked_demo(cfg: RunConfig) -> Report:
    try:
        tri = build_surface(cfg.genus, cfg.punctures)
    except UnsupportedSurfaceError as exc:
        raise ConfigError(str(exc)) from None
    depth = cfg.depth if cfg.depth is not None else 5
    tree = LabelTree(tri)
    rep = Report("blocked-demo", columns=["depth", "states", "left_blocked", "right_blocked", "both_blocked"])
    started = time.perf_counter()
    counts = {}
    valences = set()
    for addr, _, lb, rb in tree.enumerate(depth):
        c = counts.setdefault(addr.depth, [0, 0, 0, 0])
        c[0] += 1
        c[1] += lb and not rb
        c[2] += rb and not lb
        c[3] += lb and rb
        valences.add(1 + (not lb) + (not rb))
    for d in sorted(counts):
        rep.rows.append([d, *counts[d]])
    blocked = sum(c[1] + c[2] + c[3] for c in counts.values())
    both = sum(c[3] for c in counts.values())
    rep.notes.append(f"root valence {tree.root_degree}; non-root valences seen {sorted(valences)}")
    if len(tri.punctures()) == 1:
        rep.add("no_blocked_states", blocked == 0, blocked, 0, 0, started)
    elif (cfg.genus, cfg.punctures) == (0, 3):
        rep.notes.append(f"{both} both-blocked states (allowed on the thrice-punctured sphere)")
        rep.add("enumerated", True, sum(c[0] for c in counts.values()), None, None, started)
    else:
        rep.add("valences_in_2_3", valences <= {2, 3}, sorted(valences), [2, 3], 0, started)
        started = time.perf_counter()
        m = right_blocked_example(tri)
        rep.add("monogon_state_right_blocked", is_right_blocked(m), m.name, True, 0, started)
    return rep


def cmd_spiral(cfg: RunConfig, region: str = "root:0", steps: int = 40) -> Report:
    if not cfg.is_torus:
        raise ConfigError("spiral observation is implemented for the once-punctured torus")
    tol = cfg.tol if cfg.tol is not None else 1e-7
    kind, _, arg = cfg.form.partition(":")
    tri = build_surface(1, 1)
    if kind == "modular-torus":
        lam = 1
    elif kind == "lambda":
        lam = parse_lambda(arg, tri)
    else:
        raise ConfigError("spiral needs a lambda form")
    try:
        reg = parse_region(region)
    except (ValueError, AddressError) as exc:
        raise ConfigError(str(exc)) from None
    started = time.perf_counter()
    r = spiral_observation(tri, lam, reg, steps, tol)
    rep = Report("spiral", columns=["side", "step", "trace", "phi", "sibling_phi", "gap_n"])
    for s in r.sides:
        for i, (tr, ph) in enumerate(zip(s.traces, s.phis)):
            sib = s.sibling_phis[i - 1] if i > 0 else None
            g = s.gaps[i - 1] if i > 0 else None
            rep.rows.append([s.side, i, tr, ph, sib, g])
        rep.add(f"traces_increasing[{s.side}]", s.traces_increasing, s.traces[-1], "increasing", 0, started)
        rep.add(f"phi_decreasing[{s.side}]", s.phi_decreasing, s.phis[-1], "decreasing", 0, started)
    rep.add("gap_interval_vs_term", r.gap_error < tol, r.gap_error, r.term, tol, started)
    return rep


def emit(rep: Report, fmt: str, out=sys.stdout):
    if fmt == "json":
        payload = {
            "command": rep.command,
            "passed": rep.passed,
            "checks": [asdict(c) for c in rep.checks],
            "columns": rep.columns,
            "rows": rep.rows,
            "notes": rep.notes,
        }
        if rep.text:
            payload["text"] = rep.text
        out.write(json.dumps(payload, indent=2, default=str) + "\n")
        return
    if fmt == "csv":
        if rep.text and rep.command == "partition":
            out.write(rep.text)
            return
        w = csv.writer(out, lineterminator="\n")
        if rep.command == "sum":
            out.write(f"# {NORMALIZATION_NOTE}\n")
        if rep.columns:
            w.writerow(rep.columns)
            w.writerows([[_fmt(v) for v in row] for row in rep.rows])
        else:
            w.writerow(["check", "status", "value", "target", "tolerance"])
            w.writerows([[c.name, c.status, _fmt(c.value), _fmt(c.target), _fmt(c.tolerance)] for c in rep.checks])
        return
    if rep.text:
        out.write(rep.text if rep.text.endswith("\n") else rep.text + "\n")
    for note in rep.notes:
        out.write(f"# {note}\n")
    if rep.columns and rep.command != "code":
        widths = [max(len(str(c)), 14) for c in rep.columns]
        out.write("  ".join(str(c).rjust(w) for c, w in zip(rep.columns, widths)) + "\n")
        for row in rep.rows:
            out.write("  ".join(_fmt(v).rjust(w) for v, w in zip(row, widths)) + "\n")
    for c in rep.checks:
        out.write(f"{c.status.upper():4} {c.name}: value={_fmt(c.value)} target={_fmt(c.target)} tol={_fmt(c.tolerance)} ({c.runtime:.3f}s)\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--surface", default=None, help="genus,punctures or torus|torus2|sphere3")
    p.add_argument("--form", default="modular-torus", help="ratio | table:PATH | lambda:VALUES | modular-torus | random")
    p.add_argument("--split", type=float, default=0.5, help="left fraction for the ratio form")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--max-n", type=int, default=200)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--emit", choices=("csv", "json", "text"), default="text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="rational arithmetic where the form allows it")
    p.add_argument("--unsafe", action="store_true", help=f"allow depth above {DEPTH_CAP}")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mcshane", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-green", parents=[common], help="mass conservation on spheres")
    s = sub.add_parser("sum", parents=[common], help="partial gap sums by depth")
    s.add_argument("--regions", action="store_true", help="emit the per-region table")
    p = sub.add_parser("partition", parents=[common], help="gap intervals and uncovered measure")
    p.add_argument("--intervals", action="store_true", help="emit the interval table at the final depth")
    c = sub.add_parser("code", parents=[common], help="encode a slope or decode an address")
    c.add_argument("--encode", dest="encode_arg", metavar="P/Q")
    c.add_argument("--decode", dest="decode_arg", metavar="K:WORD")
    sub.add_parser("blocked-demo", parents=[common], help="blocked vertices on multi-puncture surfaces")
    sp = sub.add_parser("spiral", parents=[common], help="traces and masses along boundary paths")
    sp.add_argument("--region", default="root:0")
    sp.add_argument("--steps", type=int, default=40)
    return parser


def config_from_args(args) -> RunConfig:
    default_surface = "1,2" if args.command == "blocked-demo" else "1,1"
    g, p = parse_surface(args.surface or default_surface)
    return RunConfig(
        genus=g,
        punctures=p,
        form=args.form,
        split=args.split,
        depth=args.depth,
        max_n=args.max_n,
        tol=args.tol,
        emit=args.emit,
        seed=args.seed,
        exact=args.exact,
        unsafe=args.unsafe,
    ).validate()


def run(argv=None, out=sys.stdout, err=sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = config_from_args(args)
        if args.command == "verify-green":
            rep = cmd_verify_green(cfg)
        elif args.command == "sum":
            rep = cmd_sum(cfg, args.regions)
        elif args.command == "partition":
            rep = cmd_partition(cfg, args.intervals)
        elif args.command == "code":
            rep = cmd_code(cfg, args.encode_arg, args.decode_arg)
        elif args.command == "blocked-demo":
            rep = cmd_blocked_demo(cfg)
        else:
            rep = cmd_spiral(cfg, args.region, args.steps)
    except ConfigError as exc:
        err.write(f"mcshane: error: {exc}\n")
        return 2
    emit(rep, cfg.emit, out)
    return 0 if rep.passed else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
