"""Command-line front end: ``derive``, ``sweep``, ``verify`` and ``dist``.

Exit codes: 0 success, 1 invalid input or usage, 2 verification or
truncation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path

from . import reference
from .criterion import (
    DEFAULT_TOL,
    CountDistribution,
    DistributionError,
    MomentSet,
    build_report,
    classify,
    d_of_l,
    moments_from_distribution,
    sps_verdict,
)
from .fock import EvalPoint, TruncationError, oracle_moments, truncation_check
from .operators import annihilator
from .render import (
    operator_to_json,
    operator_to_latex,
    operator_to_text,
    scalar_to_json,
    scalar_to_latex,
    scalar_to_text,
)
from .shorttime import (
    DEFAULT_MAX_ORDER,
    factorial_moment_operator,
    expect_coherent_vacuum,
    four_wave_mixing,
    taylor_evolve,
)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
CSV_COLUMNS = ("g", "t", "alpha2", "l", "d_symbolic", "d_numeric", "rel_gap", "classification")
GAP_FLOOR = 1e-30

# relative-gap ceilings for the short-time agreement check, keyed by largest g*t
AGREEMENT_BANDS = ((1e-3, 1e-2), (1e-2, 1e-1))


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


@dataclass
class SweepConfig:
    gt_grid: list = field(default_factory=lambda: [1e-3, 3e-3, 1e-2])
    alpha2_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    g: float = 1.0
    l_max: int = 2
    t_order: int = 2
    dims: list | None = None
    tol: float = DEFAULT_TOL
    prop_tol: float = 1e-12
    no_oracle: bool = False
    format: str | None = None
    out: str | None = None

    def validate(self) -> "SweepConfig":
        for name in ("gt_grid", "alpha2_grid"):
            grid = getattr(self, name)
            if not grid:
                raise UsageError(f"{name} is empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise UsageError(f"{name} must be strictly increasing")
            if any(not math.isfinite(x) or x < 0 for x in grid):
                raise UsageError(f"{name} entries must be finite and nonnegative")
        if not 1 <= self.l_max <= 4:
            raise UsageError("l_max must be in 1..4")
        if not 0 <= self.t_order <= DEFAULT_MAX_ORDER:
            raise UsageError(f"t_order must be in 0..{DEFAULT_MAX_ORDER}")
        if self.tol <= 0 or self.prop_tol <= 0:
            raise UsageError("tolerances must be positive")
        if self.dims is not None and (len(self.dims) != 3 or min(self.dims) < 2):
            raise UsageError("dims must be three integers >= 2")
        return self

    def point(self, gt: float, alpha2: float) -> EvalPoint:
        t = gt / self.g if self.g else gt
        return EvalPoint(self.g, t, math.sqrt(alpha2))


@dataclass
class ResultRecord:
    g: float
    t: float
    alpha2: float
    l: int
    d_symbolic: float
    d_numeric: float | None
    rel_gap: float | None
    classification: str
    truncation_ok: bool = True

    def row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


@lru_cache(maxsize=None)
def symbolic_d(l_max: int, t_order: int) -> tuple:
    """``(d(1), ..., d(l_max))`` as exact polynomials for the default pump state."""
    H = four_wave_mixing()
    moments = tuple(
        expect_coherent_vacuum(factorial_moment_operator(H, "a", k, t_order))
        for k in range(1, l_max + 2)
    )
    m = MomentSet(moments, t_order=t_order)
    return tuple(d_of_l(m, l) for l in range(1, l_max + 1))


def _real(z: complex) -> float:
    return float(z.real)


def run_sweep(cfg: SweepConfig) -> list[ResultRecord]:
    ds = symbolic_d(cfg.l_max, cfg.t_order)
    dims = tuple(cfg.dims) if cfg.dims else None
    records = []
    for alpha2 in cfg.alpha2_grid:
        for gt in cfg.gt_grid:
            point = cfg.point(gt, alpha2)
            values = point.symbol_values()
            sym = [_real(d.evaluate(values)) for d in ds]
            numeric = None
            ok = True
            if not cfg.no_oracle:
                report = truncation_check(point, cfg.l_max, dims, cfg.prop_tol)
                ok = report.passed
                try:
                    m = oracle_moments(point, cfg.l_max, dims, cfg.prop_tol)
                    numeric = [d_of_l(m, l) for l in range(1, cfg.l_max + 1)]
                except TruncationError:
                    numeric = None
            for l in range(1, cfg.l_max + 1):
                d_sym = sym[l - 1]
                d_num = numeric[l - 1] if numeric else None
                gap = None if d_num is None else abs(d_num - d_sym) / max(abs(d_sym), GAP_FLOOR)
                cls = classify(d_num if d_num is not None else d_sym, cfg.tol)
                records.append(ResultRecord(point.g, point.t, alpha2, l, d_sym, d_num, gap, cls.value, ok))
    return records


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _records_csv(records: list[ResultRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def _records_json(records: list[ResultRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2) + "\n"


# ---------------------------------------------------------------- derive


def derive(l_max: int, t_order: int) -> dict:
    """All objects of the short-time derivation, keyed for rendering."""
    if not 1 <= l_max <= 4:
        raise UsageError("l_max must be in 1..4")
    if not 0 <= t_order <= DEFAULT_MAX_ORDER:
        raise UsageError(f"t_order must be in 0..{DEFAULT_MAX_ORDER}")
    H = four_wave_mixing()
    a_t = taylor_evolve(H, annihilator("a"), t_order)
    ops, moments = [], []
    for k in range(1, l_max + 2):
        op = factorial_moment_operator(H, "a", k, t_order)
        ops.append(op)
        moments.append(expect_coherent_vacuum(op))
    mean = moments[0]
    powers = [mean.pow_truncated(k, "t", t_order) for k in range(1, l_max + 2)]
    ds = [moments[l] - powers[l] for l in range(1, l_max + 1)]
    return {"a_t": a_t, "ops": ops, "moments": moments, "powers": powers, "d": ds}


def render_derivation(data: dict, fmt: str, t_order: int) -> str:
    if fmt == "json":
        out = {
            "t_order": t_order,
            "A(t)": operator_to_json(data["a_t"]),
            "factorial_moments": [
                {
                    "l": k,
                    "operator": operator_to_json(op),
                    "expectation": scalar_to_json(m),
                    "mean_power": scalar_to_json(p),
                }
                for k, (op, m, p) in enumerate(zip(data["ops"], data["moments"], data["powers"]), start=1)
            ],
            "d": [{"l": l, "value": scalar_to_json(d)} for l, d in enumerate(data["d"], start=1)],
        }
        return json.dumps(out, indent=2) + "\n"
    if fmt == "latex":
        op_r, sc_r = operator_to_latex, scalar_to_latex
        lines = [rf"A(t) &= {op_r(data['a_t'])} \\"]
        for k, (op, m, p) in enumerate(zip(data["ops"], data["moments"], data["powers"]), start=1):
            lines.append(rf"N^{{({k})}}(t) &= {op_r(op)} \\")
            lines.append(rf"\langle N^{{({k})}}(t) \rangle &= {sc_r(m)} \\")
            lines.append(rf"\langle N \rangle^{{{k}}} &= {sc_r(p)} \\")
        for l, d in enumerate(data["d"], start=1):
            lines.append(rf"d({l}) &= {sc_r(d)} \\")
        return "\\begin{align*}\n" + "\n".join(lines) + "\n\\end{align*}\n"
    if fmt == "text":
        op_r, sc_r = operator_to_text, scalar_to_text
        lines = [f"A(t) = {op_r(data['a_t'])}"]
        for k, (op, m, p) in enumerate(zip(data["ops"], data["moments"], data["powers"]), start=1):
            lines.append(f"N^({k})(t) = {op_r(op)}")
            lines.append(f"<N^({k})(t)> = {sc_r(m)}")
            lines.append(f"<N>^{k} = {sc_r(p)}")
        for l, d in enumerate(data["d"], start=1):
            lines.append(f"d({l}) = {sc_r(d)}")
        return "\n".join(lines) + "\n"
    raise UsageError(f"unsupported format {fmt!r} for derive (text, latex, json)")


# ---------------------------------------------------------------- verify


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _predicted_gap_exponent(l: int, t_order: int) -> int | None:
    """Power of ``t`` in the relative gap, read off the next nonvanishing engine order."""
    higher = t_order + 2
    if t_order < 2 or higher > DEFAULT_MAX_ORDER:
        return None
    base = symbolic_d(l, t_order)[l - 1]
    extra = symbolic_d(l, higher)[l - 1] - base
    if base.is_zero() or extra.is_zero():
        return None
    return extra.min_degree("t") - base.min_degree("t")


def run_verify(cfg: SweepConfig) -> list[Check]:
    checks: list[Check] = []
    order = cfg.t_order
    ds = symbolic_d(cfg.l_max, order)

    # exact symbolic reproductions
    if order >= 2:
        H = four_wave_mixing()
        a_t = taylor_evolve(H, annihilator("a"), 2)
        checks.append(Check("symbolic A(t)", a_t == reference.pump_annihilator_series(), operator_to_text(a_t)))
        for l in (1, 2):
            if l <= cfg.l_max:
                lead = ds[l - 1].truncate("t", 2)
                checks.append(Check(f"symbolic d({l})", lead == reference.d_leading(l), scalar_to_text(lead)))
        if cfg.l_max >= 2:
            ratio_ok = ds[1].truncate("t", 2) == ds[0].truncate("t", 2) * (3 * reference.modulus2)
            checks.append(Check("ratio d(2) = 3|α|² d(1)", ratio_ok, ""))
    else:
        zero = all(d.is_zero() for d in ds)
        checks.append(Check(f"symbolic d(l) at t-order {order}", zero, "order-0 mode: all d(l) are zero" if zero else ""))

    dims = tuple(cfg.dims) if cfg.dims else None

    # truncation at the largest time of each amplitude
    for alpha2 in cfg.alpha2_grid:
        rep = truncation_check(cfg.point(cfg.gt_grid[-1], alpha2), cfg.l_max, dims, cfg.prop_tol)
        checks.append(Check(
            f"truncation |α|²={alpha2:g}", rep.passed,
            rep.reason or f"max relative change {rep.max_rel_change:.2e}, dims {rep.dims}",
        ))

    # short-time agreement with the oracle
    gaps: dict[tuple[float, int], list[float]] = {}
    for alpha2 in cfg.alpha2_grid:
        for gt in cfg.gt_grid:
            point = cfg.point(gt, alpha2)
            try:
                m = oracle_moments(point, cfg.l_max, dims, cfg.prop_tol)
            except TruncationError as exc:
                checks.append(Check(f"oracle gt={gt:g} |α|²={alpha2:g}", False, str(exc)))
                continue
            for l in range(1, cfg.l_max + 1):
                d_num = d_of_l(m, l)
                d_sym = _real(ds[l - 1].evaluate(point.symbol_values()))
                gap = abs(d_num - d_sym) / max(abs(d_sym), GAP_FLOOR)
                gaps.setdefault((alpha2, l), []).append(gap)
                name = f"oracle d({l}) gt={gt:g} |α|²={alpha2:g}"
                if order < 2:
                    checks.append(Check(name, True, f"order-0 mode, gap {gap:.3e} = |d_numeric| scale"))
                    continue
                bound = next((b for limit, b in AGREEMENT_BANDS if gt <= limit * (1 + 1e-12)), None)
                passed = bound is None or gap <= bound
                detail = f"rel gap {gap:.3e}" + (f" (bound {bound:g})" if bound is not None else " (no bound)")
                checks.append(Check(name, passed, detail))

    if order >= 2 and len(cfg.gt_grid) >= 2:
        for (alpha2, l), series in sorted(gaps.items()):
            if len(series) != len(cfg.gt_grid):
                continue
            shrinking = all(b > a for a, b in zip(series, series[1:]))
            checks.append(Check(f"gap decreases with t, d({l}) |α|²={alpha2:g}", shrinking,
                                " < ".join(f"{x:.2e}" for x in series)))
            p = _predicted_gap_exponent(l, order)
            if p is None:
                continue
            step = cfg.gt_grid[-1] / cfg.gt_grid[-2]
            observed = math.log(series[-1] / series[-2]) / math.log(step)
            checks.append(Check(
                f"gap scaling d({l}) |α|²={alpha2:g}", abs(observed - p) <= 0.5,
                f"observed exponent {observed:.3f}, engine predicts {p}",
            ))

    # coherence null: no coupling means Poissonian statistics at all times
    for alpha2 in cfg.alpha2_grid[:1]:
        point = EvalPoint(0.0, cfg.gt_grid[-1], math.sqrt(alpha2))
        try:
            m = oracle_moments(point, cfg.l_max, dims, cfg.prop_tol)
            worst = max(abs(d_of_l(m, l)) for l in range(1, cfg.l_max + 1))
            sym_zero = all(d.subs({"g": 0}).is_zero() for d in ds)
            checks.append(Check("coherence null g=0", worst <= 1e-10 and sym_zero, f"max |d| {worst:.2e}"))
        except TruncationError as exc:
            checks.append(Check("coherence null g=0", False, str(exc)))
    return checks


# ---------------------------------------------------------------- dist


def dist_report(path: str, l_max: int, tol: float) -> dict:
    p = CountDistribution.load(path)
    m = moments_from_distribution(p, l_max)
    report = build_report(m, tol)
    ok, why = sps_verdict(report, l_max)
    out = report.to_dict()
    out["sps_verdict"] = {"l_required": l_max, "passes": ok, "explanation": why}
    return out


# ---------------------------------------------------------------- argparse


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="antibunching", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("derive", help="print the short-time derivation of A(t), N^(l)(t) and d(l)")
    p.add_argument("--l-max", type=int, default=2)
    p.add_argument("--t-order", type=int, default=2)
    p.add_argument("--format", default="text")
    p.add_argument("--out")

    for name, help_ in (("sweep", "tabulate d(l) over a g*t by |alpha|^2 grid"),
                        ("verify", "check the symbolic results against the Fock-space oracle")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file with SweepConfig fields")
        p.add_argument("--l-max", type=int)
        p.add_argument("--t-order", type=int)
        p.add_argument("--g", type=float)
        p.add_argument("--gt-grid", type=_floats)
        p.add_argument("--alpha2-grid", type=_floats)
        p.add_argument("--dims", type=_ints)
        p.add_argument("--tol", type=float)
        p.add_argument("--no-oracle", action="store_true", default=None)
        p.add_argument("--format")
        p.add_argument("--out")

    p = sub.add_parser("dist", help="evaluate the criterion on a photon-number distribution file")
    p.add_argument("path")
    p.add_argument("--l-max", type=int, default=2)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--format", default="json")
    p.add_argument("--out")
    return parser


def _config_from_args(args) -> SweepConfig:
    cfg = SweepConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        known = {f.name for f in fields(SweepConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg = SweepConfig(**{**asdict(cfg), **data})
    for key in ("l_max", "t_order", "g", "gt_grid", "alpha2_grid", "dims", "tol", "no_oracle", "format", "out"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "derive":
            data = derive(args.l_max, args.t_order)
            _write(render_derivation(data, args.format, args.t_order), args.out)
            return EXIT_OK

        if args.command == "dist":
            if args.format != "json":
                raise UsageError("dist only writes json")
            try:
                out = dist_report(args.path, args.l_max, args.tol)
            except OSError as exc:
                raise UsageError(str(exc)) from None
            _write(json.dumps(out, indent=2) + "\n", args.out)
            return EXIT_OK

        cfg = _config_from_args(args)
        if cfg.format is None:
            cfg.format = "csv" if args.command == "sweep" else "text"
        if args.command == "sweep":
            if cfg.format not in ("csv", "json"):
                raise UsageError("sweep writes csv or json")
            records = run_sweep(cfg)
            text = _records_csv(records) if cfg.format == "csv" else _records_json(records)
            _write(text, cfg.out)
            flagged = [r for r in records if not r.truncation_ok]
            for r in flagged:
                print(f"truncation check failed at g={r.g:g} t={r.t:g} |alpha|^2={r.alpha2:g} l={r.l}",
                      file=sys.stderr)
            return EXIT_FAIL if flagged else EXIT_OK

        if cfg.format not in ("text", "json"):
            raise UsageError("verify writes text or json")
        start = time.perf_counter()
        checks = run_verify(cfg)
        elapsed = time.perf_counter() - start
        failed = [c for c in checks if not c.passed]
        if cfg.format == "json":
            text = json.dumps({"passed": not failed, "seconds": round(elapsed, 3),
                               "checks": [asdict(c) for c in checks]}, indent=2) + "\n"
        else:
            lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  [{c.detail}]" if c.detail else "")
                     for c in checks]
            lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed in {elapsed:.1f} s")
            text = "\n".join(lines) + "\n"
        _write(text, cfg.out)
        return EXIT_FAIL if failed else EXIT_OK
    except (UsageError, DistributionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
