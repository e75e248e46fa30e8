"""Command-line front end.

Every command builds a :class:`SuiteReport` and exits 0 when all checks pass,
1 when any check fails and 2 on invalid configuration.  Units are
dimensionless (hbar = omega = m = 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

from .checks import CheckReport
from .coherent import CoherentParams, coherent_suite, completeness_suite, required_cutoff
from .fock import FockSpace, algebra_suite, fock_state_suite
from .qcore import QParam
from .qqm import (
    check_canonical_commutator,
    check_spectrum,
    classical_limit_suite,
    qqm_suite,
    spectrum,
)
from .weyl import WeylParams, weyl_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
FORMATS = ("json", "csv", "text")
SCHEMA_VERSION = 1

DEFAULT_Z = (0.3 + 0j, 0.4j, 0.2 - 0.1j)
DEFAULT_S = (0.3, 0.2, 0.25)
DEFAULT_T = (0.2, 0.3, 0.25)

SPECTRUM_COLUMNS = (
    "label", "E_numeric", "E_closed_corrected", "E_closed_printed", "degeneracy_id", "near_degeneracy_id",
)
CHECK_COLUMNS = ("relation", "equation", "sector", "max_residual", "tolerance", "expected", "holds", "passed", "note")
SWEEP_COLUMNS = ("q", "label", "E_numeric", "E_closed_corrected", "E_closed_printed")


class ConfigError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``a``, ``bi``, ``-i`` and similar; decimal point is always ``.``."""
    s = text.strip().replace(" ", "")
    if not s or "j" in s.lower():
        raise ConfigError(f"not a complex literal of the form a+bi: {text!r}")
    if s.endswith("i"):
        body = s[:-1]
        if body == "" or body[-1] in "+-":
            body += "1"
        s = body + "j"
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"not a complex literal of the form a+bi: {text!r}") from None


def parse_complex_list(text: str) -> tuple[complex, ...]:
    return tuple(parse_complex(part) for part in text.split(","))


def format_complex(z: complex) -> str:
    if z.imag == 0:
        return repr(z.real)
    if z.real == 0:
        return f"{z.imag!r}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_sweep(text: str) -> tuple[float, float, int]:
    try:
        q0, q1, steps = text.split(":")
        q0, q1, steps = float(q0), float(q1), int(steps)
    except ValueError:
        raise ConfigError(f"--sweep expects q0:q1:steps, got {text!r}") from None
    if not (0 < q0 < 1 and 0 < q1 < 1):
        raise ConfigError("--sweep endpoints must lie strictly inside (0, 1)")
    if steps < 1 or (steps == 1 and q0 != q1):
        raise ConfigError("--sweep needs steps >= 1 (and steps >= 2 for distinct endpoints)")
    return q0, q1, steps


def sweep_grid(q0: float, q1: float, steps: int) -> list[float]:
    if steps == 1:
        return [q0]
    return [q0 + (q1 - q0) * k / (steps - 1) for k in range(steps)]


@dataclass(frozen=True)
class RunConfig:
    q: float = 0.5
    modes: int = 2
    cutoff: int = 5
    tol: float = 1e-10
    margin: int | None = None
    format: str = "text"
    output: str | None = None

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ConfigError(f"q must lie in the open interval (0, 1), got {self.q!r}")
        if self.modes < 1:
            raise ConfigError(f"modes must be >= 1, got {self.modes}")
        if self.cutoff < 2:
            raise ConfigError(f"cutoff must be >= 2, got {self.cutoff}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol!r}")
        if self.margin is not None and not 0 <= self.margin <= self.cutoff:
            raise ConfigError(f"margin must lie in 0..cutoff ({self.cutoff}), got {self.margin}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")

    @property
    def effective_margin(self) -> int:
        """The ``M // 2`` default applied where a command needs a single sector."""
        return self.cutoff // 2 if self.margin is None else self.margin

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.modes, self.cutoff)

    @property
    def qp(self) -> QParam:
        return QParam(self.q)

    def echo(self) -> dict:
        d = asdict(self)
        d["margin"] = self.effective_margin
        d["margin_source"] = "default" if self.margin is None else "flag"
        return d


@dataclass
class SuiteReport:
    command: str
    config: dict
    checks: list[CheckReport]
    wall_time: float = 0.0
    spectrum: list[dict] | None = None
    sweep: list[dict] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def summary(self) -> dict:
        n_pass = sum(c.passed for c in self.checks)
        return {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass,
                "all_passed": self.passed}

    def to_dict(self) -> dict:
        d = {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary,
            "wall_time": self.wall_time,
        }
        if self.spectrum is not None:
            d["spectrum"] = self.spectrum
        if self.sweep is not None:
            d["sweep"] = self.sweep
        if self.extra:
            d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        return cls(
            command=d["command"],
            config=d["config"],
            checks=[CheckReport.from_dict(c) for c in d["checks"]],
            wall_time=d["wall_time"],
            spectrum=d.get("spectrum"),
            sweep=d.get("sweep"),
            extra=d.get("extra", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _spectrum_rows(entries, levels: int | None = None) -> list[dict]:
    rows = []
    for e in entries[:levels]:
        rows.append({
            "label": list(e.label),
            "E_numeric": e.energy_numeric,
            "E_closed_corrected": e.energy_closed_form,
            "E_closed_printed": e.energy_printed,
            "degeneracy_id": e.degeneracy_group,
            "near_degeneracy_id": e.near_degeneracy_group,
        })
    return rows


def _label_text(label) -> str:
    return "(" + ",".join(str(v) for v in label) + ")"


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_label_text(r[c]) if c == "label" else r[c] for c in columns])
    return buf.getvalue()


def render(report: SuiteReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        if report.command == "spectrum":
            return _csv(SPECTRUM_COLUMNS, report.spectrum)
        return _csv(CHECK_COLUMNS, [c.to_dict() for c in report.checks])
    lines = [f"# {report.command}  " + "  ".join(f"{k}={v}" for k, v in sorted(report.config.items()))]
    for k, v in sorted(report.extra.items()):
        lines.append(f"# {k}: {v}")
    if report.spectrum is not None:
        lines.append(f"{'label':<14}{'E_numeric':>20}{'E_corrected':>20}{'E_printed':>20}{'deg':>5}{'near':>5}")
        for r in report.spectrum:
            lines.append(
                f"{_label_text(r['label']):<14}{r['E_numeric']:>20.14f}{r['E_closed_corrected']:>20.14f}"
                f"{r['E_closed_printed']:>20.14f}{r['degeneracy_id']:>5}{r['near_degeneracy_id']:>5}"
            )
    if report.sweep is not None:
        lines.append(f"# sweep: {len(report.sweep)} rows (q, label, E)")
        for r in report.sweep:
            lines.append(f"{r['q']:.6f} {_label_text(r['label']):<12} {r['E_numeric']:.14f}")
    lines.extend(c.line() for c in report.checks)
    for c in report.checks:
        if c.note and not c.passed:
            lines.append(f"  note: {c.note}")
    s = report.summary
    lines.append(f"{s['passed']}/{s['total']} passed, {s['failed']} failed, {report.wall_time:.2f}s")
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# suites -------------------------------------------------------------------


def _amplitudes(values, default, n: int, flag: str) -> tuple[complex, ...]:
    if values is None:
        return tuple(complex(default[i % len(default)]) for i in range(n))
    if len(values) != n:
        raise ConfigError(f"{flag} needs {n} comma-separated values (one per mode), got {len(values)}")
    return values


def run_relations(cfg: RunConfig, args) -> list[CheckReport]:
    reports = algebra_suite(cfg.space, cfg.qp, margin=cfg.margin, tol=cfg.tol)
    reports.append(fock_state_suite(cfg.space, cfg.qp, tol=min(1e-12, cfg.tol)))
    return reports


def run_commutator(cfg: RunConfig, args) -> list[CheckReport]:
    margin = 2 if cfg.margin is None else cfg.margin
    if margin < 2:
        raise ConfigError(f"the commutator check needs --margin >= 2, got {margin}")
    reports = []
    for i in range(1, cfg.modes + 1):
        reports.extend(check_canonical_commutator(i, cfg.space, cfg.qp, margin, min(1e-11, cfg.tol)))
    return reports


def run_coherent(cfg: RunConfig, args, extra: dict) -> list[CheckReport]:
    z = _amplitudes(args.z, DEFAULT_Z, cfg.modes, "--z")
    params = CoherentParams(z, cfg.qp)
    tail_tol = cfg.tol
    cutoff = max(cfg.cutoff, required_cutoff(params, tail_tol, cfg.cutoff))
    if cutoff != cfg.cutoff:
        extra["coherent_cutoff"] = cutoff
    extra["z"] = ",".join(format_complex(v) for v in z)
    return coherent_suite(params, FockSpace(cfg.modes, cutoff), tol=cfg.tol, tail_tol=tail_tol)


def run_completeness(cfg: RunConfig, args) -> list[CheckReport]:
    return completeness_suite(cfg.space, cfg.qp, tol=cfg.tol, margin=cfg.effective_margin)


def run_weyl(cfg: RunConfig, args, extra: dict) -> list[CheckReport]:
    s = _amplitudes(args.s, DEFAULT_S, cfg.modes, "--s")
    t = _amplitudes(args.t, DEFAULT_T, cfg.modes, "--t")
    extra["s"] = ",".join(format_complex(v) for v in s)
    extra["t"] = ",".join(format_complex(v) for v in t)
    margin = cfg.effective_margin
    if margin < 1:
        raise ConfigError("the Weyl checks need --margin >= 1")
    return weyl_suite(WeylParams(s, t, cfg.qp), cfg.space, margin=margin, tol=cfg.tol)


def run_spectrum(cfg: RunConfig, levels: int | None):
    entries = spectrum(cfg.space, cfg.qp)
    checks = [
        check_spectrum(cfg.space, cfg.qp, "corrected", min(1e-11, cfg.tol)),
        check_spectrum(cfg.space, cfg.qp, "printed", min(1e-11, cfg.tol)),
    ]
    return checks, _spectrum_rows(entries, levels)


def run_sweep(cfg: RunConfig, grid) -> list[dict]:
    rows = []
    for q in grid:
        for r in _spectrum_rows(spectrum(cfg.space, QParam(q))):
            rows.append({"q": q, "label": r["label"], "E_numeric": r["E_numeric"],
                         "E_closed_corrected": r["E_closed_corrected"],
                         "E_closed_printed": r["E_closed_printed"]})
    return rows


def run_report(cfg: RunConfig, args, extra: dict) -> list[CheckReport]:
    reports = run_relations(cfg, args)
    reports += qqm_suite(cfg.space, cfg.qp, margin=cfg.margin, tol=cfg.tol)
    reports += classical_limit_suite(cfg.space, q=1 - 1e-6, commutator_q=1 - 1e-8)
    reports += run_coherent(cfg, args, extra)
    reports += run_completeness(cfg, args)
    reports += run_weyl(cfg, args, extra)
    return reports


# argument parsing -----------------------------------------------------------


def _positive_int(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None


def _complex_list(text):
    try:
        return parse_complex_list(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=float, default=0.5, help="deformation parameter, 0 < q < 1")
    common.add_argument("--modes", type=_positive_int, default=2, help="number of modes n")
    common.add_argument("--cutoff", type=_positive_int, default=5, help="occupation cutoff M per mode (>= 2)")
    common.add_argument("--tol", type=float, default=1e-10,
                        help="identity acceptance; only tightens each check's own tolerance")
    common.add_argument("--margin", type=_positive_int, default=None,
                        help="safe-sector margin (default: per-check, M//2 where a single sector is needed)")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--output", default=None, help="write here (atomically) instead of stdout")

    parser = argparse.ArgumentParser(
        prog="glq",
        description="Verify the gl_q(n)-covariant oscillator algebra on a truncated Fock space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("relations", parents=[common], help="defining relations, number operator, commutator")
    p = sub.add_parser("spectrum", parents=[common], help="energy table of the q-oscillator")
    p.add_argument("--levels", type=_positive_int, default=None, help="show only the lowest K levels")
    p = sub.add_parser("coherent", parents=[common], help="coherent-state normalization and eigen-relation")
    p.add_argument("--z", type=_complex_list, default=None, help="amplitudes, e.g. 0.3,0.1+0.2i")
    sub.add_parser("completeness", parents=[common], help="resolution of the identity")
    p = sub.add_parser("weyl", parents=[common], help="q-exponential shift and Weyl-Heisenberg relations")
    p.add_argument("--s", type=_complex_list, default=None, help="annihilator amplitudes, one per mode")
    p.add_argument("--t", type=_complex_list, default=None, help="creator amplitudes, one per mode")
    sub.add_parser("commutator", parents=[common], help="q-canonical commutator")
    p = sub.add_parser("report", parents=[common], help="run every suite")
    p.add_argument("--z", type=_complex_list, default=None, help="coherent amplitudes, one per mode")
    p.add_argument("--s", type=_complex_list, default=None, help="annihilator amplitudes, one per mode")
    p.add_argument("--t", type=_complex_list, default=None, help="creator amplitudes, one per mode")
    p.add_argument("--sweep", default=None, help="energy flow over q0:q1:steps")
    p.add_argument("--sweep-output", default=None, help="csv file for the sweep rows")
    return parser


def _execute(args) -> SuiteReport:
    cfg = RunConfig(q=args.q, modes=args.modes, cutoff=args.cutoff, tol=args.tol,
                    margin=args.margin, format=args.format, output=args.output)
    start = time.perf_counter()
    extra: dict = {}
    table = sweep = None
    if args.command == "relations":
        checks = run_relations(cfg, args)
    elif args.command == "spectrum":
        checks, table = run_spectrum(cfg, args.levels)
    elif args.command == "coherent":
        checks = run_coherent(cfg, args, extra)
    elif args.command == "completeness":
        checks = run_completeness(cfg, args)
    elif args.command == "weyl":
        checks = run_weyl(cfg, args, extra)
    elif args.command == "commutator":
        checks = run_commutator(cfg, args)
    else:
        grid = sweep_grid(*parse_sweep(args.sweep)) if args.sweep else None
        checks = run_report(cfg, args, extra)
        if grid is not None:
            sweep = run_sweep(cfg, grid)
            extra["sweep_points"] = len(grid)
    report = SuiteReport(args.command, cfg.echo(), checks, spectrum=table, sweep=sweep, extra=extra)
    report.wall_time = round(time.perf_counter() - start, 6)
    return report


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        report = _execute(args)
    except ValueError as exc:
        # domain and configuration errors, including out-of-range amplitudes
        print(f"glq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(report, args.format)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    if report.sweep is not None and getattr(args, "sweep_output", None):
        write_atomic(args.sweep_output, _csv(SWEEP_COLUMNS, report.sweep))
    return EXIT_OK if report.passed else EXIT_FAIL


__all__ = [
    "ConfigError",
    "RunConfig",
    "SuiteReport",
    "build_parser",
    "format_complex",
    "main",
    "main_entry",
    "parse_complex",
    "parse_complex_list",
    "parse_sweep",
    "render",
    "sweep_grid",
    "write_atomic",
]


def main_entry() -> None:
    sys.exit(main())
