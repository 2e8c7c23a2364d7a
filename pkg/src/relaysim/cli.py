"""Command-line entry point: ``relaysim simulate | preset | verify``."""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from relaysim.montecarlo import OutageCurve, SweepSpec, estimate
from relaysim.protocol import TrialConfig
from relaysim.schemes import FIG2_SCHEMES, PowerConfig, SchemeKind
from relaysim.verification import run_checks

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFY = 2
EXIT_IO = 3

DEFAULT_SEED = 1
DEFAULT_TRIALS = 1_000_000
SEED_ENV = "RELAYSIM_SEED"

CSV_FIELDS = (
    "scheme", "axis_name", "axis_value", "p_s_dB", "p_r_dB", "r_tar", "m",
    "m_prime_mode", "trials", "outage_count", "outage_prob", "ci_low", "ci_high",
    "master_seed",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def parse_range(text: str, integer: bool = False) -> tuple:
    """Parse ``"a"``, ``"a,b,c"`` or inclusive ``"start:stop[:step]"``."""
    conv = int if integer else float
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or stop < start:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            vals = [start + k * step for k in range(count)]
            # snap accumulated float error back onto the grid
            vals = [round(v, 12) for v in vals]
        else:
            vals = [float(p) for p in text.split(",")]
        if integer and any(v != int(v) for v in vals):
            raise ValueError
        return tuple(conv(v) for v in vals)
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None


def preset_fig2(pr_db: tuple | None = None, trials: int = DEFAULT_TRIALS) -> SweepSpec:
    """Four active relays, R_tar = 4, relay power swept 0..20 dB."""
    base = TrialConfig(
        m=4, n_t=1, power=PowerConfig.from_db(20.0, 0.0), r_tar=4.0,
        schemes=FIG2_SCHEMES, fixed_mprime=4,
    )
    values = pr_db if pr_db is not None else tuple(float(v) for v in range(0, 21))
    return SweepSpec("p_r_dB", values, base, trials)


def preset_fig3(m_values: tuple | None = None, trials: int = DEFAULT_TRIALS) -> SweepSpec:
    """P_s = 20 dB, P_r = 0 dB, R_tar = 4, random decode set, M swept 1..16."""
    values = m_values if m_values is not None else tuple(range(1, 17))
    base = TrialConfig(
        m=max(values), n_t=1, power=PowerConfig.from_db(20.0, 0.0), r_tar=4.0,
        schemes=FIG2_SCHEMES, fixed_mprime=None,
    )
    return SweepSpec("m", values, base, trials)


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _prob(x: float) -> str:
    return format(float(x), ".17g")


def curve_records(curve: OutageCurve) -> list[dict]:
    """Flatten a curve into CSV/JSON records, one per (scheme, axis value)."""
    rows = []
    for pt in curve.points():
        p_s_db, p_r_db = curve.point_db(pt)
        cfg = pt.config
        rows.append({
            "scheme": pt.scheme.value,
            "axis_name": curve.sweep.axis,
            "axis_value": pt.axis_value,
            "p_s_dB": p_s_db,
            "p_r_dB": p_r_db,
            "r_tar": cfg.r_tar,
            "m": cfg.m,
            "m_prime_mode": "random" if cfg.fixed_mprime is None else f"fixed:{cfg.fixed_mprime}",
            "trials": pt.trials,
            "outage_count": pt.outage_count,
            "outage_prob": pt.outage_prob,
            "ci_low": pt.ci_low,
            "ci_high": pt.ci_high,
            "master_seed": curve.master_seed,
        })
    return rows


def render(curve: OutageCurve, fmt: str) -> str:
    records = curve_records(curve)
    if not records:
        raise UsageError("curve is empty")
    if fmt == "json":
        sweep = curve.sweep
        meta = dict(curve.metadata)
        meta.update({
            "axis_name": sweep.axis,
            "axis_values": list(sweep.values),
            "trials": sweep.trials,
            "n_t": sweep.base.n_t,
            "schemes": [s.value for s in sweep.base.schemes],
        })
        return json.dumps({"metadata": meta, "records": records}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for rec in records:
        row = []
        for key in CSV_FIELDS:
            val = rec[key]
            if key in ("outage_prob", "ci_low", "ci_high"):
                row.append(_prob(val))
            elif isinstance(val, str):
                row.append(val)
            else:
                row.append(_num(val))
        writer.writerow(row)
    return buf.getvalue()


def emit(curve: OutageCurve, fmt: str = "csv", path: str | None = None) -> None:
    """Serialize ``curve``; files are written atomically (all or nothing)."""
    text = render(curve, fmt)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".relaysim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def parse_schemes(text: str) -> tuple[SchemeKind, ...]:
    names = [t for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError("no schemes given")
    try:
        return tuple(SchemeKind.parse(n) for n in names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def sweep_from_args(args) -> SweepSpec:
    """Build the sweep for ``simulate``; exactly one flag may carry several values."""
    schemes = parse_schemes(args.schemes)
    m_vals = parse_range(args.m, integer=True)
    ps_vals = parse_range(args.ps_db)
    pr_vals = parse_range(args.pr_db_range)
    multi = [name for name, v in (("m", m_vals), ("p_s_dB", ps_vals), ("p_r_dB", pr_vals)) if len(v) > 1]
    if len(multi) > 1:
        raise UsageError(f"only one swept axis allowed, got {multi}")
    axis = multi[0] if multi else "p_r_dB"
    base = TrialConfig(
        m=m_vals[0] if axis != "m" else max(m_vals),
        n_t=args.nt,
        power=PowerConfig.from_db(ps_vals[0], pr_vals[0]),
        r_tar=args.rtar,
        schemes=schemes,
        fixed_mprime=args.mprime,
    )
    values = {"m": m_vals, "p_s_dB": ps_vals, "p_r_dB": pr_vals}[axis]
    return SweepSpec(axis, values, base, args.trials)


def _add_run_flags(p, *, sweep_flags: bool):
    if sweep_flags:
        p.add_argument("--schemes", default=",".join(s.value for s in FIG2_SCHEMES),
                       help="comma-separated scheme names")
        p.add_argument("--m", default="4", help="total relays; a range sweeps M")
        p.add_argument("--mprime", type=int, default=None,
                       help="fixed number of active relays (bypasses the first hop)")
        p.add_argument("--nt", type=int, default=1, help="antennas per relay")
        p.add_argument("--ps-db", default="20", help="source power in dB; a range sweeps it")
        p.add_argument("--pr-db-range", default="0:20:1",
                       help="relay power in dB: value, list, or start:stop[:step]")
        p.add_argument("--rtar", type=float, default=4.0, help="target rate, bits/symbol")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=None, help=f"master seed (fallback: ${SEED_ENV})")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relaysim", description="Distributed beamforming outage simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a free-form sweep")
    _add_run_flags(sim, sweep_flags=True)

    pre = sub.add_parser("preset", help="reproduce a figure preset")
    pre.add_argument("name", choices=("fig2", "fig3"))
    pre.add_argument("--pr-db-range", default=None, help="override the fig2 relay power sweep")
    pre.add_argument("--m", default=None, help="override the fig3 relay-count sweep")
    _add_run_flags(pre, sweep_flags=False)

    ver = sub.add_parser("verify", help="run the built-in invariant and oracle checks")
    ver.add_argument("--seed", type=int, default=None)
    return parser


def _run_verify(seed: int) -> int:
    results = run_checks(master_seed=seed)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        seed = resolve_seed(args.seed)
        if args.command == "verify":
            return _run_verify(seed)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        if args.command == "preset":
            if args.name == "fig2":
                if args.m is not None:
                    raise UsageError("--m does not apply to fig2")
                pr = parse_range(args.pr_db_range) if args.pr_db_range else None
                sweep = preset_fig2(pr, args.trials)
            else:
                if args.pr_db_range is not None:
                    raise UsageError("--pr-db-range does not apply to fig3")
                ms = parse_range(args.m, integer=True) if args.m else None
                sweep = preset_fig3(ms, args.trials)
        else:
            sweep = sweep_from_args(args)
    except (UsageError, ValueError) as exc:
        print(f"relaysim: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.out not in (None, "-"):
        directory = os.path.dirname(os.path.abspath(args.out))
        if not (os.path.isdir(directory) and os.access(directory, os.W_OK)):
            print(f"relaysim: cannot write output: directory {directory!r} is not writable", file=sys.stderr)
            return EXIT_IO

    curve = estimate(sweep, seed, workers=args.workers)
    try:
        emit(curve, args.format, args.out)
    except OSError as exc:
        print(f"relaysim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
