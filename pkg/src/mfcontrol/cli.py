"""Command-line front end: run benchmark scenarios, check gains, compare controllers.

Exit codes: 0 success, 1 config/usage error, 2 diverged simulation,
3 gains fail the stability check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_scenario_config
from .controllers import GainSet
from .equivalence import hurwitz_cubic, pi_from_ip, pid_from_ipd
from .metrics import Metrics
from .scenarios import (
    DEFAULT_KI_SCALE,
    FAMILIES,
    ScenarioResult,
    ScenarioSpec,
    builtin_scenarios,
    compare_family,
    run_scenario,
)

TRACE_COLUMNS = (
    "t,y_true,y_measured,y_ref,e,u,v1,v2,F_est,warming_up,saturated"
)

OUTDIR_ENV = "MFCONTROL_OUTDIR"

# --set keys applied before any simulation starts
_OVERRIDE_KEYS = ("K_P", "K_I", "K_D", "alpha", "h", "M")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "gains":
            return _cmd_gains_check(args)
        if args.command == "compare":
            return _cmd_compare(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.print_usage(sys.stderr)
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfcontrol",
        description="Model-free control toolkit: benchmark runs, gain checks, comparisons.",
    )
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="simulate catalog scenarios or a config file")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="catalog scenario id (1..9)")
    src.add_argument("--all", action="store_true", help="run the whole catalog")
    src.add_argument("--config", help="path to a scenario TOML file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="base noise seed (default 0, or the config file's seed)")
    run_p.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or ./mfcontrol-out)")
    run_p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help=f"override before running; keys: {', '.join(_OVERRIDE_KEYS)}",
    )
    run_p.add_argument("--ki-scale", type=float, default=DEFAULT_KI_SCALE,
                       help="multiplier on the catalog integral gains (default 1)")
    run_p.add_argument("--plot", action="store_true", help="also write plot.svg per run")

    gains_p = sub.add_parser("gains", help="gain utilities")
    gains_sub = gains_p.add_subparsers(dest="gains_command")
    check_p = gains_sub.add_parser(
        "check", help="stability verdict and equivalent classic gains"
    )
    check_p.add_argument("k_p", type=float, help="proportional gain K_P")
    check_p.add_argument("k_i", type=float, help="integral gain K_I")
    check_p.add_argument("k_d", type=float, help="derivative gain K_D")
    check_p.add_argument("--alpha", type=float, default=10.0, help="input gain (default 10)")
    check_p.add_argument("--h", type=float, default=0.01, help="sampling period (default 0.01)")

    cmp_p = sub.add_parser("compare", help="side-by-side controller comparison")
    cmp_p.add_argument("--family", default="", help=f"one of: {', '.join(FAMILIES)}")
    cmp_p.add_argument("--seed", type=int, default=0)
    cmp_p.add_argument("--outdir")
    cmp_p.add_argument("--ki-scale", type=float, default=DEFAULT_KI_SCALE)
    return parser


def _outdir(args) -> Path:
    if getattr(args, "outdir", None):
        return Path(args.outdir)
    env = os.environ.get(OUTDIR_ENV)
    return Path(env) if env else Path("mfcontrol-out")


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        if key not in _OVERRIDE_KEYS:
            raise ConfigError(f"--set key must be one of {_OVERRIDE_KEYS}, got {key!r}")
        try:
            value = float(raw)
        except ValueError as exc:
            raise ConfigError(f"--set {key}: {raw!r} is not a number") from exc
        if not math.isfinite(value):
            raise ConfigError(f"--set {key}: value must be finite")
        out[key] = value
    if "M" in out and out["M"] != int(out["M"]):
        raise ConfigError("--set M: window length must be an integer")
    return out


def _apply_overrides(spec: ScenarioSpec, overrides: dict[str, float]) -> ScenarioSpec:
    if not overrides:
        return spec
    controller = spec.controller
    gains = controller.gains
    gain_changes = {}
    for key, field in (("K_P", "k_p"), ("K_I", "k_i"), ("K_D", "k_d")):
        if key in overrides:
            gain_changes[field] = overrides[key]
    if gain_changes:
        try:
            gains = replace(gains, **gain_changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    ultra = controller.ultra_local
    grid = spec.grid
    if any(k in overrides for k in ("alpha", "h", "M")):
        if ultra is None:
            raise ConfigError("alpha/h/M overrides do not apply to a classic-pid run")
        changes = {}
        if "alpha" in overrides:
            changes["alpha"] = overrides["alpha"]
        if "h" in overrides:
            changes["h"] = overrides["h"]
        if "M" in overrides:
            changes["window"] = int(overrides["M"])
        try:
            ultra = replace(ultra, **changes)
            if "h" in overrides:
                grid = replace(grid, h=overrides["h"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    kind = controller.kind
    if kind in ("ipd", "ipid"):
        kind = "ipid" if gains.k_i > 0.0 else "ipd"
    try:
        controller = replace(controller, kind=kind, gains=gains, ultra_local=ultra)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return replace(spec, controller=controller, grid=grid)


def _run_and_write(payload) -> tuple[str, bool]:
    """Worker for scenario batches: run one spec and write its artifacts."""
    spec, seed, outdir, plot = payload
    outcome = run_scenario(spec, seed=seed)
    subdir = Path(outdir) / f"scenario-{spec.id}"
    write_run_artifacts(outcome, subdir, plot=plot)
    return (str(subdir), outcome.result.diverged)


def _cmd_run(args) -> int:
    overrides = _parse_overrides(args.set)
    outdir = _outdir(args)

    if args.config:
        loaded = load_scenario_config(args.config)
        spec = _apply_overrides(loaded.spec, overrides)
        seed = loaded.seed if args.seed is None else args.seed
        outcome = run_scenario(spec, seed=seed)
        subdir = outdir / _slug(spec.label)
        write_run_artifacts(outcome, subdir, plot=args.plot)
        print(f"wrote {subdir}/trace.csv and metrics.json")
        return 2 if outcome.result.diverged else 0

    seed = 0 if args.seed is None else args.seed

    if args.all:
        specs = [
            _apply_overrides(s, overrides) for s in builtin_scenarios(ki_scale=args.ki_scale)
        ]
        payloads = [(s, seed, str(outdir), args.plot) for s in specs]
        diverged = False
        with ProcessPoolExecutor(max_workers=min(4, len(payloads))) as pool:
            for subdir, bad in pool.map(_run_and_write, payloads):
                print(f"wrote {subdir}")
                diverged = diverged or bad
        return 2 if diverged else 0

    try:
        sid = int(args.scenario)
    except ValueError:
        sid = -1
    catalog = builtin_scenarios(ki_scale=args.ki_scale)
    by_id = {s.id: s for s in catalog}
    if sid not in by_id:
        listing = "\n".join(f"  {s.id}: {s.label}" for s in catalog)
        print(
            f"error: unknown scenario {args.scenario!r}; catalog:\n{listing}", file=sys.stderr
        )
        return 1
    spec = _apply_overrides(by_id[sid], overrides)
    outcome = run_scenario(spec, seed=seed)
    subdir = outdir / f"scenario-{spec.id}"
    write_run_artifacts(outcome, subdir, plot=args.plot)
    print(f"wrote {subdir}/trace.csv and metrics.json")
    return 2 if outcome.result.diverged else 0


def _cmd_gains_check(args) -> int:
    if getattr(args, "gains_command", None) != "check":
        print("usage: mfcontrol gains check K_P K_I K_D [--alpha A] [--h H]", file=sys.stderr)
        return 1
    if args.alpha == 0.0 or args.h <= 0.0:
        print("error: alpha must be nonzero and h positive", file=sys.stderr)
        return 1
    verdict = hurwitz_cubic(args.k_p, args.k_i, args.k_d)
    poly = (
        "s^3 + K_D s^2 + K_P s + K_I"
        if args.k_i != 0.0
        else "s^2 + K_D s + K_P   (K_I = 0)"
    )
    print(f"characteristic polynomial: {poly}")
    for name, value in verdict.conditions:
        print(f"  {name}: {value:+.6g} {'> 0 ok' if value > 0 else '<= 0 FAIL'}")
    state = "stable (all roots in the open left half-plane)" if verdict.hurwitz else "NOT stable"
    print(f"verdict: {state}; margin {verdict.margin:.6g}")

    if args.k_d > 0.0:
        classic = pid_from_ipd(args.k_p, args.k_d, args.alpha, args.h)
        print(
            f"equivalent classic PID at h={args.h:g}, alpha={args.alpha:g}: "
            f"k_p={classic.k_p:g}, k_i={classic.k_i:g}, k_d={classic.k_d:g}"
        )
    else:
        classic = pi_from_ip(args.k_p, args.alpha, args.h)
        print(
            f"equivalent classic PI at h={args.h:g}, alpha={args.alpha:g}: "
            f"k_p={classic.k_p:g}, k_i={classic.k_i:g}"
        )
    print(
        "note: the identity is tied to this exact sampling period; "
        "do not transfer tunings in reverse."
    )
    return 0 if verdict.hurwitz else 3


def _cmd_compare(args) -> int:
    if not args.family:
        print(f"error: --family is required; known families: {', '.join(FAMILIES)}",
              file=sys.stderr)
        return 1
    try:
        report, results = compare_family(args.family, ki_scale=args.ki_scale, seed=args.seed)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 1
    outdir = _outdir(args) / f"compare-{_slug(args.family)}"
    for outcome in results:
        write_run_artifacts(outcome, outdir / _slug(outcome.spec.label))
    _atomic_write_text(outdir / "report.md", report.markdown() + "\n")
    print(report.markdown())
    print(f"\nwrote {outdir}/report.md")
    return 2 if any(r.result.diverged for r in results) else 0


def _slug(label: str) -> str:
    safe = "".join(c if c.isalnum() or c in "-_." else "-" for c in label.strip())
    return safe.strip("-") or "run"


def _csv_cell(value: float) -> str:
    return repr(float(value))


def trace_csv_text(outcome: ScenarioResult) -> str:
    lines = [TRACE_COLUMNS]
    for r in outcome.result.records:
        lines.append(
            ",".join(
                (
                    _csv_cell(r.t),
                    _csv_cell(r.y_true),
                    _csv_cell(r.y_measured),
                    _csv_cell(r.y_ref),
                    _csv_cell(r.e),
                    _csv_cell(r.u),
                    _csv_cell(r.v1),
                    _csv_cell(r.v2),
                    _csv_cell(r.f_est),
                    str(int(r.warming_up)),
                    str(int(r.saturated)),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def metrics_json_text(outcome: ScenarioResult) -> str:
    m: Metrics = outcome.metrics
    doc = {
        "scenario_id": outcome.spec.id,
        "label": outcome.spec.label,
        "rmse": _jsonable(m.rmse),
        "iae": _jsonable(m.iae),
        "max_overshoot": _jsonable(m.max_overshoot),
        "settling_time": _jsonable(m.settling_time),
        "segment_settling_times": [_jsonable(v) for v in m.segment_settling_times],
        "oscillation_index": m.oscillation_index,
        "recovery_times": [_jsonable(v) for v in m.recovery_times],
        "diverged": m.diverged,
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_run_artifacts(outcome: ScenarioResult, outdir: Path, plot: bool = False) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _atomic_write_text(outdir / "trace.csv", trace_csv_text(outcome))
    _atomic_write_text(outdir / "metrics.json", metrics_json_text(outcome))
    if plot:
        _write_plot(outcome, outdir / "plot.svg")


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_plot(outcome: ScenarioResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    recs = outcome.result.records
    t = [r.t for r in recs]
    fig, (ax_y, ax_u) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax_y.plot(t, [r.y_ref for r in recs], "k--", linewidth=1.0, label="reference")
    ax_y.plot(t, [r.y_true for r in recs], linewidth=1.2, label="position")
    ax_y.set_title("Reference trajectory and position")
    ax_y.set_ylabel("angle [rad]")
    ax_y.legend(loc="best")
    ax_y.grid(True, alpha=0.3)
    ax_u.plot(t, [r.u for r in recs], linewidth=1.0)
    ax_u.set_title("Control input")
    ax_u.set_xlabel("time [s]")
    ax_u.set_ylabel("u [V]")
    ax_u.grid(True, alpha=0.3)
    fig.tight_layout()
    tmp = path.with_suffix(".svg.tmp")
    fig.savefig(tmp, format="svg")
    plt.close(fig)
    os.replace(tmp, path)


if __name__ == "__main__":
    sys.exit(main())
