"""Command-line front end.

Subcommands
-----------
ted-ghz / ted-w     run one entanglement-distillation instance
tsd-ghz / sd-w      run one steering-distillation instance
sweep               emit a long-format CSV over a parameter grid
simulate            Monte Carlo run of the N-copy protocol
replay              re-execute the command recorded in a run manifest

Reports go to stdout as ``key = value`` lines; ``--out`` additionally writes
a CSV (or TSV) with a fixed, versioned schema plus a JSON run manifest next
to it (``<out stem>.manifest.json``).  Numeric fields are printed with 12
significant digits, so repeated runs are byte-identical.  Flags override
values read from ``--config`` files (flat ``key = value`` lines, keys named
after the long flags).

On failure the process exits nonzero after printing a single line
``error category=<Category>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import InvalidSpecError, QdistillError
from .filters import IndexPartition
from .states import Family, GhzSpec, WSpec
from .sweep import CSV_COLUMNS, CSV_SCHEMA_VERSION, grid_rows, preset_grid
from .ted import ProtocolConfig, overall_success, run_ted
from .tsd import SteeringConfig, run_tsd
from .montecarlo import outcome_distribution, run_stats

CLI_NORM_TOL = 1e-3

SIMULATE_COLUMNS = (
    "family", "d", "p", "q", "n", "trials", "seed",
    "ps_per_copy", "ps_overall_expected", "success_rate",
    "kept_count", "count",
)

STEERING_COLUMNS = CSV_COLUMNS + ("fidelity_assemblage", "minimizing_setting", "threshold")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, tuple):
        return "".join(str(v) for v in value)
    return str(value)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InvalidSpecError(f"cannot parse float list {text!r}: {exc}") from exc


def _parse_int_values(text: str) -> tuple[int, ...]:
    """Accept '5', '2:10', '2:10:2', or '3,4,7' (ranges are inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(tok) for tok in text.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return tuple(range(lo, hi + 1, step))
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except (ValueError, IndexError) as exc:
        raise InvalidSpecError(f"cannot parse integer range {text!r}") from exc


def _parse_partition(text: str) -> IndexPartition:
    """Blocks separated by '|', indices within a block by ',': '1,3|2'."""
    try:
        blocks = tuple(
            frozenset(int(tok) for tok in part.split(",") if tok.strip())
            for part in text.split("|")
        )
    except ValueError as exc:
        raise InvalidSpecError(f"cannot parse partition {text!r}") from exc
    return IndexPartition(blocks)


def _cli_coeffs(values: list[float], what: str) -> tuple[float, ...]:
    """Renormalize hand-typed coefficients; reject anything grossly off."""
    norm = math.sqrt(sum(v * v for v in values))
    if abs(norm - 1.0) > CLI_NORM_TOL:
        raise InvalidSpecError(
            f"{what} have norm {norm:.6f}; expected a normalized vector "
            f"(tolerance {CLI_NORM_TOL} for input rounding)"
        )
    return tuple(v / norm for v in values)


def _load_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpecError(f"config line without '=': {line!r}")
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _opt(args, cfg: dict[str, str], name: str, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, name, None)
    if val is not None:
        return val
    return cfg.get(name, default)


def _require(args, cfg, name: str):
    val = _opt(args, cfg, name)
    if val is None:
        raise InvalidSpecError(f"missing required option --{name.replace('_', '-')}")
    return val


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def _write_manifest(out: Path, argv: list[str], config: dict, seed: int | None) -> None:
    manifest = {
        "tool": "qdistill",
        "version": __version__,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "command": argv,
        "config": config,
        "seed": seed,
        "outputs": [str(out)],
        "created": datetime.now(timezone.utc).isoformat(),
    }
    _manifest_path(out).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_rows(
    out: Path, rows: list[dict], columns: tuple[str, ...], fmt: str
) -> None:
    sep = "\t" if fmt == "tsv" else ","
    lines = [sep.join(columns)]
    lines.extend(sep.join(_fmt(row[c]) for c in columns) for row in rows)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _print_report(pairs: list[tuple[str, object]]) -> None:
    for key, value in pairs:
        print(f"{key} = {_fmt(value)}")


def _ghz_spec(args, cfg) -> tuple[GhzSpec, int, IndexPartition | None]:
    d = int(_require(args, cfg, "d"))
    p = int(_require(args, cfg, "p"))
    alphas = _cli_coeffs(_parse_floats(str(_require(args, cfg, "alphas"))), "alphas")
    spec = GhzSpec(d, p, alphas)
    q = int(_opt(args, cfg, "q", 1))
    part_text = _opt(args, cfg, "partition")
    partition = _parse_partition(str(part_text)) if part_text else None
    return spec, q, partition


def _w_spec(args, cfg) -> tuple[WSpec, int]:
    p = int(_require(args, cfg, "p"))
    betas = _cli_coeffs(_parse_floats(str(_require(args, cfg, "betas"))), "betas")
    spec = WSpec(p, betas)
    q = int(_opt(args, cfg, "q", p - 1))
    return spec, q


def _protocol_config(args, cfg, family: Family) -> ProtocolConfig:
    n = int(_require(args, cfg, "n"))
    representation = str(_opt(args, cfg, "representation", "compact"))
    if family is Family.GHZ_DIAGONAL:
        spec, q, partition = _ghz_spec(args, cfg)
        return ProtocolConfig(n, family, spec, q, partition, representation)
    spec, q = _w_spec(args, cfg)
    return ProtocolConfig(n, family, spec, q, None, representation)


def _ted_row(config: ProtocolConfig, report) -> dict:
    spec = config.spec
    if isinstance(spec, GhzSpec):
        d, driver, gap = spec.d, spec.alphas[0], spec.d - sum(spec.alphas) ** 2
    else:
        d, driver, gap = 2, report.p_success_per_copy, spec.p - sum(spec.betas) ** 2
    return {
        "family": config.family.value, "d": d, "p": spec.p, "q": config.q,
        "s": 0, "n": config.n_copies,
        "alpha0_or_pu": driver, "coeff_gap": gap,
        "ps_per_copy": report.p_success_per_copy,
        "ps_overall": report.p_success_overall,
        "fidelity_closed": report.fidelity_closed_form,
        "fidelity_numeric": report.fidelity_numeric,
        "feasible": True,
    }


def _finish_run(args, cfg, row: dict, columns, report_pairs, seed=None) -> int:
    _print_report(report_pairs)
    out_text = _opt(args, cfg, "out")
    if out_text:
        out = Path(str(out_text))
        fmt = str(_opt(args, cfg, "format", "csv"))
        _write_rows(out, [row], columns, fmt)
        _write_manifest(out, list(args.argv), {k: _fmt(v) for k, v in row.items()}, seed)
    return 0


def _cmd_ted(args, family: Family) -> int:
    cfg = _load_config_file(_opt(args, {}, "config"))
    config = _protocol_config(args, cfg, family)
    report = run_ted(config)
    row = _ted_row(config, report)
    pairs = [(k, row[k]) for k in CSV_COLUMNS]
    return _finish_run(args, cfg, row, CSV_COLUMNS, pairs)


def _cmd_tsd(args, family: Family) -> int:
    cfg = _load_config_file(_opt(args, {}, "config"))
    base = _protocol_config(args, cfg, family)
    s = int(_require(args, cfg, "s"))
    steering = SteeringConfig(base, s)
    report = run_tsd(steering)
    spec = base.spec
    if isinstance(spec, GhzSpec):
        d, driver, gap = spec.d, spec.alphas[0], spec.d - sum(spec.alphas) ** 2
    else:
        d, driver, gap = 2, report.p_success_per_copy, spec.p - sum(spec.betas) ** 2
    row = {
        "family": base.family.value, "d": d, "p": spec.p, "q": base.q,
        "s": s, "n": base.n_copies,
        "alpha0_or_pu": driver, "coeff_gap": gap,
        "ps_per_copy": report.p_success_per_copy,
        "ps_overall": report.p_success_overall,
        "fidelity_closed": report.fidelity_closed_form,
        "fidelity_numeric": report.fidelity_assemblage,
        "feasible": True,
        "fidelity_assemblage": report.fidelity_assemblage,
        "minimizing_setting": report.minimizing_setting,
        "threshold": report.threshold,
    }
    pairs = [(k, row[k]) for k in STEERING_COLUMNS]
    return _finish_run(args, cfg, row, STEERING_COLUMNS, pairs)


def _cmd_sweep(args) -> int:
    cfg = _load_config_file(_opt(args, {}, "config"))
    preset = str(_require(args, cfg, "preset"))
    overrides: dict = {}
    alpha0 = _opt(args, cfg, "alpha0")
    if alpha0 is not None:
        overrides["alpha0_values"] = tuple(_parse_floats(str(alpha0)))
    beta0 = _opt(args, cfg, "beta0")
    if beta0 is not None:
        overrides["beta0_values"] = tuple(_parse_floats(str(beta0)))
    pu = _opt(args, cfg, "pu")
    if pu is not None:
        overrides["pu"] = float(pu)
    gap = _opt(args, cfg, "gap")
    if gap is not None:
        overrides["gap"] = float(gap)
    d_vals = _opt(args, cfg, "d")
    if d_vals is not None:
        overrides["d_values"] = _parse_int_values(str(d_vals))
    n_vals = _opt(args, cfg, "n")
    if n_vals is not None:
        overrides["n_values"] = _parse_int_values(str(n_vals))
    p_vals = _opt(args, cfg, "p")
    if p_vals is not None:
        values = _parse_int_values(str(p_vals))
        if preset.startswith("ghz"):
            if len(values) != 1:
                raise InvalidSpecError("GHZ sweeps take a single --p value")
            overrides["p"] = values[0]
        else:
            overrides["p_values"] = values
    representation = _opt(args, cfg, "representation")
    if representation is not None:
        overrides["representation"] = str(representation)
    rows = grid_rows(preset_grid(preset, **overrides))
    out_text = _opt(args, cfg, "out")
    fmt = str(_opt(args, cfg, "format", "csv"))
    if out_text:
        out = Path(str(out_text))
        _write_rows(out, rows, CSV_COLUMNS, fmt)
        _write_manifest(out, list(args.argv), {"preset": preset}, None)
        print(f"wrote {len(rows)} rows to {out}")
    else:
        sep = "\t" if fmt == "tsv" else ","
        print(sep.join(CSV_COLUMNS))
        for row in rows:
            print(sep.join(_fmt(row[c]) for c in CSV_COLUMNS))
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_config_file(_opt(args, {}, "config"))
    family = Family(str(_require(args, cfg, "family")))
    config = _protocol_config(args, cfg, family)
    trials = int(_opt(args, cfg, "trials", 100000))
    seed = int(_opt(args, cfg, "seed", 0))
    stats = run_stats(config, trials, seed)
    _, probs = outcome_distribution(config)
    pu = probs[0]
    expected = overall_success(pu, config.n_copies)
    _print_report([
        ("family", family.value), ("n", config.n_copies),
        ("trials", trials), ("seed", seed),
        ("ps_per_copy", pu), ("ps_overall_expected", expected),
        ("success_rate", stats.success_rate),
        ("kept_count_histogram",
         " ".join(f"{k}:{v}" for k, v in stats.kept_count_histogram.items())),
    ])
    out_text = _opt(args, cfg, "out")
    if out_text:
        spec = config.spec
        d = spec.d if isinstance(spec, GhzSpec) else 2
        rows = [
            {
                "family": family.value, "d": d, "p": spec.p, "q": config.q,
                "n": config.n_copies, "trials": trials, "seed": seed,
                "ps_per_copy": pu, "ps_overall_expected": expected,
                "success_rate": stats.success_rate,
                "kept_count": kept, "count": count,
            }
            for kept, count in stats.kept_count_histogram.items()
        ]
        out = Path(str(out_text))
        fmt = str(_opt(args, cfg, "format", "csv"))
        _write_rows(out, rows, SIMULATE_COLUMNS, fmt)
        _write_manifest(out, list(args.argv), {"trials": trials}, seed)
    return 0


def _cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    command = manifest.get("command")
    if not isinstance(command, list):
        raise InvalidSpecError(f"manifest {args.manifest} has no recorded command")
    return main([str(tok) for tok in command])


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key = value config file; flags win")
    sub.add_argument("--format", choices=("csv", "tsv"))
    sub.add_argument("--out", help="write CSV and a run manifest here")
    sub.add_argument("--representation", choices=("compact", "dense"))


def _add_ghz_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--d", type=int)
    sub.add_argument("--p", type=int)
    sub.add_argument("--q", type=int)
    sub.add_argument("--n", type=int)
    sub.add_argument("--alphas")
    sub.add_argument("--partition", help="blocks like '1,3|2'")


def _add_w_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p", type=int)
    sub.add_argument("--q", type=int)
    sub.add_argument("--n", type=int)
    sub.add_argument("--betas")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdistill",
        description="Threshold distillation of GHZ/W entanglement and steering",
    )
    parser.add_argument("--version", action="version", version=f"qdistill {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    ted_ghz = subs.add_parser("ted-ghz", help="GHZ entanglement distillation")
    _add_ghz_flags(ted_ghz)
    _add_common(ted_ghz)
    ted_ghz.set_defaults(func=lambda a: _cmd_ted(a, Family.GHZ_DIAGONAL))

    ted_w = subs.add_parser("ted-w", help="W entanglement distillation")
    _add_w_flags(ted_w)
    _add_common(ted_w)
    ted_w.set_defaults(func=lambda a: _cmd_ted(a, Family.W_SINGLE_EXCITATION))

    tsd_ghz = subs.add_parser("tsd-ghz", help="GHZ steering distillation")
    _add_ghz_flags(tsd_ghz)
    tsd_ghz.add_argument("--s", type=int)
    _add_common(tsd_ghz)
    tsd_ghz.set_defaults(func=lambda a: _cmd_tsd(a, Family.GHZ_DIAGONAL))

    sd_w = subs.add_parser("sd-w", help="W steering distillation (one-sided only)")
    _add_w_flags(sd_w)
    sd_w.add_argument("--s", type=int)
    _add_common(sd_w)
    sd_w.set_defaults(func=lambda a: _cmd_tsd(a, Family.W_SINGLE_EXCITATION))

    sweep = subs.add_parser("sweep", help="grid sweep to CSV")
    sweep.add_argument("--preset", choices=(
        "ghz-contour", "ghz-convergence", "ghz-dimension",
        "w-contour", "w-convergence",
    ))
    sweep.add_argument("--alpha0")
    sweep.add_argument("--beta0")
    sweep.add_argument("--pu", type=float)
    sweep.add_argument("--gap", type=float)
    sweep.add_argument("--d")
    sweep.add_argument("--p")
    sweep.add_argument("--n")
    _add_common(sweep)
    sweep.set_defaults(func=_cmd_sweep)

    simulate = subs.add_parser("simulate", help="Monte Carlo protocol run")
    simulate.add_argument("--family", choices=("ghz", "w"))
    simulate.add_argument("--d", type=int)
    simulate.add_argument("--p", type=int)
    simulate.add_argument("--q", type=int)
    simulate.add_argument("--n", type=int)
    simulate.add_argument("--alphas")
    simulate.add_argument("--betas")
    simulate.add_argument("--partition")
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--seed", type=int)
    _add_common(simulate)
    simulate.set_defaults(func=_cmd_simulate)

    replay = subs.add_parser("replay", help="re-run a recorded manifest")
    replay.add_argument("manifest")
    replay.set_defaults(func=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except QdistillError as exc:
        print(f"error category={exc.category}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
