"""Command-line driver.

    kprsim run [flags]                 one configuration, per-seed series CSV
    kprsim preset {fig-u1,...} [--out DIR]
    kprsim sweep [--alphas ...] [--pis ...] [flags]
    kprsim baseline [--n N] [--periods T] [--seeds K]

Exit codes: 0 success, 2 usage/config error, 3 I/O error, 4 internal
invariant violation.
"""

from __future__ import annotations

import os
import sys
import time
from typing import List, Optional, Sequence

from . import experiments as ex
from .errors import ConfigError, CorruptedStateError, InvariantViolation
from .metrics import aggregate_runs, final_utilization

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4


def _axis(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"invalid axis {text!r}; expected comma-separated numbers") from None
    if not values or any(not (0.0 <= v <= 1.0) for v in values):
        raise ConfigError(f"axis values must lie in [0, 1]: {text!r}")
    return values


def build_parser() -> ex.ArgParser:
    parser = ex.ArgParser(prog="kprsim", description="Kolkata Paise Restaurant revision-protocol simulator")
    sub = parser.add_subparsers(dest="command", parser_class=ex.ArgParser)

    run = sub.add_parser("run", help="simulate one configuration")
    ex.add_config_arguments(run)
    run.add_argument("--aggregate", action="store_true", help="emit per-period mean/std instead of per-seed rows")

    preset = sub.add_parser("preset", help="run a named batch of experiments (fig-u1, fig-u2, fig-s, fig-100iter)")
    preset.add_argument("name", choices=ex.PRESETS)
    preset.add_argument("--n", type=int, default=1000)
    preset.add_argument("--seeds", type=int, default=10)
    preset.add_argument("--seed-base", type=int, default=0)
    preset.add_argument("--alphas", type=_axis, default=list(ex.DEFAULT_AXIS))
    preset.add_argument("--pis", type=_axis, default=list(ex.DEFAULT_AXIS))
    preset.add_argument("--out", default=".", help="output directory (default: current)")

    sweep = sub.add_parser("sweep", help="RP6 final utilization over an (alpha, pi) grid")
    ex.add_config_arguments(sweep)
    sweep.add_argument("--alphas", type=_axis, default=list(ex.DEFAULT_AXIS))
    sweep.add_argument("--pis", type=_axis, default=list(ex.DEFAULT_AXIS))

    base = sub.add_parser("baseline", help="uniform random choice with no revision")
    base.add_argument("--n", type=int, default=1000)
    base.add_argument("--periods", type=int, default=1)
    base.add_argument("--seeds", type=int, default=10)
    base.add_argument("--seed-base", type=int, default=0)
    base.add_argument("--out")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_run(ns) -> int:
    config = ex.config_from_namespace(ns)
    _log(f"# run: {config.protocol.label()} variant={int(config.variant)} n={config.n} "
         f"periods={config.periods} seeds={config.n_seeds} seed_base={config.seed_base}")
    series = ex.run_config(config)
    agg = aggregate_runs(series)
    _log(f"# final utilization {agg.utilization_mean[-1]:.4f}, stability {agg.stability_mean[-1]:.4f}")
    _emit(ex.render_csv(series, aggregate=ns.aggregate), config.out)
    return EXIT_OK


def cmd_sweep(ns) -> int:
    config = ex.config_from_namespace(ns, protocol="rp6", periods=100)
    _log(f"# sweep: {len(ns.alphas)}x{len(ns.pis)} cells, variant={int(config.variant)} n={config.n} "
         f"periods={config.periods} seeds={config.n_seeds}")
    grid = ex.run_sweep(ns.alphas, ns.pis, config)
    _emit(ex.render_csv(grid), config.out)
    return EXIT_OK


def cmd_baseline(ns) -> int:
    config = ex.SimConfig(n=ns.n, periods=ns.periods, protocol=None, n_seeds=ns.seeds,
                          seed_base=ns.seed_base).validate()
    start = time.perf_counter()
    series = ex.run_config(config)
    agg = aggregate_runs(series)
    _log(f"# baseline: period-1 mean utilization {agg.utilization_mean[0]:.4f} over {config.n_seeds} seeds "
         f"({time.perf_counter() - start:.3f}s)")
    _emit(ex.render_csv(series), ns.out)
    return EXIT_OK


def cmd_preset(ns) -> int:
    preset = ex.preset_fig(ns.name, n=ns.n, n_seeds=ns.seeds, seed_base=ns.seed_base)
    os.makedirs(ns.out, exist_ok=True)
    series = ex.run_batch(preset.configs)
    if series:
        ex.export_csv(series, os.path.join(ns.out, f"{ns.name}_series.csv"))
        ex.export_csv(series, os.path.join(ns.out, f"{ns.name}_aggregate.csv"), aggregate=True)
        for cfg in preset.configs:
            runs = [s for s in series if s.protocol == cfg.protocol_label and s.variant == int(cfg.variant)]
            fin = sum(final_utilization(s, min(10, cfg.periods)) for s in runs) / len(runs)
            _log(f"# {ns.name}: {cfg.protocol.label()} variant {int(cfg.variant)}: final utilization {fin:.4f}, "
                 f"last stability {aggregate_runs(runs).stability_mean[-1]:.4f}")
    for cfg in preset.sweeps:
        grid = ex.run_sweep(ns.alphas, ns.pis, cfg)
        ex.export_csv(grid, os.path.join(ns.out, f"{ns.name}_rp6_sweep_v{int(cfg.variant)}.csv"))
        _log(f"# {ns.name}: rp6 sweep variant {int(cfg.variant)} written")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "baseline": cmd_baseline, "preset": cmd_preset}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0].startswith("-") and argv[0] not in ("-h", "--help"):
        argv = ["run", *argv]
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        return COMMANDS[ns.command](ns)
    except ConfigError as exc:
        print(f"kprsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"kprsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvariantViolation, CorruptedStateError) as exc:
        print(f"kprsim: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
