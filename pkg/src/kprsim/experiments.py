"""Configuration parsing, named experiment presets, the RP6 sweep and CSV export."""

from __future__ import annotations

import argparse
import csv
import io
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import SimConfig, VariantId
from .engine import run_simulation
from .errors import ConfigError
from .metrics import MetricsSeries, SweepGrid, aggregate_runs, final_utilization
from .protocols import ProtocolConfig, ProtocolKind
from .rng import RngStream

DEFAULT_AXIS = tuple(round(0.1 * i, 1) for i in range(11))
FINAL_WINDOW = 10

INFO_SHARE = 0.05


def standard_settings(kind, n: int = 1000) -> dict:
    """Parameters giving customers 5% information, as in the N = 1000 experiments."""
    size = max(1, min(n - 1, round(INFO_SHARE * n)))
    return {
        ProtocolKind.RP1: dict(k=size),
        ProtocolKind.RP2: dict(customer_group_size=size),
        ProtocolKind.RP3: dict(restaurant_group_size=size),
        ProtocolKind.RP4: dict(alpha=INFO_SHARE),
        ProtocolKind.RP5: dict(pi=INFO_SHARE),
        ProtocolKind.RP6: dict(alpha=INFO_SHARE, pi=INFO_SHARE),
    }[ProtocolKind.parse(kind)]


SERIES_HEADER = ("protocol", "variant", "seed", "period", "utilization", "stability")
SWEEP_HEADER = ("alpha", "pi", "mean_final_utilization", "std_final_utilization", "seeds")
AGGREGATE_HEADER = ("protocol", "variant", "period", "utilization_mean", "utilization_std",
                    "stability_mean", "stability_std", "seeds")


def standard_protocol(kind, n: int = 1000, **overrides) -> ProtocolConfig:
    kind = ProtocolKind.parse(kind)
    return ProtocolConfig(kind=kind, **{**standard_settings(kind, n), **overrides})


# --- configuration -----------------------------------------------------------

_KEYS = {
    # key: (type, SimConfig/ProtocolConfig field)
    "protocol": (str, "kind"),
    "variant": (str, "variant"),
    "n": (int, "n"),
    "periods": (int, "periods"),
    "seeds": (int, "n_seeds"),
    "seed_base": (int, "seed_base"),
    "k": (int, "k"),
    "customer_group_size": (int, "customer_group_size"),
    "restaurant_group_size": (int, "restaurant_group_size"),
    "alpha": (float, "alpha"),
    "pi": (float, "pi"),
    "literal_equations": (bool, "literal_equations"),
    "out": (str, "out"),
}
_PROTOCOL_FIELDS = {"kind", "k", "customer_group_size", "restaurant_group_size", "alpha", "pi", "literal_equations"}

DEFAULTS = {
    "protocol": "rp1",
    "variant": "2",
    "n": 1000,
    "periods": 20,
    "seeds": 10,
    "seed_base": 0,
    "literal_equations": False,
    "out": None,
}


def _coerce(key: str, raw) -> object:
    typ = _KEYS[key][0]
    if raw is None or not isinstance(raw, str):
        return raw
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw.strip())
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; unknown keys are rejected."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    entries = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        entries[key] = _coerce(key, value)
    return entries


def build_config(values: dict) -> SimConfig:
    """Turn a flat key/value mapping into a validated ``SimConfig``."""
    unknown = set(values) - set(_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    merged = {**DEFAULTS, **{k: v for k, v in values.items() if v is not None}}
    merged = {k: _coerce(k, v) for k, v in merged.items()}
    kind = ProtocolKind.parse(merged.pop("protocol"))
    proto_kw = standard_settings(kind, int(merged["n"]))
    sim_kw = {}
    for key, value in merged.items():
        target = _KEYS[key][1]
        if target in _PROTOCOL_FIELDS:
            proto_kw[target] = value
        else:
            sim_kw[target] = value
    protocol = ProtocolConfig(kind=kind, **proto_kw)
    return SimConfig(protocol=protocol, **sim_kw).validate()


class ArgParser(argparse.ArgumentParser):
    """ArgumentParser that raises ``ConfigError`` instead of exiting."""

    def error(self, message):
        raise ConfigError(message)


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every subcommand that builds a ``SimConfig``.

    Defaults are None so that unset flags fall through to the config file
    and then to ``DEFAULTS``.
    """
    parser.add_argument("--config", metavar="FILE", help="key=value configuration file")
    parser.add_argument("--protocol", choices=[k.value for k in ProtocolKind], type=str.lower)
    parser.add_argument("--variant", choices=["1", "2"])
    parser.add_argument("--n", type=int, help="customers = restaurants (default 1000)")
    parser.add_argument("--periods", type=int, help="periods per run (default 20)")
    parser.add_argument("--seeds", type=int, help="replicate runs (default 10)")
    parser.add_argument("--seed-base", type=int, help="master seed (default 0)")
    parser.add_argument("--k", type=int, help="RP1 window size")
    parser.add_argument("--customer-group-size", type=int, help="RP2 block size")
    parser.add_argument("--restaurant-group-size", type=int, help="RP3 block size")
    parser.add_argument("--alpha", type=float, help="RP4/RP6 report accuracy in [0, 1]")
    parser.add_argument("--pi", type=float, help="RP5/RP6 belief in [0, 1]")
    parser.add_argument("--literal-equations", action="store_true", default=None,
                        help="use the printed quadratic update forms, then renormalize")
    parser.add_argument("--out", help="output path")


def config_from_namespace(ns: argparse.Namespace, **overrides) -> SimConfig:
    values = read_config_file(ns.config) if getattr(ns, "config", None) else {}
    for key in _KEYS:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    for key, value in overrides.items():
        values.setdefault(key, value)
    return build_config(values)


def parse_config(argv: Sequence[str] = ()) -> SimConfig:
    """Parse ``run``-style flags (optionally ``--config FILE``) into a SimConfig."""
    argv = list(argv)
    if argv[:1] == ["run"]:
        argv = argv[1:]
    parser = ArgParser(prog="kprsim run", add_help=False)
    add_config_arguments(parser)
    ns, extra = parser.parse_known_args(argv)
    if extra:
        raise ConfigError(f"unrecognized argument: {extra[0]}")
    return config_from_namespace(ns)


# --- presets -----------------------------------------------------------------

@dataclass
class Preset:
    name: str
    configs: List[SimConfig]
    sweeps: List[SimConfig] = field(default_factory=list)


PRESETS = ("fig-u1", "fig-u2", "fig-s", "fig-100iter")


def preset_fig(name: str, *, n: int = 1000, n_seeds: int = 10, seed_base: int = 0) -> Preset:
    """Batch of configurations behind one of the named figures.

    fig-u1       RP1-RP3, both variants, 20 periods.
    fig-u2       RP4-RP5, both variants, 20 periods, plus an RP6 (alpha, pi)
                 sweep per variant.
    fig-s        Variant-1 stability series for RP1-RP5, 20 periods.
    fig-100iter  Variant 2, RP1-RP5, 100 periods.
    """
    base = dict(n=n, n_seeds=n_seeds, seed_base=seed_base)
    both = (VariantId.VARIANT1, VariantId.VARIANT2)
    rp = [ProtocolKind.RP1, ProtocolKind.RP2, ProtocolKind.RP3, ProtocolKind.RP4, ProtocolKind.RP5]
    if name == "fig-u1":
        configs = [SimConfig(periods=20, variant=v, protocol=standard_protocol(k, n), **base) for k in rp[:3] for v in both]
        return Preset(name, configs)
    if name == "fig-u2":
        configs = [SimConfig(periods=20, variant=v, protocol=standard_protocol(k, n), **base) for k in rp[3:] for v in both]
        sweeps = [SimConfig(periods=100, variant=v, protocol=standard_protocol(ProtocolKind.RP6, n), **base) for v in both]
        return Preset(name, configs, sweeps)
    if name == "fig-s":
        configs = [SimConfig(periods=20, variant=VariantId.VARIANT1, protocol=standard_protocol(k, n), **base) for k in rp]
        return Preset(name, configs)
    if name == "fig-100iter":
        configs = [SimConfig(periods=100, variant=VariantId.VARIANT2, protocol=standard_protocol(k, n), **base) for k in rp]
        return Preset(name, configs)
    raise ConfigError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")


# --- running -----------------------------------------------------------------

def run_config(config: SimConfig) -> List[MetricsSeries]:
    """All replicates of ``config``, in replicate order."""
    config.validate()
    return [run_simulation(config, RngStream(config.seed_base, r)) for r in config.seeds]


def run_batch(configs: Iterable[SimConfig]) -> List[MetricsSeries]:
    out: List[MetricsSeries] = []
    for cfg in configs:
        out.extend(run_config(cfg))
    return out


def run_sweep(alphas: Sequence[float], pis: Sequence[float], base: SimConfig,
              *, window: int = FINAL_WINDOW) -> SweepGrid:
    """Final utilization of RP6 over the (alpha, pi) grid.

    Every cell reuses the same replicate streams, so differences between
    cells come from the parameters rather than from the draws.
    """
    if base.protocol is None or base.protocol.kind is not ProtocolKind.RP6:
        raise ConfigError("a sweep needs an RP6 base configuration")
    if not alphas or not pis:
        raise ConfigError("sweep axes must be non-empty")
    alphas = np.asarray(alphas, dtype=float)
    pis = np.asarray(pis, dtype=float)
    window = min(window, base.periods)
    per_seed = np.empty((alphas.size, pis.size, base.n_seeds))
    for a, alpha in enumerate(alphas):
        for p, pi in enumerate(pis):
            cfg = base.with_(protocol=base.protocol.with_(alpha=float(alpha), pi=float(pi)))
            for s, series in enumerate(run_config(cfg)):
                per_seed[a, p, s] = final_utilization(series, window)
    ddof = 1 if base.n_seeds > 1 else 0
    return SweepGrid(alphas=alphas, pis=pis, mean=per_seed.mean(axis=2),
                     std=per_seed.std(axis=2, ddof=ddof), seeds=base.n_seeds, per_seed=per_seed)


# --- CSV ---------------------------------------------------------------------

def _f(x: float) -> str:
    return f"{x:.6f}"


def series_rows(series: Iterable[MetricsSeries]):
    ordered = sorted(series, key=lambda s: (s.protocol, s.variant, s.seed))
    for s in ordered:
        for period, u, st in s.records():
            yield (s.protocol, str(s.variant), str(s.seed), str(period), _f(u), _f(st))


def sweep_rows(grid: SweepGrid):
    for alpha, pi, mean, std in grid.cells():
        yield (_f(alpha), _f(pi), _f(mean), _f(std), str(grid.seeds))


def aggregate_rows(series: Iterable[MetricsSeries]):
    groups: Dict[Tuple[str, int], List[MetricsSeries]] = {}
    for s in series:
        groups.setdefault((s.protocol, s.variant), []).append(s)
    for (protocol, variant) in sorted(groups):
        agg = aggregate_runs(groups[(protocol, variant)])
        for t in range(agg.utilization_mean.size):
            yield (protocol, str(variant), str(t + 1), _f(agg.utilization_mean[t]), _f(agg.utilization_std[t]),
                   _f(agg.stability_mean[t]), _f(agg.stability_std[t]), str(agg.runs))


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_csv(results: Union[SweepGrid, Iterable[MetricsSeries]], *, aggregate: bool = False) -> str:
    if isinstance(results, SweepGrid):
        return to_csv(SWEEP_HEADER, sweep_rows(results))
    if aggregate:
        return to_csv(AGGREGATE_HEADER, aggregate_rows(results))
    return to_csv(SERIES_HEADER, series_rows(results))


def export_csv(results: Union[SweepGrid, Iterable[MetricsSeries]], path: Union[str, os.PathLike],
               *, aggregate: bool = False) -> str:
    """Write series, aggregate or sweep CSV to ``path``; returns the text written.

    Raises ``OSError`` when the file cannot be written.
    """
    text = render_csv(results, aggregate=aggregate)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text
