"""Command line interface: single-point runs, figure sweeps and self checks.

Examples::

    risgroup rate --b 5 --trials 10000 --onoff
    risgroup optimize --tc 500
    risgroup sweep --sweep B=1:64:1 --onoff --out fig1a.csv
    risgroup sweep --sweep P=-10:20:5 --out fig2.csv
    risgroup selftest
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import optimizer, rate, selftest
from .linkbudget import Geometry, PathLossModel, SystemParams

log = logging.getLogger("risgroup")

RATE_HEADER = ["B", "K_prime", "pilot_overhead", "mc_rate", "mc_stderr", "upper_bound"]
ONOFF_HEADER = ["onoff_rate", "onoff_stderr"]
PERFECT_HEADER = ["perfect_rate", "perfect_stderr"]
OPTIMUM_HEADER = ["sweep_value", "b_star_brute", "b_star_closed", "rbar_brute", "rbar_closed", "rbar_ratio"]

SWEEP_VARS = {
    "b": "B",
    "kp": "K_prime",
    "k'": "K_prime",
    "kprime": "K_prime",
    "k_prime": "K_prime",
    "p": "P_dbm",
    "p_dbm": "P_dbm",
    "p-dbm": "P_dbm",
    "tc": "T_c",
    "t_c": "T_c",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Sweep:
    variable: str
    grid: tuple

    def __post_init__(self):
        if not self.grid:
            raise ConfigError(f"empty grid for sweep over {self.variable}")
        if self.variable in ("B", "K_prime", "T_c"):
            bad = [v for v in self.grid if v < 1 or int(v) != v]
            if bad:
                raise ConfigError(f"{self.variable} grid must hold positive integers, got {bad}")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: Geometry = field(default_factory=Geometry)
    model: PathLossModel = field(default_factory=PathLossModel)
    K: int = 360
    B: int = 1
    T_c: int = 900
    P_dbm: float = 0.0
    P_tr_dbm: float = 0.0
    noise_dbm: float = -80.0
    trials: int = 10_000
    seed: int = 0
    sweep: Sweep | None = None
    onoff: bool = False
    perfect: bool = False
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    constants: str = "paper"

    def params(self, **overrides) -> SystemParams:
        kw = dict(K=self.K, B=self.B, T_c=self.T_c, P_tr_dbm=self.P_tr_dbm, P_dbm=self.P_dbm, noise_dbm=self.noise_dbm)
        kw.update(overrides)
        return SystemParams.from_scenario(geometry=self.geometry, model=self.model, **kw)


def parse_sweep(text: str) -> Sweep:
    """Parse ``VAR=START:STOP:STEP`` (inclusive stop) or ``VAR=v1,v2,...``."""
    if "=" not in text:
        raise ConfigError(f"sweep must look like VAR=START:STOP:STEP, got {text!r}")
    name, spec = text.split("=", 1)
    var = SWEEP_VARS.get(name.strip().lower())
    if var is None:
        raise ConfigError(f"unknown sweep variable {name!r}; expected one of B, Kp, P, Tc")
    integer = var != "P_dbm"
    conv = int if integer else float
    try:
        if ":" in spec:
            parts = [conv(p) for p in spec.split(":")]
            if len(parts) == 2:
                parts.append(conv(1))
            start, stop, step = parts
            if step <= 0:
                raise ConfigError("sweep step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = tuple(conv(start + i * step) for i in range(max(n, 0)))
            if not integer:
                grid = tuple(round(v, 12) for v in grid)
        else:
            grid = tuple(conv(p) for p in spec.split(",") if p.strip())
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad sweep grid {spec!r}: {exc}") from None
    return Sweep(var, grid)


# config-file key -> (ExperimentConfig field or geometry/model attribute, converter)
_KEYS = {
    "k": ("K", int),
    "b": ("B", int),
    "tc": ("T_c", int),
    "p-dbm": ("P_dbm", float),
    "ptr-dbm": ("P_tr_dbm", float),
    "noise-dbm": ("noise_dbm", float),
    "d0": ("geometry.d0", float),
    "d": ("geometry.d", float),
    "dv": ("geometry.dv", float),
    "c0-db": ("model.c0_db", float),
    "alpha-direct": ("model.alpha_direct", float),
    "alpha-cascaded": ("model.alpha_cascaded", float),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "sweep": ("sweep", parse_sweep),
    "onoff": ("onoff", lambda s: _parse_bool(s)),
    "perfect": ("perfect", lambda s: _parse_bool(s)),
    "out": ("out", str),
    "format": ("format", str),
    "workers": ("workers", int),
    "constants": ("constants", str),
}


def _parse_bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def read_config_file(path: str | Path) -> dict:
    """Read ``key = value`` lines (``#`` comments, ``:`` also accepted)."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cut = min((i for i in (line.find("="), line.find(":")) if i >= 0), default=-1)
        if cut < 0:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        # split at the first separator only: `sweep = B=1:64:1`
        key, value = line[:cut].strip(), line[cut + 1 :].strip()
        key = key.lower().replace("_", "-")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _KEYS[key][1](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def _build(values: dict) -> ExperimentConfig:
    top, geom, model = {}, {}, {}
    for key, value in values.items():
        target = _KEYS[key][0]
        if target.startswith("geometry."):
            geom[target.split(".", 1)[1]] = value
        elif target.startswith("model."):
            model[target.split(".", 1)[1]] = value
        else:
            top[target] = value
    try:
        cfg = ExperimentConfig(
            geometry=Geometry(**geom), model=PathLossModel(**model), **top
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    if cfg.K < 1:
        raise ConfigError(f"--k must be >= 1, got {cfg.K}")
    if not 1 <= cfg.B <= cfg.K:
        raise ConfigError(f"--b must be in [1, {cfg.K}], got {cfg.B}")
    if cfg.T_c < 2:
        raise ConfigError(f"--tc must be >= 2, got {cfg.T_c}")
    if cfg.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if cfg.seed < 0:
        raise ConfigError("--seed must be non-negative")
    if cfg.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if cfg.format not in ("csv", "jsonl"):
        raise ConfigError(f"--format must be csv or jsonl, got {cfg.format!r}")
    if cfg.constants not in ("paper", "fit"):
        raise ConfigError(f"--constants must be paper or fit, got {cfg.constants!r}")
    if cfg.sweep is not None and cfg.sweep.variable in ("B", "K_prime"):
        bad = [v for v in cfg.sweep.grid if v > cfg.K]
        if bad:
            raise ConfigError(f"{cfg.sweep.variable} grid exceeds K={cfg.K}: {bad}")


def _add_common(p: argparse.ArgumentParser):
    a = p.add_argument
    a("--config", metavar="PATH")
    a("--k", type=int)
    a("--b", type=int)
    a("--tc", type=int)
    a("--p-dbm", type=float)
    a("--ptr-dbm", type=float)
    a("--noise-dbm", type=float)
    a("--d0", type=float)
    a("--d", type=float)
    a("--dv", type=float)
    a("--c0-db", type=float)
    a("--alpha-direct", type=float)
    a("--alpha-cascaded", type=float)
    a("--trials", type=int)
    a("--seed", type=int)
    a("--sweep", metavar="VAR=START:STOP:STEP")
    a("--onoff", action="store_true", default=None, help="add the On-Off baseline")
    a("--perfect", action="store_true", default=None, help="add the perfect-CSI rate")
    a("--out", metavar="PATH")
    a("--format", choices=["csv", "jsonl"])
    a("--workers", type=int, help="threads for Monte-Carlo trials (output does not depend on it)")
    a("--constants", choices=["paper", "fit"], help="closed-form constants: printed or refitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risgroup", description="RIS element grouping analysis")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("rate", "Monte-Carlo rate and upper bound at one group size"),
        ("bound", "closed-form upper bound only"),
        ("optimize", "optimal group size by brute force and closed form"),
        ("sweep", "figure datasets over B, K', P or T_c"),
    ]:
        _add_common(sub.add_parser(name, help=help_))
    fz = sub.add_parser("fit-z", help="power-law fit of the Gamma ratio z(B)")
    fz.add_argument("--b-max", type=int, default=64)
    fz.add_argument("--free-eta", action="store_true", help="fit the exponent too")
    st = sub.add_parser("selftest", help="moment identities and Lambert W checks")
    st.add_argument("--draws", type=int, default=100_000)
    st.add_argument("--seed", type=int, default=0)
    return parser


def parse_config(args: argparse.Namespace | list[str] | str | Path | None = None) -> ExperimentConfig:
    """Resolve a config from a file path, a flag list or parsed flags.

    Flags override the file named by ``--config``; missing keys take the
    default scenario (K=360, T_c=900, 0 dBm, d0=51, d=48, dv=2).
    """
    if args is None:
        return _build({})
    if isinstance(args, (str, Path)):
        return _build(read_config_file(args))
    if isinstance(args, list):
        p = argparse.ArgumentParser(exit_on_error=False)
        _add_common(p)
        args = p.parse_args(args)
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, (_, conv) in _KEYS.items():
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            values[key] = conv(flag) if key == "sweep" else flag
    return _build(values)


def _rate_row(cfg: ExperimentConfig, B: int, k_on: int | None = None, note: str = "") -> dict:
    params = cfg.params(B=B)
    kp = params.k_prime
    row = dict.fromkeys(RATE_HEADER)
    row.update(B=B, K_prime=kp, pilot_overhead=kp + 1)
    if cfg.onoff:
        row.update(dict.fromkeys(ONOFF_HEADER))
    if cfg.perfect:
        row.update(dict.fromkeys(PERFECT_HEADER))
    row["skipped"] = note
    if note:
        return row
    if params.prefactor <= 0:
        row["skipped"] = f"pilot overhead {kp + 1} >= T_c {cfg.T_c}"
        return row
    kw = dict(trials=cfg.trials, master_seed=cfg.seed, workers=cfg.workers)
    mc = rate.mc_achievable_rate(params, **kw)
    row.update(mc_rate=mc.rate, mc_stderr=mc.stderr, upper_bound=rate.rate_upper_bound(params))
    if cfg.onoff:
        oo = rate.mc_onoff_rate(params, k_on or kp, **kw)
        row.update(onoff_rate=oo.rate, onoff_stderr=oo.stderr)
    if cfg.perfect:
        pc = rate.mc_achievable_rate(params, csi="perfect", **kw)
        row.update(perfect_rate=pc.rate, perfect_stderr=pc.stderr)
    return row


def run_rate_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Rows of MC rate, bound and optional baselines over a B or K' grid.

    A K' grid point maps to ``B = K // K'``; if that grouping does not give
    exactly ``K'`` subgroups the row is emitted as skipped.
    """
    if cfg.sweep is None or cfg.sweep.variable not in ("B", "K_prime"):
        raise ConfigError("rate sweep needs --sweep over B or Kp")
    rows = []
    for value in cfg.sweep.grid:
        value = int(value)
        if cfg.sweep.variable == "B":
            rows.append(_rate_row(cfg, value))
        else:
            B = cfg.K // value
            note = "" if cfg.K // B == value else f"K'={value} not reachable by uniform grouping"
            rows.append(_rate_row(cfg, B, k_on=value, note=note))
    return rows


def run_optimum_sweep(cfg: ExperimentConfig) -> list[dict]:
    if cfg.sweep is None or cfg.sweep.variable not in ("P_dbm", "T_c"):
        raise ConfigError("optimum sweep needs --sweep over P or Tc")
    rows = []
    for value in cfg.sweep.grid:
        if cfg.sweep.variable == "P_dbm":
            params = cfg.params(P_dbm=float(value))
        else:
            params = cfg.params(T_c=int(value))
        brute = optimizer.optimal_group_brute_force(params)
        closed = optimizer.optimal_group_closed_form(params, cfg.constants)
        rows.append(
            dict(
                sweep_value=value,
                b_star_brute=brute.b_star,
                b_star_closed=closed.b_star,
                rbar_brute=brute.rate_bound,
                rbar_closed=closed.rate_bound,
                rbar_ratio=closed.rate_bound / brute.rate_bound,
            )
        )
    return rows


def format_rows(rows: list[dict], fmt: str = "csv") -> str:
    if not rows:
        return ""
    header = list(rows[0])
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if r[k] is None else repr(r[k]) if isinstance(r[k], float) else r[k] for k in header])
    elif fmt == "jsonl":
        for r in rows:
            buf.write(json.dumps({k: r[k] for k in header}) + "\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    return buf.getvalue()


def write_rows(rows: list[dict], path: str | None, fmt: str = "csv"):
    text = format_rows(rows, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _emit(obj: dict, path: str | None):
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_rate(cfg: ExperimentConfig):
    row = _rate_row(cfg, cfg.B)
    _emit(row, cfg.out)


def _cmd_bound(cfg: ExperimentConfig):
    params = cfg.params()
    co = rate.bound_coefficients(params.B, params.beta_d, params.beta_l)
    _emit(
        dict(
            B=params.B,
            K_prime=params.k_prime,
            beta_d=params.beta_d,
            beta_l=params.beta_l,
            gamma=params.gamma,
            z=co.z,
            xi1=co.xi1,
            xi2=co.xi2,
            upper_bound=rate.rate_upper_bound(params),
        ),
        cfg.out,
    )


def _cmd_optimize(cfg: ExperimentConfig):
    params = cfg.params()
    res = [
        optimizer.optimal_group_brute_force(params),
        optimizer.optimal_group_closed_form(params, cfg.constants),
        optimizer.optimal_group_alt_form(params, cfg.constants),
    ]
    _emit({r.method.value: dict(b_star=r.b_star, k_prime=r.k_prime, rate_bound=r.rate_bound) for r in res}, cfg.out)


def _cmd_sweep(cfg: ExperimentConfig):
    if cfg.sweep is None:
        raise ConfigError("sweep needs --sweep VAR=START:STOP:STEP")
    if cfg.sweep.variable in ("B", "K_prime"):
        rows = run_rate_sweep(cfg)
    else:
        rows = run_optimum_sweep(cfg)
    write_rows(rows, cfg.out, cfg.format)


def _cmd_fit_z(args) -> int:
    fit = optimizer.fit_z_power(args.b_max, eta=None if args.free_eta else 0.5)
    _emit(dataclasses.asdict(fit), None)
    return 0


def _cmd_selftest(args) -> int:
    checks = selftest.run_all(draws=args.draws, seed=args.seed)
    failed = 0
    for c in checks:
        failed += not c.ok
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}: {c.estimate:.6g} vs {c.expected:.6g} (tol {c.tolerance:.2g})")
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    np.seterr(all="warn")
    if args.command == "fit-z":
        return _cmd_fit_z(args)
    if args.command == "selftest":
        return _cmd_selftest(args)
    try:
        cfg = parse_config(args)
        {"rate": _cmd_rate, "bound": _cmd_bound, "optimize": _cmd_optimize, "sweep": _cmd_sweep}[args.command](cfg)
    except (ConfigError, OSError, ValueError) as exc:
        parser.error(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
