"""Command-line front end.

Every subcommand resolves an :class:`~qps.config.ExperimentConfig` from an
optional key-value file and flags (flags win), runs, and writes CSV or JSON.
Outputs embed the resolved config and toolkit version and are written
atomically.  Exit codes: 0 success, 1 failed acceptance criterion, 2 bad
configuration, 3 numeric guard trip.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .config import (ExperimentConfig, parse_complex, parse_etas, parse_grid, read_config_file)
from .errors import ConfigError, NumericGuardError, QPSError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


def _pair(text, name):
    vals = parse_grid(text, name)
    if len(vals) != 2:
        raise ConfigError(name, "expected two values a,b")
    return vals


# flag -> (config field, parser)
_FLAGS = {
    "omega": ("omega", str),
    "potential": ("potential", str),
    "energy": ("energy", parse_complex),
    "m": ("m", int),
    "N": ("N", int),
    "ntheta": ("n_theta", int),
    "eps": ("eps", parse_grid),
    "eta": ("etas", parse_etas),
    "delta": ("delta", float),
    "theta": ("theta", float),
    "energies": ("energies", lambda s: parse_grid(s, "energies")),
    "window": ("window", lambda s: _pair(s, "window")),
    "thresholds": ("thresholds", lambda s: parse_grid(s, "thresholds")),
    "R": ("R", float),
    "output": ("output", str),
    "threads": ("threads", int),
    "seed": ("seed", int),
    "suite": ("suite", str),
    "criteria": ("criteria", lambda s: tuple(int(x) for x in s.split(",") if x.strip())),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qps", description="Quasi-periodic Schrödinger toolkit")
    parser.add_argument("--version", action="version", version=f"qps {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("lyapunov", "acceleration", "ids", "holder", "ldt", "green-check", "riesz",
                 "acceptance"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file; flags override it")
        for flag in _FLAGS:
            p.add_argument(f"--{flag}", dest=flag, default=None)
    return parser


def resolve_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    for flag, (name, parser) in _FLAGS.items():
        raw = getattr(args, flag, None)
        if raw is None:
            continue
        try:
            values[name] = parser(raw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(flag, str(exc)) from None
    env = os.environ.get("QPS_THREADS")
    if env:
        try:
            values["threads"] = int(env)
        except ValueError:
            raise ConfigError("QPS_THREADS", f"not an integer: {env!r}") from None
    return ExperimentConfig(subcommand=args.subcommand, **values).validate()


def atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qps-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.output:
        atomic_write(cfg.output, text)
    else:
        sys.stdout.write(text)


def _json_text(cfg, payload) -> str:
    doc = {"qps_version": __version__, "config": cfg.to_json(), "result": payload}
    return json.dumps(doc, indent=2, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def _csv_text(cfg, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# qps {__version__}\n")
    buf.write(f"# config: {cfg.dumps()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _cocycle(cfg):
    from .cocycle import Cocycle
    return Cocycle(cfg.potential_obj(), cfg.energy, cfg.frequency())


def cmd_lyapunov(cfg):
    from .lyapunov import finite_lyapunov
    coc = _cocycle(cfg)
    rows = [(e, finite_lyapunov(coc, cfg.m, e, cfg.n_theta, cfg.threads)) for e in cfg.eps]
    return _csv_text(cfg, ["eps", "L_m"], rows)


def cmd_acceleration(cfg):
    from .lyapunov import acceleration
    est = acceleration(_cocycle(cfg), cfg.m, cfg.window, 5, cfg.n_theta, cfg.threads)
    return _json_text(cfg, est.to_json())


def cmd_ids(cfg):
    from .ids import ids_curve
    grid = cfg.energies or parse_grid("-5:5:0.01", "energies")
    curve = ids_curve(_cocycle(cfg), cfg.theta, cfg.N, grid)
    rows = [(E, int(c), float(c) / curve.N) for E, c in zip(curve.energies, curve.counts)]
    return _csv_text(cfg, ["E", "count", "N_value"], rows)


def cmd_holder(cfg):
    from .ids import holder_fit
    etas = [e for e in cfg.etas if e >= 4.0 / cfg.N]
    fit = holder_fit(cfg.potential_obj(), cfg.frequency(), cfg.theta, cfg.N, cfg.energy.real, etas)
    return _json_text(cfg, fit.to_json())


def cmd_ldt(cfg):
    from .ldt import band_decomposition, decay_check, deviation_measure, fourier, sample_field
    from .lyapunov import acceleration, linearity_window, profile
    coc = _cocycle(cfg)
    field = sample_field(coc, cfg.m, 0.0, cfg.n_theta, cfg.threads)
    bands = band_decomposition(field, coc.frequency, cfg.delta, threads=cfg.threads)
    prof = profile(coc, cfg.m, np.linspace(0.0, 0.2, 11), cfg.n_theta, cfg.threads)
    eps0 = linearity_window(prof, 1e-3)
    kappa = acceleration(coc, cfg.m, cfg.window, 5, cfg.n_theta, cfg.threads).nearest_integer
    decay = decay_check(fourier(field), kappa, math.exp(2 * math.pi * eps0), cfg.delta)
    payload = {"m": cfg.m, "delta": cfg.delta, "n": bands.n, "q_n": bands.q_n,
               "q_n1": bands.q_n1, "beta_n": bands.beta_n, "Q": bands.Q,
               "scale_mismatch": bands.scale_mismatch,
               "band_sup_norms": list(bands.sup_norms),
               "completeness_residual": bands.completeness_residual,
               "deviation": [{"t": t, "measure": deviation_measure(field, t)}
                             for t in cfg.thresholds],
               "decay": {"C_fit": decay.C_fit, "violations": list(decay.violations),
                         "kappa": kappa, "eps0": eps0}}
    return _json_text(cfg, payload)


def cmd_green_check(cfg):
    from .ids import FiniteOperator, green_trace_bound, resolvent_decoupling_check
    from .potential_theory import AnnulusGreen, circle_average, gamma_average, green_fourier
    rng = np.random.default_rng(cfg.seed)
    g = AnnulusGreen(cfg.R)
    annulus = []
    while len(annulus) < 20:
        r, rw = rng.uniform(1.0 / cfg.R, cfg.R, 2)
        if abs(r - rw) < 0.05 or abs(rw - 1.0) < 0.05:
            continue
        w = complex(rw * np.exp(2j * np.pi * rng.random()))
        k = int(rng.integers(1, 41))
        annulus.append({"r": r, "w": w, "k": k,
                        "circle_average": circle_average(g, r, w).discrepancy,
                        "gamma_average": gamma_average(g, r, w).discrepancy,
                        "fourier": green_fourier(g, k, w).discrepancy})
    coc = _cocycle(cfg)
    op = FiniteOperator.from_potential(coc.potential, coc.frequency, cfg.theta, cfg.N)
    half = 16
    z = complex(cfg.energy.real, cfg.energy.imag if cfg.energy.imag > 0 else 0.05)
    decoupling = [resolvent_decoupling_check(op, z, k, max(0, k - half), min(cfg.N - 1, k + half))
                  for k in range(0, cfg.N, max(1, cfg.N // 64))]
    trace = []
    for eta in cfg.etas:
        d_n, bound = green_trace_bound(op, cfg.energy.real, eta)
        trace.append({"eta": eta, "d_N": d_n, "bound": bound, "holds": d_n <= bound + 1e-12})
    payload = {"annulus": annulus,
               "max_annulus_discrepancy": max(max(a["circle_average"], a["gamma_average"],
                                                  a["fourier"]) for a in annulus),
               "resolvent_decoupling": {"window_half_width": half, "z": z,
                                        "max_discrepancy": max(decoupling)},
               "green_trace": trace}
    return _json_text(cfg, payload)


def cmd_riesz(cfg):
    from .potential_theory import riesz_mass
    if len(cfg.eps) != 2:
        raise ConfigError("eps", "riesz needs the band as --eps eps1,eps2")
    est = riesz_mass(_cocycle(cfg), cfg.m, cfg.eps, cfg.n_theta, threads=cfg.threads)
    return _json_text(cfg, est.to_json())


def cmd_acceptance(cfg):
    from .acceptance import run_suite
    results = run_suite(cfg.criteria or None, stream=sys.stderr if cfg.output is None else sys.stdout)
    payload = {"suite": cfg.suite, "passed": all(r.passed for r in results),
               "criteria": [r.to_json() for r in results]}
    return _json_text(cfg, payload), payload["passed"]


COMMANDS = {"lyapunov": cmd_lyapunov, "acceleration": cmd_acceleration, "ids": cmd_ids,
            "holder": cmd_holder, "ldt": cmd_ldt, "green-check": cmd_green_check,
            "riesz": cmd_riesz, "acceptance": cmd_acceptance}


def run(cfg: ExperimentConfig) -> int:
    try:
        out = COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericGuardError as exc:
        print(f"numeric guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    passed = True
    if isinstance(out, tuple):
        out, passed = out
    _emit(cfg, out)
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericGuardError as exc:
        print(f"numeric guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except QPSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
