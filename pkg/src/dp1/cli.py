"""Command-line front end.

Every run prints exactly one JSON manifest to stdout:

    {"command": ..., "config": {...resolved...}, "diagnostics": {...},
     "results": {...}, "version": ..., "wall_time_ms": ...}

serialized with sorted keys and no whitespace.  The echoed config is
fully resolved (file values, flag overrides, defaults), so a manifest
is a complete, replayable record: two runs from the same resolved
config agree byte-for-byte except for wall_time_ms.

Configuration is a flat JSON object; every key has a flag of the same
name (dashes for underscores) and flags win over the file.  Numbers
that feed the arithmetic core travel as decimal strings so the parse
precision is the consumer's choice, not the shell's.

Exit codes: 0 success; 1 configuration problems (unknown flags or
keys, missing required settings, unreadable config); 2 domain errors
(invalid parameters, malformed tables, out-of-range indices); 3
convergence failures (escalation budget or quadrature level cap
exhausted).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Callable, Optional

from . import __version__
from .asymptotics import (
    convergence_report,
    limit_params,
    predicted_limit_negative,
    predicted_limit_positive,
)
from .coefficients import (
    CoefficientFamily,
    FreudQuartic,
    GeneralClosedForm,
    MiddleOnlyExample,
    PowerFormula,
    SqrtNExample,
    Tabulated,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    NoClosedForm,
)
from .oracle import freud_x1_rho_closed_form, x1_quadrature_rho
from .recurrence import (
    iterate,
    read_trajectory_csv,
    residual,
    write_trajectory_csv,
)
from .shooting import SolvePolicy, scan, solve
from .uniqueness import verdict

_FAMILY_KEYS: dict[str, tuple[type, Any]] = {
    "family": (str, "freud"),
    "c": (str, "1"),
    "K": (str, "0"),
    "rho": (str, "0"),
    "ell": (str, None),
    "sigma_p1": (str, None),
    "sigma_0": (str, None),
    "sigma_m1": (str, None),
    "kappa": (str, None),
    "family_table": (str, None),
}

_COMMAND_KEYS: dict[str, dict[str, tuple[type, Any]]] = {
    "solve": {
        **_FAMILY_KEYS,
        "x0": (str, "0"),
        "tol": (str, "1e-30"),
        "prec": (int, None),
        "prec_cap": (int, None),
        "n0": (int, 16),
        "max_escalations": (int, 24),
        "bits_per_step": (float, 4.0),
        "guard_bits": (int, 64),
        "out_csv": (str, None),
    },
    "scan": {
        **_FAMILY_KEYS,
        "x0": (str, "0"),
        "grid": (list, None),
        "depth": (int, 30),
        "prec": (int, 192),
        "workers": (int, 1),
    },
    "check": {
        **_FAMILY_KEYS,
        "x0": (str, "0"),
        "window": (int, 1000),
        "prec": (int, 192),
    },
    "asymptotics": {
        **_FAMILY_KEYS,
        "window": (str, None),
        "prec": (int, 192),
        "x0": (str, "0"),
        "tol": (str, None),
    },
    "oracle": {
        **_FAMILY_KEYS,
        "method": (str, "quadrature"),
        "prec": (int, 192),
        "tol": (str, None),
    },
    "residual": {
        **_FAMILY_KEYS,
        "table": (str, None),
        "prec": (int, 128),
    },
}

_HELP = {
    "solve": "bisect the n = 1 slope to a certified bracket",
    "scan": "classify a grid of n = 1 slopes at fixed depth",
    "check": "run the uniqueness conditions over an index window",
    "asymptotics": "limit parameters and the predicted scaled limit",
    "oracle": "independent x_1 value for the quartic-weight family",
    "residual": "defect of a tabulated trajectory against a family",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep codes honest
        raise ConfigError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="dp1", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, keys in _COMMAND_KEYS.items():
        sp = sub.add_parser(cmd, help=_HELP[cmd])
        sp.add_argument("--config", help="flat JSON config file")
        for key, (typ, _default) in keys.items():
            flag = "--" + (key if key == "K" else key.replace("_", "-"))
            if typ is int:
                sp.add_argument(flag, type=int)
            elif typ is float:
                sp.add_argument(flag, type=float)
            else:  # str and list both arrive as strings on the command line
                sp.add_argument(flag)
    return p


def _coerce(cmd: str, key: str, value) -> Any:
    typ = _COMMAND_KEYS[cmd][key][0]
    if typ is list:
        if isinstance(value, str):
            items = [s.strip() for s in value.split(",") if s.strip()]
        elif isinstance(value, list):
            items = [str(v) for v in value]
        else:
            raise ConfigError(f"{key} must be a list or comma string")
        if not items:
            raise ConfigError(f"{key} must not be empty")
        return items
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if isinstance(value, (str, int, float)) and not isinstance(value, bool):
        return str(value)
    raise ConfigError(f"{key} must be a string, got {value!r}")


def _resolve(cmd: str, args: argparse.Namespace) -> dict:
    schema = _COMMAND_KEYS[cmd]
    cfg = {k: default for k, (_t, default) in schema.items()}
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config must be a flat JSON object")
        for k, v in raw.items():
            if k not in schema:
                raise ConfigError(f"unknown config key {k!r} for {cmd}")
            cfg[k] = _coerce(cmd, k, v)
    for k in schema:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = _coerce(cmd, k, v)
    return cfg


def _power(text: str) -> PowerFormula:
    coeff, sep, exp = text.partition(":")
    return PowerFormula(coeff.strip(), exp.strip() if sep else "0")


def _family(cfg: dict) -> CoefficientFamily:
    name = cfg["family"]
    if name == "freud":
        return FreudQuartic(c=cfg["c"], K=cfg["K"], rho=cfg["rho"])
    if name == "sqrtn":
        return SqrtNExample()
    if name == "middle-only":
        return MiddleOnlyExample()
    if name == "closed-form":
        if cfg["ell"] is None:
            raise ConfigError("closed-form family needs ell")
        return GeneralClosedForm(
            ell=_power(cfg["ell"]),
            sigma_p1=_power(cfg["sigma_p1"] or "1"),
            sigma_0=_power(cfg["sigma_0"] or "1"),
            sigma_m1=_power(cfg["sigma_m1"] or "1"),
            kappa=_power(cfg["kappa"] or "0"),
        )
    if name == "tabulated":
        if cfg["family_table"] is None:
            raise ConfigError("tabulated family needs family_table")
        return Tabulated.from_csv(cfg["family_table"])
    raise ConfigError(f"unknown family {name!r}")


def _cmd_solve(cfg: dict) -> tuple[dict, dict]:
    fam = _family(cfg)
    policy = SolvePolicy(
        n0=cfg["n0"],
        precision=cfg["prec"],
        max_escalations=cfg["max_escalations"],
        bits_per_step=cfg["bits_per_step"],
        guard_bits=cfg["guard_bits"],
        prec_cap=cfg["prec_cap"],
    )
    res = solve(fam, cfg["x0"], cfg["tol"], policy)
    results = {
        "x1": res.x1_star.to_decimal(),
        "bracket_lo": res.bracket.lo.to_decimal(),
        "bracket_hi": res.bracket.hi.to_decimal(),
        "relative_width": res.relative_width.to_decimal(),
        "depth_certified": res.bracket.depth_N,
        "depth_used": res.n_used,
        "precision_used": res.p_used,
    }
    diagnostics: dict[str, Any] = {
        "family": fam.family_id(),
        "classifications": res.classifications,
        "escalations": list(res.escalations),
    }
    if cfg["out_csv"] is not None:
        traj = iterate(fam, cfg["x0"], res.x1_star, res.n_used, res.p_used)
        write_trajectory_csv(cfg["out_csv"], traj, fam)
        diagnostics["trajectory_csv"] = cfg["out_csv"]
        diagnostics["trajectory_termination"] = traj.termination.kind.value
    return results, diagnostics


def _cmd_scan(cfg: dict) -> tuple[dict, dict]:
    fam = _family(cfg)
    if cfg["grid"] is None:
        raise ConfigError("scan needs a grid")
    res = scan(
        fam, cfg["x0"], cfg["grid"], cfg["depth"], cfg["prec"], cfg["workers"]
    )
    points = [
        {
            "t": p.t.to_decimal(),
            "outcome": p.outcome.value if p.outcome is not None else None,
            "index": p.index,
            "error": p.error,
        }
        for p in res.points
    ]
    results = {
        "points": points,
        "window_lo": (
            res.window_lo.to_decimal() if res.window_lo is not None else None
        ),
        "window_hi": (
            res.window_hi.to_decimal() if res.window_hi is not None else None
        ),
        "monotone": res.monotone,
    }
    return results, {"family": fam.family_id(), "depth": cfg["depth"]}


def _cmd_check(cfg: dict) -> tuple[dict, dict]:
    fam = _family(cfg)
    rep = verdict(fam, cfg["x0"], cfg["window"], cfg["prec"])
    lim = {
        "window_min": (
            rep.liminf.window_min.to_decimal()
            if rep.liminf.window_min is not None
            else None
        ),
        "argmin": rep.liminf.argmin,
        "symbolic": rep.liminf.symbolic,
    }
    results = {
        "verdict": rep.verdict.kind.value,
        "verdict_window": rep.verdict.window,
        "x0_ok": rep.x0_ok,
        "condition_counts": rep.condition_counts(),
        "first_neither": rep.first_neither(),
        "per_n_runs": [list(r) for r in rep.per_n_runs()],
        "liminf": lim,
        "partition_certificate": rep.partition_certificate,
    }
    diagnostics = {
        "family": rep.family_id,
        "window": rep.window_n,
        "precision_bits": rep.precision_bits,
    }
    return results, diagnostics


def _parse_window(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    a, sep, b = text.partition(":")
    if not sep:
        raise ConfigError("window must look like n1:n2")
    try:
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"window must be integers, got {text!r}")


def _cmd_asymptotics(cfg: dict) -> tuple[dict, dict]:
    fam = _family(cfg)
    window = _parse_window(cfg["window"])
    params = limit_params(fam, cfg["prec"], window)
    results: dict[str, Any] = {
        "p_plus": params.p_plus.to_decimal(),
        "sigma0": params.sigma0.to_decimal(),
        "p_minus": params.p_minus.to_decimal(),
        "q": params.q.to_decimal(),
        "source": params.source.value,
        "window": list(params.window) if params.window else None,
        "deviation": (
            {k: v.to_decimal() for k, v in params.deviation.items()}
            if params.deviation is not None
            else None
        ),
        "predicted_positive": predicted_limit_positive(params).to_decimal(),
        "predicted_negative": predicted_limit_negative(params).to_decimal(),
    }
    diagnostics: dict[str, Any] = {"family": fam.family_id()}
    if cfg["tol"] is not None:
        res = solve(fam, cfg["x0"], cfg["tol"], SolvePolicy(precision=cfg["prec"]))
        traj = iterate(fam, cfg["x0"], res.x1_star, res.n_used, res.p_used)
        rep = convergence_report(traj, fam, params, res.bracket.depth_N)
        results["x1"] = res.x1_star.to_decimal()
        results["convergence"] = {
            "tail_index": rep.tail_index,
            "t_tail": rep.t_tail.to_decimal(),
            "predicted": rep.predicted.to_decimal(),
            "abs_gap": rep.abs_gap.to_decimal(),
            "window_min": rep.window_min.to_decimal(),
            "window_max": rep.window_max.to_decimal(),
        }
        diagnostics["depth_certified"] = res.bracket.depth_N
    return results, diagnostics


def _cmd_oracle(cfg: dict) -> tuple[dict, dict]:
    if cfg["family"] != "freud":
        raise ConfigError("oracle supports only the freud family")
    method = cfg["method"]
    if method == "closed-form":
        from .coefficients import _fraction

        if _fraction(cfg["K"], "K") != 0:
            raise NoClosedForm("closed form needs K = 0")
        value = freud_x1_rho_closed_form(cfg["rho"], cfg["prec"])
        return (
            {"method": "closed_form", "value": value.to_decimal()},
            {"c": cfg["c"], "K": cfg["K"], "rho": cfg["rho"]},
        )
    if method != "quadrature":
        raise ConfigError(f"unknown oracle method {method!r}")
    qr = x1_quadrature_rho(
        cfg["rho"], cfg["c"], cfg["K"], cfg["prec"], cfg["tol"]
    )
    results = {
        "method": "quadrature",
        "value": qr.value.to_decimal(),
        "est_error": qr.est_error.to_decimal(),
        "levels": qr.levels,
        "nodes": qr.nodes,
        "cutoff": qr.cutoff.to_decimal(),
    }
    return results, {"c": cfg["c"], "K": cfg["K"], "rho": cfg["rho"]}


def _cmd_residual(cfg: dict) -> tuple[dict, dict]:
    if cfg["table"] is None:
        raise ConfigError("residual needs a trajectory table")
    fam = _family(cfg)
    traj = read_trajectory_csv(cfg["table"], cfg["prec"])
    defect = residual(traj, fam)
    results = {
        "max_relative_defect": defect.to_decimal(),
        "points": len(traj),
        "precision_bits": cfg["prec"],
    }
    return results, {"family": fam.family_id(), "table": cfg["table"]}


_DISPATCH: dict[str, Callable[[dict], tuple[dict, dict]]] = {
    "solve": _cmd_solve,
    "scan": _cmd_scan,
    "check": _cmd_check,
    "asymptotics": _cmd_asymptotics,
    "oracle": _cmd_oracle,
    "residual": _cmd_residual,
}


def main(argv=None) -> int:
    t0 = time.monotonic()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cmd = args.command
        cfg = _resolve(cmd, args)
        results, diagnostics = _DISPATCH[cmd](cfg)
    except (ConfigError, OSError) as exc:
        # unreadable/missing input files are invocation problems
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    manifest = {
        "version": __version__,
        "command": cmd,
        "config": cfg,
        "results": results,
        "diagnostics": diagnostics,
        "wall_time_ms": int((time.monotonic() - t0) * 1000),
    }
    print(json.dumps(manifest, sort_keys=True, separators=(",", ":")))
    return 0
