"""Command-line front end.

Usage::

    iterhardy eval    --config run.toml [--set KEY=VALUE ...] [--out PATH] [--format json|csv]
    iterhardy certify --config run.toml
    iterhardy ibp     --set ibp.alphas=[0.5,1,2] --set ibp.instances=100
    iterhardy sweep   --config run.toml --axis n --values 128,256,512

Config files are TOML with flat dotted keys::

    theorem = "thm61"
    exponents.p = 2
    exponents.q = 2
    weights.u = "1"
    weights.v = "min(t^-0.5, t^-2)"
    weights.w = "chi(1,2)"
    weights.b = "1"
    grid.tMin = 1e-4
    grid.tMax = 1e4
    grid.n = 512
    oracle.seed = 20240601
    certification.cLower = 0.01
    certification.cUpper = 100

Other keys: ``weights.a``, ``gamma_over_n`` (thm71), ``cone``, ``target``,
``truncation``, ``oracle.subsample``, ``oracle.ascentIters``, ``ibp.alphas``,
``ibp.instances``, ``sweep.axis``, ``sweep.values``, ``sweep.oracle``.
``--set`` values are read as TOML literals, falling back to plain text, and
override file keys.

Exit codes: 0 success or certification pass, 1 runtime error, 2 invalid
input, 3 certification fail.

JSON report (``schemaVersion`` 1)::

    {schemaVersion, theorem, case, exponents: {p, q},
     terms: [{name, value, boundaryRead}], total, sumOfTerms, truncationDelta,
     boundaryReads, notes, oracle?: {lower, band, passed, cLower, cUpper, ...},
     warnings}

Infinite values are written as the strings ``"Infinity"``/``"-Infinity"`` and
NaN as ``null``.

CSV headers:

* ``eval``: ``name,value,boundaryRead``
* ``certify``: ``theorem,total,lower,band,passed``
* ``ibp``: ``alpha,seed,A1,A2,ratio,pass``
* ``sweep``: ``axis,value,total,sumOfTerms,truncationDelta,lower,band,monotone``
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
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import weightlang as wl
from .characterizations import THEOREMS, InvalidSpecError, ProblemSpec, evaluate
from .ibp import ibp_sweep, rows_to_csv
from .numgrid import DomainError, Exponents, make_grid
from .oracle import SEED, certify

__all__ = [
    "ConfigError", "RunConfig", "parse_config", "load_config", "apply_overrides",
    "to_problem", "cmd_eval", "cmd_certify", "cmd_ibp", "cmd_sweep", "main",
    "SCHEMA_VERSION", "SWEEP_HEADER", "EXIT_OK", "EXIT_RUNTIME", "EXIT_INVALID",
    "EXIT_CERT_FAIL",
]

SCHEMA_VERSION = 1
EXIT_OK, EXIT_RUNTIME, EXIT_INVALID, EXIT_CERT_FAIL = 0, 1, 2, 3
SWEEP_HEADER = ("axis", "value", "total", "sumOfTerms", "truncationDelta", "lower",
                "band", "monotone")
SWEEP_AXES = ("p", "q", "gamma_over_n", "tMax", "n")
WEIGHTS = ("u", "v", "w", "a", "b")

# weights each theorem reads; ``a`` defaults to 1 everywhere
REQUIRED = {
    "thm31": ("u", "v", "w"),
    "thm32": ("u", "v", "w", "b"),
    "thm33": ("u", "v", "w", "b"),
    "thm41": ("u", "v", "w"),
    "thm51": ("u", "v", "w", "b"),
    "thm61": ("u", "v", "w", "b"),
    "thm71": ("v", "w"),
}
DEFAULT_CONE = {t: ("nonnegative" if t in ("thm31", "thm32", "thm33") else "nonincreasing")
                for t in THEOREMS}


class ConfigError(ValueError):
    """Invalid configuration.

    Attributes:
        field: Dotted key at fault, or ``None`` for file-level errors.
    """

    def __init__(self, field: Optional[str], message: str):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    theorem: Optional[str] = None
    p: Optional[float] = None
    q: Optional[float] = None
    weights: dict = field(default_factory=dict)
    gamma_over_n: Optional[float] = None
    cone: Optional[str] = None
    target: str = "cesaro"
    truncation: bool = True
    t_min: float = 1e-4
    t_max: float = 1e4
    n: int = 512
    subsample: int = 16
    ascent_iters: int = 10
    seed: int = SEED
    c_lower: float = 1e-2
    c_upper: float = 1e2
    ibp_alphas: tuple = (0.5, 1.0, 2.0)
    ibp_instances: int = 100
    sweep_axis: Optional[str] = None
    sweep_values: tuple = ()
    sweep_oracle: bool = True

    def to_flat(self) -> dict:
        """Flat dotted mapping; ``parse_config(dumps(to_flat()))`` reproduces the config."""
        out = {}
        if self.theorem is not None:
            out["theorem"] = self.theorem
        if self.p is not None:
            out["exponents.p"] = self.p
        if self.q is not None:
            out["exponents.q"] = self.q
        for k in WEIGHTS:
            if k in self.weights:
                out[f"weights.{k}"] = self.weights[k]
        if self.gamma_over_n is not None:
            out["gamma_over_n"] = self.gamma_over_n
        if self.cone is not None:
            out["cone"] = self.cone
        out.update({
            "target": self.target, "truncation": self.truncation,
            "grid.tMin": self.t_min, "grid.tMax": self.t_max, "grid.n": self.n,
            "oracle.subsample": self.subsample, "oracle.ascentIters": self.ascent_iters,
            "oracle.seed": self.seed,
            "certification.cLower": self.c_lower, "certification.cUpper": self.c_upper,
            "ibp.alphas": list(self.ibp_alphas), "ibp.instances": self.ibp_instances,
        })
        if self.sweep_axis is not None:
            out["sweep.axis"] = self.sweep_axis
        out["sweep.values"] = list(self.sweep_values)
        out["sweep.oracle"] = self.sweep_oracle
        return out

    def to_toml(self) -> str:
        return "".join(f"{k} = {_toml_value(v)}\n" for k, v in self.to_flat().items())


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return json.dumps(str(v))


# ---------------------------------------------------------------------------
# parsing


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _number(flat: dict, key: str, default, kind=float):
    if key not in flat:
        return default
    v = flat[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(key, f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _bool(flat: dict, key: str, default: bool) -> bool:
    v = flat.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(key, f"expected true or false, got {v!r}")
    return v


def _numbers(flat: dict, key: str, default) -> tuple:
    v = flat.get(key, default)
    if isinstance(v, str):
        try:
            v = [float(x) for x in v.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(key, f"expected a list of numbers, got {v!r}") from None
    if not isinstance(v, (list, tuple)) or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise ConfigError(key, f"expected a list of numbers, got {v!r}")
    return tuple(float(x) for x in v)


KNOWN = {
    "theorem", "exponents.p", "exponents.q", "gamma_over_n", "cone", "target",
    "truncation", "grid.tMin", "grid.tMax", "grid.n", "oracle.subsample",
    "oracle.ascentIters", "oracle.seed", "certification.cLower", "certification.cUpper",
    "ibp.alphas", "ibp.instances", "sweep.axis", "sweep.values", "sweep.oracle",
    *(f"weights.{k}" for k in WEIGHTS),
}


def config_from_flat(flat: dict) -> RunConfig:
    """Validate a flat dotted mapping.

    Theorem-specific requirements (exponents, weights) are checked later by
    :func:`to_problem`, so an ``ibp`` run needs none of them.

    Raises:
        ConfigError: Naming the offending key.
    """
    for k in flat:
        if k not in KNOWN:
            raise ConfigError(k, "unknown key")
    theorem = flat.get("theorem")
    if theorem is not None and theorem not in THEOREMS:
        raise ConfigError("theorem", f"unknown theorem {theorem!r}; expected one of "
                          + ", ".join(THEOREMS))
    weights = {}
    for k in WEIGHTS:
        key = f"weights.{k}"
        if key not in flat:
            continue
        src = flat[key]
        if isinstance(src, (int, float)) and not isinstance(src, bool):
            src = repr(float(src))
        if not isinstance(src, str):
            raise ConfigError(key, f"expected a weight expression, got {src!r}")
        try:
            weights[k] = wl.to_text(wl.parse(src))
        except wl.ParseError as exc:
            raise ConfigError(key, str(exc)) from None
    cone = flat.get("cone")
    if cone is not None and cone not in ("nonnegative", "nonincreasing"):
        raise ConfigError("cone", f"expected nonnegative or nonincreasing, got {cone!r}")
    target = flat.get("target", "cesaro")
    if target not in ("cesaro", "lebesgue"):
        raise ConfigError("target", f"expected cesaro or lebesgue, got {target!r}")
    cfg = RunConfig(
        theorem=theorem,
        p=_number(flat, "exponents.p", None),
        q=_number(flat, "exponents.q", None),
        weights=weights,
        gamma_over_n=_number(flat, "gamma_over_n", None),
        cone=cone,
        target=target,
        truncation=_bool(flat, "truncation", True),
        t_min=_number(flat, "grid.tMin", 1e-4),
        t_max=_number(flat, "grid.tMax", 1e4),
        n=_number(flat, "grid.n", 512, int),
        subsample=_number(flat, "oracle.subsample", 16, int),
        ascent_iters=_number(flat, "oracle.ascentIters", 10, int),
        seed=_number(flat, "oracle.seed", SEED, int),
        c_lower=_number(flat, "certification.cLower", 1e-2),
        c_upper=_number(flat, "certification.cUpper", 1e2),
        ibp_alphas=_numbers(flat, "ibp.alphas", (0.5, 1.0, 2.0)),
        ibp_instances=_number(flat, "ibp.instances", 100, int),
        sweep_axis=flat.get("sweep.axis"),
        sweep_values=_numbers(flat, "sweep.values", ()),
        sweep_oracle=_bool(flat, "sweep.oracle", True),
    )
    for key, val in (("exponents.p", cfg.p), ("exponents.q", cfg.q)):
        if val is not None and not (1.0 < val < math.inf):
            raise ConfigError(key, f"exponent must lie in (1, inf), got {val}")
    if cfg.gamma_over_n is not None and not (0.0 < cfg.gamma_over_n < 1.0):
        raise ConfigError("gamma_over_n", f"must lie in (0, 1), got {cfg.gamma_over_n}")
    if not (0.0 < cfg.t_min < cfg.t_max < math.inf):
        raise ConfigError("grid.tMin", "need 0 < grid.tMin < grid.tMax < inf")
    if cfg.n < 8:
        raise ConfigError("grid.n", f"need at least 8 nodes, got {cfg.n}")
    if not (0.0 < cfg.c_lower <= cfg.c_upper):
        raise ConfigError("certification.cLower",
                          "need 0 < certification.cLower <= certification.cUpper")
    if cfg.subsample < 1 or cfg.ascent_iters < 0:
        raise ConfigError("oracle.subsample", "need oracle.subsample >= 1 and ascentIters >= 0")
    if cfg.ibp_instances < 0 or any(a <= 0 for a in cfg.ibp_alphas):
        raise ConfigError("ibp.alphas", "need positive alphas and instances >= 0")
    if cfg.sweep_axis is not None and cfg.sweep_axis not in SWEEP_AXES:
        raise ConfigError("sweep.axis", f"expected one of {', '.join(SWEEP_AXES)}")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse TOML text.

    Raises:
        ConfigError: With line and column for syntax errors, or the key at fault.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(None, f"config syntax error: {exc}") from None
    return config_from_flat(_flatten(data))


def _set_value(text: str):
    try:
        return tomllib.loads(f"x = {text}")["x"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(flat: dict, sets: Sequence[str]) -> dict:
    """Apply ``KEY=VALUE`` strings to a flat mapping."""
    out = dict(flat)
    for item in sets:
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(None, f"--set expects KEY=VALUE, got {item!r}")
        out[key] = _set_value(val.strip())
    return out


def load_config(path: Optional[str], sets: Sequence[str] = ()) -> RunConfig:
    flat = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(None, f"cannot read config {path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(None, f"{path}: config syntax error: {exc}") from None
        flat = _flatten(data)
    return config_from_flat(apply_overrides(flat, sets))


def to_problem(cfg: RunConfig) -> ProblemSpec:
    """Build the :class:`ProblemSpec` a config describes.

    Raises:
        ConfigError: If the theorem, an exponent or a required weight is missing.
    """
    if cfg.theorem is None:
        raise ConfigError("theorem", "missing")
    for key, val in (("exponents.p", cfg.p), ("exponents.q", cfg.q)):
        if val is None:
            raise ConfigError(key, f"missing (required by {cfg.theorem})")
    for k in REQUIRED[cfg.theorem]:
        if k not in cfg.weights:
            raise ConfigError(f"weights.{k}", f"missing (required by {cfg.theorem})")
    if cfg.theorem == "thm71" and cfg.gamma_over_n is None:
        raise ConfigError("gamma_over_n", "missing (required by thm71)")
    grid = make_grid(cfg.t_min, cfg.t_max, cfg.n)
    ws = {k: cfg.weights.get(k, "1") for k in WEIGHTS}
    return ProblemSpec(cfg.theorem, Exponents(cfg.p, cfg.q), grid=grid,
                       cone=cfg.cone or DEFAULT_CONE[cfg.theorem], target=cfg.target,
                       gamma_over_n=cfg.gamma_over_n, **ws)


# ---------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalar
        return _jsonable(x.item())
    return x


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".iterhardy-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report_json(rep) -> dict:
    d = rep.to_dict()
    warnings = d.pop("warnings")
    return {"schemaVersion": SCHEMA_VERSION, **d, "warnings": warnings}


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands


def cmd_eval(cfg: RunConfig, fmt: str = "json") -> str:
    """Evaluate the characterization named by ``cfg.theorem``."""
    rep = evaluate(to_problem(cfg), truncation=cfg.truncation)
    if fmt == "csv":
        return _csv(("name", "value", "boundaryRead"),
                    [(t.name, _num(t.value), str(t.boundary_read).lower()) for t in rep.terms])
    return dumps_json(_report_json(rep))


def run_certify(cfg: RunConfig):
    return certify(to_problem(cfg), c_lower=cfg.c_lower, c_upper=cfg.c_upper,
                   subsample=cfg.subsample, ascent_iters=cfg.ascent_iters, seed=cfg.seed,
                   truncation=cfg.truncation)


def certification_json(cert) -> dict:
    d = _report_json(cert.rhs)
    warnings = d.pop("warnings")
    d["oracle"] = {
        "lower": cert.lower, "band": cert.band, "passed": cert.passed,
        "cLower": cert.c_lower, "cUpper": cert.c_upper,
        **{k: v for k, v in cert.oracle.to_dict().items() if k != "lower"},
    }
    d["warnings"] = warnings
    return d


def cmd_certify(cfg: RunConfig, fmt: str = "json"):
    """Run the oracle against the characterization; returns ``(text, passed, summary)``."""
    cert = run_certify(cfg)
    summary = (f"{cert.rhs.theorem}: lower={cert.lower:.6g} total={cert.rhs.total:.6g} "
               f"band={cert.band:.6g} in [{cert.c_lower:g}, {cert.c_upper:g}]: "
               f"{'PASS' if cert.passed else 'FAIL'}")
    if fmt == "csv":
        text = _csv(("theorem", "total", "lower", "band", "passed"),
                    [(cert.rhs.theorem, _num(cert.rhs.total), _num(cert.lower),
                      _num(cert.band), str(cert.passed).lower())])
    else:
        text = dumps_json(certification_json(cert))
    return text, cert.passed, summary


def cmd_ibp(cfg: RunConfig, fmt: str = "csv") -> str:
    rows = ibp_sweep(cfg.ibp_alphas, cfg.ibp_instances, cfg.seed)
    if fmt == "json":
        return dumps_json({"schemaVersion": SCHEMA_VERSION, "rows": [
            {"alpha": r.alpha, "seed": r.seed, "A1": r.A1, "A2": r.A2, "ratio": r.ratio,
             "pass": r.passed} for r in rows]})
    return rows_to_csv(rows)


def _with_axis(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "p":
        return replace(cfg, p=value)
    if axis == "q":
        return replace(cfg, q=value)
    if axis == "gamma_over_n":
        return replace(cfg, gamma_over_n=value)
    if axis == "tMax":
        # keep nodes per decade so only the domain changes
        per = (cfg.n - 1) / math.log(cfg.t_max / cfg.t_min)
        n = int(round(per * math.log(value / cfg.t_min))) + 1 if value > cfg.t_min else cfg.n
        return replace(cfg, t_max=value, n=max(n, 8))
    if float(value) != int(value):
        raise ConfigError("sweep.values", f"n must be an integer, got {value}")
    return replace(cfg, n=int(value))


def sweep_rows(cfg: RunConfig, axis: Optional[str] = None,
               values: Optional[Sequence[float]] = None) -> list:
    """One row per value: totals, oracle band and, for ``tMax``, a monotonicity flag."""
    axis = axis or cfg.sweep_axis
    values = cfg.sweep_values if values is None else tuple(values)
    if axis not in SWEEP_AXES:
        raise ConfigError("sweep.axis", f"expected one of {', '.join(SWEEP_AXES)}")
    rows, prev = [], None
    for val in values:
        c = _with_axis(cfg, axis, float(val))
        config_from_flat(c.to_flat())  # revalidate the modified value
        if cfg.sweep_oracle:
            cert = run_certify(c)
            rep, lower, band = cert.rhs, cert.lower, cert.band
        else:
            rep, lower, band = evaluate(to_problem(c), truncation=c.truncation), None, None
        mono = ""
        if axis == "tMax":
            # a larger domain can only enlarge every term
            mono = "true" if prev is None or rep.total >= prev * (1 - 1e-9) else "false"
            prev = rep.total
        rows.append((axis, val, rep.total, rep.sum_of_terms, rep.truncation_delta,
                     lower, band, mono))
    return rows


def cmd_sweep(cfg: RunConfig, axis: Optional[str] = None,
              values: Optional[Sequence[float]] = None, fmt: str = "csv") -> str:
    rows = sweep_rows(cfg, axis, values)
    if fmt == "json":
        return dumps_json({"schemaVersion": SCHEMA_VERSION,
                           "rows": [dict(zip(SWEEP_HEADER, r)) for r in rows]})
    return _csv(SWEEP_HEADER, [(a, _num(v), _num(t), _num(s), _num(d), _num(lo), _num(b), m)
                               for a, v, t, s, d, lo, b, m in rows])


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iterhardy",
                                 description="Weighted inequalities for iterated operators.")
    ap.add_argument("command", choices=("eval", "certify", "ibp", "sweep"))
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--out", metavar="PATH")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--axis", choices=SWEEP_AXES, help="sweep axis (overrides sweep.axis)")
    ap.add_argument("--values", help="comma-separated sweep values (overrides sweep.values)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    sets = list(args.sets)
    if args.axis:
        sets.append(f"sweep.axis={json.dumps(args.axis)}")
    if args.values is not None:
        sets.append(f"sweep.values={json.dumps(args.values)}")
    code = EXIT_OK
    try:
        cfg = load_config(args.config, sets)
        if args.command == "eval":
            text = cmd_eval(cfg, args.format or "json")
        elif args.command == "certify":
            text, passed, summary = cmd_certify(cfg, args.format or "json")
            print(summary, file=sys.stderr)
            code = EXIT_OK if passed else EXIT_CERT_FAIL
        elif args.command == "ibp":
            text = cmd_ibp(cfg, args.format or "csv")
        else:
            text = cmd_sweep(cfg, fmt=args.format or "csv")
    except (ConfigError, InvalidSpecError, wl.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DomainError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.out:
        try:
            write_atomic(args.out, text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
