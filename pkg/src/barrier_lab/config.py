"""Line-based ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Every key must be one of
:data:`KEYS`; a typo is an error rather than a silently ignored setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coefficients import CutoffProfile, ModelParams, ParameterError

# key -> (type, default, help)
KEYS = {
    "eps": (float, None, "barrier half-scale, 0 < eps < 1/8"),
    "alpha": (float, 1.0, "cutoff power of the piecewise profile"),
    "K": (float, 1.0, "scaling constant"),
    "kappa_T": (float, None, "turbulent diffusivity (> 0)"),
    "kappa_eps": (float, None, "molecular diffusivity (> 0); omit with scaling = auto"),
    "scaling": (str, "none", "auto sets kappa_eps = (K eps)^2 kappa_T; none reads kappa_eps"),
    "T_plus": (float, 2.0, "hot-wall temperature"),
    "profile.kind": (str, "arctan", "piecewise | arctan | quadratic | constant | tabulated"),
    "profile.eps": (float, None, "profile scale overriding eps (allows eps >= 1/8 in the profile only)"),
    "profile.alpha": (float, None, "profile power overriding alpha"),
    "profile.value": (float, 1.0, "chibar for the constant profile"),
    "profile.table": (str, None, "CSV (x, chi) for the tabulated profile"),
    "profile.boundary_layers": (bool, True, "include the wall layers"),
    "seed": (int, None, "master seed"),
    "step": (float, None, "Monte Carlo step h"),
    "paths": (int, None, "Monte Carlo path count"),
    "t_max": (float, 50.0, "Monte Carlo horizon"),
    "nx": (int, 256, "finite-volume cells in x"),
    "ny": (int, 8, "finite-volume cells in y"),
    "graded": (bool, True, "graded x-mesh"),
    "grid_n": (int, 401, "points of the 1-D profile grid"),
    "theta0": (str, "linear", "initial field: zero | linear | linear_sin"),
}

_KINDS = {"piecewise": "piecewise_power", "arctan": "arctan_example",
          "quadratic": "quadratic_barrier", "constant": "constant", "tabulated": "tabulated"}

# stands in for eps when only profile.eps is given; no computation reads it
PLACEHOLDER_EPS = 0.1


@dataclass
class RunConfig:
    params: ModelParams
    profile: CutoffProfile
    settings: dict
    raw: dict = field(default_factory=dict)
    path: str | None = None

    def snapshot(self):
        return dict(self.raw)


def _convert(key, text, lineno):
    typ = KEYS[key][0]
    try:
        if typ is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        v = typ(text)
    except ValueError as exc:
        raise ParameterError(f"line {lineno}: {key}: {exc}") from None
    if typ is float and not math.isfinite(v):
        raise ParameterError(f"line {lineno}: {key} must be finite")
    return v


def parse_config_text(text, source="<config>"):
    """Parse to a dict of typed values; raises ParameterError with the line number."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParameterError(f"{source}: line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            raise ParameterError(f"{source}: line {lineno}: unknown key {key!r}")
        if key in out:
            raise ParameterError(f"{source}: line {lineno}: duplicate key {key!r}")
        if not val:
            raise ParameterError(f"{source}: line {lineno}: empty value for {key!r}")
        out[key] = _convert(key, val, lineno)
    return out


def build(values: dict, path=None) -> RunConfig:
    """Validate a parsed mapping into params, profile and solver settings."""
    v = {k: d for k, (_, d, _) in KEYS.items()}
    v.update(values)
    kt = v["kappa_T"]
    if kt is None:
        raise ParameterError("kappa_T is required")
    if not kt > 0:
        raise ParameterError(f"kappa_T must be positive, got {kt}")
    eps = v["eps"]
    if eps is None:
        if v["profile.eps"] is None:
            raise ParameterError("eps (or profile.eps) is required")
        eps = min(PLACEHOLDER_EPS, v["profile.eps"])
    scaling = v["scaling"].lower()
    if scaling == "auto":
        if v["eps"] is None:
            raise ParameterError("scaling = auto needs eps")
        if "kappa_eps" in values:
            raise ParameterError("kappa_eps conflicts with scaling = auto")
        ke = (v["K"] * eps) ** 2 * kt
    elif scaling == "none":
        ke = v["kappa_eps"]
        if ke is None:
            raise ParameterError("kappa_eps is required unless scaling = auto")
    else:
        raise ParameterError(f"scaling must be auto or none, got {v['scaling']!r}")
    if not ke > 0:
        raise ParameterError(f"kappa_eps must be positive, got {ke}")
    params = ModelParams(eps=eps, kappa_eps=ke, kappa_T=kt, alpha=v["alpha"], K=v["K"],
                         T_plus=v["T_plus"])
    kind = v["profile.kind"].lower()
    if kind not in _KINDS:
        raise ParameterError(f"profile.kind must be one of {sorted(_KINDS)}, got {kind!r}")
    pe, pa, bl = v["profile.eps"], v["profile.alpha"], v["profile.boundary_layers"]
    if kind == "piecewise":
        prof = CutoffProfile.piecewise_power(alpha=pa, eps=pe, boundary_layers=bl)
    elif kind == "arctan":
        if not bl:
            raise ParameterError("the arctan profile always carries its wall layers")
        prof = CutoffProfile.arctan_example(eps=pe)
    elif kind == "quadratic":
        prof = CutoffProfile.quadratic_barrier(eps=pe, boundary_layers=bl)
    elif kind == "constant":
        prof = CutoffProfile.constant(v["profile.value"])
    else:
        if v["profile.table"] is None:
            raise ParameterError("profile.table is required for a tabulated profile")
        prof = CutoffProfile.from_csv(v["profile.table"], pe if pe is not None else eps, bl)
    settings = {k: v[k] for k in ("seed", "step", "paths", "t_max", "nx", "ny", "graded",
                                  "grid_n", "theta0")}
    return RunConfig(params, prof, settings, dict(values), path)


def load_config(path) -> RunConfig:
    """Read and validate a config file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc.strerror}") from None
    return build(parse_config_text(text, str(path)), str(path))


def theta0_function(name, T_plus):
    """Initial fields for transient runs (all continuous and bounded)."""
    import numpy as np
    if name == "zero":
        return lambda x, y: np.zeros(np.broadcast(x, y).shape)
    if name == "linear":
        return lambda x, y: T_plus * (1.0 - x) / 2.0 + 0.0 * y
    if name == "linear_sin":
        return lambda x, y: T_plus * (1.0 - x) / 2.0 + 0.15 * T_plus * (1.0 - x * x) * np.sin(y)
    raise ParameterError(f"theta0 must be zero, linear or linear_sin, got {name!r}")
