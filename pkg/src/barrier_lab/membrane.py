"""Reflected and snapping-out Brownian motion: paths and Monte Carlo.

A snapping-out Brownian motion (SNOB) from the positive side is reflected
Brownian motion on [0, inf) until its local time at 0 exceeds an independent
Exp(beta_plus) clock; it then restarts at ``-0`` as reflected Brownian motion on
(-inf, 0] with an Exp(beta_minus) clock, and so on.  ``|X|`` is always a
reflected Brownian motion; only the side flips.

The optional walls at -1 and 1 are reflecting with their own exponential
local-time clocks; the time a wall clock rings is ``sigma_{-1}`` or
``sigma_1``.  Within a step, wall reflection is processed before the membrane
clock (``WALL_ORDER``); the two cannot both act in one step unless
``h`` is comparable to 1.

Randomness is per path (see :mod:`barrier_lab.rng`), so every estimator is a
deterministic function of ``(master_seed, n_paths, h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _backend
from .coefficients import ParameterError
from .hitting import MembraneParams, parse_start
from .kernels import membrane_nb as _nb
from .rng import DEFAULT_SEED

WALL_ORDER = "wall reflection before membrane switching"
KIND_CODES = {"brownian": _nb.BROWNIAN, "snob": _nb.SNOB, "snob_walls": _nb.SNOB,
              "elastic": _nb.ELASTIC, "reflected": _nb.SNOB}


class SideState(IntEnum):
    Plus = 1
    Minus = -1


@dataclass
class ExitRecord:
    time: float
    boundary: float


@dataclass
class PathSample:
    """One discretized trajectory.

    ``local_time`` is the accumulated local time at 0 (the Skorokhod
    regulator), ``side_trace`` the membrane orientation per step.
    """

    times: np.ndarray
    positions: np.ndarray
    local_time: np.ndarray
    side_trace: np.ndarray
    wall_local_times: tuple = (0.0, 0.0)
    exit: ExitRecord | None = None
    n_switches: int = 0

    def sign_consistent(self):
        """True when ``side * sign(x) >= 0`` at every step with ``x != 0``."""
        nz = self.positions != 0
        return bool(np.all(self.side_trace[nz] * np.sign(self.positions[nz]) >= 0))


@dataclass
class MCSummary:
    """Bernoulli-mean Monte Carlo estimate.

    ``ci95 = estimate -+ 1.96 std_error``.  Summaries built from disjoint path
    ranges merge with :meth:`merge`, which is associative and commutative.
    """

    n_paths: int
    estimate: float
    std_error: float
    ci95: tuple
    seed: int
    step: float
    successes: float = 0.0
    sum_sq: float = 0.0
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values, seed, step, extra=None):
        v = np.asarray(values, dtype=float)
        n = v.size
        s = float(v.sum())
        ss = float((v * v).sum())
        return cls._build(n, s, ss, seed, step, extra or {})

    @classmethod
    def _build(cls, n, s, ss, seed, step, extra):
        mean = s / n
        var = max(ss / n - mean * mean, 0.0)
        se = math.sqrt(var / n) if n > 1 else math.inf
        return cls(n, mean, se, (mean - 1.96 * se, mean + 1.96 * se), seed, step, s, ss, dict(extra))

    def merge(self, other: "MCSummary") -> "MCSummary":
        if self.seed != other.seed or self.step != other.step:
            raise ParameterError("can only merge summaries with equal seed and step")
        extra = dict(self.extra)
        for k, v in other.extra.items():
            if isinstance(v, (int, float)) and isinstance(extra.get(k), (int, float)):
                extra[k] = extra[k] + v
            else:
                extra.setdefault(k, v)
        return MCSummary._build(self.n_paths + other.n_paths, self.successes + other.successes,
                                self.sum_sq + other.sum_sq, self.seed, self.step, extra)

    def to_dict(self):
        return dict(n_paths=self.n_paths, estimate=self.estimate, std_error=self.std_error,
                    ci95=list(self.ci95), seed=self.seed, step=self.step, **self.extra)


@dataclass(frozen=True)
class ProcessSpec:
    """What to simulate: ``kind`` in {brownian, snob, snob_walls, elastic}."""

    kind: str
    mp: MembraneParams = MembraneParams(0.0, 0.0)
    wall_beta: tuple | None = None

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ParameterError(f"unknown process kind {self.kind!r}")

    @property
    def walls(self):
        return self.kind == "snob_walls"

    def wall_rates(self):
        if self.wall_beta is not None:
            return float(self.wall_beta[0]), float(self.wall_beta[1])
        return float(self.mp.beta_minus), float(self.mp.beta_plus)


def _check_step(h, a, b):
    if not h > 0:
        raise ParameterError("step h must be positive")
    lim = (min(abs(a), abs(b)) / 10.0) ** 2
    if h > lim:
        raise ParameterError(
            f"step h={h} too large for levels a={a}, b={b}: need h <= (min(|a|,b)/10)^2 = {lim:.3g}")


def _max_steps(t_max, h):
    if not t_max > 0:
        raise ParameterError("t_max must be positive")
    return int(math.ceil(t_max / h - 1e-9))


def run_paths(spec: ProcessSpec, x0, side, a, b, h, t_max, seed, path_offset, n_paths, record=False):
    """Low-level batch runner; returns a dict of per-path arrays.

    Keys: ``code`` (0 timeout, -1 hit a, 1 hit b, 2 killed), ``t_exit``,
    ``lt`` (local time at exit or at ``t_max``), ``n_switch``, ``wl``, ``wr``,
    ``x_final`` and, with ``record``, the trajectories.
    """
    kind = KIND_CODES[spec.kind]
    bp, bm = float(spec.mp.beta_plus), float(spec.mp.beta_minus)
    wbl, wbr = spec.wall_rates() if spec.walls else (0.0, 0.0)
    steps = _max_steps(t_max, h)
    args = (kind, float(x0), int(side), bp, bm, float(a), float(b), bool(spec.walls),
            wbl, wbr, float(h), steps, int(seed))
    if _backend.backend() == "numpy":
        from .kernels import membrane_np
        return membrane_np.snob_batch(*args, int(path_offset), int(n_paths), record=record)
    _backend.set_threads()
    if record:
        out = {k: [] for k in ("code", "t_exit", "lt", "n_switch", "wl", "wr", "x_final")}
        recs = []
        for i in range(n_paths):
            rt = np.zeros(steps + 1)
            rx = np.zeros(steps + 1)
            rl = np.zeros(steps + 1)
            rs = np.zeros(steps + 1, dtype=np.int8)
            res = _nb.snob_path(*args, int(path_offset + i), rt, rx, rl, rs)
            for k, v in zip(out, res[:7]):
                out[k].append(v)
            recs.append((rt, rx, rl, rs, res[7]))
        res = {k: np.asarray(v) for k, v in out.items()}
        res["rec"] = recs
        return res
    n = int(n_paths)
    code = np.zeros(n, dtype=np.int64)
    te = np.zeros(n)
    lt = np.zeros(n)
    nsw = np.zeros(n, dtype=np.int64)
    wl = np.zeros(n)
    wr = np.zeros(n)
    xf = np.zeros(n)
    _nb.snob_batch(*args, int(path_offset), n, code, te, lt, nsw, wl, wr, xf)
    return dict(code=code, t_exit=te, lt=lt, n_switch=nsw, wl=wl, wr=wr, x_final=xf)


def _to_pathsample(res, i=0):
    if "rec" in res:
        rt, rx, rl, rs, m = res["rec"][i]
        rt, rx, rl, rs = rt[:m], rx[:m], rl[:m], rs[:m]
    else:
        m = res["n_rec"][i]
        rt, rx, rl, rs = (res[k][i, :m] for k in ("rec_t", "rec_x", "rec_l", "rec_s"))
    code = int(res["code"][i])
    ex = None
    if code in (_nb.HIT_A, _nb.HIT_B):
        ex = ExitRecord(float(res["t_exit"][i]), float(rx[-1]) if code != 0 else math.nan)
    elif code == _nb.KILLED:
        ex = ExitRecord(float(res["t_exit"][i]), math.nan)
    return PathSample(rt.copy(), rx.copy(), rl.copy(), rs.astype(np.int8),
                      (float(res["wl"][i]), float(res["wr"][i])), ex, int(res["n_switch"][i]))


def simulate_reflected_bm(x0, h, t_max, seed=DEFAULT_SEED, path=0, b=None):
    """Reflected Brownian motion ``w + l`` on [0, inf) from ``x0 >= 0``.

    Stops at ``t_max`` or, when ``b`` is given, at the first hit of ``b``.
    """
    if x0 < 0:
        raise ParameterError("reflected BM needs x0 >= 0")
    bb = math.inf if b is None else float(b)
    res = run_paths(ProcessSpec("reflected"), x0, 1, -math.inf, bb, h, t_max, seed, path, 1, record=True)
    return _to_pathsample(res)


def simulate_snob(x0, mp: MembraneParams, h, t_max, seed=DEFAULT_SEED, path=0, a=None, b=None):
    """Snapping-out Brownian motion started at ``x0`` (a float, ``"+0"`` or ``"-0"``)."""
    x, side = parse_start(x0)
    aa = -math.inf if a is None else float(a)
    bb = math.inf if b is None else float(b)
    res = run_paths(ProcessSpec("snob", mp), x, side, aa, bb, h, t_max, seed, path, 1, record=True)
    return _to_pathsample(res)


def simulate_snob_reflected(x0, mp: MembraneParams, h, t_max, seed=DEFAULT_SEED, path=0, wall_beta=None):
    """SNOB on [-1, 1] with elastic walls; stops when a wall clock rings.

    ``wall_beta = (left, right)`` defaults to ``(beta_minus, beta_plus)``; use
    ``(0, 0)`` for purely reflecting walls.
    """
    x, side = parse_start(x0)
    if abs(x) > 1:
        raise ParameterError("x0 must lie in [-1, 1]")
    res = run_paths(ProcessSpec("snob_walls", mp, wall_beta), x, side, -1.0, 1.0, h, t_max, seed, path, 1,
                    record=True)
    return _to_pathsample(res)


def sample_exits(spec: ProcessSpec, a, b, x0, n_paths, h, master_seed=DEFAULT_SEED, t_max=None,
                 path_offset=0, check_step=True):
    """Per-path exit records for ``n_paths`` paths (dict of arrays)."""
    x, side = (float(x0), 1 if float(x0) >= 0 else -1) if spec.kind == "brownian" else parse_start(x0)
    if spec.walls:
        a, b = -1.0, 1.0
    if not (a < 0 < b) and spec.kind != "elastic":
        raise ParameterError("need a < 0 < b")
    if not a <= x <= b:
        raise ParameterError("x0 outside [a, b]")
    if check_step:
        _check_step(h, a if math.isfinite(a) else b, b)
    if t_max is None:
        span = max(abs(a) if math.isfinite(a) else 0.0, abs(b))
        t_max = 60.0 * span * span
    return run_paths(spec, x, side, a, b, h, t_max, master_seed, path_offset, n_paths)


def mc_exit_probability(process_spec: ProcessSpec, a, b, x0_with_side, n_paths, h,
                        master_seed=DEFAULT_SEED, t_max=None, batch_size=None):
    """Monte Carlo estimate of ``P(tau_a < tau_b)``.

    For ``snob_walls`` the event is ``sigma_{-1} < sigma_1`` and ``a, b`` are
    forced to -1 and 1.  Paths still running at ``t_max`` count as not having
    hit ``a`` and are reported in ``extra["n_timeout"]``.

    Raises
    ------
    ParameterError
        If ``h > (min(|a|, b)/10)**2``.
    """
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    batches = mc_exit_batches(process_spec, a, b, x0_with_side, n_paths, h, master_seed, t_max, batch_size)
    total = batches[0]
    for s in batches[1:]:
        total = total.merge(s)
    return total


def mc_exit_batches(process_spec, a, b, x0_with_side, n_paths, h, master_seed=DEFAULT_SEED,
                    t_max=None, batch_size=None):
    """Per-batch summaries over consecutive path ranges."""
    bs = n_paths if batch_size is None else int(batch_size)
    out = []
    for off in range(0, n_paths, bs):
        m = min(bs, n_paths - off)
        res = sample_exits(process_spec, a, b, x0_with_side, m, h, master_seed, t_max, off)
        hit_a = (res["code"] == _nb.HIT_A).astype(float)
        extra = dict(n_timeout=int((res["code"] == _nb.TIMEOUT).sum()),
                     n_hit_b=int((res["code"] == _nb.HIT_B).sum()))
        out.append(MCSummary.from_values(hit_a, master_seed, h, extra))
    return out


def mc_elastic_hit(b, beta, n_paths, h, master_seed=DEFAULT_SEED, t_max=None):
    """Estimate the probability that elastic BM from 0 reaches ``b`` before its clock rings."""
    spec = ProcessSpec("elastic", MembraneParams(beta, beta))
    res = sample_exits(spec, -math.inf, b, "+0", n_paths, h, master_seed, t_max, check_step=False)
    _check_step(h, b, b)
    hit = (res["code"] == _nb.HIT_B).astype(float)
    return MCSummary.from_values(hit, master_seed, h,
                                 dict(n_killed=int((res["code"] == _nb.KILLED).sum()),
                                      n_timeout=int((res["code"] == _nb.TIMEOUT).sum())))


def local_time_at_hit(b, n_paths, h, master_seed=DEFAULT_SEED, t_max=None):
    """Local time at 0 accumulated by reflected BM from 0 up to its first hit of ``b``."""
    spec = ProcessSpec("reflected")
    _check_step(h, b, b)
    res = sample_exits(spec, -math.inf, b, "+0", n_paths, h, master_seed, t_max, check_step=False)
    if np.any(res["code"] != _nb.HIT_B):
        raise ArithmeticError("some paths did not reach b before t_max")
    return res["lt"]
