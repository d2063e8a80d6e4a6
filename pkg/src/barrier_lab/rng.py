"""Counter-based per-path random streams.

Every Monte Carlo path owns two SplitMix64 streams, ``STEP`` (Brownian
increments and bridge uniforms) and ``EVENT`` (exponential thresholds),
seeded from ``(master_seed, path_index, stream_id)``.  A path's draws never
depend on how paths are grouped into batches or threads, which makes every
estimator reproducible for any worker count.

The SplitMix64 finalizer is the standard one::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

with increment ``0x9E3779B97F4A7C15``.  A uniform on [0, 1) is ``(z >> 11) * 2**-53``.
Scalar functions are numba-compiled for the per-path kernels; the ``*_vec``
twins act on uint64 arrays for the numpy backend and produce identical bits.
"""

import math

import numpy as np

from ._backend import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
PATH_MUL = np.uint64(0xD1B54A32D192ED03)
STREAM_MUL = np.uint64(0x8CB92BA72F3D8DD7)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
INV53 = 1.0 / 9007199254740992.0

STEP = 0
EVENT = 1

DEFAULT_SEED = 20240607


@njit
def mix64(z):
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


@njit
def stream_state(seed, path, stream):
    """Initial state of stream ``stream`` for path ``path`` under ``seed``."""
    base = mix64(np.uint64(seed) + GAMMA)
    key = np.uint64(path) * PATH_MUL + np.uint64(stream + 1) * STREAM_MUL
    return mix64(base ^ key)


@njit
def next_uniform(state):
    """Advance ``state``; return ``(new_state, u)`` with u in [0, 1)."""
    state = state + GAMMA
    z = mix64(state)
    return state, float(z >> S11) * INV53


@njit
def next_exponential(state, rate):
    """Exp(rate) draw; ``rate == 0`` gives ``inf`` but still consumes a draw."""
    state, u = next_uniform(state)
    if rate <= 0.0:
        return state, math.inf
    return state, -math.log1p(-u) / rate


# numpy twins --------------------------------------------------------------

def mix64_vec(z):
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


def stream_states_vec(seed, paths, stream):
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = mix64_vec(np.array([np.uint64(seed) + GAMMA], dtype=np.uint64))[0]
        key = paths * PATH_MUL + np.uint64(stream + 1) * STREAM_MUL
        return mix64_vec(base ^ key)


def next_uniform_vec(states):
    """In-place advance of ``states``; returns uniforms on [0, 1)."""
    states += GAMMA
    z = mix64_vec(states)
    return (z >> S11).astype(np.float64) * INV53


def next_exponential_vec(states, rate):
    u = next_uniform_vec(states)
    rate = np.broadcast_to(np.asarray(rate, dtype=np.float64), u.shape)
    out = np.full(u.shape, np.inf)
    pos = rate > 0.0
    out[pos] = -np.log1p(-u[pos]) / rate[pos]
    return out


class NormalCacheVec:
    """Box-Muller normals with one cached spare per path (numpy backend).

    Mirrors the scalar kernels exactly: an even call draws two uniforms,
    returns ``sqrt(-2 log(1-u1)) cos(2 pi u2)`` and caches the sine partner.
    """

    def __init__(self, n):
        self.has = np.zeros(n, dtype=bool)
        self.spare = np.zeros(n)

    def draw(self, states, idx):
        z = np.empty(idx.size)
        has = self.has[idx]
        z[has] = self.spare[idx[has]]
        fresh = idx[~has]
        if fresh.size:
            st = states[fresh]
            u1 = next_uniform_vec(st)
            u2 = next_uniform_vec(st)
            states[fresh] = st
            rad = np.sqrt(-2.0 * np.log1p(-u1))
            ang = 2.0 * np.pi * u2
            z[~has] = rad * np.cos(ang)
            self.spare[fresh] = rad * np.sin(ang)
        self.has[idx] = ~has
        return z


def uniforms(seed, n, stream=STEP, path_offset=0):
    """``n`` independent uniforms, one per path index, for non-kernel callers."""
    st = stream_states_vec(seed, np.arange(path_offset, path_offset + n), stream)
    with np.errstate(over="ignore"):
        return next_uniform_vec(st)


def normals(seed, n, stream=STEP, path_offset=0):
    """``n`` standard normals, one per path index (first Box-Muller output)."""
    st = stream_states_vec(seed, np.arange(path_offset, path_offset + n), stream)
    with np.errstate(over="ignore"):
        u1 = next_uniform_vec(st)
        u2 = next_uniform_vec(st)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
