"""Atomic CSV / JSON-lines writers and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import tempfile
import time

MANIFEST = "manifest.json"


def fmt(v):
    """17 significant digits for floats, ``str`` otherwise."""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "%.17g" % v
    try:
        import numpy as np
        if isinstance(v, np.floating):
            return "%.17g" % float(v)
        if isinstance(v, np.integer):
            return str(int(v))
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def _jsonable(v):
    try:
        import numpy as np
        if isinstance(v, np.ndarray):
            return [_jsonable(x) for x in v.tolist()]
        if isinstance(v, np.floating):
            v = float(v)
        elif isinstance(v, np.integer):
            return int(v)
    except ImportError:  # pragma: no cover
        pass
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def dumps(obj):
    """Compact deterministic JSON (floats via repr, which round-trips)."""
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def atomic_write(path, data: bytes):
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_bytes(header, rows, meta=None):
    """CSV text with ``# key=value`` comment lines before the header."""
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={fmt(v) if not isinstance(v, (dict, list)) else dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue().encode()


def write_csv(path, header, rows, meta=None):
    return atomic_write(path, csv_bytes(header, rows, meta))


def write_jsonl(path, objects):
    return atomic_write(path, "".join(dumps(o) + "\n" for o in objects).encode())


def read_csv(path):
    """Return ``(meta, header, rows)`` with rows as float lists."""
    meta, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k.strip()] = v
            else:
                lines.append(line)
    rd = list(csv.reader(lines))
    return meta, rd[0], [[float(x) for x in r] for r in rd[1:]]


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def versions():
    import numpy
    import scipy

    from . import __version__
    out = dict(barrier_lab=__version__, python=platform.python_version(), numpy=numpy.__version__,
               scipy=scipy.__version__)
    try:
        import numba
        out["numba"] = numba.__version__
    except ImportError:  # pragma: no cover
        pass
    return out


class Manifest:
    """Collects outputs of one command and writes ``manifest.json`` next to them."""

    def __init__(self, argv, config=None, seed=None):
        self.argv = list(argv)
        self.config = config or {}
        self.seed = seed
        self.started = time.time()
        self.outputs = []

    def add(self, path):
        self.outputs.append(os.path.abspath(path))
        return path

    def write(self, extra=None):
        """One manifest per output directory; returns the written paths."""
        from . import _backend
        dirs = sorted({os.path.dirname(p) for p in self.outputs})
        written = []
        for d in dirs:
            files = [p for p in self.outputs if os.path.dirname(p) == d]
            body = dict(argv=self.argv, config=self.config, seed=self.seed, versions=versions(),
                        backend=_backend.backend(), platform=sys.platform,
                        wall_clock=dict(started=self.started, elapsed=time.time() - self.started),
                        outputs={os.path.basename(p): sha256(p) for p in files})
            if extra:
                body.update(extra)
            written.append(atomic_write(os.path.join(d, MANIFEST),
                                        (json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n").encode()))
        return written
