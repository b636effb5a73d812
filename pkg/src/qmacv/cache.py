"""On-disk cache for eigenfunctions and reconstructed quasi-eigenfunctions.

Entries are plain text keyed by (kind, n, s-pattern, cap, mode).  The
location is $QMACV_CACHE_DIR, else ~/.cache/qmacv.  Set QMACV_CACHE_DIR to
an empty string to disable caching.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from .scalar import ParamScalar
from .series import RatioSeries


def cache_dir() -> Path | None:
    env = os.environ.get("QMACV_CACHE_DIR")
    if env == "":
        return None
    return Path(env) if env else Path.home() / ".cache" / "qmacv"


def _path(kind: str, key: dict) -> Path | None:
    root = cache_dir()
    if root is None:
        return None
    blob = json.dumps(key, sort_keys=True, default=str)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:24]
    return root / kind / f"{digest}.txt"


def series_to_text(f: RatioSeries) -> str:
    lines = [f"# n={f.n} cap={f.cap}"]
    for e, c in f.items_sorted():
        lines.append(f"{','.join(map(str, e))} : {ParamScalar.coerce(c).to_text()}")
    return "\n".join(lines) + "\n"


def series_from_text(text: str) -> RatioSeries:
    header, *body = text.splitlines()
    fields = dict(x.split("=") for x in header.lstrip("# ").split())
    n, cap = int(fields["n"]), int(fields["cap"])
    terms = {}
    for line in body:
        if not line.strip():
            continue
        lhs, rhs = line.split(":", 1)
        e = tuple(int(x) for x in lhs.split(",")) if lhs.strip() else ()
        terms[e] = ParamScalar.from_text(rhs)
    return RatioSeries(n, cap, terms)


def cached_series(kind: str, key: dict, producer) -> RatioSeries:
    """Return the cached series for key, computing and storing it on a miss."""
    path = _path(kind, key)
    if path is not None and path.exists():
        try:
            return series_from_text(path.read_text())
        except (ValueError, KeyError):
            path.unlink(missing_ok=True)
    f = producer()
    if path is not None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(series_to_text(f))
            tmp.replace(path)
        except OSError:
            pass
    return f
