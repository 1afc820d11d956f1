"""Line-delimited JSON cache of exact free-energy coefficients.

The first line is a header ``{"format": ..., "version": ...}``; each further
line is one record. Rationals are stored as strings and monomials in their
canonical text form, with a fixed key order, so that loading and storing a
file reproduces it byte for byte.
"""

from __future__ import annotations

import fcntl
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable

from . import __version__
from .errors import CacheFormatError, CrossCheckError, DomainError
from .exact_algebra import GradedPolynomial, format_rational, monomial_key_text

__all__ = [
    "CACHE_FORMAT",
    "CACHE_VERSION",
    "CacheRecord",
    "load_cache",
    "store_cache",
    "compute_and_cache",
    "compare_polynomials",
    "METHODS",
]

CACHE_FORMAT = "hciz-free-energy"
CACHE_VERSION = 1
METHODS = ("enum", "oracle")


@dataclass(frozen=True)
class CacheRecord:
    order: int
    method: str
    poly: GradedPolynomial
    timestamp: str
    revision: str

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "method": self.method,
            "terms": [[k, v] for k, v in self.poly.to_text_terms()],
            "timestamp": self.timestamp,
            "revision": self.revision,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"), ensure_ascii=True) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "CacheRecord":
        expected = ["order", "method", "terms", "timestamp", "revision"]
        if not isinstance(obj, dict) or list(obj) != expected:
            raise ValueError(f"record keys must be {expected}")
        if not isinstance(obj["order"], int) or obj["order"] < 1:
            raise ValueError("order must be a positive integer")
        if obj["method"] not in METHODS:
            raise ValueError(f"unknown method {obj['method']!r}")
        pairs = obj["terms"]
        if not isinstance(pairs, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(x, str) for x in p) for p in pairs
        ):
            raise ValueError("terms must be a list of [monomial, rational] string pairs")
        poly = GradedPolynomial.from_text_terms(pairs)
        if not poly.is_graded(obj["order"]):
            raise ValueError(f"polynomial is not graded of weight {obj['order']}")
        return cls(obj["order"], obj["method"], poly, str(obj["timestamp"]), str(obj["revision"]))


def _header_line() -> str:
    return json.dumps({"format": CACHE_FORMAT, "version": CACHE_VERSION}, separators=(",", ":")) + "\n"


def _parse(data: bytes, path: str) -> list[CacheRecord]:
    if not data:
        return []
    records = []
    offset = 0
    for lineno, raw in enumerate(data.splitlines(keepends=True)):
        if not raw.endswith(b"\n"):
            raise CacheFormatError(f"{path}: truncated record at byte offset {offset} (no trailing newline)")
        try:
            obj = json.loads(raw.decode("utf-8"))
            if lineno == 0:
                if obj != {"format": CACHE_FORMAT, "version": CACHE_VERSION}:
                    raise ValueError(f"incompatible header {obj!r}")
            else:
                records.append(CacheRecord.from_json(obj))
        except (ValueError, UnicodeDecodeError, DomainError) as exc:
            raise CacheFormatError(f"{path}: bad line {lineno + 1} at byte offset {offset}: {exc}") from None
        offset += len(raw)
    return records


def load_cache(path: str) -> list[CacheRecord]:
    """Records in file order; a missing or empty file gives ``[]``."""
    if not os.path.exists(path):
        return []
    with open(path, "rb") as fh:
        fcntl.flock(fh, fcntl.LOCK_SH)
        try:
            data = fh.read()
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)
    return _parse(data, path)


def _serialize(records) -> bytes:
    return (_header_line() + "".join(r.to_line() for r in records)).encode("utf-8")


def store_cache(path: str, records: list[CacheRecord]) -> None:
    with _locked(path) as fh:
        fh.seek(0)
        fh.truncate()
        fh.write(_serialize(records))


@contextmanager
def _locked(path: str):
    fd = os.open(path, os.O_RDWR | os.O_CREAT, 0o644)
    with os.fdopen(fd, "r+b") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield fh
        finally:
            fh.flush()
            fcntl.flock(fh, fcntl.LOCK_UN)


def compare_polynomials(p: GradedPolynomial, q: GradedPolynomial) -> list[tuple[str, str, str]]:
    """Monomials where ``p`` and ``q`` differ, as ``(monomial, p value, q value)``."""
    keys = set(p.terms) | set(q.terms)
    out = []
    for key in sorted(keys, key=lambda k: (sum(k[0]) + sum(k[1]), k)):
        a = p.terms.get(key, Fraction(0))
        b = q.terms.get(key, Fraction(0))
        if a != b:
            out.append((monomial_key_text(key), format_rational(a), format_rational(b)))
    return out


def _cross_check(records: list[CacheRecord], order: int) -> None:
    by_method = {r.method: r for r in records if r.order == order}
    if len(by_method) < 2:
        return
    diff = compare_polynomials(by_method["enum"].poly, by_method["oracle"].poly)
    if diff:
        lines = "\n".join(f"  {m}: enum={a} oracle={b}" for m, a, b in diff)
        raise CrossCheckError(f"enum and oracle disagree at order {order}:\n{lines}")


def _default_compute(order: int, method: str, workers: int) -> GradedPolynomial:
    if method == "enum":
        from .planar_enum import free_energy_order
        return free_energy_order(order, workers=workers)
    from .hciz_series import free_energy_oracle
    return free_energy_oracle(order)[order - 1]


def compute_and_cache(order: int, method: str, path: str, workers: int = 1,
                      compute: Callable[[int, str, int], GradedPolynomial] | None = None) -> CacheRecord:
    """Cached ``F_order`` by ``method``; computes and appends it when absent.

    Whenever records from both methods exist for ``order`` they must agree,
    otherwise :class:`CrossCheckError` lists the mismatched monomials. A
    malformed file raises :class:`CacheFormatError` and is left untouched.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}")
    compute = compute or _default_compute
    with _locked(path) as fh:
        fh.seek(0)
        data = fh.read()
        records = _parse(data, path)
        hit = next((r for r in records if r.order == order and r.method == method), None)
        if hit is None:
            poly = compute(order, method, workers)
            hit = CacheRecord(
                order, method, poly,
                datetime.now(timezone.utc).isoformat(timespec="seconds"),
                __version__,
            )
            records.append(hit)
            if not data:
                fh.write(_header_line().encode("utf-8"))
            fh.seek(0, os.SEEK_END)
            fh.write(hit.to_line().encode("utf-8"))
        _cross_check(records, order)
    return hit
