"""Sample domains and pointwise identity checks.

Every identity in hamsym (``L_X theta = theta``, ``[X, X_H] = -3 X_H``, ...)
is decided by evaluating both sides at seeded random points.  Candidate
point ``k`` is drawn from its own generator seeded with ``(seed, k)``, so
the candidate stream does not depend on how many points a caller asks for
or in which order they are evaluated.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import SamplingExhaustedError

DEFAULT_BOUNDS = (0.5, 2.0)
DEFAULT_SAMPLES = 100
DEFAULT_DELTA = 1e-3
DEFAULT_SEED = 42
TOL_EXACT = 1e-9
TOL_FLOW = 1e-5


def default_seed() -> int:
    value = os.environ.get("HAMSYM_SEED")
    return int(value) if value else DEFAULT_SEED


@dataclass(frozen=True)
class SampleDomain:
    bounds: tuple[tuple[float, float], ...]
    samples: int = DEFAULT_SAMPLES
    delta: float = DEFAULT_DELTA
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if not bounds:
            raise ValueError("sample domain needs at least one coordinate")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if not self.delta > 0:
            raise ValueError("singularity threshold must be positive")

    @classmethod
    def default(cls, dim: int, **overrides) -> "SampleDomain":
        overrides.setdefault("seed", default_seed())
        return cls(bounds=(DEFAULT_BOUNDS,) * dim, **overrides)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def with_(self, **changes) -> "SampleDomain":
        values = {"bounds": self.bounds, "samples": self.samples, "delta": self.delta, "seed": self.seed}
        values.update(changes)
        return SampleDomain(**values)

    def candidates(self, start: int, count: int) -> np.ndarray:
        """Candidate points ``start .. start+count-1`` as an array ``(dim, count)``."""
        return _candidates(self.seed, self.bounds, start, count)


@lru_cache(maxsize=256)
def _candidates(seed: int, bounds, start: int, count: int) -> np.ndarray:
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    out = np.empty((len(bounds), count))
    for k in range(count):
        rng = np.random.default_rng([seed, start + k])
        out[:, k] = lo + (hi - lo) * rng.random(len(bounds))
    out.setflags(write=False)
    return out


def admissible_points(exprs: Sequence[ex.Expr], dom: SampleDomain, count: int | None = None) -> np.ndarray:
    """First ``count`` candidates at which every expression is safely defined."""
    count = dom.samples if count is None else count
    exprs = tuple(exprs)
    evaluator = ex.compile_exprs(exprs) if exprs else None
    chunks = []
    found = 0
    drawn = 0
    limit = 100 * count
    while found < count:
        if drawn >= limit:
            raise SamplingExhaustedError(
                f"only {found} of {count} admissible points after {drawn} draws"
            )
        size = min(max(count - found, 16), limit - drawn)
        pts = dom.candidates(drawn, size)
        drawn += size
        if evaluator is not None:
            _, bad = evaluator(pts, dom.delta)
            pts = pts[:, ~bad]
        chunks.append(pts)
        found += pts.shape[1]
    return np.concatenate(chunks, axis=1)[:, :count]


def components(obj) -> tuple[str, tuple[ex.Expr, ...]]:
    """Tensor kind and flat component tuple of an expression, field or form."""
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return "scalar", (ex.Const(float(obj)),)
    if isinstance(obj, ex.Expr):
        return "scalar", (obj,)
    kind = getattr(obj, "tensor_kind", None)
    if kind is None:
        raise TypeError(f"cannot sample {type(obj).__name__}")
    return kind, tuple(obj.components)


@dataclass(frozen=True)
class Comparison:
    verdict: bool
    max_residual: float
    witness: tuple[float, ...] | None = None
    points: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __bool__(self) -> bool:
        return self.verdict


def equal_on_samples(a, b, dom: SampleDomain, tol: float = TOL_EXACT) -> Comparison:
    """Compare two expressions, fields or forms of the same kind on sample points.

    A bare number for ``b`` (or ``a``) is broadcast to every component, so
    ``equal_on_samples(form, 0, dom)`` tests that a form vanishes.
    """
    ka, ca = components(a)
    kb, cb = components(b)
    if ka == "scalar" and len(ca) == 1 and ex.max_index(ca[0]) < 0 and kb != "scalar":
        ka, ca = kb, ca * len(cb)
    if kb == "scalar" and len(cb) == 1 and ex.max_index(cb[0]) < 0 and ka != "scalar":
        kb, cb = ka, cb * len(ca)
    if ka != kb or len(ca) != len(cb):
        raise TypeError(f"cannot compare {ka} with {len(ca)} components to {kb} with {len(cb)}")
    exprs = ca + cb
    needed = max((ex.max_index(e) for e in exprs), default=-1) + 1
    if needed > dom.dim:
        raise ValueError(f"expressions need {needed} coordinates, domain has {dom.dim}")
    pts = admissible_points(exprs, dom)
    values, _ = ex.compile_exprs(exprs)(pts, 0.0)
    k = len(ca)
    diff = np.abs(values[:k] - values[k:])
    per_point = diff.max(axis=0) if k else np.zeros(pts.shape[1])
    worst = int(np.argmax(per_point))
    residual = float(per_point[worst])
    verdict = residual <= tol
    witness = None if verdict else tuple(float(v) for v in pts[:, worst])
    return Comparison(verdict, residual, witness, pts)
