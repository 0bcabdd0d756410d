"""Line integrals of closed 1-forms and finite-difference derivatives.

Potentials recovered here are numeric function handles, not expressions.
The path from the base point to ``x`` is the axis-parallel polyline that
moves one coordinate at a time in chart order; coordinates outside
``axes`` are held at the value of ``x`` throughout.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .errors import IntegrationPathError

SIMPSON_TOL = 1e-10
MAX_DEPTH = 48
FD_STEP = 1e-3


def adaptive_simpson(fn: Callable[[np.ndarray, np.ndarray], np.ndarray], count: int, tol: float = SIMPSON_TOL) -> np.ndarray:
    """Integrate ``count`` integrands over ``[0, 1]`` at once.

    ``fn(ids, u)`` returns integrand ``ids[k]`` at ``u[k]``.  Every
    subdivision level is evaluated in a single batched call.
    """
    total = np.zeros(count)
    if count == 0:
        return total
    ids = np.arange(count)
    a = np.zeros(count)
    b = np.ones(count)
    m = np.full(count, 0.5)
    f = fn(np.concatenate([ids, ids, ids]), np.concatenate([a, m, b])).reshape(3, count)
    fa, fm, fb = f
    whole = (fa + 4 * fm + fb) / 6.0
    eps = np.full(count, tol)
    for _ in range(MAX_DEPTH):
        width = b - a
        lm = a + width / 4
        rm = b - width / 4
        g = fn(np.concatenate([ids, ids]), np.concatenate([lm, rm])).reshape(2, -1)
        flm, frm = g
        left = (fa + 4 * flm + fm) * width / 12.0
        right = (fm + 4 * frm + fb) * width / 12.0
        err = left + right - whole
        done = (np.abs(err) <= 15 * eps) | (width < 1e-9)
        np.add.at(total, ids[done], (left + right + err / 15.0)[done])
        keep = ~done
        if not keep.any():
            return total
        ids, a, m, b = ids[keep], a[keep], m[keep], b[keep]
        fa, fm, fb, flm, frm = fa[keep], fm[keep], fb[keep], flm[keep], frm[keep]
        left, right, eps = left[keep], right[keep], eps[keep] / 2
        ids = np.concatenate([ids, ids])
        a, m, b = np.concatenate([a, m]), np.concatenate([(a + m) / 2, (m + b) / 2]), np.concatenate([m, b])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb])
        whole = np.concatenate([left, right])
        eps = np.concatenate([eps, eps])
    raise IntegrationPathError("adaptive quadrature did not converge")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def gauss_legendre(fn: Callable[[np.ndarray], np.ndarray], count: int) -> np.ndarray:
    """Fixed 16-node Gauss-Legendre rule on ``[0, 1]`` for ``count`` integrands.

    ``fn(u)`` gets the node array and returns values ``(count, nodes)``.
    Used where each integrand evaluation is itself a numerical flow.
    """
    u = (_GL_NODES + 1) / 2
    values = np.asarray(fn(u)).reshape(count, len(u))
    return values @ (_GL_WEIGHTS / 2)


class LinePotential:
    """Potential ``g`` with ``dg = alpha`` for a closed 1-form ``alpha``.

    ``g(base) = 0``.  Only the components listed in ``axes`` are integrated.
    """

    def __init__(self, components: Sequence[ex.Expr], base=None, axes: Sequence[int] | None = None,
                 delta: float = 1e-3, tol: float = SIMPSON_TOL):
        self.components = tuple(components)
        self.dim = len(self.components)
        self.base = np.ones(self.dim) if base is None else np.asarray(base, float)
        self.axes = tuple(range(self.dim)) if axes is None else tuple(axes)
        self.delta = delta
        self.tol = tol
        self._eval = {a: ex.compile_exprs((self.components[a],)) for a in self.axes}

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        single = pts.ndim == 1
        pts = pts.reshape(self.dim, -1)
        start = pts.copy()
        start[list(self.axes)] = self.base[list(self.axes), None]
        total = np.zeros(pts.shape[1])
        for axis in self.axes:
            lo = start[axis].copy()
            span = pts[axis] - lo
            anchor = start.copy()
            evaluator = self._eval[axis]

            def integrand(ids, u, anchor=anchor, lo=lo, span=span, axis=axis, evaluator=evaluator):
                y = anchor[:, ids]
                y[axis] = lo[ids] + u * span[ids]
                values, bad = evaluator(y, self.delta)
                if bad.any():
                    raise IntegrationPathError(
                        f"integration path meets a singularity near {tuple(float(v) for v in y[:, np.argmax(bad)])}"
                    )
                return values[0] * span[ids]

            moving = np.nonzero(span != 0)[0]
            if moving.size:
                total[moving] += adaptive_simpson(lambda ids, u: integrand(moving[ids], u), moving.size, self.tol)
            start[axis] = pts[axis]
        return total[0] if single else total


def fd_derivative(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray, direction: np.ndarray,
                  step: float = FD_STEP) -> np.ndarray:
    """Fourth-order central difference of ``fn`` along ``direction`` (per point or shared)."""
    pts = np.asarray(points, float)
    v = np.asarray(direction, float)
    if v.ndim == 1:
        v = v[:, None]
    shifts = np.concatenate([pts + 2 * step * v, pts + step * v, pts - step * v, pts - 2 * step * v], axis=1)
    vals = np.asarray(fn(shifts)).reshape(4, -1)
    return (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * step)


def fd_gradient(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray, axes: Sequence[int] | None = None,
                step: float = FD_STEP) -> np.ndarray:
    """Gradient components ``(len(axes), N)`` by fourth-order central differences.

    All stencil points go to ``fn`` in one call.
    """
    pts = np.asarray(points, float)
    dim, n = pts.shape
    axes = list(range(dim) if axes is None else axes)
    if not axes:
        return np.zeros((0, n))
    shifted = []
    for a in axes:
        for k in (2, 1, -1, -2):
            y = pts.copy()
            y[a] += k * step
            shifted.append(y)
    vals = np.asarray(fn(np.concatenate(shifted, axis=1))).reshape(len(axes), 4, n)
    return (-vals[:, 0] + 8 * vals[:, 1] - 8 * vals[:, 2] + vals[:, 3]) / (12 * step)
