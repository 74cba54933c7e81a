"""Empirical copula, finite-difference partial derivatives and evaluation grids."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .data import PseudoObservations
from .errors import EvtestError, UnsupportedExponent

# bound on the number of (row, point, axis) comparisons materialised at once
_CHUNK = 1 << 22


def check_exponent(r: float) -> float:
    r = float(r)
    if not r >= 1.0:
        raise UnsupportedExponent(f"exponent r must be >= 1, got {r}")
    return r


def dominated_counts(u: np.ndarray, points: np.ndarray) -> np.ndarray:
    """For each point, the number of rows of ``u`` that are componentwise <= it."""
    n, d = u.shape
    m = points.shape[0]
    out = np.empty(m, dtype=np.int64)
    step = max(1, _CHUNK // max(1, n * d))
    for a in range(0, m, step):
        p = points[a:a + step]
        out[a:a + step] = np.all(u[:, None, :] <= p[None, :, :], axis=2).sum(axis=0)
    return out


@dataclass(frozen=True)
class EmpiricalCopula:
    """Empirical c.d.f. of a set of pseudo-observations.

    Axis indices are 0-based throughout. Methods accept either a single point
    of shape ``(d,)`` or a batch of shape ``(m, d)``.
    """

    pseudo: PseudoObservations

    @classmethod
    def from_array(cls, u) -> "EmpiricalCopula":
        u = np.asarray(u, dtype=float)
        return cls(PseudoObservations(u, u * (u.shape[0] + 1)))

    @property
    def u(self) -> np.ndarray:
        return self.pseudo.u

    @property
    def n(self) -> int:
        return self.pseudo.n

    @property
    def d(self) -> int:
        return self.pseudo.d

    def _points(self, u) -> tuple[np.ndarray, bool]:
        p = np.asarray(u, dtype=float)
        single = p.ndim == 1
        p = np.atleast_2d(p)
        if p.shape[1] != self.d:
            raise EvtestError(f"points must have {self.d} coordinates")
        if np.any(~(p >= 0.0) | ~(p <= 1.0)):
            raise EvtestError("evaluation points must lie in [0, 1]^d")
        return p, single

    def counts(self, u) -> np.ndarray:
        p, _ = self._points(u)
        return dominated_counts(self.u, p)

    def __call__(self, u):
        p, single = self._points(u)
        v = dominated_counts(self.u, p) / self.n
        return v[0] if single else v

    def _derivative_parts(self, j: int, p: np.ndarray):
        if not 0 <= j < self.d:
            raise EvtestError(f"axis {j} out of range for d={self.d}")
        h = self.n ** -0.5
        x = p[:, j]
        # clamping decided on u_j itself so [h, 1 - h] is never clamped
        hi_clamp = x > 1.0 - h
        lo_clamp = x < h
        p_hi = p.copy()
        p_lo = p.copy()
        p_hi[:, j] = np.where(hi_clamp, 1.0, x + h)
        p_lo[:, j] = np.where(lo_clamp, 0.0, x - h)
        num = (dominated_counts(self.u, p_hi) - dominated_counts(self.u, p_lo)) / self.n
        # (u+ - u) + (u - u-), so the unclamped case is exactly 2h
        width = np.where(hi_clamp, 1.0 - x, h) + np.where(lo_clamp, x, h)
        return num, width, h

    def partial_derivative(self, j: int, u):
        """Difference quotient over ``[u_j - n^-1/2, u_j + n^-1/2]`` clipped to [0, 1].

        The divisor is the width of the clipped interval, which keeps the
        estimate bounded by ``2(n+1)/n + n^-1/2 <= 5`` near the boundary.
        """
        p, single = self._points(u)
        num, width, _ = self._derivative_parts(j, p)
        v = num / width
        return v[0] if single else v

    def partial_derivative_rs(self, j: int, u):
        """Same numerator as :meth:`partial_derivative`, always divided by ``2 n^-1/2``."""
        p, single = self._points(u)
        num, _, h = self._derivative_parts(j, p)
        v = num / (2.0 * h)
        return v[0] if single else v

    def gradient(self, u) -> np.ndarray:
        """All ``d`` partial-derivative estimates at each point, shape ``(m, d)``."""
        p, _ = self._points(u)
        return np.column_stack([self.partial_derivative(j, p) for j in range(self.d)])


def ecop_eval(ec: EmpiricalCopula, u):
    return ec(u)


def partial_derivative_hat(ec: EmpiricalCopula, j: int, u):
    return ec.partial_derivative(j, u)


def partial_derivative_rs(ec: EmpiricalCopula, j: int, u):
    return ec.partial_derivative_rs(j, u)


@dataclass(frozen=True)
class EvalGrid:
    points: np.ndarray
    per_axis: int
    r_powers: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def power(self, r: float) -> np.ndarray:
        """``points ** (1/r)``, from the cache when available."""
        r = check_exponent(r)
        if r in self.r_powers:
            return self.r_powers[r]
        return self.points ** (1.0 / r)


def make_grid(d: int, g: int, r_set=()) -> EvalGrid:
    """Cartesian grid of ``g`` equispaced interior points per axis, lexicographic order."""
    if d < 2 or g < 1:
        raise EvtestError(f"need d >= 2 and g >= 1, got d={d}, g={g}")
    rs = [check_exponent(r) for r in r_set]
    axis = np.arange(1, g + 1) / (g + 1)
    pts = np.array(list(itertools.product(axis, repeat=d)))
    pts.setflags(write=False)
    powers = {}
    for r in rs:
        pw = pts ** (1.0 / r)
        pw.setflags(write=False)
        powers[r] = pw
    return EvalGrid(pts, g, powers)
