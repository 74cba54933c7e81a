"""Random variate generation for the copula families used in level/power studies.

Archimedean families are sampled through the Marshall-Olkin frailty
construction ``U_j = psi(E_j / V)`` with ``E_j`` standard exponential and ``V``
drawn from the distribution whose Laplace transform is the generator ``psi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import InvalidModel, UnattainableTau

_TINY = np.finfo(float).tiny
_ONE_BELOW = np.nextafter(1.0, 0.0)


class Family(enum.Enum):
    GUMBEL_HOUGAARD = "GH"
    KHOUDRAJI_GH = "aGH"
    CLAYTON = "C"
    FRANK = "F"
    NORMAL = "N"
    STUDENT_T4 = "t"
    PLACKETT = "P"
    INDEPENDENCE = "I"
    COMONOTONE = "M"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip()
        for fam in cls:
            if key == fam.value or key.upper() == fam.name or key.upper() == fam.value.upper():
                return fam
        aliases = {"GUMBEL": cls.GUMBEL_HOUGAARD, "AGH": cls.KHOUDRAJI_GH, "KHOUDRAJI": cls.KHOUDRAJI_GH,
                   "GAUSSIAN": cls.NORMAL, "T4": cls.STUDENT_T4, "T": cls.STUDENT_T4,
                   "INDEP": cls.INDEPENDENCE, "PI": cls.INDEPENDENCE}
        if key.upper() in aliases:
            return aliases[key.upper()]
        raise InvalidModel(f"unknown copula family {name!r}")


# max-stable families
EXTREME_VALUE = frozenset({Family.GUMBEL_HOUGAARD, Family.KHOUDRAJI_GH,
                           Family.INDEPENDENCE, Family.COMONOTONE})


@dataclass(frozen=True)
class CopulaModel:
    family: Family
    d: int = 2
    theta: float = float("nan")
    lam: tuple[float, ...] | None = None

    def __post_init__(self):
        fam, th = self.family, self.theta
        if self.d < 2:
            raise InvalidModel("dimension must be >= 2")
        if fam is Family.PLACKETT and self.d != 2:
            raise InvalidModel("the Plackett copula is bivariate only")
        if fam in (Family.GUMBEL_HOUGAARD, Family.KHOUDRAJI_GH) and not th >= 1:
            raise InvalidModel(f"Gumbel-Hougaard needs theta >= 1, got {th}")
        if fam is Family.CLAYTON and not th > 0:
            raise InvalidModel(f"Clayton needs theta > 0, got {th}")
        if fam is Family.FRANK:
            if not math.isfinite(th) or th == 0:
                raise InvalidModel("Frank needs a finite theta != 0")
            if th < 0 and self.d > 2:
                raise InvalidModel("negative Frank dependence is only available for d = 2")
        if fam in (Family.NORMAL, Family.STUDENT_T4):
            if not -1 < th < 1:
                raise InvalidModel(f"correlation must lie in (-1, 1), got {th}")
            if th <= -1.0 / (self.d - 1):
                raise InvalidModel("equicorrelation matrix is not positive definite")
        if fam is Family.PLACKETT and not th > 0:
            raise InvalidModel(f"Plackett needs theta > 0, got {th}")
        if fam is Family.KHOUDRAJI_GH:
            lam = self.lam
            if lam is None or len(lam) != self.d:
                raise InvalidModel("Khoudraji's device needs one shape parameter per margin")
            if not all(0 < x < 1 for x in lam):
                raise InvalidModel("shape parameters must lie in (0, 1)")
            if len(set(lam)) < 2:
                raise InvalidModel("shape parameters must not all be equal")
            object.__setattr__(self, "lam", tuple(float(x) for x in lam))

    @classmethod
    def from_tau(cls, family: Family, tau: float, d: int = 2) -> "CopulaModel":
        return cls(family, d, tau_to_param(family, tau))


# ---------------------------------------------------------------------------
# Kendall's tau <-> parameter


def _debye_integrand(t: float) -> float:
    if t == 0:
        return 1.0
    if t > 0:
        return t * math.exp(-t) / -math.expm1(-t)
    return t / math.expm1(t)


def debye1(x: float) -> float:
    """First Debye function ``(1/x) int_0^x t / (e^t - 1) dt``."""
    if x == 0:
        return 1.0
    val, _ = integrate.quad(_debye_integrand, 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val / x


def frank_tau(theta: float) -> float:
    return 1.0 - 4.0 / theta * (1.0 - debye1(theta))


@lru_cache(maxsize=None)
def _gauss_legendre(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    x = (x + 1.0) / 2.0
    w = w / 2.0
    u, v = np.meshgrid(x, x, indexing="ij")
    return u, v, np.outer(w, w)


def plackett_cdf(u, v, theta: float):
    if theta == 1:
        return u * v
    s = 1.0 + (theta - 1.0) * (u + v)
    return (s - np.sqrt(s * s - 4.0 * u * v * theta * (theta - 1.0))) / (2.0 * (theta - 1.0))


def plackett_density(u, v, theta: float):
    s = 1.0 + (theta - 1.0) * (u + v)
    return theta * (1.0 + (theta - 1.0) * (u + v - 2.0 * u * v)) / (
        s * s - 4.0 * theta * (theta - 1.0) * u * v) ** 1.5


def plackett_tau(theta: float, nodes: int = 256) -> float:
    """``4 E[C(U, V)] - 1`` by tensor Gauss-Legendre quadrature."""
    if theta == 1:
        return 0.0
    u, v, w = _gauss_legendre(nodes)
    return float(4.0 * np.sum(w * plackett_cdf(u, v, theta) * plackett_density(u, v, theta)) - 1.0)


def _invert(f, tau, lo, hi, family):
    flo, fhi = f(lo), f(hi)
    if not flo < tau < fhi:
        raise UnattainableTau(f"tau={tau} is outside the attainable range of {family.name}")
    return optimize.brentq(lambda x: f(x) - tau, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                           maxiter=500)


def tau_to_param(family: Family, tau: float) -> float:
    """Parameter whose bivariate margins have Kendall's tau equal to ``tau``."""
    tau = float(tau)
    if not -1 < tau < 1:
        raise UnattainableTau(f"tau must lie in (-1, 1), got {tau}")
    if family is Family.GUMBEL_HOUGAARD:
        if tau < 0:
            raise UnattainableTau("Gumbel-Hougaard cannot produce negative tau")
        return 1.0 / (1.0 - tau)
    if family is Family.CLAYTON:
        if tau <= 0:
            raise UnattainableTau("Clayton needs tau > 0")
        return 2.0 * tau / (1.0 - tau)
    if family in (Family.NORMAL, Family.STUDENT_T4):
        return math.sin(math.pi * tau / 2.0)
    if family is Family.FRANK:
        if tau == 0:
            raise UnattainableTau("Frank with tau = 0 is the independence copula")
        th = _invert(frank_tau, abs(tau), 1e-6, 1e3, family)
        return math.copysign(th, tau)
    if family is Family.PLACKETT:
        if tau == 0:
            return 1.0
        # tau(1/theta) = -tau(theta)
        th = _invert(lambda x: plackett_tau(math.exp(x)), abs(tau), 0.0, math.log(1e5), family)
        return math.exp(th) if tau > 0 else math.exp(-th)
    raise UnattainableTau(f"{family.name} has no tau-indexed parameter")


def param_to_tau(model: CopulaModel) -> float:
    fam, th = model.family, model.theta
    if fam is Family.GUMBEL_HOUGAARD:
        return 1.0 - 1.0 / th
    if fam is Family.CLAYTON:
        return th / (th + 2.0)
    if fam is Family.FRANK:
        return frank_tau(th)
    if fam in (Family.NORMAL, Family.STUDENT_T4):
        return 2.0 / math.pi * math.asin(th)
    if fam is Family.PLACKETT:
        return plackett_tau(th)
    if fam is Family.INDEPENDENCE:
        return 0.0
    if fam is Family.COMONOTONE:
        return 1.0
    raise InvalidModel(f"no closed-form tau for {fam.name}")


# ---------------------------------------------------------------------------
# samplers


def positive_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Positive stable variates with Laplace transform ``exp(-t**alpha)``, ``0 < alpha <= 1``.

    Chambers-Mallows-Stuck in its totally skewed form (Kanter's representation).
    """
    if alpha == 1.0:
        return np.ones(size)
    a = rng.uniform(0.0, math.pi, size)
    w = rng.standard_exponential(size)
    return (np.sin(alpha * a) / np.sin(a) ** (1.0 / alpha)) * (
        np.sin((1.0 - alpha) * a) / w) ** ((1.0 - alpha) / alpha)


def _gumbel(n, d, theta, rng):
    alpha = 1.0 / theta
    v = positive_stable(alpha, (n, 1), rng)
    e = rng.standard_exponential((n, d))
    return np.exp(-((e / v) ** alpha))


def _clayton(n, d, theta, rng):
    v = rng.gamma(1.0 / theta, 1.0, (n, 1))
    e = rng.standard_exponential((n, d))
    return np.exp(-np.log1p(e / v) / theta)


def _frank(n, d, theta, rng):
    if theta < 0:
        return _frank_conditional(n, theta, rng)
    p = min(-math.expm1(-theta), _ONE_BELOW)
    v = rng.logseries(p, (n, 1)).astype(float)
    e = rng.standard_exponential((n, d))
    return -np.log1p(-p * np.exp(-e / v)) / theta


def _frank_conditional(n, theta, rng):
    u = rng.random(n)
    t = rng.random(n)
    y = t * math.expm1(-theta) / (t + (1.0 - t) * np.exp(-theta * u))
    v = -np.log1p(y) / theta
    return np.column_stack([u, v])


def _equicorrelated_factor(d, rho):
    sigma = np.full((d, d), rho)
    np.fill_diagonal(sigma, 1.0)
    return np.linalg.cholesky(sigma)


def t4_cdf(x):
    """Closed-form c.d.f. of Student's t with 4 degrees of freedom, accurate in both tails."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    root = np.sqrt(4.0 + ax * ax)
    q = 4.0 / (root * (root + ax))  # 1 - |x| / sqrt(4 + x^2)
    lower = q * q * (3.0 - q) / 4.0
    return np.where(x < 0, lower, 1.0 - lower)


def _elliptical(n, d, rho, rng, df=None):
    z = rng.standard_normal((n, d)) @ _equicorrelated_factor(d, rho).T
    if df is None:
        return special.ndtr(z)
    w = rng.chisquare(df, (n, 1))
    return t4_cdf(z / np.sqrt(w / df))


def _plackett(n, theta, rng):
    u = rng.random(n)
    t = rng.random(n)
    if theta == 1:
        return np.column_stack([u, t])
    a = t * (1.0 - t)
    b = theta + a * (theta - 1.0) ** 2
    c = 2.0 * a * (u * theta ** 2 + 1.0 - u) + theta * (1.0 - 2.0 * a)
    dd = math.sqrt(theta) * np.sqrt(theta + 4.0 * a * u * (1.0 - u) * (1.0 - theta) ** 2)
    v = (c - (1.0 - 2.0 * t) * dd) / (2.0 * b)
    return np.column_stack([u, v])


def _khoudraji(n, d, theta, lam, rng):
    lam = np.asarray(lam)
    a = _gumbel(n, d, theta, rng)
    b = rng.random((n, d))
    return np.maximum(a ** (1.0 / lam), b ** (1.0 / (1.0 - lam)))


def sample(model: CopulaModel, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. rows from ``model``; entries lie strictly inside (0, 1)."""
    if n < 1:
        raise InvalidModel("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    fam, d, th = model.family, model.d, model.theta
    if fam is Family.GUMBEL_HOUGAARD:
        u = _gumbel(n, d, th, rng)
    elif fam is Family.KHOUDRAJI_GH:
        u = _khoudraji(n, d, th, model.lam, rng)
    elif fam is Family.CLAYTON:
        u = _clayton(n, d, th, rng)
    elif fam is Family.FRANK:
        u = _frank(n, d, th, rng)
    elif fam is Family.NORMAL:
        u = _elliptical(n, d, th, rng)
    elif fam is Family.STUDENT_T4:
        u = _elliptical(n, d, th, rng, df=4)
    elif fam is Family.PLACKETT:
        u = _plackett(n, th, rng)
    elif fam is Family.INDEPENDENCE:
        u = rng.random((n, d))
    elif fam is Family.COMONOTONE:
        u = np.repeat(rng.random((n, 1)), d, axis=1)
    else:  # pragma: no cover
        raise InvalidModel(f"unsupported family {fam}")
    # floating-point saturation at the edges has probability ~1e-16 per draw
    return np.clip(u, _TINY, _ONE_BELOW)


def kendall_tau_empirical(x: np.ndarray, j: int = 0, k: int = 1) -> float:
    """Kendall's tau-a: (concordant - discordant) / C(n, 2), no tie correction."""
    x = np.asarray(x)
    if j == k:
        raise ValueError("columns must be distinct")
    a, b = x[:, j], x[:, k]
    n = len(a)
    if n < 2:
        raise ValueError("need at least two observations")
    n0 = n * (n - 1) / 2.0

    def tied_pairs(col):
        _, cnt = np.unique(col, return_counts=True)
        return float(np.sum(cnt * (cnt - 1) / 2.0))

    n1, n2 = tied_pairs(a), tied_pairs(b)
    if n1 == n0 or n2 == n0:
        return 0.0
    tau_b = stats.kendalltau(a, b, variant="b").statistic
    return float(tau_b * math.sqrt((n0 - n1) * (n0 - n2)) / n0)
