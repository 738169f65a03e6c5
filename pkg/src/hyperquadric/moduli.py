"""Parameters of totally real flat minimal surfaces in complex projective space.

A point of the moduli set is ``(r_0..r_n, theta_1..theta_n)`` with
``a_0 = 1``, ``a_i = exp(i theta_i)``, all ``r_i > 0``,
``0 < theta_1 < ... < theta_n < 2 pi`` and

    sum r_i = 1,    sum a_i r_i = 0,    sum a_i^2 r_i = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

TWO_PI = 2.0 * np.pi
MIN_GAP = 1e-6


class InvalidDimension(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class ModuliSolution:
    n: int
    r: tuple
    theta: tuple

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(x) for x in self.r))
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))
        if self.n < 2:
            raise InvalidDimension(f"n must be >= 2, got {self.n}")
        if len(self.r) != self.n + 1 or len(self.theta) != self.n:
            raise ValueError("need n+1 weights and n angles")

    @property
    def a(self):
        """Frequencies ``(1, a_1, ..., a_n)``."""
        return np.concatenate([[1.0 + 0j], np.exp(1j * np.asarray(self.theta))])

    @property
    def angles(self):
        return np.concatenate([[0.0], np.asarray(self.theta)])

    def is_valid(self, tol=1e-11):
        th = np.asarray(self.theta)
        ordered = bool(np.all(np.diff(np.concatenate([[0.0], th, [TWO_PI]])) > 0))
        positive = all(x > 0 for x in self.r)
        return ordered and positive and max(abs(x) for x in residuals(self)) <= tol

    def to_json(self):
        return {"n": self.n, "r": list(self.r), "theta": list(self.theta)}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["n"]), data["r"], data["theta"])


@dataclass
class SolverOptions:
    tol: float = 1e-11
    max_starts: int = 200
    max_nfev: int = 2000
    # index -> angle; angle of index 0 is always 0
    fixed_theta: dict = field(default_factory=dict)
    # pairs (i, j) with a_j = -a_i, i.e. theta_j = theta_i + pi
    antipodal: tuple = ()


def residuals(sol):
    """The three constraint values ``(sum r - 1, sum a r, sum a^2 r)``; exact formula."""
    r = np.asarray(sol.r)
    a = sol.a
    return (complex(r.sum() - 1.0), complex((a * r).sum()), complex((a * a * r).sum()))


def clifford(n):
    """Equal weights at the ``(n+1)``-th roots of unity."""
    if n < 2:
        raise InvalidDimension(f"n must be >= 2, got {n}")
    theta = [TWO_PI * k / (n + 1) for k in range(1, n + 1)]
    return ModuliSolution(n, [1.0 / (n + 1)] * (n + 1), theta)


def _softplus(x):
    return np.logaddexp(0.0, x)


def _real_residuals(r, ang):
    a = np.exp(1j * ang)
    e2 = (a * r).sum()
    e3 = (a * a * r).sum()
    return np.array([r.sum() - 1.0, e2.real, e2.imag, e3.real, e3.imag])


class _FreeParam:
    """Unconstrained parametrization: log-weights and positive angular gaps."""

    def __init__(self, n):
        self.n = n

    def size(self):
        return 2 * self.n + 2

    def decode(self, x):
        n = self.n
        r = np.exp(x[: n + 1])
        gaps = _softplus(x[n + 1 :])
        cum = np.cumsum(gaps)
        ang = np.concatenate([[0.0], TWO_PI * cum[:-1] / cum[-1]])
        return r, ang

    def start(self, rng):
        n = self.n
        return np.concatenate([rng.normal(0.0, 0.5, n + 1), rng.normal(0.5, 0.7, n + 1)])


class _ConstrainedParam:
    """Direct angles with some of them fixed or tied to an antipode."""

    def __init__(self, n, fixed, antipodal):
        self.n = n
        self.fixed = {int(k): float(v) for k, v in fixed.items()}
        self.tied = {}
        for i, j in antipodal:
            i, j = sorted((int(i), int(j)))
            self.tied[j] = i
        if 0 in self.tied:
            raise ValueError("index 0 cannot be tied")
        self.fixed.setdefault(0, 0.0)
        self.free = [k for k in range(n + 1) if k not in self.fixed and k not in self.tied]

    def size(self):
        return self.n + 1 + len(self.free)

    def decode(self, x):
        n = self.n
        r = np.exp(x[: n + 1])
        ang = np.zeros(n + 1)
        for k, v in self.fixed.items():
            ang[k] = v
        for k, v in zip(self.free, x[n + 1 :]):
            ang[k] = v
        for j, i in sorted(self.tied.items()):
            ang[j] = ang[i] + np.pi
        return r, ang

    def start(self, rng):
        n = self.n
        ang0 = np.sort(rng.uniform(0.0, TWO_PI, n))
        ang0 = np.concatenate([[0.0], ang0])
        return np.concatenate([rng.normal(0.0, 0.5, n + 1), ang0[self.free]])


def _accept(r, ang, tol):
    if np.any(r <= 0):
        return None
    ang = np.asarray(ang, dtype=float)
    theta = ang[1:]
    if np.any(theta <= 0) or np.any(theta >= TWO_PI):
        return None
    if np.any(np.diff(np.concatenate([[0.0], theta, [TWO_PI]])) < MIN_GAP):
        return None
    if np.max(np.abs(_real_residuals(r, ang))) > tol:
        return None
    return theta


def _polish(r, ang, tol):
    """Newton steps on the weights for the current angles, keeping them positive."""
    for _ in range(5):
        res = _real_residuals(r, ang)
        if np.max(np.abs(res)) <= tol * 1e-2:
            break
        a = np.exp(1j * ang)
        jac = np.vstack([np.ones_like(r), a.real, a.imag, (a * a).real, (a * a).imag])
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        r_new = r + step
        if np.any(r_new <= 0):
            break
        r = r_new
    return r


def solve(n, seed=0, options=None):
    """Multi-start least-squares search for one point of the moduli set.

    Deterministic for fixed ``(n, seed, options)``.  Raises :class:`NoConvergence`
    when no start reaches ``options.tol``.
    """
    if n < 2:
        raise InvalidDimension(f"n must be >= 2, got {n}")
    options = options or SolverOptions()
    constrained = bool(options.fixed_theta) or bool(options.antipodal)
    param = (
        _ConstrainedParam(n, options.fixed_theta, options.antipodal)
        if constrained
        else _FreeParam(n)
    )
    rng = np.random.default_rng([int(n), int(seed)])

    def fun(x):
        r, ang = param.decode(x)
        return _real_residuals(r, ang)

    for _ in range(options.max_starts):
        x0 = param.start(rng)
        fit = least_squares(
            fun, x0, method="trf",
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=options.max_nfev,
        )
        r, ang = param.decode(fit.x)
        r = _polish(r, ang, options.tol)
        ang = np.mod(ang, TWO_PI)
        ang[0] = 0.0
        order = np.argsort(ang[1:]) + 1
        if constrained:
            # constrained indices must already be in increasing order
            if not np.all(np.diff(ang[1:]) > 0):
                continue
        else:
            r = np.concatenate([[r[0]], r[order]])
            ang = np.concatenate([[0.0], ang[order]])
        theta = _accept(r, ang, options.tol)
        if theta is not None:
            return ModuliSolution(n, r, theta)
    raise NoConvergence(
        f"no solution with residual <= {options.tol} after {options.max_starts} starts"
    )


def solve_weights(n, theta):
    """Least-squares weights for fixed angles; returns ``(r, max_residual)``.

    With the angles fixed the constraints are linear in the weights.
    """
    ang = np.concatenate([[0.0], np.asarray(theta, dtype=float)])
    a = np.exp(1j * ang)
    jac = np.vstack([np.ones(n + 1), a.real, a.imag, (a * a).real, (a * a).imag])
    rhs = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    r, *_ = np.linalg.lstsq(jac, rhs, rcond=None)
    return r, float(np.max(np.abs(jac @ r - rhs)))
