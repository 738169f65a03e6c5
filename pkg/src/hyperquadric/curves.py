"""Curves ``V_0`` and ``f_0 = U V_0``, their frames, and the geometric verifiers.

All objects are exponential polynomials in ``z``, so every identity below is
checked coefficientwise rather than at sample points.  Quantities that are only
defined as quotients (Kahler angle with a nonconstant metric, second
fundamental form with a nonconstant metric) fall back to pointwise evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exppoly import ExpPoly, bilinear_pair, hermitian_inner, outer
from .moduli import ModuliSolution

SAMPLE_SEED = 20240601


class DegenerateMetric(ValueError):
    pass


class QuadricViolation(ValueError):
    pass


class InconsistentFrame(ValueError):
    pass


class RankMismatch(RuntimeError):
    pass


def sample_points(count, seed=SAMPLE_SEED):
    """Seeded points in the box [-1, 1]^2."""
    rng = np.random.default_rng(seed)
    xy = rng.uniform(-1.0, 1.0, size=(count, 2))
    return xy[:, 0] + 1j * xy[:, 1]


@dataclass
class Curve:
    """A section ``C -> C^N``, optionally factored as ``frame @ base``.

    ``freq_diag`` is the diagonal of ``A`` for curves of the form ``V_0``;
    curves ``U V_0`` keep ``frame = U`` and ``base = V_0`` so that the harmonic
    sequence ``U A^i V_0`` stays available.
    """

    components: ExpPoly
    freq_diag: np.ndarray | None = None
    frame: np.ndarray | None = None
    base: "Curve | None" = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.components.shape[0]

    def norm2(self):
        return hermitian_inner(self.components, self.components)

    def is_unit(self, tol=1e-10):
        return (self.norm2() - 1.0).is_zero(tol)

    def quadric_form(self):
        """``<f, conj f> = sum f_i^2``; vanishes iff the curve lies in the quadric."""
        return bilinear_pair(self.components, self.components)

    def conj(self):
        return self.components.conj()

    def evaluate(self, z):
        return self.components.evaluate(z)

    def reparametrize(self, c):
        """The curve ``w -> X(c w)``."""
        return Curve(
            self.components.rescale_frequencies(c),
            None if self.freq_diag is None else self.freq_diag * c,
            self.frame,
            None if self.base is None else self.base.reparametrize(c),
            self.name,
            dict(self.meta),
        )

    def regauge(self, c):
        """Multiply by the unit phase ``exp(c z - conj(c) zbar)``; same line, new section."""
        phase = ExpPoly.monomial(c)
        return Curve(phase * self.components, name=self.name, meta=dict(self.meta))

    def to_json(self):
        out = {"dim": self.dim, "name": self.name, "components": self.components.to_json()}
        if self.freq_diag is not None:
            out["freq_diag"] = [[a.real, a.imag] for a in np.asarray(self.freq_diag)]
        if self.frame is not None:
            out["frame"] = _matrix_json(self.frame)
        if self.base is not None:
            out["base"] = self.base.to_json()
        return out

    @classmethod
    def from_json(cls, data):
        comps = ExpPoly.from_json(data["components"])
        fd = data.get("freq_diag")
        return cls(
            comps,
            None if fd is None else np.array([complex(*a) for a in fd]),
            None if data.get("frame") is None else _matrix_from_json(data["frame"]),
            None if data.get("base") is None else cls.from_json(data["base"]),
            data.get("name", ""),
        )


def _matrix_json(m):
    m = np.asarray(m, dtype=complex)
    return [[[x.real, x.imag] for x in row] for row in m]


def _matrix_from_json(rows):
    return np.array([[complex(*x) for x in row] for row in rows])


# -- construction -----------------------------------------------------------------


def build_v0(sol: ModuliSolution, pad_to=None):
    """``(sqrt(r_0) e^{z - zbar}, ..., sqrt(r_n) e^{a_n z - conj(a_n) zbar}, 0, ...)``."""
    n1 = sol.n + 1
    pad_to = n1 if pad_to is None else int(pad_to)
    if pad_to < n1:
        raise ValueError(f"cannot pad a length-{n1} curve to {pad_to}")
    a = sol.a
    coeffs = np.zeros((n1, pad_to), dtype=complex)
    coeffs[np.arange(n1), np.arange(n1)] = np.sqrt(sol.r)
    comps = ExpPoly(a, coeffs)
    return Curve(comps, freq_diag=a, name=f"V0(n={sol.n})", meta={"moduli": sol.to_json()})


def apply_frame(U, v0: Curve, name=""):
    """``f_0 = U V_0`` keeping the factorization."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (v0.dim, v0.dim):
        raise ValueError(f"frame shape {U.shape} does not match dimension {v0.dim}")
    comps = ExpPoly(v0.components.freqs, v0.components.coeffs @ U.T)
    return Curve(comps, frame=U, base=v0, name=name, meta=dict(v0.meta))


def harmonic_sequence(c: Curve, i: int):
    """Section ``A^i V_0`` (or ``U A^i V_0``) of the ``i``-th harmonic line."""
    if c.freq_diag is not None:
        fd = np.asarray(c.freq_diag, dtype=complex)
        scale = np.ones(c.dim, dtype=complex)
        scale[: len(fd)] = fd ** i
        return Curve(c.components * scale, freq_diag=fd, name=f"{c.name}[{i}]", meta=c.meta)
    if c.frame is not None and c.base is not None:
        out = apply_frame(c.frame, harmonic_sequence(c.base, i), name=f"{c.name}[{i}]")
        out.meta = dict(c.meta)
        return out
    raise ValueError("curve carries no frequency matrix; harmonic sequence unavailable")


# -- frames ---------------------------------------------------------------------


@dataclass
class FrameFields:
    xi: ExpPoly
    eta: ExpPoly
    lambda2: ExpPoly
    kahler_a: ExpPoly | None
    kahler_b: ExpPoly | None
    S: ExpPoly
    dX_X: ExpPoly  # <dX, X>
    dbX_X: ExpPoly  # <dbar X, X>
    X: ExpPoly | None = None

    def lambda2_constant(self):
        if self.lambda2.is_constant(1e-12):
            return complex(self.lambda2.constant_value())
        return None


def frame_fields(X: Curve):
    """``xi``, ``eta``, ``lambda^2``, the invariants ``a``, ``b`` and the matrix ``S``."""
    x = X.components
    dx, dbx = x.dz(), x.dzbar()
    dx_x = hermitian_inner(dx, x)
    dbx_x = hermitian_inner(dbx, x)
    xi = dx - dx_x * x
    eta = dbx - dbx_x * x
    n_xi = hermitian_inner(xi, xi)
    n_eta = hermitian_inner(eta, eta)
    lam2 = (n_xi + n_eta) * 0.5
    if lam2.is_zero(1e-12):
        raise DegenerateMetric("lambda^2 vanishes identically")
    ka = kb = None
    if lam2.is_constant(1e-12):
        c = complex(lam2.constant_value())
        ka, kb = n_xi / c, n_eta / c
    x_dbx = hermitian_inner(x, dbx)
    zero = ExpPoly.zeros()
    S = ExpPoly.stack([ExpPoly.stack([dx_x, zero]), ExpPoly.stack([zero, x_dbx])])
    return FrameFields(xi, eta, lam2, ka, kb, S, dx_x, dbx_x, x)


def _pointwise_ab(ff: FrameFields, z):
    lam = ff.lambda2.evaluate(z).real
    if np.any(np.abs(lam) < 1e-12):
        raise DegenerateMetric("lambda^2 vanishes at a sample point")
    a = hermitian_inner(ff.xi, ff.xi).evaluate(z).real / lam
    b = hermitian_inner(ff.eta, ff.eta).evaluate(z).real / lam
    return a, b


def kahler_angle(ff: FrameFields, points=None, tol=1e-9):
    """Return ``(a, theta)``: the invariant ``a`` (ExpPoly when available) and the
    Kahler angle ``2 arccos(sqrt(a/2))`` at the sample points."""
    points = sample_points(10) if points is None else np.asarray(points)
    a_vals, _ = _pointwise_ab(ff, points)
    if np.any(a_vals < -tol) or np.any(a_vals > 2 + tol):
        raise InconsistentFrame(f"invariant a outside [0, 2]: {a_vals.min()}..{a_vals.max()}")
    theta = 2.0 * np.arccos(np.sqrt(np.clip(a_vals, 0.0, 2.0) / 2.0))
    return ff.kahler_a, theta


def gauge_residual(ff: FrameFields):
    """``dbar S + d S^* - [S, S^*] - diag(|xi|^2-|eta|^2, |eta|^2-|xi|^2)``."""
    S = ff.S
    Sh = S.H
    lhs = S.dzbar() + Sh.dz() - (S @ Sh - Sh @ S)
    d = hermitian_inner(ff.xi, ff.xi) - hermitian_inner(ff.eta, ff.eta)
    zero = ExpPoly.zeros()
    rhs = ExpPoly.stack([ExpPoly.stack([d, zero]), ExpPoly.stack([zero, -d])])
    return lhs - rhs


# -- projector --------------------------------------------------------------------


@dataclass
class ProjectorData:
    phi: ExpPoly
    s: ExpPoly
    a_z: ExpPoly
    a_zbar: ExpPoly
    sections: tuple


def projector(X: Curve, Y: ExpPoly | None = None, check=True, tol=1e-10):
    """Rank-2 projector ``Y Y^* + X X^*`` with ``Y = conj(X)`` by default."""
    x = X.components
    quadric = Y is None
    y = x.conj() if Y is None else Y
    if check:
        if not X.is_unit(tol):
            raise ValueError("section is not of unit length")
        if quadric and not X.quadric_form().is_zero(tol):
            raise QuadricViolation("<X, conj X> does not vanish")
        if not quadric and not hermitian_inner(x, y).is_zero(tol):
            raise ValueError("sections are not orthogonal")
    phi = outer(y, y.conj()) + outer(x, x.conj())
    n = X.dim
    s = phi * 2.0 - ExpPoly.identity(n)
    a_z = s @ phi.dz()
    a_zb = s @ phi.dzbar()
    return ProjectorData(phi, s, a_z, a_zb, (y, x))


def a_z_expansion(X: Curve, ff: FrameFields):
    """Four-term rank-one expansion of ``A_z`` and ``A_zbar`` for quadric sections."""
    x, xi, eta = X.components, ff.xi, ff.eta
    xb, xib, etab = x.conj(), xi.conj(), eta.conj()
    a_z = outer(x, etab) + outer(xb, xi) - outer(xi, xb) - outer(etab, x)
    a_zb = outer(x, xib) + outer(xb, eta) - outer(eta, xb) - outer(xib, x)
    return a_z, a_zb


def harmonic_residual(pd: ProjectorData):
    """``dbar A_z - [A_z, A_zbar]``; vanishes iff the projector is harmonic."""
    return pd.a_z.dzbar() - (pd.a_z @ pd.a_zbar - pd.a_zbar @ pd.a_z)


def metric_density(pd: ProjectorData):
    """``-tr(A_z A_zbar)``; equals ``4 lambda^2``."""
    return -(pd.a_z @ pd.a_zbar).trace()


# -- harmonicity in the quadric and in projective space ---------------------------


@dataclass
class Prop1Residual:
    xi_eq: ExpPoly
    eta_eq: ExpPoly
    xi_eta_bar: ExpPoly  # <xi, conj eta>; vanishes iff also minimal in CP^{N-1}
    flat_eq: tuple  # residuals of dbar xi = -X - <xi, conj eta> conj X = d eta

    def max_coeff(self):
        return max(self.xi_eq.max_coeff(), self.eta_eq.max_coeff())


def proposition1_residual(ff: FrameFields, X: Curve):
    """Residuals of the two harmonicity equations for ``conj X (+) X``.

    ``dbar xi = -|xi|^2 X - <xi, conj eta> conj X + <dbar X, X> xi``
    ``d eta  = -|eta|^2 X - <xi, conj eta> conj X + <d X, X> eta``
    """
    x = X.components
    xb = x.conj()
    xi, eta = ff.xi, ff.eta
    c = hermitian_inner(xi, eta.conj())
    r1 = xi.dzbar() - (-hermitian_inner(xi, xi) * x - c * xb + ff.dbX_X * xi)
    r2 = eta.dz() - (-hermitian_inner(eta, eta) * x - c * xb + ff.dX_X * eta)
    target = -x - c * xb
    flat = (xi.dzbar() - target, eta.dz() - target)
    return Prop1Residual(r1, r2, c, flat)


@dataclass
class HopfDensities:
    phi_density: ExpPoly | None  # <dbar xi, eta> / lambda^2
    psi_density: ExpPoly  # <d xi, eta>


def hopf_differentials(ff: FrameFields):
    num = hermitian_inner(ff.xi.dzbar(), ff.eta)
    lam = ff.lambda2_constant()
    phi = None if lam is None else num / lam
    return HopfDensities(phi, hermitian_inner(ff.xi.dz(), ff.eta))


# -- second fundamental form -------------------------------------------------------


@dataclass
class SffOperator:
    P: ExpPoly | None
    P_star: ExpPoly | None
    norm_B2: ExpPoly | None
    norm_B2_alt: ExpPoly | None
    values: np.ndarray
    values_alt: np.ndarray | None
    points: np.ndarray

    def max_discrepancy(self):
        if self.values_alt is None:
            return None
        return float(np.max(np.abs(self.values - self.values_alt)))


def _perp(v, x):
    xb = x.conj()
    return v - hermitian_inner(v, x) * x - hermitian_inner(v, xb) * xb


def sff_norm(pd: ProjectorData, ff: FrameFields, X: Curve, points=None, tol=1e-10):
    """``||B||^2`` as ``4 tr P P^*`` and, for normalized totally real frames,
    as ``(|pi_perp d xi|^2 + |pi_perp dbar eta|^2) / 2``."""
    points = sample_points(10) if points is None else np.asarray(points)
    lam = ff.lambda2_constant()
    if lam is not None:
        P = pd.a_z.dz() / (4.0 * lam)
        P_star = P.H
        nb = (P @ P_star).trace() * 4.0
        values = nb.evaluate(points).real
    else:
        P = P_star = nb = None
        # quotient rule at each point: P = (dA L - A dL) / (4 L^2)
        L, dL = ff.lambda2, ff.lambda2.dz()
        A, dA = pd.a_z, pd.a_z.dz()
        vals = []
        for z in points:
            lv = L.evaluate(z)
            pv = (dA.evaluate(z) * lv - A.evaluate(z) * dL.evaluate(z)) / (4.0 * lv * lv)
            vals.append(4.0 * np.trace(pv @ pv.conj().T).real)
        values = np.array(vals)
    alt = alt_vals = None
    normalized = (
        hermitian_inner(ff.xi, ff.xi) - 1.0
    ).is_zero(tol) and (hermitian_inner(ff.eta, ff.eta) - 1.0).is_zero(tol)
    if normalized:
        x = X.components
        u = _perp(ff.xi.dz(), x)
        v = _perp(ff.eta.dzbar(), x)
        alt = (hermitian_inner(u, u) + hermitian_inner(v, v)) * 0.5
        alt_vals = alt.evaluate(points).real
    return SffOperator(P, P_star, nb, alt, values, alt_vals, points)


def nondegeneracy_rank(pd: ProjectorData, points=None, threshold=1e-8):
    """Common numerical rank of ``span{pi_perp d Y, pi_perp d X}`` at sample points."""
    points = sample_points(5, seed=SAMPLE_SEED + 1) if points is None else np.asarray(points)
    y, x = pd.sections
    vecs = []
    for sec in (y, x):
        d = sec.dz()
        vecs.append(d - hermitian_inner(d, y) * y - hermitian_inner(d, x) * x)
    ranks = []
    for z in points:
        M = np.stack([v.evaluate(z) for v in vecs], axis=1)
        sv = np.linalg.svd(M, compute_uv=False)
        ranks.append(int(np.sum(sv > threshold)))
    if len(set(ranks)) != 1:
        raise RankMismatch(f"rank differs across sample points: {ranks}")
    return ranks[0]


# -- harmonic sequence splitting ---------------------------------------------------


def splitting_check(f0: Curve, k_max: int, tol=1e-10):
    """Check ``<f_k, conj f_{-k}> = 0`` and ``<conj f_{-k}, f_{k+1}> = 0`` for ``k <= k_max``."""
    rows = []
    ok = True
    for k in range(k_max + 1):
        fk = harmonic_sequence(f0, k).components
        fmk = harmonic_sequence(f0, -k).components
        fk1 = harmonic_sequence(f0, k + 1).components
        first = bilinear_pair(fk, fmk).max_coeff()
        second = hermitian_inner(fmk.conj(), fk1).max_coeff()
        passed = first <= tol and second <= tol
        ok = ok and passed
        rows.append({"k": k, "f_k.conj_f_-k": first, "conj_f_-k.f_k+1": second, "pass": passed})
    return {"check": "splitting", "k_max": k_max, "tol": tol, "pass": ok, "rows": rows}


# -- bundle of all checks -------------------------------------------------------


def verify_curve(X: Curve, tol=1e-10, points=None, k_max=None):
    """Run every verifier on a unit quadric section; returns a JSON-ready dict."""
    res = {}
    res["unit_norm"] = (X.norm2() - 1.0).max_coeff()
    res["quadric"] = X.quadric_form().max_coeff()
    ff = frame_fields(X)
    res["xi_perp"] = max(
        hermitian_inner(ff.xi, ff.eta).max_coeff(),
        hermitian_inner(ff.xi, X.components).max_coeff(),
        hermitian_inner(ff.eta, X.components).max_coeff(),
    )
    res["lambda2_minus_1"] = (ff.lambda2 - 1.0).max_coeff()
    if ff.kahler_a is not None:
        res["kahler_a_minus_1"] = (ff.kahler_a - 1.0).max_coeff()
    else:
        a_vals, _ = _pointwise_ab(ff, sample_points(10))
        res["kahler_a_minus_1"] = float(np.max(np.abs(a_vals - 1.0)))
    res["gauge"] = gauge_residual(ff).max_coeff()
    pd = projector(X, check=False)
    res["harmonic"] = harmonic_residual(pd).max_coeff()
    res["metric_minus_4"] = (metric_density(pd) - 4.0).max_coeff()
    az, azb = a_z_expansion(X, ff)
    res["a_z_expansion"] = max((pd.a_z - az).max_coeff(), (pd.a_zbar - azb).max_coeff())
    p1 = proposition1_residual(ff, X)
    res["prop1"] = p1.max_coeff()
    res["xi_eta_bar"] = p1.xi_eta_bar.max_coeff()
    checks = {key: val <= tol for key, val in res.items()}
    sff = sff_norm(pd, ff, X, points=points)
    out = {
        "residuals": res,
        "checks": checks,
        "sff": {
            "min_value": float(sff.values.min()),
            "max_value": float(sff.values.max()),
            "max_discrepancy": sff.max_discrepancy(),
        },
    }
    try:
        out["nondegeneracy_rank"] = nondegeneracy_rank(pd)
    except RankMismatch as exc:
        out["nondegeneracy_rank"] = None
        out["rank_error"] = str(exc)
    hd = hopf_differentials(ff)
    out["psi_constant"] = bool(hd.psi_density.is_constant(tol))
    if out["psi_constant"]:
        v = complex(hd.psi_density.constant_value())
        out["psi_density"] = [v.real, v.imag]
    if k_max is not None and (X.freq_diag is not None or X.base is not None):
        out["splitting"] = splitting_check(X, k_max, tol)
    out["pass"] = all(checks.values()) and (
        "splitting" not in out or out["splitting"]["pass"]
    )
    return out
