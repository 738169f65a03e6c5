"""Named explicit solutions ``f_0 = U V_0``.

Every entry is built twice: from its frame ``U`` applied to ``V_0`` and from a
closed-form component list written term by term.  The two must agree after
dividing the closed form by ``printed_scale``; the discrepancy is stored in
the metadata.

Names
-----
``q2_clifford``   the Clifford solution in the quadric of ``CP^3``
``case1``         ``U_1 V_0`` with ``U_1`` pairing each frequency with ``i``
                  (``N = 2n + 2``); params ``n`` or ``moduli``
``case2``         paired frequencies ``a_{k+m+1} = -a_k`` with unit weights,
                  ``N = n + 1``; params ``n``, ``weights``, ``moduli``
``q4_case1``      ``case1`` at ``n = 2`` in the closed form with ``1/sqrt(6)``
``q4_case2``      ``case2`` at ``n = 5`` with weights ``(1, w, w^2)``
``q4_family``     ``n = 4``, two antipodal pairs and a free unit parameter
                  ``t``; params ``t``, ``theta1``, ``combo``
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import Curve, apply_frame, build_v0
from .exppoly import ExpPoly
from .moduli import ModuliSolution, clifford, residuals, solve_weights
from .quadric import WMatrix, frequency_classes, w_from_u

SQ2 = np.sqrt(2.0)


class UnknownCatalogEntry(KeyError):
    pass


class InvalidParameters(ValueError):
    pass


@dataclass
class CatalogEntry:
    name: str
    curve: Curve
    w: WMatrix
    U: np.ndarray
    moduli: ModuliSolution
    printed: ExpPoly
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        # allows ``curve, w, meta = catalog(...)``
        return iter((self.curve, self.w, self.meta))


def _e(freq):
    return ExpPoly.monomial(complex(freq))


def _moduli_param(params, default_n=None):
    mod = params.pop("moduli", None)
    n = params.pop("n", default_n)
    if mod is not None:
        if isinstance(mod, dict):
            mod = ModuliSolution.from_json(mod)
        if n is not None and int(n) != mod.n:
            raise InvalidParameters(f"n = {n} disagrees with moduli of dimension {mod.n}")
        if not mod.is_valid():
            raise InvalidParameters("moduli violate the constraints")
        return mod
    if n is None:
        raise InvalidParameters("need n or moduli")
    n = int(n)
    if n < 2:
        raise InvalidParameters(f"n must be >= 2, got {n}")
    return clifford(n)


def _finish(name, U, sol, printed, scale, **meta):
    N = U.shape[0]
    v0 = build_v0(sol, pad_to=N)
    curve = apply_frame(U, v0, name=name)
    w = w_from_u(U)
    diff = (printed * (1.0 / scale) - curve.components).max_coeff()
    info = {
        "name": name,
        "n": sol.n,
        "N": N,
        "case": frequency_classes(sol).case_label().to_json(),
        "printed_scale": float(scale),
        "printed_discrepancy": float(diff),
        "moduli": sol.to_json(),
    }
    info.update(meta)
    curve.meta = dict(info)
    return CatalogEntry(name, curve, w, U, sol, printed, info)


def _check_empty(name, params):
    if params:
        raise InvalidParameters(f"unexpected parameters for {name}: {sorted(params)}")


# -- entries ---------------------------------------------------------------------


def _q2_clifford(params):
    _check_empty("q2_clifford", params)
    sol = clifford(3)
    U = np.array(
        [[1, 0, 1, 0], [0, 1j, 0, 1j], [0, 1, 0, -1], [1j, 0, -1j, 0]], dtype=complex
    ) / SQ2
    i = 1j
    printed = ExpPoly.stack(
        [
            _e(1) + _e(-1),
            (_e(i) + _e(-i)) * i,
            _e(i) - _e(-i),
            (_e(1) - _e(-1)) * i,
        ]
    )
    return _finish("q2_clifford", U, sol, printed, 2.0 * SQ2, weights=[[1.0, 0.0], [-1.0, 0.0]])


def _case1_frame(n):
    n1 = n + 1
    N = 2 * n1
    U = np.zeros((N, N), dtype=complex)
    for k in range(n1):
        U[2 * k, k] = 1 / SQ2
        U[2 * k + 1, k] = 1j / SQ2
        # completion: the conjugate columns
        U[2 * k, n1 + k] = 1 / SQ2
        U[2 * k + 1, n1 + k] = -1j / SQ2
    return U


def _case1(params, name="case1"):
    sol = _moduli_param(params)
    _check_empty(name, params)
    a, r = sol.a, np.sqrt(sol.r)
    rows = []
    for k in range(sol.n + 1):
        rows.append(_e(a[k]) * r[k])
        rows.append(_e(a[k]) * (1j * r[k]))
    printed = ExpPoly.stack(rows)
    return _finish(name, _case1_frame(sol.n), sol, printed, SQ2)


def _q4_case1(params):
    _check_empty("q4_case1", params)
    sol = clifford(2)
    a = sol.a
    rows = []
    for k in range(3):
        rows.append(_e(a[k]))
        rows.append(_e(a[k]) * 1j)
    printed = ExpPoly.stack(rows)
    return _finish("q4_case1", _case1_frame(2), sol, printed, np.sqrt(6.0))


def default_weights(m):
    """``(m+1)``-th roots of unity; they sum to zero."""
    return np.exp(2j * np.pi * np.arange(m + 1) / (m + 1))


def _case2(params, name="case2", default_n=None):
    sol = _moduli_param(params, default_n)
    n = sol.n
    if n % 2 == 0:
        raise InvalidParameters(f"paired frequencies need odd n, got {n}")
    m = (n - 1) // 2
    a, r = sol.a, np.sqrt(sol.r)
    for k in range(m + 1):
        if abs(a[k] + a[k + m + 1]) > 1e-9:
            raise InvalidParameters(f"a_{k} + a_{k + m + 1} != 0 for the given moduli")
    weights = params.pop("weights", None)
    _check_empty(name, params)
    if weights is None:
        weights = default_weights(m)
    weights = np.array([complex(*w) if isinstance(w, (list, tuple)) else complex(w)
                        for w in weights])
    if len(weights) != m + 1:
        raise InvalidParameters(f"need {m + 1} weights, got {len(weights)}")
    if np.any(np.abs(np.abs(weights) - 1.0) > 1e-12):
        raise InvalidParameters("weights must have modulus one")
    rel = sum(weights[k] * r[k] * r[k + m + 1] for k in range(m + 1))
    if abs(rel) > 1e-10:
        raise InvalidParameters(f"weighted relation does not vanish ({abs(rel):.2e})")
    N = n + 1
    U = np.zeros((N, N), dtype=complex)
    printed = []
    lower = []
    for k in range(m + 1):
        sw, smw = np.sqrt(weights[k]), np.sqrt(-weights[k])
        U[k, k] = U[k, k + m + 1] = sw / SQ2
        row = n - k
        U[row, k] = smw / SQ2
        U[row, k + m + 1] = -smw / SQ2
        printed.append((_e(a[k]) * r[k] + _e(-a[k]) * r[k + m + 1]) * sw)
        lower.append((_e(a[k]) * r[k] - _e(-a[k]) * r[k + m + 1]) * smw)
    printed = ExpPoly.stack(printed + lower[::-1])
    return _finish(name, U, sol, printed, SQ2, m=m,
                   weights=[[w.real, w.imag] for w in weights])


def family_moduli(theta1, combo=(0, 2, 1, 3)):
    """Moduli for ``n = 4`` with two antipodal pairs and ``r_i r_j = r_k r_l``.

    In the reference labelling (pairs ``(0,2), (1,3)``, index 4 unpaired) the
    angles are ``(theta1, pi, theta1 + pi, 3 pi / 2 + theta1 / 2)``; the weights
    follow linearly and are positive for ``pi/3 < theta1 < pi/2``.  Other
    interleaving combinations are cyclic relabellings followed by a rotation.
    """
    theta1 = float(theta1)
    if not (np.pi / 3 < theta1 < np.pi / 2):
        raise InvalidParameters(f"theta1 must lie in (pi/3, pi/2), got {theta1}")
    pairs, free = _combo_pairs(combo)
    ang = np.array([0.0, theta1, np.pi, theta1 + np.pi, 1.5 * np.pi + 0.5 * theta1])
    r, res = solve_weights(4, ang[1:])
    if res > 1e-13 or np.any(r <= 0):
        raise InvalidParameters(f"no positive weights at theta1 = {theta1}")
    # reference point P_k receives the label (k + free + 1) mod 5
    labels = [(k + free + 1) % 5 for k in range(5)]
    new_ang = np.zeros(5)
    new_r = np.zeros(5)
    for k, lab in enumerate(labels):
        new_ang[lab] = ang[k]
        new_r[lab] = r[k]
    new_ang = np.mod(new_ang - new_ang[0], 2 * np.pi)
    sol = ModuliSolution(4, new_r, new_ang[1:])
    if max(abs(x) for x in residuals(sol)) > 1e-13 or not sol.is_valid():
        raise InvalidParameters("relabelled moduli are invalid")
    return sol, pairs, free


def interleaving(combo):
    """Two antipodal diameters must cross, so sorted pairs must interleave."""
    (i, j), (k, l) = sorted(tuple(sorted(p)) for p in (combo[:2], combo[2:]))
    return i < k < j < l


def _combo_pairs(combo):
    combo = tuple(int(c) for c in combo)
    if len(combo) != 4 or len(set(combo)) != 4 or not all(0 <= c <= 4 for c in combo):
        raise InvalidParameters(f"combo must be four distinct indices in 0..4, got {combo}")
    if not interleaving(combo):
        raise InvalidParameters(
            f"combo {combo}: antipodal pairs must interleave in the angular order"
        )
    free = ({0, 1, 2, 3, 4} - set(combo)).pop()
    return (tuple(sorted(combo[:2])), tuple(sorted(combo[2:]))), free


def _q4_family(params):
    t = complex(params.pop("t", np.exp(1j * np.pi / 5)))
    theta1 = params.pop("theta1", 5 * np.pi / 12)
    combo = params.pop("combo", (0, 2, 1, 3))
    _check_empty("q4_family", params)
    if abs(abs(t) - 1.0) > 1e-12:
        raise InvalidParameters(f"|t| must be 1, got {abs(t)}")
    sol, ((i1, j1), (i2, j2)), free = family_moduli(theta1, combo)
    U = np.zeros((6, 6), dtype=complex)
    U[0, i1] = U[0, j1] = 1 / SQ2
    U[1, i1], U[1, j1] = 1j / SQ2, -1j / SQ2
    U[2, i2], U[2, j2] = 1 / SQ2, -1 / SQ2
    U[3, i2] = U[3, j2] = 1j / SQ2
    st, smt = np.sqrt(t), np.sqrt(-t)
    U[4, free], U[5, free] = st / SQ2, smt / SQ2
    U[4, 5], U[5, 5] = st / SQ2, -smt / SQ2
    a, r = sol.a, np.sqrt(sol.r)
    e = [_e(x) for x in a]
    s = np.sqrt(-np.asarray(sol.r) + 0j)  # sqrt(-r) = i sqrt(r)
    printed = ExpPoly.stack(
        [
            e[i1] * r[i1] + _e(-a[i1]) * r[j1],
            e[i1] * s[i1] - _e(-a[i1]) * s[j1],
            e[i2] * r[i2] - _e(-a[i2]) * r[j2],
            e[i2] * s[i2] + _e(-a[i2]) * s[j2],
            e[free] * (st * r[free]),
            e[free] * (smt * r[free]),
        ]
    )
    return _finish(
        "q4_family", U, sol, printed, SQ2,
        t=[t.real, t.imag], theta1=float(theta1), combo=[int(c) for c in combo],
        pairs=[[i1, j1], [i2, j2]], free=free,
    )


def all_combinations():
    """All ways to pick two disjoint pairs from five indices (15 in total)."""
    out = []
    idx = range(5)
    for free in idx:
        rest = [k for k in idx if k != free]
        a = rest[0]
        for b in rest[1:]:
            others = [k for k in rest if k not in (a, b)]
            out.append((a, b, others[0], others[1]))
    return out


_BUILDERS = {
    "q2_clifford": _q2_clifford,
    "case1": _case1,
    "case2": _case2,
    "q4_case1": _q4_case1,
    "q4_case2": lambda p: _case2(p, name="q4_case2", default_n=5),
    "q4_family": _q4_family,
}

NAMES = tuple(_BUILDERS)


def catalog(name, **params):
    """Build the named solution; see the module docstring for parameters."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownCatalogEntry(f"unknown catalog entry {name!r}; known: {', '.join(NAMES)}")
    return builder(dict(params))
