"""Symmetric unitary matrices ``W = U^T U`` and the quadric condition.

A curve ``f_0 = U V_0`` lies in the hyperquadric iff ``tr(W V_0 V_0^T) = 0``.
Expanding, the coefficient of ``exp(s z - conj(s) zbar)`` is
``sum c_ij w_ij`` over the index pairs ``i <= j`` with ``a_i + a_j = s``, where
``c_ii = r_i`` and ``c_ij = 2 sqrt(r_i r_j)``.  Grouping the pairs by ``s``
gives the :class:`FrequencyClasses`; each class with one pair forces that
entry to vanish, the others give linear relations (:class:`ConstraintLedger`).

Whether a unitary completion exists is decided by the leading block
``B = W[:n+1, :n+1]``: a symmetric unitary ``W`` of size ``N`` with this block
exists iff ``||B|| <= 1`` and ``rank(I - B B^*) <= N - n - 1``, and the curve
is linearly full iff equality holds, i.e. iff ``B`` has exactly
``2n + 2 - N`` singular values equal to one.  :func:`analyze_pattern` turns
that into a finite combinatorial check on the support of the ledger.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .curves import Curve, build_v0
from .exppoly import EPS_FREQ, ExpPoly, bilinear_pair
from .moduli import ModuliSolution

_TAKAGI_MIX = np.sqrt(2.0) - 0.5  # irrational mixing weight for Re W + g Im W


class NotSymmetricUnitary(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


# -- W matrices -----------------------------------------------------------------


class WMatrix:
    """A complex symmetric unitary ``N x N`` matrix."""

    def __init__(self, entries, check=True, tol=1e-10):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"W must be square, got shape {m.shape}")
        self.entries = m
        self.entries.setflags(write=False)
        if check and not self.is_valid(tol):
            raise NotSymmetricUnitary(
                f"symmetry error {self.symmetry_error():.2e}, "
                f"unitarity error {self.unitarity_error():.2e}"
            )

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __getitem__(self, key):
        return self.entries[key]

    def symmetry_error(self):
        return float(np.max(np.abs(self.entries - self.entries.T), initial=0.0))

    def unitarity_error(self):
        w = self.entries
        return float(np.max(np.abs(w.conj().T @ w - np.eye(self.dim)), initial=0.0))

    def is_valid(self, tol=1e-10):
        return self.symmetry_error() <= tol and self.unitarity_error() <= tol

    def block(self, n):
        """Leading ``(n+1) x (n+1)`` block."""
        return self.entries[: n + 1, : n + 1]

    def coupling(self, n):
        """Off-diagonal block ``W[n+1:, :n+1]``; full rank iff linearly full."""
        return self.entries[n + 1 :, : n + 1]

    def to_json(self):
        return [[[x.real, x.imag] for x in row] for row in self.entries]

    @classmethod
    def from_json(cls, rows, check=True):
        return cls([[complex(*x) for x in row] for row in rows], check=check)

    def __repr__(self):
        return f"WMatrix(N={self.dim})"


def w_from_u(U, tol=1e-10):
    """``W = U^T U`` for a unitary ``U``."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"U must be square, got shape {U.shape}")
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > tol:
        raise ValueError(f"U is not unitary (error {err:.2e})")
    return WMatrix(U.T @ U, tol=max(tol, 1e-10))


def takagi(W, tol=1e-9):
    """A unitary ``U`` with ``U^T U = W`` (an element of ``G_W``).

    ``Re W`` and ``Im W`` are commuting real symmetric matrices, so one real
    orthogonal ``Q`` diagonalizes both: ``W = Q D Q^T`` with ``|D| = 1``.  Then
    ``U = D^{1/2} Q^T`` (principal root).  Each column of ``Q`` is signed so its
    first entry above ``tol`` is positive, which makes the result deterministic.
    """
    w = np.asarray(W.entries if isinstance(W, WMatrix) else W, dtype=complex)
    WMatrix(w, tol=max(tol, 1e-10))
    A, B = w.real, w.imag
    vals, Q = np.linalg.eigh(A + _TAKAGI_MIX * B)
    # split accidental clusters of the mixed matrix with a second pass
    order = np.argsort(vals)
    vals, Q = vals[order], Q[:, order]
    start = 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or vals[k] - vals[k - 1] > 1e-8:
            if k - start > 1:
                blk = Q[:, start:k]
                sub = blk.T @ B @ blk
                _, R = np.linalg.eigh((sub + sub.T) / 2)
                Q[:, start:k] = blk @ R
            start = k
    for j in range(Q.shape[1]):
        col = Q[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size and col[idx[0]] < 0:
            Q[:, j] = -col
    d = np.diag(Q.T @ w @ Q)
    d = d / np.abs(d)
    U = np.sqrt(d)[:, None] * Q.T
    err = np.max(np.abs(U.T @ U - w))
    if err > tol:
        raise NotSymmetricUnitary(f"Takagi factorization failed (error {err:.2e})")
    return U


@dataclass
class OrthogonalLink:
    """``O = U V^{-1}`` for two elements of the same ``G_W``."""

    O: np.ndarray
    imag_error: float
    orthogonality_error: float
    det: float

    @property
    def is_real_orthogonal(self):
        return self.imag_error <= 1e-9 and self.orthogonality_error <= 1e-9

    @property
    def is_special(self):
        return self.is_real_orthogonal and self.det > 0


def orthogonal_link(U, V):
    """Connect ``V`` to ``U`` inside ``G_W``; records ``det O`` instead of assuming +1."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    O = U @ V.conj().T
    imag = float(np.max(np.abs(O.imag)))
    Or = O.real
    orth = float(np.max(np.abs(Or.T @ Or - np.eye(len(Or)))))
    return OrthogonalLink(Or, imag, orth, float(np.linalg.det(Or)))


# -- frequency classes and the constraint ledger -------------------------------


@dataclass(frozen=True)
class FrequencyClass:
    freq: complex
    pairs: tuple  # ((i, j), ...) with i <= j


@dataclass
class CaseLabel:
    kind: str  # "I", "II" or "III"
    m: int | None = None
    pairs: tuple = ()

    def __str__(self):
        if self.kind == "II":
            return f"II(m={self.m})"
        if self.kind == "III":
            return f"III(s={len(self.pairs)})"
        return "I"

    def to_json(self):
        return {"kind": self.kind, "m": self.m, "pairs": [list(p) for p in self.pairs]}


@dataclass
class FrequencyClasses:
    n: int
    classes: list  # FrequencyClass with nonzero frequency
    zero_pairs: tuple  # pairs (i, j) with a_i + a_j = 0

    @property
    def zero_classes(self):
        """Antipodal pairs, one tuple each; they share the frequency 0 and hence
        a single relation."""
        return [((i, j),) for i, j in self.zero_pairs]

    def all_pairs(self):
        out = [p for c in self.classes for p in c.pairs] + list(self.zero_pairs)
        return sorted(out)

    def case_label(self):
        if not self.zero_pairs:
            return CaseLabel("I")
        covered = {i for p in self.zero_pairs for i in p}
        if len(covered) == self.n + 1:
            m = (self.n - 1) // 2
            return CaseLabel("II", m=m, pairs=tuple(self.zero_pairs))
        return CaseLabel("III", pairs=tuple(self.zero_pairs))


def frequency_classes(sol: ModuliSolution, eps=EPS_FREQ):
    """Group the pairs ``i <= j`` by the value ``a_i + a_j``."""
    a = sol.a
    n1 = sol.n + 1
    heads = []
    members = []
    zero = []
    for i in range(n1):
        for j in range(i, n1):
            s = a[i] + a[j]
            if abs(s) <= eps:
                zero.append((i, j))
                continue
            for k, h in enumerate(heads):
                if abs(h - s) <= eps:
                    members[k].append((i, j))
                    break
            else:
                heads.append(s)
                members.append([(i, j)])
    classes = [FrequencyClass(complex(h), tuple(m)) for h, m in zip(heads, members)]
    return FrequencyClasses(sol.n, classes, tuple(zero))


@dataclass
class Relation:
    """``sum coeff * w_ij = 0``."""

    freq: complex
    terms: tuple  # (((i, j), coeff), ...)

    def value(self, W):
        w = np.asarray(W)
        return complex(sum(c * w[i, j] for (i, j), c in self.terms))

    def to_json(self):
        return {
            "freq": [self.freq.real, self.freq.imag],
            "terms": [{"entry": list(p), "coeff": c} for p, c in self.terms],
        }


@dataclass
class ConstraintLedger:
    n: int
    forced_zero: frozenset
    relations: list

    def covered(self):
        seen = set(self.forced_zero)
        for rel in self.relations:
            for p, _ in rel.terms:
                if p in seen:
                    return False
                seen.add(p)
        return seen == {(i, j) for i in range(self.n + 1) for j in range(i, self.n + 1)}

    def residuals(self, W):
        w = np.asarray(W)
        forced = max((abs(w[i, j]) for i, j in self.forced_zero), default=0.0)
        rel = max((abs(r.value(w)) for r in self.relations), default=0.0)
        return {"forced_zero": float(forced), "relations": float(rel)}

    def satisfied(self, W, tol=1e-10):
        return max(self.residuals(W).values()) <= tol

    def to_json(self):
        return {
            "n": self.n,
            "forced_zero": sorted(list(p) for p in self.forced_zero),
            "relations": [r.to_json() for r in self.relations],
        }


def _pair_coeff(r, i, j):
    return float(r[i]) if i == j else 2.0 * float(np.sqrt(r[i] * r[j]))


def derive_constraints(fc: FrequencyClasses, sol: ModuliSolution | None = None, r=None):
    """Forced zeros and linear relations on the leading block of ``W``.

    ``r`` may be given instead of ``sol`` (weights only matter for relations);
    with neither, every weight is treated as one.
    """
    if r is None:
        r = np.ones(fc.n + 1) if sol is None else np.asarray(sol.r)
    forced = set()
    rels = []
    groups = [(c.freq, c.pairs) for c in fc.classes]
    if fc.zero_pairs:
        groups.append((0j, fc.zero_pairs))
    for freq, pairs in groups:
        if len(pairs) == 1:
            forced.add(pairs[0])
        else:
            rels.append(Relation(freq, tuple((p, _pair_coeff(r, *p)) for p in pairs)))
    return ConstraintLedger(fc.n, frozenset(forced), rels)


def structural_classes(n, pairs):
    """Frequency classes for generic moduli with prescribed antipodal pairs.

    Sums of two distinct unit numbers with nonzero sum determine the pair, so
    apart from the antipodal pairs every class is a singleton.
    """
    pairs = tuple(tuple(sorted(p)) for p in pairs)
    zero = set(pairs)
    classes = []
    for i in range(n + 1):
        for j in range(i, n + 1):
            if (i, j) not in zero:
                classes.append(FrequencyClass(complex(np.nan), ((i, j),)))
    return FrequencyClasses(n, classes, tuple(sorted(zero)))


def quadric_residual(W, v0: Curve):
    """``tr(W V_0 V_0^T) = <U V_0, conj(U V_0)>`` as an exponential polynomial."""
    w = np.asarray(W.entries if isinstance(W, WMatrix) else W, dtype=complex)
    N = w.shape[0]
    comps = v0.components
    if comps.shape[0] > N:
        raise DimensionMismatch(f"curve of dimension {comps.shape[0]} does not fit W of size {N}")
    if comps.shape[0] < N:
        pad = np.zeros((comps.nterms, N), dtype=complex)
        pad[:, : comps.shape[0]] = comps.coeffs
        comps = ExpPoly(comps.freqs, pad)
    wv = ExpPoly(comps.freqs, comps.coeffs @ w.T)
    return bilinear_pair(comps, wv)


# -- exact pattern feasibility ---------------------------------------------------


def _polygon_closes(fixed, caps, tol=1e-12):
    """Can vectors with lengths ``fixed`` (exact) and lengths in ``[0, cap)`` sum to 0?"""
    if not fixed:
        return True
    fm = max(fixed)
    need = 2.0 * fm - sum(fixed)
    if need <= tol:
        return True
    reach = sum(min(c, fm) for c in caps)
    if need < reach - tol:
        return True
    if abs(need - reach) <= tol:
        # the bound is attained only if some cap exceeds the longest fixed side
        return any(c > fm + tol for c in caps)
    return False


@dataclass
class PatternAnalysis:
    """Unit singular values of the leading block compatible with the ledger."""

    n: int
    N: int
    required_units: int
    achievable_units: list
    unitary_units: list
    zero_rows: list
    components: list
    obstruction: str | None
    template: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def feasible(self):
        return self.obstruction is None

    @property
    def verdict(self):
        return "feasible" if self.feasible else "infeasible"

    def to_json(self):
        return {
            "n": self.n,
            "N": self.N,
            "required_units": self.required_units,
            "achievable_units": self.achievable_units,
            "unitary_units": self.unitary_units,
            "zero_rows": self.zero_rows,
            "components": self.components,
            "obstruction": self.obstruction,
            "verdict": self.verdict,
            "template": self.template,
            "notes": self.notes,
        }


def _entry_name(i, j):
    i, j = min(i, j), max(i, j)
    return f"w{i}{j}" if max(i, j) < 10 else f"w{i},{j}"


def analyze_pattern(ledger: ConstraintLedger, N: int):
    """Decide which leading blocks allowed by ``ledger`` extend to a linearly
    full symmetric unitary ``W`` of size ``N``.

    The support of the block splits into components.  A row with no free entry
    is zero; an isolated free pair ``{w_ij}`` contributes two unit singular
    values when ``|w_ij| = 1`` and none otherwise; larger components are
    treated permissively (any count).  Relations among pair entries are closed
    polygons with side lengths ``coeff * |w_ij|``.
    """
    n = ledger.n
    n1 = n + 1
    u = 2 * n1 - N
    free = [
        (i, j)
        for i in range(n1)
        for j in range(i, n1)
        if (i, j) not in ledger.forced_zero
    ]
    adj = {i: set() for i in range(n1)}
    loops = set()
    for i, j in free:
        if i == j:
            loops.add(i)
        else:
            adj[i].add(j)
            adj[j].add(i)
    seen = set()
    comps = []
    for i in range(n1):
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            k = stack.pop()
            comp.append(k)
            for l in adj[k]:
                if l not in seen:
                    seen.add(l)
                    stack.append(l)
        comp.sort()
        if len(comp) == 1 and comp[0] not in loops:
            kind = "zero"
        elif len(comp) == 1:
            kind = "diagonal"
        elif len(comp) == 2 and not (set(comp) & loops):
            kind = "pair"
        else:
            kind = "general"
        comps.append({"indices": comp, "kind": kind})
    zero_rows = [c["indices"][0] for c in comps if c["kind"] == "zero"]
    pair_comps = [tuple(c["indices"]) for c in comps if c["kind"] == "pair"]
    other = [c for c in comps if c["kind"] in ("diagonal", "general")]
    notes = []
    if any(c["kind"] == "general" for c in comps):
        notes.append("general component: unit counts over-approximated")
    pair_rel = []
    for rel in ledger.relations:
        ents = [p for p, _ in rel.terms]
        if all(p in pair_comps for p in ents):
            pair_rel.append(rel)
        else:
            notes.append(f"relation at {rel.freq} not refined")
    other_counts = {0}
    for c in other:
        other_counts = {a + b for a in other_counts for b in range(len(c["indices"]) + 1)}
    achievable = set()
    for status in itertools.product((False, True), repeat=len(pair_comps)):
        unit = dict(zip(pair_comps, status))
        ok = True
        for rel in pair_rel:
            fixed = [c for p, c in rel.terms if unit[p]]
            caps = [c for p, c in rel.terms if not unit[p]]
            if not _polygon_closes(fixed, caps):
                ok = False
                break
        if ok:
            base = 2 * sum(status)
            achievable |= {base + k for k in other_counts}
    achievable = sorted(achievable)
    # rank(I - B B^*) <= N - n - 1 requires at least u unit singular values
    unitary = [k for k in achievable if k >= u]
    if u < 0:
        obstruction = "dimension"
        notes.append(f"N = {N} exceeds 2n+2 = {2 * n1}")
    elif u > n1:
        obstruction = "dimension"
        notes.append(f"N = {N} is smaller than n+1 = {n1}")
    elif len(zero_rows) > N - n1:
        obstruction = "zero_column"
    elif u in achievable:
        obstruction = None
    elif unitary:
        obstruction = "not_linearly_full"
    else:
        obstruction = "unit_count"
    template = []
    if 0 <= u <= n1:
        count = u if u in achievable else (min(unitary) if unitary else None)
        template = _template(ledger, N, pair_comps, pair_rel, count)
    return PatternAnalysis(
        n, N, u, achievable, unitary, zero_rows, comps, obstruction, template, notes
    )


def _template(ledger, N, pair_comps, pair_rel, count):
    """Symbolic entry pattern of ``W``; rows of unit pairs decouple from the rest."""
    n1 = ledger.n + 1
    unit_rows = set()
    if count is not None and count == 2 * len(pair_comps):
        unit_rows = {i for p in pair_comps for i in p}
    out = []
    for i in range(N):
        row = []
        for j in range(N):
            a, b = min(i, j), max(i, j)
            if b < n1:
                row.append("0" if (a, b) in ledger.forced_zero else _entry_name(a, b))
            elif a < n1:
                row.append("0" if a in unit_rows else _entry_name(a, b))
            else:
                row.append(_entry_name(a, b))
        out.append(row)
    return out


def linear_fullness_rank(W, n):
    """Numerical rank of ``W[n+1:, :n+1]`` (full iff the curve is linearly full)."""
    c = np.asarray(W)[n + 1 :, : n + 1]
    if c.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(c, compute_uv=False) > 1e-8))


def expected_dimension(B0, threshold=1e-8):
    """``n + 1 + rank(I - B B^*)`` for a leading block ``B``."""
    B0 = np.asarray(B0, dtype=complex)
    g = np.eye(len(B0)) - B0 @ B0.conj().T
    return len(B0) + int(np.sum(np.linalg.svd(g, compute_uv=False) > threshold))


# -- heuristic search -------------------------------------------------------------


@dataclass
class SearchResult:
    n: int
    N: int
    starts: int
    best_objective: float
    best_residual: float
    best_fullness: float
    hits: int  # starts with residual < threshold and fullness >= margin
    residual_threshold: float
    fullness_margin: float

    def to_json(self):
        return dict(self.__dict__)


def _cayley(n_dim, x):
    K = np.zeros((n_dim, n_dim))
    K[np.triu_indices(n_dim, 1)] = x
    K = K - K.T
    eye = np.eye(n_dim)
    return np.linalg.solve(eye + K, eye - K)


def _class_matrix(sol: ModuliSolution, N):
    """Matrix mapping ``vec(W)`` to the quadric coefficients, one row per class."""
    fc = frequency_classes(sol)
    r = np.asarray(sol.r)
    groups = [c.pairs for c in fc.classes]
    if fc.zero_pairs:
        groups.append(fc.zero_pairs)
    M = np.zeros((len(groups), N * N))
    for k, pairs in enumerate(groups):
        for i, j in pairs:
            M[k, i * N + j] = _pair_coeff(r, i, j)
    return M


def search_w(sol: ModuliSolution, N, starts=200, max_iter=2000, seed=0,
             residual_threshold=1e-6, fullness_margin=0.05):
    """Multi-start search for a linearly full symmetric unitary ``W`` solving the
    quadric condition.  ``W = Q diag(e^{i phi}) Q^T`` with ``Q`` a Cayley transform,
    so every iterate is exactly symmetric unitary.  Heuristic: a hit is evidence
    of existence, no hit is only corroboration."""
    n = sol.n
    if N < n + 1:
        raise DimensionMismatch(f"N = {N} is smaller than n+1 = {n + 1}")
    M = _class_matrix(sol, N)
    nk = N * (N - 1) // 2
    extra = N - n - 1
    rng = np.random.default_rng([int(N), int(n), int(seed)])

    def unpack(x):
        Q = _cayley(N, x[:nk])
        return (Q * np.exp(1j * x[nk:])) @ Q.T

    def parts(x):
        W = unpack(x)
        res = M @ W.ravel()
        full = 1.0
        if extra:
            full = float(np.linalg.svd(W[n + 1 :, : n + 1], compute_uv=False)[extra - 1])
        return res, full

    def objective(x):
        res, full = parts(x)
        return float(np.vdot(res, res).real + max(0.0, fullness_margin - full) ** 2)

    best = (np.inf, np.inf, 0.0)
    hits = 0
    for _ in range(starts):
        x0 = np.concatenate([rng.normal(0, 1.0, nk), rng.uniform(0, 2 * np.pi, N)])
        fit = minimize(objective, x0, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-13})
        res, full = parts(fit.x)
        res = float(np.max(np.abs(res)))
        if res < residual_threshold and full >= fullness_margin:
            hits += 1
        if fit.fun < best[0]:
            best = (float(fit.fun), res, full)
    return SearchResult(n, N, starts, best[0], best[1], best[2], hits,
                        residual_threshold, fullness_margin)


def v0_padded(sol: ModuliSolution, N):
    return build_v0(sol, pad_to=N)
