"""Exact term algebra for finite sums of exponential monomials.

Every function handled by this package is a finite sum

    sum_k  c_k * exp(a_k z - conj(a_k) zbar)

with complex coefficients ``c_k`` and complex frequencies ``a_k``.  The class
is closed under sums, products, complex conjugation and both Wirtinger
derivatives, so identities between such functions can be decided by comparing
coefficients frequency by frequency.

:class:`ExpPoly` stores the coefficients as an array of shape
``(K, *shape)`` so that vectors and matrices of exponential polynomials share
one frequency list and matrix products reduce to batched numpy products.
"""

from __future__ import annotations

import numbers

import numpy as np

from . import kernels

EPS_FREQ = 1e-9
EPS_COEFF = 1e-13
# frequencies are snapped to this grid before sorting so term order is stable
_SORT_DECIMALS = 11


def _canonical(freqs, coeffs, shape, eps_freq=EPS_FREQ, eps_coeff=EPS_COEFF):
    freqs = np.asarray(freqs, dtype=np.complex128).reshape(-1)
    if len(freqs) == 0:
        return freqs, np.zeros((0,) + shape, dtype=np.complex128)
    flat = np.asarray(coeffs, dtype=np.complex128).reshape(len(freqs), -1)
    order = np.lexsort((freqs.imag, freqs.real))
    fre = np.ascontiguousarray(freqs.real[order])
    fim = np.ascontiguousarray(freqs.imag[order])
    hre, him, summed = kernels.cluster_sum(
        fre, fim, np.ascontiguousarray(flat[order]), float(eps_freq)
    )
    summed[np.abs(summed) <= eps_coeff] = 0.0
    keep = np.any(summed != 0.0, axis=1)
    hre, him, summed = hre[keep], him[keep], summed[keep]
    hre = np.where(np.abs(hre) <= 1e-14, 0.0, hre)
    him = np.where(np.abs(him) <= 1e-14, 0.0, him)
    order = np.lexsort((np.round(him, _SORT_DECIMALS), np.round(hre, _SORT_DECIMALS)))
    out_f = (hre + 1j * him)[order]
    out_c = summed[order].reshape((len(out_f),) + shape)
    return out_f, out_c


class ExpPoly:
    """An array (possibly 0-d) of exponential polynomials over a shared frequency list.

    Instances are treated as immutable values; every operation returns a new
    canonical object.
    """

    __array_priority__ = 100  # make ndarray * ExpPoly defer to us

    def __init__(self, freqs, coeffs, shape=None, *, canonical=False):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if shape is None:
            shape = coeffs.shape[1:]
        shape = tuple(shape)
        if canonical:
            self.freqs = np.asarray(freqs, dtype=np.complex128)
            self.coeffs = coeffs.reshape((len(self.freqs),) + shape)
        else:
            self.freqs, self.coeffs = _canonical(freqs, coeffs, shape)
        self.shape = shape
        self.freqs.setflags(write=False)
        self.coeffs.setflags(write=False)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, shape=()):
        return cls(np.zeros(0), np.zeros((0,) + tuple(shape)), canonical=True)

    @classmethod
    def constant(cls, value):
        value = np.asarray(value, dtype=np.complex128)
        return cls([0.0], value[None, ...])

    @classmethod
    def monomial(cls, freq, coeff=1.0):
        """``coeff * exp(freq z - conj(freq) zbar)``."""
        coeff = np.asarray(coeff, dtype=np.complex128)
        return cls([complex(freq)], coeff[None, ...])

    @classmethod
    def from_terms(cls, terms):
        """Scalar polynomial from an iterable of ``(freq, coeff)`` pairs."""
        terms = list(terms)
        if not terms:
            return cls.zeros()
        f, c = zip(*terms)
        return cls(np.array(f, dtype=np.complex128), np.array(c, dtype=np.complex128))

    @classmethod
    def identity(cls, n):
        return cls.constant(np.eye(n))

    @classmethod
    def stack(cls, items, axis=0):
        """Stack equally shaped polynomials along a new axis."""
        items = [as_exppoly(p) for p in items]
        shape = items[0].shape
        if any(p.shape != shape for p in items):
            raise ValueError("cannot stack polynomials of different shapes")
        freqs = np.concatenate([p.freqs for p in items])
        blocks = []
        for idx, p in enumerate(items):
            block = np.zeros((len(p.freqs), len(items)) + shape, dtype=np.complex128)
            block[:, idx, ...] = p.coeffs
            blocks.append(block)
        coeffs = np.concatenate(blocks, axis=0)
        out = cls(freqs, coeffs)
        if axis != 0:
            out = out.moveaxis(0, axis)
        return out

    # -- structure -----------------------------------------------------------
    @property
    def nterms(self):
        return len(self.freqs)

    @property
    def ndim(self):
        return len(self.shape)

    def __len__(self):
        if not self.shape:
            raise TypeError("len() of scalar ExpPoly")
        return self.shape[0]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        sub = self.coeffs[(slice(None),) + key]
        return ExpPoly(self.freqs, sub)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def moveaxis(self, src, dst):
        return ExpPoly(self.freqs, np.moveaxis(self.coeffs, src + 1, dst + 1), canonical=True)

    @property
    def T(self):
        if self.ndim != 2:
            raise ValueError("transpose needs a matrix")
        return ExpPoly(self.freqs, np.swapaxes(self.coeffs, 1, 2), canonical=True)

    @property
    def H(self):
        """Conjugate transpose (pointwise adjoint)."""
        return self.conj().T

    def terms(self):
        """``[(freq, coeff), ...]`` for a scalar polynomial, canonical order."""
        if self.shape:
            raise ValueError("terms() is only defined for scalars")
        return [(complex(f), complex(c)) for f, c in zip(self.freqs, self.coeffs)]

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return ExpPoly(self.freqs, self.coeffs.reshape((self.nterms,) + tuple(shape)))

    # -- algebra ----------------------------------------------------------------
    def _binary_sum(self, other, sign):
        other = as_exppoly(other)
        shape = np.broadcast_shapes(self.shape, other.shape)
        a = np.broadcast_to(self.coeffs, (self.nterms,) + shape)
        b = np.broadcast_to(other.coeffs, (other.nterms,) + shape)
        return ExpPoly(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([a, sign * b], axis=0),
        )

    def __add__(self, other):
        return self._binary_sum(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary_sum(other, -1.0)

    def __rsub__(self, other):
        return as_exppoly(other)._binary_sum(self, -1.0)

    def __neg__(self):
        return ExpPoly(self.freqs, -self.coeffs, canonical=True)

    def __mul__(self, other):
        if isinstance(other, (numbers.Number, np.ndarray, np.number)):
            return ExpPoly(self.freqs, self.coeffs * np.asarray(other))
        other = as_exppoly(other)
        freqs = (self.freqs[:, None] + other.freqs[None, :]).reshape(-1)
        shape = np.broadcast_shapes(self.shape, other.shape)
        a = self.coeffs.reshape((self.nterms, 1) + (1,) * (len(shape) - self.ndim) + self.shape)
        b = other.coeffs.reshape((1, other.nterms) + (1,) * (len(shape) - other.ndim) + other.shape)
        prod = a * b
        return ExpPoly(freqs, prod.reshape((len(freqs),) + prod.shape[2:]))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (numbers.Number, np.number)):
            return ExpPoly(self.freqs, self.coeffs / other)
        other = as_exppoly(other)
        if other.shape == () and other.is_constant():
            return self / other.constant_value()
        raise TypeError("division only by nonzero constants")

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            other = ExpPoly.constant(other)
        if isinstance(other, ExpPoly):
            freqs = (self.freqs[:, None] + other.freqs[None, :]).reshape(-1)
            prod = np.matmul(self.coeffs[:, None, ...], other.coeffs[None, :, ...])
            return ExpPoly(freqs, prod.reshape((len(freqs),) + prod.shape[2:]))
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return ExpPoly.constant(other) @ self
        return NotImplemented

    def conj(self):
        """Pointwise complex conjugate: ``(c, a) -> (conj c, -a)``."""
        return ExpPoly(-self.freqs, np.conj(self.coeffs))

    def dz(self):
        """Wirtinger derivative d/dz: ``(c, a) -> (c a, a)``."""
        scale = self.freqs.reshape((-1,) + (1,) * self.ndim)
        return ExpPoly(self.freqs, self.coeffs * scale)

    def dzbar(self):
        """Wirtinger derivative d/dzbar: ``(c, a) -> (-c conj(a), a)``."""
        scale = -np.conj(self.freqs).reshape((-1,) + (1,) * self.ndim)
        return ExpPoly(self.freqs, self.coeffs * scale)

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(1, self.ndim + 1))
        else:
            axes = (axis + 1,) if axis >= 0 else (axis,)
        return ExpPoly(self.freqs, self.coeffs.sum(axis=axes))

    def trace(self):
        return ExpPoly(self.freqs, np.trace(self.coeffs, axis1=1, axis2=2))

    def rescale_frequencies(self, factor):
        """Reparametrize ``z -> factor * z``; frequencies are multiplied by ``factor``."""
        return ExpPoly(self.freqs * factor, self.coeffs)

    # -- inspection -------------------------------------------------------------
    def evaluate(self, z):
        """Floating-point value at ``z`` (scalar or array of points)."""
        z = np.asarray(z, dtype=np.complex128)
        # a z - conj(a) conj(z) = 2i Im(a z)
        phase = np.exp(2j * np.imag(np.multiply.outer(z, self.freqs)))
        return np.tensordot(phase, self.coeffs, axes=([-1], [0]))

    __call__ = evaluate

    def max_coeff(self):
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def is_zero(self, tol=1e-12):
        return self.max_coeff() <= tol

    def is_constant(self, tol=1e-10):
        """True when every nonzero-frequency coefficient is below ``tol``."""
        nonzero = np.abs(self.freqs) > EPS_FREQ
        if not nonzero.any():
            return True
        return float(np.abs(self.coeffs[nonzero]).max()) <= tol

    def constant_value(self):
        """Coefficient of the zero frequency (array of ``shape``)."""
        mask = np.abs(self.freqs) <= EPS_FREQ
        if not mask.any():
            return np.zeros(self.shape, dtype=np.complex128)[()]
        return self.coeffs[mask].sum(axis=0)[()]

    def nonconstant_part(self):
        mask = np.abs(self.freqs) > EPS_FREQ
        return ExpPoly(self.freqs[mask], self.coeffs[mask], canonical=True)

    def frequencies(self):
        return [complex(f) for f in self.freqs]

    def allclose(self, other, tol=1e-10):
        return (self - other).is_zero(tol)

    def __repr__(self):
        if self.shape == ():
            body = " + ".join(
                f"({c.real:.6g}{c.imag:+.6g}j)e[{f.real:.6g}{f.imag:+.6g}j]"
                for f, c in self.terms()
            )
            return f"ExpPoly({body or '0'})"
        return f"ExpPoly(shape={self.shape}, nterms={self.nterms})"

    # -- serialization -------------------------------------------------------------
    def to_json(self):
        """Scalars: list of ``{"freq": [re, im], "coeff": [re, im]}``; arrays nest lists."""
        if self.shape == ():
            return [
                {"freq": [f.real, f.imag], "coeff": [c.real, c.imag]}
                for f, c in self.terms()
            ]
        return [self[i].to_json() for i in range(self.shape[0])]

    @classmethod
    def from_json(cls, data):
        if isinstance(data, list) and (not data or isinstance(data[0], dict)):
            return cls.from_terms(
                (complex(*t["freq"]), complex(*t["coeff"])) for t in data
            )
        return cls.stack([cls.from_json(d) for d in data])


def as_exppoly(value):
    if isinstance(value, ExpPoly):
        return value
    return ExpPoly.constant(value)


def outer(u, v):
    """``u v^T`` (no conjugation) for two vectors."""
    u, v = as_exppoly(u), as_exppoly(v)
    freqs = (u.freqs[:, None] + v.freqs[None, :]).reshape(-1)
    prod = u.coeffs[:, None, :, None] * v.coeffs[None, :, None, :]
    return ExpPoly(freqs, prod.reshape((len(freqs),) + prod.shape[2:]))


# -- functional surface ---------------------------------------------------------


def arithmetic(p, q, kind):
    """``add`` / ``mul`` of two polynomials, or ``scale`` of ``p`` by the number ``q``."""
    if kind == "add":
        return as_exppoly(p) + q
    if kind == "mul":
        return as_exppoly(p) * q
    if kind == "scale":
        return as_exppoly(p) * complex(q)
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def conjugate(p):
    return as_exppoly(p).conj()


def differentiate(p, direction):
    if direction == "z":
        return as_exppoly(p).dz()
    if direction == "zbar":
        return as_exppoly(p).dzbar()
    raise ValueError(f"direction must be 'z' or 'zbar', got {direction!r}")


def evaluate(p, z):
    return as_exppoly(p).evaluate(z)


def _check_pair(u, v):
    u, v = as_exppoly(u), as_exppoly(v)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"vectors of equal length required, got {u.shape} and {v.shape}")
    return u, v


def hermitian_inner(u, v):
    """``<u, v> = sum_i u_i conj(v_i)``."""
    u, v = _check_pair(u, v)
    return (u * v.conj()).sum()


def bilinear_pair(u, v):
    """``sum_i u_i v_i``; the quadric form ``<u, conj v>``."""
    u, v = _check_pair(u, v)
    return (u * v).sum()


def is_zero(p, tol=1e-12):
    return as_exppoly(p).is_zero(tol)
