import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperquadric.exppoly import (
    ExpPoly, arithmetic, bilinear_pair, conjugate, differentiate, evaluate, hermitian_inner,
    is_zero,
)
from hyperquadric.moduli import clifford
from hyperquadric.curves import build_v0

finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
# canonical inputs: frequencies either coincide or differ by far more than EPS_FREQ
freq = st.builds(lambda x, y: complex(round(x, 4), round(y, 4)), finite, finite)
terms = st.lists(st.tuples(cplx, freq), min_size=1, max_size=5)
points = st.builds(complex, st.floats(-1, 1), st.floats(-1, 1))


def poly(ts):
    return ExpPoly.from_terms([(a, c) for c, a in ts])


def direct(ts, z):
    return sum(c * np.exp(a * z - np.conj(a) * np.conj(z)) for c, a in ts)


# -- arithmetic -------------------------------------------------------------------


def test_add_cancels():
    p = ExpPoly.monomial(1.0, 1.0)
    assert arithmetic(p, ExpPoly.monomial(1.0, -1.0), "add").nterms == 0


def test_inverse_exponents_multiply_to_one():
    q = arithmetic(ExpPoly.monomial(1.0), ExpPoly.monomial(-1.0), "mul")
    assert q.nterms == 1
    assert q.freqs[0] == 0
    assert q.coeffs[0] == pytest.approx(1.0)


def test_square_of_imaginary_frequency():
    p = ExpPoly.monomial(1j)
    q = arithmetic(p, p, "mul")
    assert np.allclose(q.freqs, [2j])
    z = 0.3 + 0.7j
    assert abs(q.evaluate(z) - np.exp(1j * z + 1j * np.conj(z)) ** 2) < 1e-14


def test_scale():
    p = ExpPoly.monomial(1j, 2.0)
    assert arithmetic(p, 1.5j, "scale").coeffs[0] == pytest.approx(3j)


def test_near_frequencies_merge():
    p = ExpPoly.monomial(1.0) + ExpPoly.monomial(1.0 + 1e-11)
    assert p.nterms == 1
    assert p.coeffs[0] == pytest.approx(2.0)


def test_tiny_coefficients_pruned():
    assert ExpPoly.monomial(1j, 1e-14).nterms == 0


# -- conjugate / derivatives --------------------------------------------------------


def test_conjugate_term():
    p = conjugate(ExpPoly.monomial(1j, 1 + 1j))
    assert np.allclose(p.freqs, [-1j]) and np.allclose(p.coeffs, [1 - 1j])


def test_conjugate_constant():
    p = conjugate(ExpPoly.constant(2 - 3j))
    assert np.allclose(p.freqs, [0]) and np.allclose(p.coeffs, [2 + 3j])


def test_conjugate_reproduces_conj_v0_entry():
    sol = clifford(2)
    v0 = build_v0(sol).components
    a1, r1 = sol.a[1], sol.r[1]
    z = 0.4 - 0.2j
    expected = np.exp(np.conj(a1) * np.conj(z) - a1 * z) * np.sqrt(r1)
    assert abs(conjugate(v0[1]).evaluate(z) - expected) < 1e-14


def test_derivatives_of_monomial():
    p = ExpPoly.monomial(1.0)
    assert np.allclose(differentiate(p, "z").coeffs, [1.0])
    assert np.allclose(differentiate(p, "zbar").coeffs, [-1.0])


def test_mixed_partials_commute_and_match_finite_differences():
    p = ExpPoly.monomial(1j) + ExpPoly.monomial(1.0, 2.0)
    a = differentiate(differentiate(p, "z"), "zbar")
    b = differentiate(differentiate(p, "zbar"), "z")
    assert (a - b).is_zero(0.0)
    # the Laplacian is 4 d dbar; check with a five-point stencil
    h, z = 1e-3, 0.2 + 0.1j
    lap = (p.evaluate(z + h) + p.evaluate(z - h) + p.evaluate(z + 1j * h)
           + p.evaluate(z - 1j * h) - 4 * p.evaluate(z)) / h**2
    assert abs(lap - 4 * a.evaluate(z)) < 1e-5


def test_first_derivatives_finite_differences():
    p = ExpPoly.from_terms([(1.0, 1j), (0.5 - 1j, np.exp(1j)), (2.0, -0.3 + 0.8j)])
    h = 1e-5
    for z in (0.1 + 0.2j, -0.7 + 0.4j, 0.5 - 0.9j):
        dx = (p.evaluate(z + h) - p.evaluate(z - h)) / (2 * h)
        dy = (p.evaluate(z + 1j * h) - p.evaluate(z - 1j * h)) / (2 * h)
        assert abs(p.dz().evaluate(z) - 0.5 * (dx - 1j * dy)) < 1e-6
        assert abs(p.dzbar().evaluate(z) - 0.5 * (dx + 1j * dy)) < 1e-6


def test_evaluate_basics():
    assert evaluate(ExpPoly.zeros(), 3 + 1j) == 0
    assert evaluate(ExpPoly.constant(1.0), 5 + 2j) == pytest.approx(1.0)
    v0 = build_v0(clifford(2)).components
    assert abs(v0[0].evaluate(1 + 1j)) ** 2 == pytest.approx(1 / 3)


# -- inner products ----------------------------------------------------------------


def test_v0_unit_and_cyclic_orthogonality():
    sol = clifford(2)
    v0 = build_v0(sol).components
    one = hermitian_inner(v0, v0)
    assert one.is_constant() and one.constant_value() == pytest.approx(1.0)
    A = np.diag(sol.a)
    v1 = ExpPoly(v0.freqs, v0.coeffs @ A.T)
    assert hermitian_inner(v1, v0).is_zero(1e-14)


def test_bilinear_pair_v0_has_three_terms():
    sol = clifford(2)
    v0 = build_v0(sol).components
    q = bilinear_pair(v0, v0)
    assert q.nterms == 3
    assert np.allclose(sorted(q.freqs, key=np.angle), sorted(2 * sol.a, key=np.angle))
    assert np.allclose(q.coeffs, 1 / 3)


def test_bilinear_pair_basis_vectors():
    e1 = ExpPoly.constant(np.array([1.0, 0.0]))
    e2 = ExpPoly.constant(np.array([0.0, 1.0]))
    assert bilinear_pair(e1, e2).is_zero()


def test_length_mismatch_raises():
    with pytest.raises(ValueError):
        hermitian_inner(ExpPoly.constant(np.ones(2)), ExpPoly.constant(np.ones(3)))


def test_is_zero_tolerance():
    assert is_zero(ExpPoly.zeros(), 1e-12)
    assert is_zero(ExpPoly(np.array([0j]), np.array([1e-15 + 0j])), 1e-12)
    assert not is_zero(ExpPoly.constant(1e-6), 1e-12)


def test_json_roundtrip_and_order():
    p = ExpPoly.from_terms([(1.0, 1j), (2.0, -1.0), (3.0, 0.5)])
    data = p.to_json()
    assert [d["freq"] for d in data] == sorted(d["freq"] for d in data)
    assert (ExpPoly.from_json(data) - p).is_zero(0.0)


# -- properties ------------------------------------------------------------------


@given(terms)
def test_conjugate_involution(ts):
    p = poly(ts)
    q = conjugate(conjugate(p))
    assert np.array_equal(q.freqs, p.freqs) and np.array_equal(q.coeffs, p.coeffs)


@given(terms)
def test_mixed_partials_exact(ts):
    p = poly(ts)
    assert (p.dz().dzbar() - p.dzbar().dz()).is_zero(0.0)


@given(terms)
def test_conjugate_intertwines_derivatives(ts):
    p = poly(ts)
    assert (p.dz().conj() - p.conj().dzbar()).is_zero(1e-13)


@settings(max_examples=50)
@given(terms, terms, st.lists(points, min_size=10, max_size=10))
def test_evaluate_is_ring_homomorphism(t1, t2, zs):
    p, q = poly(t1), poly(t2)
    for z in zs:
        for val, ref in (((p + q).evaluate(z), direct(t1, z) + direct(t2, z)),
                         ((p * q).evaluate(z), direct(t1, z) * direct(t2, z))):
            assert abs(val - ref) <= 1e-10 * max(1.0, abs(ref)) + 1e-12


@given(terms, terms)
def test_product_frequencies_are_sums(t1, t2):
    p, q = poly(t1), poly(t2)
    sums = np.array([a + b for a in p.freqs for b in q.freqs])
    for f in (p * q).freqs:
        assert np.min(np.abs(sums - f)) <= 1e-9


@given(st.lists(terms, min_size=3, max_size=3), points)
def test_hermitian_norm_real_nonnegative(comps, z):
    u = ExpPoly.stack([poly(t) for t in comps])
    v = hermitian_inner(u, u).evaluate(z)
    assert abs(v.imag) <= 1e-10 * max(1.0, abs(v)) and v.real >= -1e-12
