import numpy as np
import pytest

from hyperquadric.catalog import catalog
from hyperquadric.curves import (
    Curve, DegenerateMetric, FrameFields, QuadricViolation, apply_frame, build_v0, frame_fields,
    gauge_residual, harmonic_residual, harmonic_sequence, hopf_differentials, kahler_angle,
    metric_density, nondegeneracy_rank, projector, proposition1_residual, sample_points,
    sff_norm, splitting_check, verify_curve, a_z_expansion,
)
from hyperquadric.exppoly import ExpPoly, bilinear_pair, hermitian_inner
from hyperquadric.moduli import clifford
from hyperquadric.quadric import takagi


def degenerate_fixture():
    """``phi = f (+) c``: a unit curve plus a constant orthogonal line."""
    X = build_v0(clifford(2), pad_to=4)
    c = ExpPoly.constant(np.array([0, 0, 0, 1.0]))
    return projector(X, c)


# -- construction ---------------------------------------------------------------


def test_build_v0_unit_and_padding():
    v = build_v0(clifford(2), pad_to=3)
    assert v.dim == 3 and v.is_unit()
    w = build_v0(clifford(3), pad_to=6)
    assert w.components[4].nterms == 0 and w.components[5].nterms == 0
    assert np.allclose(w.evaluate(0), [0.5, 0.5, 0.5, 0.5, 0, 0])


def test_build_v0_too_small():
    with pytest.raises(ValueError):
        build_v0(clifford(3), pad_to=3)


def test_apply_frame_shape_check():
    with pytest.raises(ValueError):
        apply_frame(np.eye(3), build_v0(clifford(3)))


# -- harmonic sequence ------------------------------------------------------------


def test_harmonic_sequence_cycles_for_clifford():
    v = build_v0(clifford(2))
    assert (harmonic_sequence(v, 3).components - v.components).is_zero(1e-14)
    assert (harmonic_sequence(v, 0).components - v.components).is_zero(0.0)


def test_harmonic_sequence_unitary_set():
    v = build_v0(clifford(3))
    seq = [harmonic_sequence(v, i).components for i in range(4)]
    for i in range(4):
        for j in range(4):
            g = hermitian_inner(seq[i], seq[j])
            assert g.is_constant(1e-14)
            assert abs(g.constant_value() - (i == j)) < 1e-14


def test_harmonic_sequence_of_framed_curve():
    e = catalog("q2_clifford")
    f1 = harmonic_sequence(e.curve, 1).components
    direct = ExpPoly(e.curve.base.components.freqs,
                     e.curve.base.components.coeffs @ np.diag(clifford(3).a) @ e.U.T)
    assert (f1 - direct).is_zero(1e-14)


def test_harmonic_sequence_needs_frequencies():
    c = Curve(ExpPoly.constant(np.array([1.0, 0.0])))
    with pytest.raises(ValueError):
        harmonic_sequence(c, 1)


# -- frame fields -----------------------------------------------------------------


def test_frame_fields_clifford_v0():
    sol = clifford(2)
    v = build_v0(sol)
    ff = frame_fields(v)
    assert ff.dX_X.is_zero(1e-14)
    xi_expected = ExpPoly(v.components.freqs, v.components.coeffs @ np.diag(sol.a))
    assert (ff.xi - xi_expected).is_zero(1e-14)
    for vec in (ff.xi, ff.eta):
        n2 = hermitian_inner(vec, vec)
        assert n2.is_constant(1e-14) and abs(n2.constant_value() - 1) < 1e-14
    assert abs(ff.lambda2.constant_value() - 1) < 1e-14
    assert hermitian_inner(ff.xi, v.components).is_zero(1e-14)


def test_frame_fields_degenerate_metric():
    with pytest.raises(DegenerateMetric):
        frame_fields(Curve(ExpPoly.monomial(1.0, np.array([1.0, 0.0]))))


def test_kahler_angle_totally_real():
    ff = frame_fields(catalog("case1", n=2).curve)
    a, theta = kahler_angle(ff)
    assert (a - 1.0).is_zero(1e-10)
    assert np.allclose(theta, np.pi / 2, atol=1e-9)


def test_kahler_angle_holomorphic_stub():
    x = build_v0(clifford(2)).components
    xi = x.dz()
    zero = ExpPoly.zeros(xi.shape)
    lam = hermitian_inner(xi, xi) * 0.5
    stub = FrameFields(xi, zero, lam, None, None, ExpPoly.zeros((2, 2)),
                       ExpPoly.zeros(), ExpPoly.zeros())
    _, theta = kahler_angle(stub)
    assert np.allclose(theta, 0.0, atol=1e-7)
    hd = hopf_differentials(stub)
    assert hd.psi_density.is_zero() and hd.phi_density.is_zero()


# -- projector and harmonicity -------------------------------------------------------


def test_projector_trace_and_metric():
    X = catalog("q2_clifford").curve
    pd = projector(X)
    tr = pd.phi.trace()
    assert tr.is_constant() and abs(tr.constant_value() - 2) < 1e-12
    assert (metric_density(pd) - 4.0).is_zero(1e-10)
    for z in sample_points(3):
        phi = pd.phi.evaluate(z)
        assert np.allclose(phi @ phi, phi, atol=1e-10)
        assert np.allclose(phi, phi.conj().T, atol=1e-10)
    assert (pd.s @ pd.s - ExpPoly.identity(4)).is_zero(1e-10)


def test_a_z_two_constructions_agree():
    X = catalog("q2_clifford").curve
    pd = projector(X)
    az, azb = a_z_expansion(X, frame_fields(X))
    assert (pd.a_z - az).is_zero(1e-10) and (pd.a_zbar - azb).is_zero(1e-10)


def test_projector_rejects_non_quadric():
    with pytest.raises(QuadricViolation):
        projector(build_v0(clifford(3)))


def test_harmonic_residual_q4_case1():
    assert harmonic_residual(projector(catalog("q4_case1").curve)).is_zero(1e-10)


def test_constant_projector_is_harmonic():
    X = Curve(ExpPoly.constant(np.array([1.0, 1j, 0.0]) / np.sqrt(2)))
    assert harmonic_residual(projector(X)).is_zero(0.0)


def test_non_unitary_frame_breaks_harmonicity(rng):
    e = catalog("q2_clifford")
    U = e.U + 0.05 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    X = apply_frame(U, e.curve.base)
    assert not harmonic_residual(projector(X, check=False)).is_zero(1e-6)


def test_proposition1_on_clifford():
    X = catalog("q2_clifford").curve
    p1 = proposition1_residual(frame_fields(X), X)
    assert p1.max_coeff() <= 1e-10
    assert p1.xi_eta_bar.is_zero(1e-10)


def test_proposition1_negative_control():
    sol = clifford(3)
    X = apply_frame(takagi(np.eye(4)), build_v0(sol))
    assert proposition1_residual(frame_fields(X), X).max_coeff() > 1e-3


def test_gauge_residual_vanishes(entry):
    assert gauge_residual(frame_fields(entry.curve)).is_zero(1e-10)


# -- Hopf differentials -----------------------------------------------------------


def test_psi_constant_for_clifford_split():
    hd = hopf_differentials(frame_fields(catalog("case1", n=2).curve))
    assert hd.psi_density.is_constant(1e-10)


def test_psi_density_is_cubic():
    X = catalog("q4_family").curve
    c = np.exp(0.37j)
    psi = hopf_differentials(frame_fields(X)).psi_density
    psi_c = hopf_differentials(frame_fields(X.reparametrize(c))).psi_density
    for z in sample_points(4):
        assert abs(psi_c.evaluate(z) - c**3 * psi.evaluate(c * z)) < 1e-10


# -- second fundamental form and rank ---------------------------------------------------


def test_sff_two_formulas(entry):
    X = entry.curve
    ff = frame_fields(X)
    sff = sff_norm(projector(X), ff, X)
    assert sff.max_discrepancy() <= 1e-9
    assert np.all(sff.values >= -1e-10)


@pytest.mark.parametrize("name", ["q2_clifford", "q4_case1"])
def test_nondegenerate(name):
    assert nondegeneracy_rank(projector(catalog(name).curve)) == 2


def test_degenerate_fixture_rank_one():
    assert nondegeneracy_rank(degenerate_fixture()) == 1


# -- splitting -----------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 5])
def test_splitting_case1(n):
    rep = splitting_check(catalog("case1", n=n).curve, k_max=n)
    assert rep["pass"]


@pytest.mark.parametrize("n", [3, 5])
def test_splitting_case2_despite_nonzero_pairings(n):
    X = catalog("case2", n=n).curve
    assert splitting_check(X, k_max=n)["pass"]
    pairings = [bilinear_pair(X.components, harmonic_sequence(X, k).components)
                for k in range(1, n + 1)]
    assert any(not p.is_zero(1e-6) for p in pairings)


def test_splitting_k0_on_quadric_curve():
    rep = splitting_check(catalog("q2_clifford").curve, k_max=0)
    assert rep["rows"][0]["f_k.conj_f_-k"] <= 1e-12


# -- finite-difference oracle ------------------------------------------------------------


def test_derivatives_match_finite_differences(entry):
    comps = entry.curve.components
    d, db = comps.dz(), comps.dzbar()
    h = 1e-5
    for z in sample_points(5, seed=7):
        dx = (comps.evaluate(z + h) - comps.evaluate(z - h)) / (2 * h)
        dy = (comps.evaluate(z + 1j * h) - comps.evaluate(z - 1j * h)) / (2 * h)
        assert np.max(np.abs(d.evaluate(z) - 0.5 * (dx - 1j * dy))) <= 1e-6
        assert np.max(np.abs(db.evaluate(z) - 0.5 * (dx + 1j * dy))) <= 1e-6


def test_verify_report_shape():
    rep = verify_curve(catalog("q2_clifford").curve, k_max=8)
    assert rep["pass"] and rep["nondegeneracy_rank"] == 2 and rep["splitting"]["pass"]
    assert set(rep["checks"]) >= {"unit_norm", "quadric", "harmonic", "prop1", "xi_eta_bar",
                                  "lambda2_minus_1", "kahler_a_minus_1", "gauge"}
