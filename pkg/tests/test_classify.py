import itertools
import json
from pathlib import Path

import numpy as np
import pytest

from hyperquadric.catalog import catalog
from hyperquadric.classify import (
    DuplicateValues, bilinear_gram, family_t_rotation, case2_N_dichotomy, clifford_theorem, congruence_links,
    invariant_table, q2_classification, q3_impossibility, q4_families, vandermonde_obstruction,
)
from hyperquadric.curves import harmonic_sequence
from hyperquadric.exppoly import ExpPoly, bilinear_pair
from hyperquadric.report import dumps

BRANCHES = json.loads((Path(__file__).parent / "fixtures" / "branches.json").read_text())


@pytest.fixture(scope="module")
def q2():
    return q2_classification()


@pytest.fixture(scope="module")
def q3():
    return q3_impossibility(search=False)


@pytest.fixture(scope="module")
def q4():
    return q4_families()


def verdicts(rep):
    return {b.id: b.verdict for b in rep.branches}


# -- branch enumeration --------------------------------------------------------------


def test_q2_branches(q2):
    assert verdicts(q2) == BRANCHES["q2"]
    assert q2.trace == list(BRANCHES["q2"])[: len(q2.trace)]


def test_q3_branches(q3):
    assert verdicts(q3) == BRANCHES["q3"]


def test_q4_branches(q4):
    assert verdicts(q4) == BRANCHES["q4"]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
def test_clifford_branches(n):
    rep = clifford_theorem(n)
    key = "clifford_odd" if n % 2 else "clifford_even"
    assert verdicts(rep) == BRANCHES[key]
    assert len(set(rep.trace)) == len(rep.trace)
    assert rep.passed


# -- Q_2 ----------------------------------------------------------------------------


def test_q2_single_witness(q2):
    assert q2.feasible_branches == ["case_II"]
    wit = q2.branch("case_II").witness
    assert wit["verify_pass"] and wit["nondegeneracy_rank"] == 2
    assert q2.residuals["case_II.so4_match"] <= 1e-10
    assert wit["so4_link"]["det"] > 0
    assert q2.passed


def test_q2_improper_link_is_recorded(q2):
    wit = q2.branch("case_II").witness
    assert wit["link_det"] == pytest.approx(-1.0)
    assert not wit["link_special"]
    assert wit["normalized_match"] <= 1e-10


def test_q2_case3_zero_column(q2):
    b = q2.branch("case_III")
    assert b.obstruction == "zero_column"


def test_q2_rigidity(q2):
    inst = q2.branch("case_II").instances[0]
    assert inst["rigidity_max_deviation"] <= 1e-8


# -- Q_3 ----------------------------------------------------------------------------


def test_q3_case2_block(q3):
    inst = q3.branch("case_II").instances[0]
    assert inst["pattern"]["obstruction"] == "not_linearly_full"
    template = inst["pattern"]["template"]
    assert template[4][4] == "w44"
    assert all(template[4][k] == "0" for k in range(4))


def test_q3_case3_all_zero(q3):
    b = q3.branch("case_III")
    assert b.verdict == "infeasible"
    live = [i for i in b.instances if i.get("verdict") != "unrealizable"]
    assert live and all(i["verdict"] == "infeasible" for i in live)


def test_q3_small_search_is_reproducible():
    a = q3_impossibility(search=True, starts=3, max_iter=200, seed=1)
    b = q3_impossibility(search=True, starts=3, max_iter=200, seed=1)
    assert dumps(a.to_json()) == dumps(b.to_json())
    assert a.extra["search"]["total_hits"] == 0


# -- Q_4 ----------------------------------------------------------------------------


def test_q4_witnesses(q4):
    assert q4.passed
    for bid in ("case_I", "case_II", "case_III"):
        assert q4.branch(bid).witness["verify_pass"]


def test_q4_family_invariants(q4):
    wit = q4.branch("case_III").witness
    assert len(wit["t_samples"]) == 3 and len(wit["theta1_samples"]) == 3
    assert wit["t_tables_identical"] and wit["t_congruent"]
    assert wit["theta1_tables_distinct"]
    assert sum(c["interleaving"] for c in wit["combinations"]) == 5


def test_q4_case1_matches_case1():
    a, b = catalog("case1", n=2), catalog("q4_case1")
    assert (a.curve.components - b.curve.components).is_zero(1e-12)


@pytest.mark.parametrize("t2, det", [
    (np.exp(1j * np.pi / 5) * np.exp(1j * np.pi / 7), 1.0), (1j, 1.0), (-1j, -1.0),
    (np.exp(-2.0j), -1.0),
])
def test_family_t_parameter_is_a_congruence(t2, det):
    t = np.exp(1j * np.pi / 5)
    a = catalog("q4_family", t=t).curve
    b = catalog("q4_family", t=t2).curve
    O = family_t_rotation(t, t2)
    assert np.allclose(O.T @ O, np.eye(6)) and np.linalg.det(O) == pytest.approx(det)
    moved = ExpPoly(a.components.freqs, a.components.coeffs @ O.T)
    assert (moved - b.components).is_zero(1e-10)
    links = congruence_links(a, b)
    assert links and links[0]["det"] == pytest.approx(det)
    ta, tb = invariant_table(a, 4), invariant_table(b, 4)
    assert np.allclose(ta["pairings"], tb["pairings"], atol=1e-9)
    assert ta["psi"] == pytest.approx(tb["psi"], abs=1e-9)


# -- Clifford theorem ------------------------------------------------------------------


def test_clifford_n3_paired_is_q2_solution():
    e = catalog("case2", n=3, weights=[1, -1])
    gram = bilinear_gram(e.curve, 3)
    assert np.max(np.abs(gram.B)) > 0.5
    direct, _ = gram.determinants()
    assert abs(direct) < 1e-12
    assert case2_N_dichotomy(e.curve) == 4
    assert congruence_links(e.curve, catalog("q2_clifford").curve)


def test_clifford_n2_only_split():
    rep = clifford_theorem(2)
    assert rep.feasible_branches == ["case_I"]
    assert rep.branch("case_I").witness["N"] == 6


def test_clifford_n5_split_pairings_vanish():
    X = catalog("case1", n=5).curve
    for j in range(2 * 5 + 3):
        assert bilinear_pair(X.components, harmonic_sequence(X, j).components).is_zero(1e-10)
    assert case2_N_dichotomy(X) == 12


def test_clifford_n5_cube_root_weights():
    w = np.exp(2j * np.pi / 3)
    e = catalog("case2", n=5, weights=[1, w, w * w])
    assert case2_N_dichotomy(e.curve) in (6, 12)


@pytest.mark.parametrize("n, weights", [
    (3, [1, -1]), (3, [1j, -1j]), (5, None),
    (5, list(np.exp(0.4j) * np.exp(2j * np.pi * np.array([0, 2, 1]) / 3))),
    (7, None), (7, [1, 1j, -1, -1j]),
])
def test_gram_facts(n, weights):
    params = {"n": n} if weights is None else {"n": n, "weights": weights}
    gram = bilinear_gram(catalog("case2", **params).curve, n)
    facts = gram.facts()
    assert facts["b"] <= 1e-10 and facts["c"] <= 1e-10
    assert facts["a"] <= 1e-10 and facts["d"] <= 1e-10
    assert gram.nonconstant <= 1e-10
    assert gram.circulant_error() <= 1e-10
    assert np.allclose(gram.first_row_formula(), gram.G[0], atol=1e-10)
    direct, factored = gram.determinants()
    assert abs(direct - factored) <= 1e-8 * max(1.0, abs(direct))


def test_determinant_factorization_nondegenerate():
    gram = bilinear_gram(catalog("case1", n=5).curve, 5)
    direct, factored = gram.determinants()
    assert direct == pytest.approx(1.0) and abs(direct - factored) <= 1e-8


# -- Vandermonde ------------------------------------------------------------------


def test_vandermonde_clifford_n2():
    a1, a2 = np.exp(2j * np.pi / 3), np.exp(4j * np.pi / 3)
    prod, expan = vandermonde_obstruction([2, a1 + 1, a2 + 1])
    closed = 2 * (a1**2 - 1) * (a2**2 - 1) * (a2 - a1)
    assert abs(prod - closed) < 1e-12 and abs(prod - expan) < 1e-12
    assert abs(prod) > 1


def test_vandermonde_two_by_two():
    for kind in ("powers", "odd"):
        prod, expan = vandermonde_obstruction([1, -1], kind=kind)
        assert abs(prod - expan) < 1e-14
    assert vandermonde_obstruction([1, -1], kind="odd")[0] == 0


@pytest.mark.parametrize("size", range(1, 7))
def test_vandermonde_random(size, rng):
    vals = np.exp(2j * np.pi * rng.uniform(size=size))
    for kind in ("powers", "odd"):
        prod, expan = vandermonde_obstruction(vals, kind=kind)
        assert abs(prod - expan) <= 1e-9


def test_vandermonde_duplicates():
    with pytest.raises(DuplicateValues):
        vandermonde_obstruction([1, 2, 1])


def test_reports_serialize():
    rep = clifford_theorem(3)
    data = json.loads(dumps(rep.to_json()))
    assert data["schema_version"] == "1.0" and data["trace"] == rep.trace


def test_perm_sign_matches_determinant(rng):
    from hyperquadric.classify import _perm_sign
    for perm in itertools.permutations(range(4)):
        P = np.eye(4)[list(perm)]
        assert _perm_sign(perm) == round(np.linalg.det(P))
