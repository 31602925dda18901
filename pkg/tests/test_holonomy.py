import random
from fractions import Fraction

import numpy as np
import pytest

from specasym.exterior import DiffForm
from specasym.heat import CurvatureData
from specasym.holonomy import (
    decompose_two_form,
    instanton_check,
    projections,
    star_ext_on_two_forms,
    structure_operator,
    two_form_basis,
)
from specasym.residue import instanton_line_curvature


def test_g2_structure(g2):
    phi = g2.defining_form
    assert len(phi.terms) == 7
    assert all(c in (1, -1) for c in phi.terms.values())
    assert phi.norm_sq() == 7
    assert g2.eigenvalue_table == [(2, 7), (-1, 14)]


def test_spin7_structure(spin7):
    psi = spin7.defining_form
    assert psi.hodge() == psi
    assert spin7.eigenvalue_table == [(3, 7), (-1, 21)]


def test_star_ext_image_of_e12(g2):
    img = g2.defining_form.wedge(DiffForm.monomial(7, (1, 2))).hodge()
    expected = DiffForm.monomial(7, (4, 7), -1) + DiffForm.monomial(7, (5, 6), -1)
    assert img == expected


def test_minimal_polynomials(g2, spin7):
    for s, plus in ((g2, 2), (spin7, 3)):
        a = structure_operator(s)
        dim = a.shape[0]
        eye = np.full((dim, dim), Fraction(0), dtype=object)
        for i in range(dim):
            eye[i, i] = Fraction(1)
        prod = np.dot(a - plus * eye, a + eye)
        assert all(v == 0 for v in prod.flat)
        # (x - plus)(x + 1) translated: A^2 = (plus - 1) A + plus Id
        sq = np.dot(a, a)
        assert (sq == (plus - 1) * a + plus * eye).all()


def test_projection_properties(g2, spin7):
    for s in (g2, spin7):
        p7, pbig = projections(s)
        assert p7.trace() == 7
        assert pbig.trace() == (14 if s.kind == "g2" else 21)
        assert (np.dot(p7.matrix, p7.matrix) == p7.matrix).all()
        assert all(v == 0 for v in np.dot(p7.matrix, pbig.matrix).flat)
        dim = p7.matrix.shape[0]
        for i in range(dim):
            for j in range(dim):
                assert p7.matrix[i, j] + pbig.matrix[i, j] == (1 if i == j else 0)


def test_decompose_contraction_is_pure(g2):
    for v in range(1, 8):
        iv = g2.defining_form.interior(v)
        a7, rest = decompose_two_form(g2, iv)
        assert rest.is_zero()
        assert a7 == iv
        # eigenvector check: *(phi ^ x) = 2x
        assert g2.defining_form.wedge(iv).hodge() == iv.scale(2)


def test_decompose_zero_and_norms(g2):
    a7, rest = decompose_two_form(g2, DiffForm.zero(7))
    assert a7.is_zero() and rest.is_zero()
    rnd = random.Random(2)
    basis2 = two_form_basis(7)
    for _ in range(100):
        alpha = DiffForm(
            7,
            {
                rnd.choice(basis2): Fraction(rnd.randint(-5, 5), rnd.randint(1, 3))
                for _ in range(4)
            },
        )
        a7, rest = decompose_two_form(g2, alpha)
        assert a7.norm_sq() + rest.norm_sq() == alpha.norm_sq()


def test_decompose_rejects_wrong_degree(g2):
    with pytest.raises(ValueError):
        decompose_two_form(g2, DiffForm.monomial(7, (1,)))


def test_e12_norm_split(g2):
    a7, rest = decompose_two_form(g2, DiffForm.monomial(7, (1, 2)))
    assert a7.norm_sq() == Fraction(1, 3)
    assert rest.norm_sq() == Fraction(2, 3)


def test_instanton_check_flat(g2):
    rep = instanton_check(g2, CurvatureData(7, 1))
    assert rep.ok and rep.exact_zero


def test_instanton_check_seven_part(g2):
    # i_{e_1} phi lies entirely in the 7-part: not an instanton
    iv = g2.defining_form.interior(1)
    f_entries = {}
    from specasym.exact import Scalar

    for m, c in iv.terms.items():
        lo = (m & -m).bit_length()
        hi = (m & (m - 1)).bit_length()
        f_entries[(lo, hi)] = ((Scalar.i() * Scalar.of(c),),)
    rep = instanton_check(g2, CurvatureData(7, 1, {}, f_entries))
    assert not rep.ok and rep.max_component > 0.5


def test_instanton_check_big_part(g2):
    cd = instanton_line_curvature(g2, base=(1, 2), scale=3)
    rep = instanton_check(g2, cd)
    assert rep.ok and rep.exact_zero


def test_star_ext_matrix_symmetry(g2):
    mat = star_ext_on_two_forms(g2.defining_form, 7)
    assert (mat.T == mat).all()
