import random
from fractions import Fraction

import pytest

from specasym.exterior import (
    DiffForm,
    FiberOp,
    MultiIndex,
    cliff_hat_op,
    cliff_op,
    ext_op,
    hodge_star,
    parse_form,
    wedge,
    word_op,
)


def e(n, *idx):
    return DiffForm.monomial(n, idx)


def test_wedge_basis_products():
    assert wedge(e(7, 1), e(7, 2)) == e(7, 1, 2)
    assert wedge(e(7, 1, 2), e(7, 1, 2)).is_zero()
    assert wedge(e(7, 2), e(7, 1)) == e(7, 1, 2).scale(-1)


def test_wedge_graded_anticommutative():
    rnd = random.Random(0)
    for _ in range(60):
        ka, kb = rnd.randint(0, 3), rnd.randint(0, 3)
        a = DiffForm.zero(7)
        b = DiffForm.zero(7)
        for _ in range(3):
            a = a + DiffForm.monomial(
                7, sorted(rnd.sample(range(1, 8), ka)), Fraction(rnd.randint(-4, 4))
            )
            b = b + DiffForm.monomial(
                7, sorted(rnd.sample(range(1, 8), kb)), Fraction(rnd.randint(-4, 4))
            )
        assert a.wedge(b) == b.wedge(a).scale((-1) ** (ka * kb))


def test_phi_wedge_star_phi(g2):
    phi = g2.defining_form
    # brute-force norm oracle: sum of squared coefficients over basis triples
    norm_sq = sum(c * c for c in phi.terms.values())
    assert norm_sq == 7
    assert phi.wedge(hodge_star(phi)) == DiffForm.dvol(7).scale(norm_sq)


def test_hodge_star_basics():
    assert hodge_star(DiffForm.one(7)) == DiffForm.dvol(7)
    assert hodge_star(DiffForm.dvol(7)) == DiffForm.one(7)
    assert hodge_star(e(7, 1, 2)) == e(7, 3, 4, 5, 6, 7)


def test_hodge_involution_all_degrees():
    for n in (7, 8):
        for mask in range(1 << n):
            f = DiffForm(n, {mask: Fraction(1)})
            k = len(f.degrees()) and f.degree()
            assert f.hodge().hodge() == f.scale((-1) ** (k * (n - k)))


def test_ext_op_examples():
    op = ext_op(e(7, 1))
    assert op.apply_to_form(DiffForm.one(7)) == e(7, 1)
    assert op.apply_to_form(e(7, 1)).is_zero()
    assert (op @ op).is_zero()


def test_cliff_squares_and_cross():
    n = 7
    ident = FiberOp.identity(n)
    c1 = cliff_op(e(n, 1))
    h1 = cliff_hat_op(e(n, 1))
    assert c1 @ c1 == ident.scale(Fraction(-1))
    assert h1 @ h1 == ident
    for j in (1, 2, 5):
        hj = cliff_hat_op(e(n, j))
        assert (c1 @ hj + hj @ c1).is_zero()


def test_cliff_requires_one_form():
    with pytest.raises(ValueError):
        cliff_op(e(7, 1, 2))
    with pytest.raises(ValueError):
        cliff_hat_op(DiffForm.one(7))


def test_word_op_examples():
    n = 7
    assert word_op(n, (), "c") == FiberOp.identity(n)
    assert word_op(n, (1, 2), "c") == cliff_op(e(n, 1)) @ cliff_op(e(n, 2))
    full = word_op(n, tuple(range(1, 8)), "c")
    prod = FiberOp.identity(n)
    for i in range(1, 8):
        prod = prod @ cliff_op(e(n, i))
    assert full == prod
    # c(dvol)^2 = Id in dimension 7
    assert full @ full == FiberOp.identity(n)


def test_adjoint_is_interior():
    for i in range(1, 8):
        op = ext_op(e(7, i))
        adj = op.adjoint()
        # e*(e^i) e^{i...} drops the index
        assert adj.apply_to_form(e(7, i)) == DiffForm.one(7)
        assert adj.apply_to_form(e(7, (i % 7) + 1)).is_zero()


def test_pairing_against_star():
    rnd = random.Random(1)
    for _ in range(40):
        k = rnd.randint(0, 4)
        a = DiffForm.monomial(7, sorted(rnd.sample(range(1, 8), k)), Fraction(rnd.randint(1, 5)))
        b = DiffForm.monomial(7, sorted(rnd.sample(range(1, 8), k)), Fraction(rnd.randint(-5, -1)))
        assert a.wedge(b.hodge()).top_coefficient() == a.inner(b)


def test_multi_index_invariants():
    mi = MultiIndex((1, 3, 6), 7)
    assert mi.complement().indices == (2, 4, 5, 7)
    assert mi.complement_sign() in (-1, 1)
    with pytest.raises(ValueError):
        MultiIndex((3, 1), 7)
    with pytest.raises(ValueError):
        MultiIndex((0, 2), 7)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        wedge(e(7, 1), e(8, 2))


def test_identity_trace_and_composition():
    for r in (1, 2):
        ident = FiberOp.identity(7, r)
        assert ident.trace() == (1 << 7) * r
        assert ident @ ident == ident


def test_degree_reporting():
    mixed = e(7, 1) + e(7, 1, 2)
    assert mixed.degrees() == [1, 2]
    with pytest.raises(ValueError):
        mixed.degree()
    assert DiffForm.zero(7).degrees() == []


def test_parse_form_roundtrip():
    f = parse_form(7, "3 e123 - 1/2 e145 + e67")
    assert f == (
        e(7, 1, 2, 3).scale(3) - e(7, 1, 4, 5).scale(Fraction(1, 2)) + e(7, 6, 7)
    )
    assert parse_form(7, "0").is_zero()
    with pytest.raises(ValueError):
        parse_form(7, "e19")
    with pytest.raises(ValueError):
        parse_form(7, "3x + 4")


def test_interior_product():
    phi_like = e(7, 1, 2, 3)
    assert phi_like.interior(1) == e(7, 2, 3)
    assert phi_like.interior(2) == e(7, 1, 3).scale(-1)
    assert phi_like.interior(4).is_zero()
