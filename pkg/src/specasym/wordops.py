"""Sparse operator algebra Lambda^even (x) Cl(c) (x) Cl(c-hat) (x) End(C^r).

Elements are finite sums of terms ``form-monomial * c-word * chat-word``
with r x r matrices of exact Scalars as coefficients.  The commuting form
slot carries the even-degree differential-form bookkeeping of the heat
kernel pipelines; the two word slots carry the Clifford content.  Words
are bitmasks; c-generators square to -1, c-hat generators to +1, and the
two families anticommute.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

from .exact import Scalar
from .exterior import (
    DiffForm,
    FiberOp,
    apply_word,
    hodge_sign,
    indices_of,
    merge_sign,
    popcount,
    subset_order,
)

Mat = Tuple[Tuple[Scalar, ...], ...]


# ----------------------------------------------------------------------
# small exact matrices
# ----------------------------------------------------------------------

def mat_eye(r: int) -> Mat:
    return tuple(
        tuple(Scalar.of(1 if i == j else 0) for j in range(r)) for i in range(r)
    )


def mat_zero(r: int) -> Mat:
    z = Scalar()
    return tuple(tuple(z for _ in range(r)) for _ in range(r))


def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a: Mat, s) -> Mat:
    s = Scalar.of(s)
    return tuple(tuple(s * x for x in row) for row in a)


def mat_mul(a: Mat, b: Mat) -> Mat:
    r = len(a)
    return tuple(
        tuple(
            sum((a[i][k] * b[k][j] for k in range(r)), Scalar())
            for j in range(r)
        )
        for i in range(r)
    )


def mat_trace(a: Mat) -> Scalar:
    return sum((a[i][i] for i in range(len(a))), Scalar())


def mat_is_zero(a: Mat) -> bool:
    return all(x.is_zero() for row in a for x in row)


def mat_conj_t(a: Mat) -> Mat:
    r = len(a)
    return tuple(tuple(a[j][i].conjugate() for j in range(r)) for i in range(r))


def mat_from(entries, r: int) -> Mat:
    return tuple(
        tuple(Scalar.of(entries[i][j]) for j in range(r)) for i in range(r)
    )


# ----------------------------------------------------------------------
# word products
# ----------------------------------------------------------------------

def word_mul(m1: int, m2: int, square_sign: int) -> Tuple[int, int]:
    """Product of two ascending generator words with the given square rule.

    Returns (sign, symmetric-difference mask).
    """
    sign = 1
    acc = m1
    m = m2
    while m:
        b = m & -m
        above = acc & ~(b | (b - 1))
        if popcount(above) & 1:
            sign = -sign
        if acc & b:
            sign *= square_sign
            acc &= ~b
        else:
            acc |= b
        m &= m - 1
    return sign, acc


class WordOperator:
    """Sparse element of the form/word/bundle algebra."""

    __slots__ = ("n", "r", "terms")

    def __init__(self, n: int, r: int = 1, terms: Dict[Tuple[int, int, int], Mat] = None):
        self.n = n
        self.r = r
        self.terms = {}
        if terms:
            for k, m in terms.items():
                if not mat_is_zero(m):
                    self.terms[k] = m

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(n: int, r: int = 1) -> "WordOperator":
        return WordOperator(n, r)

    @staticmethod
    def identity(n: int, r: int = 1) -> "WordOperator":
        return WordOperator(n, r, {(0, 0, 0): mat_eye(r)})

    @staticmethod
    def from_form(w: DiffForm, r: int = 1, matrix: Mat = None) -> "WordOperator":
        """Embed an even form as a commuting coefficient (times a bundle matrix)."""
        if any(popcount(m) % 2 for m in w.terms):
            raise ValueError("form slot is restricted to even-degree forms")
        base = matrix if matrix is not None else mat_eye(r)
        return WordOperator(
            w.n, r, {(m, 0, 0): mat_scale(base, c) for m, c in w.terms.items()}
        )

    @staticmethod
    def from_word(n: int, cmask: int, hmask: int, coeff=1, r: int = 1,
                  matrix: Mat = None) -> "WordOperator":
        base = matrix if matrix is not None else mat_eye(r)
        return WordOperator(n, r, {(0, cmask, hmask): mat_scale(base, coeff)})

    @staticmethod
    def ext_gen(n: int, i: int, r: int = 1) -> "WordOperator":
        """e(omega^i) = (c + c-hat)/2 as a word element."""
        half = Fraction(1, 2)
        return WordOperator(n, r, {
            (0, 1 << (i - 1), 0): mat_scale(mat_eye(r), half),
            (0, 0, 1 << (i - 1)): mat_scale(mat_eye(r), half),
        })

    @staticmethod
    def int_gen(n: int, i: int, r: int = 1) -> "WordOperator":
        """e*(omega^i) = (c-hat - c)/2 as a word element."""
        half = Fraction(1, 2)
        return WordOperator(n, r, {
            (0, 1 << (i - 1), 0): mat_scale(mat_eye(r), -half),
            (0, 0, 1 << (i - 1)): mat_scale(mat_eye(r), half),
        })

    @staticmethod
    def from_fiber_op(op: FiberOp) -> "WordOperator":
        from .filtration import expand_clifford_basis

        exp = expand_clifford_basis(op)
        terms = {
            (0, cm, hm): mat_scale(mat_eye(1), c)
            for (cm, hm), c in exp.coefficients.items()
        }
        return WordOperator(op.n, 1, terms)

    # -- linear structure ---------------------------------------------------

    def _check(self, other: "WordOperator"):
        if self.n != other.n or self.r != other.r:
            raise ValueError("word operator shape mismatch")

    def __add__(self, other: "WordOperator") -> "WordOperator":
        self._check(other)
        out = dict(self.terms)
        for k, m in other.terms.items():
            s = mat_add(out[k], m) if k in out else m
            if mat_is_zero(s):
                out.pop(k, None)
            else:
                out[k] = s
        return WordOperator(self.n, self.r, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s) -> "WordOperator":
        s = Scalar.of(s)
        if s.is_zero():
            return WordOperator(self.n, self.r)
        return WordOperator(
            self.n, self.r, {k: mat_scale(m, s) for k, m in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, WordOperator):
            return self._mul_op(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def _mul_op(self, other: "WordOperator") -> "WordOperator":
        self._check(other)
        out: Dict[Tuple[int, int, int], Mat] = {}
        for (f1, c1, h1), m1 in self.terms.items():
            for (f2, c2, h2), m2 in other.terms.items():
                if f1 & f2:
                    continue
                sign = merge_sign(f1, f2)
                # move the h1 word through the c2 word
                if (popcount(h1) * popcount(c2)) & 1:
                    sign = -sign
                sc, cm = word_mul(c1, c2, -1)
                sh, hm = word_mul(h1, h2, +1)
                sign *= sc * sh
                prod = mat_mul(m1, m2)
                if sign < 0:
                    prod = mat_scale(prod, -1)
                key = (f1 | f2, cm, hm)
                acc = mat_add(out[key], prod) if key in out else prod
                if mat_is_zero(acc):
                    out.pop(key, None)
                else:
                    out[key] = acc
        return WordOperator(self.n, self.r, out)

    def exp_nilpotent(self) -> "WordOperator":
        """exp of an element whose every term carries positive form degree."""
        if any(f == 0 for (f, _, _) in self.terms):
            raise ValueError("exponent must have strictly positive form degree")
        out = WordOperator.identity(self.n, self.r)
        power = WordOperator.identity(self.n, self.r)
        k = 0
        while True:
            k += 1
            power = power * self
            if not power.terms:
                break
            out = out + power.scale(Fraction(1, _factorial(k)))
        return out

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, WordOperator):
            return NotImplemented
        return (self - other).is_zero()

    def c_degree_upper(self) -> int:
        if not self.terms:
            raise ValueError("zero operator has no Clifford degree")
        return max(popcount(c) for (_, c, _) in self.terms)

    def c_degree_lower(self) -> int:
        if not self.terms:
            raise ValueError("zero operator has no Clifford degree")
        return min(popcount(c) for (_, c, _) in self.terms)

    def form_trace(self) -> DiffForm:
        """Trace over Lambda* (x) C^r of the word slots, keeping the form slot.

        Words with any generator are traceless; the empty word contributes
        2^n.  Returns an even form with Scalar coefficients.
        """
        out: Dict[int, Scalar] = {}
        weight = Scalar.of(1 << self.n)
        for (f, c, h), m in self.terms.items():
            if c or h:
                continue
            val = weight * mat_trace(m)
            if not val.is_zero():
                acc = out.get(f, Scalar()) + val
                if acc.is_zero():
                    out.pop(f, None)
                else:
                    out[f] = acc
        return DiffForm(self.n, out)

    def to_fiber_op(self) -> FiberOp:
        """Materialise as a dense matrix (form slot must be empty)."""
        if any(f for (f, _, _) in self.terms):
            raise ValueError("cannot materialise an operator with form content")
        _, pos = subset_order(self.n)
        op = FiberOp.zeros(self.n, self.r)
        for (_, c, h), m in self.terms.items():
            for s in range(1 << self.n):
                sign, tgt = apply_word(c, h, s)
                po, pi_ = pos[tgt] * self.r, pos[s] * self.r
                for a in range(self.r):
                    for b in range(self.r):
                        v = m[a][b] if sign > 0 else -m[a][b]
                        op.mat[po + a, pi_ + b] = op.mat[po + a, pi_ + b] + v
        return op

    def __repr__(self):
        bits = []
        for (f, c, h) in sorted(self.terms):
            name = []
            if f:
                name.append("e" + "".join(map(str, indices_of(f))))
            if c:
                name.append("c" + "".join(map(str, indices_of(c))))
            if h:
                name.append("ch" + "".join(map(str, indices_of(h))))
            label = ".".join(name) or "1"
            if self.r == 1:
                bits.append(f"({self.terms[(f,c,h)][0][0]})*{label}")
            else:
                bits.append(f"[{self.r}x{self.r}]*{label}")
        return " + ".join(bits) if bits else "0"


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


# ----------------------------------------------------------------------
# exact weighted traces over Lambda* (x) C^r
# ----------------------------------------------------------------------

def star_weighted_trace(w: DiffForm, x: WordOperator) -> Scalar:
    """tr[ * e(w) x ] with x purely in the word slots (no form content)."""
    return _weighted_trace(w, x, use_cdvol=False)


def cdvol_weighted_trace(w: DiffForm, x: WordOperator) -> Scalar:
    """tr[ c(dvol) e(w) x ] with x purely in the word slots."""
    return _weighted_trace(w, x, use_cdvol=True)


def _weighted_trace(w: DiffForm, x: WordOperator, use_cdvol: bool) -> Scalar:
    if w.n != x.n:
        raise ValueError("dimension mismatch")
    n = x.n
    full = (1 << n) - 1
    total = Scalar()
    for (f, c, h), m in x.terms.items():
        if f:
            raise ValueError("weighted traces require a form-free operator")
        tr_e = mat_trace(m)
        if tr_e.is_zero():
            continue
        acc = Scalar()
        for s in range(1 << n):
            sign_w, t = apply_word(c, h, s)
            if t & s:
                continue
            p = full & ~s & ~t
            coeff = w.terms.get(p)
            if coeff is None:
                continue
            u = p | t
            sign = sign_w * merge_sign(p, t)
            if use_cdvol:
                s2, tgt = apply_word(full, 0, u)
                if tgt != s:
                    continue
                sign *= s2
            else:
                if (full & ~u) != s:
                    continue
                sign *= hodge_sign(u, n)
            acc = acc + Scalar.of(coeff) * sign
        total = total + acc * tr_e
    return total


def star_ext_trace_dense(w: DiffForm, m: FiberOp) -> object:
    """tr[ * e(w) m ] for a dense fiber operator."""
    op = FiberOp.star_op(m.n, m.r) @ FiberOp.ext_op(w, m.r)
    return FiberOp.trace_product(op, m)


def cdvol_ext_trace_dense(w: DiffForm, m: FiberOp) -> object:
    """tr[ c(dvol) e(w) m ] for a dense fiber operator."""
    op = FiberOp.word_op(m.n, (1 << m.n) - 1, "c", m.r) @ FiberOp.ext_op(w, m.r)
    return FiberOp.trace_product(op, m)
