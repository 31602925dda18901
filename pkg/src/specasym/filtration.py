"""Clifford word-basis expansion, trace identities, and degree calculus.

Every c(omega^I) c-hat(omega^J) word acts on the subset basis as a signed
permutation, so the whole 4^n word family is tabulated as permutation and
sign arrays.  Traces, Hilbert-Schmidt coefficient extraction and the
exhaustive trace-identity sweeps all run on these tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .exterior import FiberOp, apply_cliff, popcount, subset_order
from .wordops import WordOperator, mat_eye, mat_scale


# ----------------------------------------------------------------------
# signed-permutation tables for all words
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _generator_tables(n: int, hat: bool):
    dim = 1 << n
    perms = np.empty((n, dim), dtype=np.int32)
    signs = np.empty((n, dim), dtype=np.int8)
    for i in range(1, n + 1):
        for s in range(dim):
            sg, t = apply_cliff(i, s, hat)
            perms[i - 1, s] = t
            signs[i - 1, s] = sg
    return perms, signs


@lru_cache(maxsize=None)
def word_tables(n: int, hat: bool):
    """perm[wmask, s] and sign[wmask, s] for every word mask."""
    dim = 1 << n
    gp, gs = _generator_tables(n, hat)
    perms = np.empty((dim, dim), dtype=np.int32)
    signs = np.empty((dim, dim), dtype=np.int8)
    perms[0] = np.arange(dim, dtype=np.int32)
    signs[0] = 1
    for w in range(1, dim):
        low = w & -w
        rest = w & ~low
        i = low.bit_length() - 1
        # ascending words put the lowest index leftmost, so gen(i) is the
        # outermost factor wrapped around word(rest)
        inner_p, inner_s = perms[rest], signs[rest]
        perms[w] = gp[i][inner_p]
        signs[w] = gs[i][inner_p] * inner_s
    return perms, signs


def word_trace(n: int, cmask_or_indices, hmask_or_indices) -> int:
    """Trace of c(omega^I) c-hat(omega^J) over Lambda*(R^n)."""
    cm = _as_mask(cmask_or_indices)
    hm = _as_mask(hmask_or_indices)
    cp, cs = word_tables(n, False)
    hp, hs = word_tables(n, True)
    s = np.arange(1 << n)
    mid = hp[hm]
    tgt = cp[cm][mid]
    sg = cs[cm][mid].astype(np.int64) * hs[hm]
    return int(sg[tgt == s].sum())


def _as_mask(x) -> int:
    if isinstance(x, int):
        return x
    m = 0
    for i in x:
        m |= 1 << (i - 1)
    return m


def trace_identity_sweep(n: int, pairs: Optional[Iterable[Tuple[int, int]]] = None):
    """Check tr c(I) c-hat(J) = 0 except (0,0) -> 2^n over the given pairs.

    ``pairs`` defaults to all 4^n word pairs.  Returns (failures, checked).
    """
    dim = 1 << n
    cp, cs = word_tables(n, False)
    hp, hs = word_tables(n, True)
    s = np.arange(dim)
    failures = []
    checked = 0
    if pairs is None:
        pairs = ((i, j) for i in range(dim) for j in range(dim))
    for cm, hm in pairs:
        mid = hp[hm]
        tgt = cp[cm][mid]
        tr = int((cs[cm][mid].astype(np.int64) * hs[hm])[tgt == s].sum())
        expected = dim if (cm == 0 and hm == 0) else 0
        if tr != expected:
            failures.append((cm, hm, tr))
        checked += 1
    return failures, checked


# ----------------------------------------------------------------------
# word-basis expansion of fiber operators
# ----------------------------------------------------------------------

@dataclass
class CliffordWordExpansion:
    """Coefficients phi_{IJ} of M = sum phi_{IJ} c(omega^I) c-hat(omega^J)."""

    n: int
    coefficients: Dict[Tuple[int, int], object] = field(default_factory=dict)

    def reconstruct(self) -> FiberOp:
        _, pos = subset_order(self.n)
        cp, cs = word_tables(self.n, False)
        hp, hs = word_tables(self.n, True)
        op = FiberOp.zeros(self.n, 1)
        for (cm, hm), coeff in self.coefficients.items():
            mid = hp[hm]
            tgt = cp[cm][mid]
            sg = cs[cm][mid] * hs[hm]
            for s in range(1 << self.n):
                v = coeff if sg[s] > 0 else -coeff
                r, c = pos[int(tgt[s])], pos[s]
                op.mat[r, c] = op.mat[r, c] + v
        return op

    def upper_degree(self) -> int:
        return max(popcount(cm) for (cm, _) in self.coefficients)

    def lower_degree(self) -> int:
        return min(popcount(cm) for (cm, _) in self.coefficients)


def expand_clifford_basis(m: FiberOp) -> CliffordWordExpansion:
    """Expand a rank-1 fiber operator over the 4^n Clifford words.

    Coefficients come from the Hilbert-Schmidt pairing with the explicit
    word inverses: phi_{IJ} = tr(W_{IJ}^{-1} M) / 2^n, and the round trip
    through ``reconstruct`` is exact.
    """
    if m.r != 1:
        raise ValueError("word expansion requires bundle rank 1")
    n = m.n
    dim = 1 << n
    order, _ = subset_order(n)
    cs = word_tables(n, False)[1]
    hp, hs = word_tables(n, True)
    # Every word sends e^S to +- e^{S ^ cm ^ hm}, so only entry pairs with
    # row = col ^ cm ^ hm contribute; iterate the nonzero entries of m.
    coeffs: Dict[Tuple[int, int], object] = {}
    inv = Fraction(1, dim)
    for rpos in range(dim):
        row_mask = order[rpos]
        for cpos in range(dim):
            v = m.mat[rpos, cpos]
            if v == 0:
                continue
            col_mask = order[cpos]
            diff = row_mask ^ col_mask
            for hm in range(dim):
                cm = diff ^ hm
                sg = int(cs[cm][hp[hm][col_mask]]) * int(hs[hm][col_mask])
                acc = coeffs.get((cm, hm), 0) + (v if sg > 0 else -v)
                if acc == 0:
                    coeffs.pop((cm, hm), None)
                else:
                    coeffs[(cm, hm)] = acc
    return CliffordWordExpansion(n, {k: v * inv for k, v in coeffs.items()})


def clifford_degrees(m: FiberOp) -> Tuple[int, int]:
    """(lower, upper) Clifford degree of a nonzero rank-1 operator."""
    exp = expand_clifford_basis(m)
    if not exp.coefficients:
        raise ValueError("zero operator has no Clifford degree")
    return exp.lower_degree(), exp.upper_degree()


def gram_orthogonality_check(n: int, sample: Optional[int] = None, seed: int = 0):
    """Verify tr(W_{IJ}^{-1} W_{KL}) = 2^n delta_{IK} delta_{JL}.

    With ``sample`` set, checks that many random pairs of pairs; otherwise
    checks every diagonal pair plus a deterministic off-diagonal sweep.
    Nondegeneracy of this Gram matrix makes the expansion a bijection.
    """
    dim = 1 << n
    cp, cs = word_tables(n, False)
    hp, hs = word_tables(n, True)
    s_range = np.arange(dim)

    def pairing(cm1, hm1, cm2, hm2) -> int:
        # trace of W1^{-1} W2: apply W2 then the inverse of W1.
        mid = hp[hm2]
        t2 = cp[cm2][mid]
        g2 = cs[cm2][mid].astype(np.int64) * hs[hm2]
        mid1 = hp[hm1]
        t1 = cp[cm1][mid1]
        g1 = cs[cm1][mid1].astype(np.int64) * hs[hm1]
        # W1 chi_s = g1[s] chi_{t1[s]}  =>  W1^{-1} chi_{t1[s]} = g1[s] chi_s
        inv_t = np.empty(dim, dtype=np.int64)
        inv_g = np.empty(dim, dtype=np.int64)
        inv_t[t1] = s_range
        inv_g[t1] = g1
        tgt = inv_t[t2]
        sg = inv_g[t2] * g2
        return int(sg[tgt == s_range].sum())

    rng = np.random.default_rng(seed)
    failures = []
    if sample is None:
        it = [(w, w) for w in range(min(dim, 64))]
        it += [((a * 37) % dim, (a * 101 + 13) % dim) for a in range(64)]
        quads = [(c1, h1, c2, h2) for (c1, h1) in it for (c2, h2) in [it[0], it[-1]]]
    else:
        quads = [tuple(int(x) for x in rng.integers(0, dim, 4)) for _ in range(sample)]
    for c1, h1, c2, h2 in quads:
        got = pairing(c1, h1, c2, h2)
        want = dim if (c1, h1) == (c2, h2) else 0
        if got != want:
            failures.append((c1, h1, c2, h2, got))
    return failures, len(quads)


# ----------------------------------------------------------------------
# polynomial-coefficient differential operators and total degree
# ----------------------------------------------------------------------

class TruncationError(Exception):
    pass


@dataclass
class PolyDiffOp:
    """sum_{J,I} x^I C_{JI} d^J with word-operator coefficients.

    ``terms[(J, I)]`` maps derivative and monomial multi-degrees (length-n
    tuples) to a WordOperator coefficient.  Truncation bounds limit the
    total polynomial degree and total derivative order.
    """

    n: int
    terms: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], WordOperator] = field(
        default_factory=dict
    )
    max_poly_degree: int = 4
    max_deriv_order: int = 4

    def __post_init__(self):
        clean = {}
        for (dj, mi), c in self.terms.items():
            if sum(mi) > self.max_poly_degree or sum(dj) > self.max_deriv_order:
                raise TruncationError(f"term ({dj}, {mi}) exceeds truncation bounds")
            if not c.is_zero():
                clean[(tuple(dj), tuple(mi))] = c
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def identity(n: int, r: int = 1) -> "PolyDiffOp":
        z = tuple(0 for _ in range(n))
        return PolyDiffOp(n, {(z, z): WordOperator.identity(n, r)})

    @staticmethod
    def partial(n: int, i: int, r: int = 1) -> "PolyDiffOp":
        dj = tuple(1 if k == i - 1 else 0 for k in range(n))
        z = tuple(0 for _ in range(n))
        return PolyDiffOp(n, {(dj, z): WordOperator.identity(n, r)})

    @staticmethod
    def coordinate(n: int, j: int, r: int = 1) -> "PolyDiffOp":
        mi = tuple(1 if k == j - 1 else 0 for k in range(n))
        z = tuple(0 for _ in range(n))
        return PolyDiffOp(n, {(z, mi): WordOperator.identity(n, r)})

    @staticmethod
    def constant(coeff: WordOperator) -> "PolyDiffOp":
        z = tuple(0 for _ in range(coeff.n))
        return PolyDiffOp(coeff.n, {(z, z): coeff})

    @staticmethod
    def flat_laplacian(n: int, r: int = 1) -> "PolyDiffOp":
        z = tuple(0 for _ in range(n))
        terms = {}
        for i in range(n):
            dj = tuple(2 if k == i else 0 for k in range(n))
            terms[(dj, z)] = WordOperator.identity(n, r).scale(-1)
        return PolyDiffOp(n, terms)

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return PolyDiffOp(
            self.n,
            out,
            min(self.max_poly_degree, other.max_poly_degree),
            min(self.max_deriv_order, other.max_deriv_order),
        )

    def __sub__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        return self + other.scale(-1)

    def scale(self, s) -> "PolyDiffOp":
        return PolyDiffOp(
            self.n,
            {k: c.scale(s) for k, c in self.terms.items()},
            self.max_poly_degree,
            self.max_deriv_order,
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()


def total_degree(d: PolyDiffOp) -> int:
    """max over terms of |J| - |I| + (upper Clifford degree of coefficient)."""
    if d.is_zero():
        raise ValueError("zero operator has no total degree")
    return max(
        sum(dj) - sum(mi) + c.c_degree_upper() for (dj, mi), c in d.terms.items()
    )


def compose(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    """Operator composition a b with Leibniz expansion of derivatives."""
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    n = a.n
    bounds = (
        min(a.max_poly_degree, b.max_poly_degree),
        min(a.max_deriv_order, b.max_deriv_order),
    )
    out: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], WordOperator] = {}
    for (j1, i1), c1 in a.terms.items():
        for (j2, i2), c2 in b.terms.items():
            coeff_prod = c1 * c2
            if coeff_prod.is_zero():
                continue
            for k in _sub_multi(j1, i2):
                factor = 1
                for c in range(n):
                    factor *= _binom(j1[c], k[c]) * _falling(i2[c], k[c])
                if factor == 0:
                    continue
                dj = tuple(j1[c] - k[c] + j2[c] for c in range(n))
                mi = tuple(i1[c] + i2[c] - k[c] for c in range(n))
                if sum(mi) > bounds[0] or sum(dj) > bounds[1]:
                    raise TruncationError(
                        f"composition overflows truncation bounds at ({dj}, {mi})"
                    )
                term = coeff_prod.scale(factor)
                key = (dj, mi)
                out[key] = out[key] + term if key in out else term
    return PolyDiffOp(n, out, bounds[0], bounds[1])


def _sub_multi(j, i):
    """All multi-indices k with k <= min(j, i) componentwise."""
    caps = [min(a, b) for a, b in zip(j, i)]
    out = [()]
    for cap in caps:
        out = [t + (v,) for t in out for v in range(cap + 1)]
    return out


def _binom(a: int, b: int) -> int:
    if b < 0 or b > a:
        return 0
    out = 1
    for k in range(b):
        out = out * (a - k) // (k + 1)
    return out


def _falling(a: int, b: int) -> int:
    if b > a:
        return 0
    out = 1
    for k in range(b):
        out *= a - k
    return out


def word_operator_from_scalar(n: int, value, r: int = 1) -> WordOperator:
    return WordOperator(n, r, {(0, 0, 0): mat_scale(mat_eye(r), value)})
