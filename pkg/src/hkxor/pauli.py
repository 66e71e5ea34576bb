"""Exact algebra of n-qubit Pauli words.

A phase-free Pauli word is encoded by two n-bit integers ``(xmask, zmask)``:
site ``i`` carries the letter given by the bit pair ``(x_i, z_i)``::

    (0, 0) -> I      (1, 0) -> X      (1, 1) -> Y      (0, 1) -> Z

The word represented by the pair is the Hermitian operator

    W(x, z) = i^{|x & z|} * X^x * Z^z,

so every ``PauliOp`` squares to the identity with phase +1.  Products of two
words pick up a phase in {+1, +i, -1, -i}; :class:`PhasedPauli` carries that
phase explicitly as an exponent of i modulo 4.

Sites are 0-indexed internally.  All textual formats (dense ``"IXZY..."``
strings and sparse ``"X3 Z7"`` strings) use 1-indexed sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

# letter codes used by the canonical ordering: X < Y < Z
_LETTERS = "XYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}

PHASES = (1, 1j, -1, -1j)
PHASE_STRINGS = ("+1", "+i", "-1", "-i")


@dataclass(frozen=True)
class PauliOp:
    """Phase-free n-qubit Pauli word in symplectic bit-pair encoding."""

    n: int
    xmask: int
    zmask: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"qubit count must be nonnegative, got {self.n}")
        full = (1 << self.n) - 1
        if self.xmask & ~full or self.zmask & ~full:
            raise ValueError("mask bits beyond qubit count must be zero")

    @staticmethod
    def identity(n: int) -> "PauliOp":
        return PauliOp(n, 0, 0)

    @staticmethod
    def single(n: int, site: int, letter: str) -> "PauliOp":
        """Single-letter word acting on a 0-indexed site."""
        if not 0 <= site < n:
            raise ValueError(f"site {site} out of range for n={n}")
        x, z = _LETTER_BITS[letter.upper()]
        return PauliOp(n, x << site, z << site)

    @staticmethod
    def from_letters(n: int, sites: tuple[int, ...] | list[int], letters: str) -> "PauliOp":
        """Word with ``letters[j]`` on 0-indexed ``sites[j]``, identity elsewhere."""
        if len(sites) != len(letters):
            raise ValueError("sites and letters must have equal length")
        xm = zm = 0
        for site, letter in zip(sites, letters):
            if not 0 <= site < n:
                raise ValueError(f"site {site} out of range for n={n}")
            x, z = _LETTER_BITS[letter.upper()]
            if x == 0 and z == 0:
                raise ValueError("identity letter not allowed in from_letters")
            if (xm | zm) >> site & 1:
                raise ValueError(f"duplicate site {site}")
            xm |= x << site
            zm |= z << site
        return PauliOp(n, xm, zm)

    @property
    def support_mask(self) -> int:
        return self.xmask | self.zmask

    def weight(self) -> int:
        return (self.xmask | self.zmask).bit_count()

    def support(self) -> tuple[int, ...]:
        """Ascending 0-indexed sites carrying a non-identity letter."""
        return tuple(i for i in range(self.n) if self.support_mask >> i & 1)

    def is_identity(self) -> bool:
        return self.xmask == 0 and self.zmask == 0

    def letter_at(self, site: int) -> str:
        return _BITS_LETTER[(self.xmask >> site & 1, self.zmask >> site & 1)]

    def restrict(self, site_mask: int) -> "PauliOp":
        """Word equal to self on sites in ``site_mask``, identity elsewhere."""
        return PauliOp(self.n, self.xmask & site_mask, self.zmask & site_mask)

    # -- textual formats (1-indexed sites) ---------------------------------

    def to_string(self) -> str:
        """Dense length-n string over {I, X, Y, Z}; position j is site j+1."""
        return "".join(self.letter_at(i) for i in range(self.n))

    def to_sparse(self) -> str:
        """Sparse form like ``"X3 Z7"`` with ascending 1-indexed sites; identity is ``"I"``."""
        if self.is_identity():
            return "I"
        return " ".join(f"{self.letter_at(i)}{i + 1}" for i in self.support())

    @staticmethod
    def from_string(s: str) -> "PauliOp":
        xm = zm = 0
        for i, ch in enumerate(s):
            x, z = _LETTER_BITS[ch.upper()]
            xm |= x << i
            zm |= z << i
        return PauliOp(len(s), xm, zm)

    @staticmethod
    def from_sparse(s: str, n: int) -> "PauliOp":
        s = s.strip()
        if s == "I" or s == "":
            return PauliOp.identity(n)
        xm = zm = 0
        last_site = 0
        for tok in s.split():
            letter, site_str = tok[0].upper(), tok[1:]
            if letter not in "XYZ" or not site_str.isdigit():
                raise ValueError(f"bad sparse Pauli token {tok!r}")
            site = int(site_str)
            if not 1 <= site <= n:
                raise ValueError(f"site {site} out of range for n={n}")
            if site <= last_site:
                raise ValueError(f"sites must be ascending in {s!r}")
            last_site = site
            x, z = _LETTER_BITS[letter]
            xm |= x << (site - 1)
            zm |= z << (site - 1)
        return PauliOp(n, xm, zm)

    def __str__(self) -> str:
        return self.to_sparse()


def canonical_key(op: PauliOp) -> tuple:
    """Sort key: weight, then support lexicographic, then letters X<Y<Z (first site most significant)."""
    sup = op.support()
    return (len(sup), sup, tuple(_LETTERS.index(op.letter_at(i)) for i in sup))


@dataclass(frozen=True)
class PhasedPauli:
    """Pauli word with an explicit global phase i^phase_exp, phase_exp in {0,1,2,3}."""

    op: PauliOp
    phase_exp: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @property
    def phase(self) -> complex:
        return PHASES[self.phase_exp]

    @property
    def phase_str(self) -> str:
        return PHASE_STRINGS[self.phase_exp]

    @staticmethod
    def from_phase_str(s: str, op: PauliOp) -> "PhasedPauli":
        if s not in PHASE_STRINGS:
            raise ValueError(f"bad phase {s!r}")
        return PhasedPauli(op, PHASE_STRINGS.index(s))

    def adjoint(self) -> "PhasedPauli":
        # words are Hermitian, so only the phase conjugates
        return PhasedPauli(self.op, (-self.phase_exp) % 4)

    def __str__(self) -> str:
        return f"{self.phase_str}*{self.op.to_sparse()}"


def _check_same_n(a: PauliOp, b: PauliOp) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} != {b.n}")


def mul_words(p: PauliOp, q: PauliOp) -> PhasedPauli:
    """Exact product p*q of two phase-free words, phase included.

    With W(x,z) = i^{|x&z|} X^x Z^z the product phase exponent is
    |x1&z1| + |x2&z2| - |x3&z3| + 2*|z1&x2|  (mod 4), x3 = x1^x2, z3 = z1^z2.
    """
    _check_same_n(p, q)
    x3 = p.xmask ^ q.xmask
    z3 = p.zmask ^ q.zmask
    e = (
        (p.xmask & p.zmask).bit_count()
        + (q.xmask & q.zmask).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (p.zmask & q.xmask).bit_count()
    )
    return PhasedPauli(PauliOp(p.n, x3, z3), e % 4)


def multiply(a: PhasedPauli, b: PhasedPauli) -> PhasedPauli:
    """Exact group product of two phased Pauli words."""
    w = mul_words(a.op, b.op)
    return PhasedPauli(w.op, w.phase_exp + a.phase_exp + b.phase_exp)


def commutes(a: PauliOp, b: PauliOp) -> bool:
    """True iff the symplectic form vanishes: an even number of sites anticommute."""
    _check_same_n(a, b)
    s = (a.xmask & b.zmask).bit_count() + (a.zmask & b.xmask).bit_count()
    return s % 2 == 0


def subsumes(u: PauliOp, p: PauliOp) -> bool:
    """True iff p acts identically to u on every site where u is non-identity."""
    _check_same_n(u, p)
    s = u.support_mask
    return (p.xmask & s) == u.xmask and (p.zmask & s) == u.zmask


def meet(p: PauliOp, q: PauliOp) -> frozenset[int]:
    """Sites where p and q agree non-trivially: supp(p) & supp(q) minus supp(p*q)."""
    _check_same_n(p, q)
    agree = ~((p.xmask ^ q.xmask) | (p.zmask ^ q.zmask))
    m = p.support_mask & q.support_mask & agree
    return frozenset(i for i in range(p.n) if m >> i & 1)


# -- canonical enumeration of weight slices --------------------------------


def slice_size(n: int, ell: int) -> int:
    """Number of weight-ell words on n qubits: 3^ell * C(n, ell)."""
    return 3**ell * math.comb(n, ell)


def _comb_rank(sites: tuple[int, ...], n: int) -> int:
    """Lexicographic rank of a sorted site tuple among all C(n, len) subsets."""
    r = 0
    k = len(sites)
    prev = -1
    for j, c in enumerate(sites):
        for v in range(prev + 1, c):
            r += math.comb(n - 1 - v, k - 1 - j)
        prev = c
    return r


def _comb_unrank(rank: int, n: int, k: int) -> tuple[int, ...]:
    sites = []
    v = 0
    for j in range(k):
        while True:
            block = math.comb(n - 1 - v, k - 1 - j)
            if rank < block:
                break
            rank -= block
            v += 1
        sites.append(v)
        v += 1
    return tuple(sites)


class SliceIndex:
    """Bijection between weight-ell words on n qubits and [0, 3^ell * C(n, ell)).

    Ordering: supports ascending lexicographic (as sorted site tuples); within
    a support, letters ordered X < Y < Z with the lowest site most significant.
    """

    def __init__(self, n: int, ell: int):
        if not 0 <= ell <= n:
            raise ValueError(f"need 0 <= ell <= n, got ell={ell}, n={n}")
        self.n = n
        self.ell = ell
        self.size = slice_size(n, ell)

    def rank(self, op: PauliOp) -> int:
        if op.n != self.n:
            raise ValueError(f"qubit counts differ: {op.n} != {self.n}")
        sup = op.support()
        if len(sup) != self.ell:
            raise ValueError(f"word has weight {len(sup)}, slice expects {self.ell}")
        code = 0
        for s in sup:
            code = 3 * code + _LETTERS.index(op.letter_at(s))
        return _comb_rank(sup, self.n) * 3**self.ell + code

    def unrank(self, index: int) -> PauliOp:
        if not 0 <= index < self.size:
            raise ValueError(f"index {index} out of range [0, {self.size})")
        sup_rank, code = divmod(index, 3**self.ell)
        sites = _comb_unrank(sup_rank, self.n, self.ell)
        letters = []
        for _ in range(self.ell):
            code, d = divmod(code, 3)
            letters.append(_LETTERS[d])
        letters.reverse()
        return PauliOp.from_letters(self.n, sites, "".join(letters))


def enumerate_slice(n: int, ell: int) -> Iterator[PauliOp]:
    """Yield all 3^ell * C(n, ell) weight-ell words in canonical SliceIndex order."""
    if not 0 <= ell <= n:
        raise ValueError(f"need 0 <= ell <= n, got ell={ell}, n={n}")
    for sites in combinations(range(n), ell):
        for letters in product(_LETTERS, repeat=ell):
            yield PauliOp.from_letters(n, sites, "".join(letters))
