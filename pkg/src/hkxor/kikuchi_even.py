"""Even-arity Kikuchi graphs over weight-ell Pauli words, plus the full-group variant.

For even k and a weight-k word P, vertices are the 3^ell * C(n, ell) words of
weight ell; (Q, R) is an edge iff Q*R = P exactly and Q, R overlap on exactly
ell - k/2 sites.  Equivalently: on supp(P) exactly one of Q, R is non-trivial
and agrees with P there (half of supp(P) each), and off supp(P) the two words
are identical.  Such endpoints always commute and the product phase is +1;
both are asserted during construction.

Edges are generated per constraint by direct combinatorial enumeration (the
Delta pairs), never by scanning all N^2 vertex pairs.  Entries are ordered
(row, col) pairs; the edge set is closed under transposition, so the signed
adjacency is symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
import scipy.sparse as sp

from .instances import Instance
from .pauli import PauliOp, SliceIndex, commutes, mul_words

_LETTERS = "XYZ"

LEVEL_N_QUBIT_CAP = 6


class DegenerateRegularizerError(ValueError):
    """Raised when regularizing an empty graph (average degree zero)."""


@dataclass
class KikuchiGraph:
    """Typed sparse signed adjacency over a canonical vertex enumeration.

    ``edges`` holds ordered entries (row, col, constraint_id, signed weight);
    ``degrees`` is the unsigned weighted degree vector (|b_C| per entry), and
    ``delta`` the exact per-constraint ordered pair count.
    """

    n: int
    k: int
    ell: int
    index: SliceIndex
    m: int
    delta: int
    edges: list[tuple[int, int, int, float]]
    degrees: np.ndarray = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return self.index.size

    @property
    def total_degree(self) -> float:
        return float(self.degrees.sum())

    @property
    def average_degree(self) -> float:
        return self.total_degree / self.num_vertices if self.num_vertices else 0.0

    def signed_matrix(self) -> sp.csr_matrix:
        """N x N symmetric signed adjacency (duplicate entries summed)."""
        size = self.num_vertices
        if not self.edges:
            return sp.csr_matrix((size, size))
        rows, cols, _cids, w = zip(*self.edges)
        return sp.csr_matrix((w, (rows, cols)), shape=(size, size))


def delta_count(n: int, k: int, ell: int) -> int:
    """Exact ordered pair count per constraint: C(k,k/2) C(n-k,ell-k/2) 3^(ell-k/2)."""
    if k % 2 != 0:
        raise ValueError(f"k must be even, got {k}")
    if not k // 2 <= ell <= n:
        raise ValueError(f"need k/2 <= ell <= n, got k={k}, ell={ell}, n={n}")
    return math.comb(k, k // 2) * math.comb(n - k, ell - k // 2) * 3 ** (ell - k // 2)


def average_degree_bound(n: int, k: int, ell: int, m: int) -> float:
    """Lower bound (ell / 3n)^(k/2) * m on the average degree of a built graph."""
    return (ell / (3 * n)) ** (k // 2) * m


def build_even(inst: Instance, ell: int) -> KikuchiGraph:
    """Level-ell Kikuchi graph of an even-arity instance."""
    n, k = inst.n, inst.k
    if k % 2 != 0:
        raise ValueError(f"even-arity builder needs even k, got k={k}; use the odd pipeline")
    if not k // 2 <= ell <= n // 2:
        raise ValueError(f"need k/2 <= ell <= n/2, got k={k}, ell={ell}, n={n}")

    index = SliceIndex(n, ell)
    delta = delta_count(n, k, ell)
    edges: list[tuple[int, int, int, float]] = []
    degrees = np.zeros(index.size)

    for cid, c in enumerate(inst.constraints):
        word = c.pauli
        sup = c.support
        off_sites = [i for i in range(n) if i not in set(sup)]
        absw = abs(c.coeff)
        for half in combinations(sup, k // 2):
            q_mask = 0
            for s in half:
                q_mask |= 1 << s
            r_mask = word.support_mask & ~q_mask
            q_base = word.restrict(q_mask)
            r_base = word.restrict(r_mask)
            for shared_sites in combinations(off_sites, ell - k // 2):
                for letters in product(_LETTERS, repeat=ell - k // 2):
                    shared = PauliOp.from_letters(n, shared_sites, "".join(letters))
                    q = PauliOp(n, q_base.xmask | shared.xmask, q_base.zmask | shared.zmask)
                    r = PauliOp(n, r_base.xmask | shared.xmask, r_base.zmask | shared.zmask)
                    prod = mul_words(q, r)
                    assert prod.op == word and prod.phase_exp == 0, "edge product is not +P"
                    assert commutes(q, r), "edge endpoints do not commute"
                    qi, ri = index.rank(q), index.rank(r)
                    edges.append((qi, ri, cid, c.coeff))
                    degrees[qi] += absw

    edges.sort(key=lambda e: (e[0], e[1], e[2]))
    return KikuchiGraph(n=n, k=k, ell=ell, index=index, m=inst.m, delta=delta,
                        edges=edges, degrees=degrees)


@dataclass
class Regularizer:
    """Per-vertex diagonal Gamma = degree + average degree."""

    gamma: np.ndarray
    average_degree: float

    @property
    def trace(self) -> float:
        return float(self.gamma.sum())


def regularize(graph) -> Regularizer:
    """Gamma = D + d*Id from a built graph; Tr(Gamma) equals twice the total degree."""
    total = graph.total_degree
    if total <= 0:
        raise DegenerateRegularizerError("cannot regularize an empty graph")
    d = total / graph.num_vertices
    gamma = graph.degrees + d
    reg = Regularizer(gamma=gamma, average_degree=d)
    assert abs(reg.trace - 2 * total) <= 1e-9 * max(1.0, 2 * total)
    return reg


def dump_graph(graph) -> str:
    """Debug/golden dump: "KIKUCHI v1 n k ell N E" then "row col cid weight" lines.

    Odd graphs dump through the same header with a trailing pair-type column
    per edge line (see OddKikuchiGraph.edge_lines).
    """
    if hasattr(graph, "edge_lines"):
        body = graph.edge_lines()
        count = graph.num_edges
    else:
        body = [" ".join(repr(v) if isinstance(v, float) else str(v) for v in e)
                for e in graph.edges]
        count = len(graph.edges)
    lines = [f"KIKUCHI v1 {graph.n} {graph.k} {graph.ell} {graph.num_vertices} {count}"]
    lines.extend(body)
    return "\n".join(lines) + "\n"


# -- full-group (level-n) variant ---------------------------------------------


class FullGroupIndex:
    """Bijection between all 4^n phase-free words and [0, 4^n): rank = (x << n) | z."""

    def __init__(self, n: int):
        self.n = n
        self.size = 4**n

    def rank(self, op: PauliOp) -> int:
        return (op.xmask << self.n) | op.zmask

    def unrank(self, index: int) -> PauliOp:
        return PauliOp(self.n, index >> self.n, index & ((1 << self.n) - 1))


def build_level_n(source, n: int | None = None, coeff_tol: float = 0.0) -> KikuchiGraph:
    """Kikuchi graph over all 4^n words: (Q, R) is an edge of weight c(P) iff Q*R = P up to phase.

    ``source`` is either a DenseOperator (coefficients extracted by inner
    products) or an iterable of (PauliOp, real coefficient) pairs with ``n``
    given.  Gated to n <= 6 (4^n vertices).
    """
    from .oracle import DenseOperator, pauli_coefficient

    if isinstance(source, DenseOperator):
        n = source.n
        if n > LEVEL_N_QUBIT_CAP:
            raise ValueError(f"level-n graph needs n <= {LEVEL_N_QUBIT_CAP}, got {n}")
        full = FullGroupIndex(n)
        terms = []
        for i in range(full.size):
            p = full.unrank(i)
            coeff = pauli_coefficient(source, p)
            if abs(coeff.imag) > 1e-12:
                raise ValueError("operator has non-real Pauli coefficients")
            if abs(coeff.real) > coeff_tol:
                terms.append((p, coeff.real))
    else:
        if n is None:
            raise ValueError("n is required for coefficient-map input")
        if n > LEVEL_N_QUBIT_CAP:
            raise ValueError(f"level-n graph needs n <= {LEVEL_N_QUBIT_CAP}, got {n}")
        full = FullGroupIndex(n)
        terms = [(p, float(c)) for p, c in source if abs(c) > coeff_tol]

    edges: list[tuple[int, int, int, float]] = []
    degrees = np.zeros(full.size)
    for pid, (p, coeff) in enumerate(terms):
        for qi in range(full.size):
            q = full.unrank(qi)
            r = mul_words(q, p).op
            ri = full.rank(r)
            edges.append((qi, ri, pid, coeff))
            degrees[qi] += abs(coeff)

    edges.sort(key=lambda e: (e[0], e[1], e[2]))
    # k = 0 marks the full-group variant (terms of mixed weight)
    graph = KikuchiGraph(n=n, k=0, ell=n, index=full, m=len(terms), delta=full.size,
                         edges=edges, degrees=degrees)
    return graph


def level_n_hatted(graph: KikuchiGraph) -> np.ndarray:
    """Phase-matched hatted operator: block (Q, R) holds weight * dense(Q)^dag dense(R).

    Equal to conjugating (signed adjacency tensor Id) by the block-diagonal
    unitary with blocks Q, so its spectrum matches the graph's.
    """
    from .oracle import dense_word

    n = graph.n
    if n > 3:
        raise ValueError("hatted operator is gated to n <= 3 (dimension 8^n)")
    dim = 1 << n
    size = graph.num_vertices
    out = np.zeros((size * dim, size * dim), dtype=complex)
    dense_cache = {i: dense_word(graph.index.unrank(i)) for i in range(size)}
    mat = graph.signed_matrix().tocoo()
    for qi, ri, w in zip(mat.row, mat.col, mat.data):
        if w == 0.0:
            continue
        block = dense_cache[qi].conj().T @ dense_cache[ri]
        out[qi * dim:(qi + 1) * dim, ri * dim:(ri + 1) * dim] += w * block
    return out
