"""Non-commutative SoS lower-bound machinery.

Max-entropy construction.  Seed pE[Id] = 1 and pE[P_C] = b_C, then close
under the product rule pE[Q R] = conj(pE[Q]) pE[R] for already-assigned Q, R
whenever the product word stays within the degree budget; unassigned words
evaluate to 0.  A conflicting assignment is returned as a Contradiction
carrying both derivations (it is a meaningful output, not a failure: the
combined derivation multiplies out to Identity with value -1).

For one-basis instances (every word a single letter type) the closure runs
on support masks: products are support XORs with no phases and all values
are +-1.  Well-definedness is guaranteed when the hypergraph is a small-set
boundary expander of quality (beta, d0) with beta * d0 / 2 at or above the
requested degree.  General instances are accepted but labeled experimental;
an anticommutation scan runs first since any anticommuting constraint pair
rules out a degree-2k pseudo-expectation assigning both terms value 1.

All values live in {0, +-1, +-i} (rationals after lifting), kept exact with
a tiny complex-rational type so checks like the -1/9 obstruction value are
bit-exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .instances import Instance
from .pauli import PauliOp, canonical_key, commutes, enumerate_slice, mul_words, slice_size

MOMENT_MATRIX_CAP = 5000
EXHAUSTIVE_SUBSET_CAP = 20


# -- exact complex rationals ---------------------------------------------------


@dataclass(frozen=True)
class ExactComplex:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value) -> "ExactComplex":
        if isinstance(value, ExactComplex):
            return value
        return ExactComplex(Fraction(value))

    @staticmethod
    def from_phase(exp: int) -> "ExactComplex":
        return _PHASE_VALUES[exp % 4]

    def __add__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "ExactComplex":
        return ExactComplex(-self.re, -self.im)

    def __mul__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        for sym, val in (("+1", _ONE), ("-1", -_ONE), ("+i", _I), ("-i", -_I)):
            if self == val:
                return sym
        if self.im == 0:
            return repr(float(self.re))
        return f"{float(self.re)!r}{'+' if self.im >= 0 else '-'}{abs(float(self.im))!r}i"


_ONE = ExactComplex(Fraction(1))
_I = ExactComplex(Fraction(0), Fraction(1))
_PHASE_VALUES = (_ONE, _I, -_ONE, -_I)
ZERO = ExactComplex()


# -- exact Pauli polynomials -----------------------------------------------------


class PauliPolynomial:
    """Finite sum of words with exact complex-rational coefficients."""

    def __init__(self, n: int, terms: dict[PauliOp, ExactComplex] | None = None):
        self.n = n
        self.terms: dict[PauliOp, ExactComplex] = {}
        for op, coeff in (terms or {}).items():
            self._add(op, coeff)

    def _add(self, op: PauliOp, coeff: ExactComplex) -> None:
        cur = self.terms.get(op, ZERO) + coeff
        if cur.is_zero():
            self.terms.pop(op, None)
        else:
            self.terms[op] = cur

    @staticmethod
    def from_terms(n: int, pairs) -> "PauliPolynomial":
        poly = PauliPolynomial(n)
        for op, coeff in pairs:
            poly._add(op, ExactComplex.of(coeff))
        return poly

    def adjoint(self) -> "PauliPolynomial":
        return PauliPolynomial(self.n, {op: c.conjugate() for op, c in self.terms.items()})

    def __mul__(self, other: "PauliPolynomial") -> "PauliPolynomial":
        out = PauliPolynomial(self.n)
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                prod = mul_words(a, b)
                out._add(prod.op, ca * cb * ExactComplex.from_phase(prod.phase_exp))
        return out

    def gram_square(self) -> "PauliPolynomial":
        """The exact expansion of (self)^dag * self."""
        return self.adjoint() * self


# -- derivations -----------------------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    """Linearized derivation: each step is an axiom word or a product of earlier steps."""

    steps: tuple[tuple[PauliOp, str, tuple], ...]
    axiom_ids: frozenset[int]

    @property
    def target(self) -> PauliOp:
        return self.steps[-1][0]

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def width(self) -> int:
        return len(self.axiom_ids)

    def dump_lines(self, prefix: str) -> list[str]:
        out = []
        for i, (word, rule, data) in enumerate(self.steps):
            detail = "" if not data else " " + ",".join(str(d) for d in data)
            out.append(f"{prefix}.step.{i}={word.to_string()} {rule}{detail}")
        return out


@dataclass(frozen=True)
class Contradiction:
    """Two derivations assigning different values to the same word."""

    word: PauliOp
    value_a: ExactComplex
    value_b: ExactComplex
    derivation_a: Derivation
    derivation_b: Derivation
    obstructions: tuple[tuple[int, int], ...] = ()

    @property
    def combined_axioms(self) -> frozenset[int]:
        return self.derivation_a.axiom_ids ^ self.derivation_b.axiom_ids

    def dump_lines(self) -> list[str]:
        out = [
            f"CONTRADICTION word={self.word.to_string()}",
            f"value_a={self.value_a}",
            f"value_b={self.value_b}",
        ]
        out += self.derivation_a.dump_lines("deriv_a")
        out += self.derivation_b.dump_lines("deriv_b")
        return out


class _Provenance:
    """DAG of derivation rules, linearized to Derivation objects on demand."""

    def __init__(self):
        self.rules: dict[PauliOp, tuple] = {}
        self.axioms: dict[PauliOp, frozenset[int]] = {}

    def set_identity(self, word: PauliOp) -> None:
        self.rules[word] = ("identity",)
        self.axioms[word] = frozenset()

    def set_axiom(self, word: PauliOp, cid: int) -> None:
        self.rules[word] = ("axiom", cid)
        self.axioms[word] = frozenset((cid,))

    def set_product(self, word: PauliOp, left: PauliOp, right: PauliOp) -> None:
        self.rules[word] = ("product", left, right)
        self.axioms[word] = self.axioms[left] ^ self.axioms[right]

    def derivation(self, word: PauliOp) -> Derivation:
        order: list[PauliOp] = []
        index: dict[PauliOp, int] = {}

        def visit(w: PauliOp) -> int:
            if w in index:
                return index[w]
            rule = self.rules[w]
            if rule[0] == "product":
                li, ri = visit(rule[1]), visit(rule[2])
                data: tuple = (li, ri)
            elif rule[0] == "axiom":
                data = (rule[1],)
            else:
                data = ()
            index[w] = len(order)
            order.append((w, rule[0], data))
            return index[w]

        visit(word)
        return Derivation(steps=tuple(order), axiom_ids=self.axioms[word])


# -- pseudo-expectations -----------------------------------------------------------


@dataclass
class PseudoExpectation:
    """Partial map from phase-free words of weight <= degree to exact values."""

    n: int
    degree: int
    values: dict[PauliOp, ExactComplex]
    provenance: _Provenance | None = None
    experimental: bool = False
    obstructions: tuple[tuple[int, int], ...] = ()

    def value(self, word: PauliOp) -> ExactComplex:
        return self.values.get(word, ZERO)

    def pair_value(self, left: PauliOp, right: PauliOp) -> ExactComplex:
        """pE[left^dag right] with the product phase applied to the stored word value."""
        prod = mul_words(left, right)
        return ExactComplex.from_phase(prod.phase_exp) * self.value(prod.op)

    def evaluate(self, poly: PauliPolynomial) -> ExactComplex:
        total = ZERO
        for op, coeff in poly.terms.items():
            total = total + coeff * self.value(op)
        return total

    def energy(self, inst: Instance) -> ExactComplex:
        """pE[Id/2 + (1/2|H|) sum_C b_C P_C] in exact arithmetic for +-1 coefficients."""
        total = ZERO
        for c in inst.constraints:
            total = total + ExactComplex.of(Fraction(c.coeff)) * self.value(c.pauli)
        half = ExactComplex.of(Fraction(1, 2))
        return half + ExactComplex.of(Fraction(1, 2 * inst.m)) * total

    def derivation_of(self, word: PauliOp) -> Derivation:
        if self.provenance is None or word not in self.provenance.rules:
            raise KeyError(f"no derivation recorded for {word}")
        return self.provenance.derivation(word)

    def dump(self) -> str:
        lines = [f"PSEXP v1 n={self.n} d={self.degree}"]
        for word in sorted(self.values, key=canonical_key):
            val = self.values[word]
            if not val.is_zero():
                lines.append(f"{word.to_string()} {val}")
        return "\n".join(lines) + "\n"


def anticommuting_obstruction(inst: Instance) -> list[tuple[int, int]]:
    """All constraint pairs whose words anticommute.

    A non-empty list certifies that no degree-2k pseudo-expectation assigns
    both terms value 1.
    """
    out = []
    for i in range(inst.m):
        for j in range(i + 1, inst.m):
            if not commutes(inst.constraints[i].pauli, inst.constraints[j].pauli):
                out.append((i, j))
    return out


def _one_basis_type(inst: Instance) -> str | None:
    types = set()
    for c in inst.constraints:
        for i in c.support:
            types.add(c.pauli.letter_at(i))
    if len(types) > 1:
        return None
    return types.pop() if types else "Z"


def max_entropy_build(inst: Instance, d: int):
    """Closure of the seeded assignment; PseudoExpectation or Contradiction.

    One-basis instances (any single letter type) run on support XORs with
    +-1 values.  Other instances are accepted as experimental: values may be
    +-i and the anticommutation scan result is attached.
    """
    if d < inst.k:
        raise ValueError(f"degree {d} below constraint arity {inst.k}")
    basis = _one_basis_type(inst)
    obstructions = tuple(anticommuting_obstruction(inst)) if basis is None else ()

    prov = _Provenance()
    values: dict[PauliOp, ExactComplex] = {}
    ident = PauliOp.identity(inst.n)
    values[ident] = _ONE
    prov.set_identity(ident)
    order: list[PauliOp] = [ident]

    def conflict(word, existing, candidate, left, right):
        deriv_a = prov.derivation(word)
        prov.set_product(word, left, right)
        deriv_b = prov.derivation(word)
        return Contradiction(word=word, value_a=existing, value_b=candidate,
                             derivation_a=deriv_a, derivation_b=deriv_b,
                             obstructions=obstructions)

    # seed the axioms in constraint order
    for cid, c in enumerate(inst.constraints):
        val = ExactComplex.of(Fraction(c.coeff))
        if val * val != _ONE:
            raise ValueError("max-entropy seeding needs +-1 coefficients")
        word = c.pauli
        if word in values:
            if values[word] != val:
                deriv_a = prov.derivation(word)
                prov.set_axiom(word, cid)
                return Contradiction(word=word, value_a=values[word], value_b=val,
                                     derivation_a=deriv_a,
                                     derivation_b=prov.derivation(word),
                                     obstructions=obstructions)
            continue
        values[word] = val
        prov.set_axiom(word, cid)
        order.append(word)

    # fixpoint: pE[Q R] = conj(pE[Q]) pE[R] whenever the product stays in degree
    head = 0
    while head < len(order):
        w = order[head]
        head += 1
        for u in list(order):
            for left, right in ((u, w), (w, u)):
                prod = mul_words(left, right)
                if prod.op.weight() > d:
                    continue
                cand = (values[left].conjugate() * values[right]
                        * ExactComplex.from_phase(-prod.phase_exp))
                existing = values.get(prod.op)
                if existing is None:
                    values[prod.op] = cand
                    prov.set_product(prod.op, left, right)
                    order.append(prod.op)
                elif existing != cand:
                    return conflict(prod.op, existing, cand, left, right)

    return PseudoExpectation(n=inst.n, degree=d, values=values, provenance=prov,
                             experimental=basis is None, obstructions=obstructions)


def positivity_check(pe: PseudoExpectation, d: int) -> tuple[float, bool]:
    """Minimum eigenvalue of the moment matrix over weight <= d/2 words; pass at -1e-8."""
    half = d // 2
    count = sum(slice_size(pe.n, w) for w in range(half + 1))
    if count > MOMENT_MATRIX_CAP:
        raise MemoryError(f"moment matrix would have {count} rows (cap {MOMENT_MATRIX_CAP})")
    words: list[PauliOp] = []
    for w in range(half + 1):
        words.extend(enumerate_slice(pe.n, w))
    mat = np.zeros((count, count), dtype=complex)
    for i, a in enumerate(words):
        for j, b in enumerate(words):
            mat[i, j] = complex(pe.pair_value(a, b))
    dev = np.max(np.abs(mat - mat.conj().T))
    if dev > 1e-12:
        raise ValueError(f"moment matrix is not Hermitian (deviation {dev:.3e})")
    min_eig = float(np.linalg.eigvalsh(mat)[0])
    return min_eig, min_eig >= -1e-8


# -- boundary expansion ------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionReport:
    beta: float
    d: int
    passed: bool
    witness: tuple[int, ...] | None
    exhaustive: bool
    profile: tuple[tuple[int, int], ...]  # (subset size, min boundary) per size

    def min_boundary(self, size: int) -> int | None:
        for s, b in self.profile:
            if s == size:
                return b
        return None


def boundary_expansion_check(hypergraph, beta: float, d: int,
                             samples: int = 20000, seed: int = 0) -> ExpansionReport:
    """Check |xor of supports| >= beta * |S| for all subsets S up to size d.

    Exhaustive up to size EXHAUSTIVE_SUBSET_CAP; beyond that a sampled pass
    runs and the report is flagged as heuristic.
    """
    masks = []
    for sites in hypergraph:
        m = 0
        for s in sites:
            m |= 1 << s
        masks.append(m)
    limit = min(d, len(masks))
    exhaustive = limit <= EXHAUSTIVE_SUBSET_CAP
    witness = None
    profile: list[tuple[int, int]] = []

    if exhaustive:
        for size in range(1, limit + 1):
            best = None
            for subset in combinations(range(len(masks)), size):
                acc = 0
                for i in subset:
                    acc ^= masks[i]
                boundary = acc.bit_count()
                best = boundary if best is None else min(best, boundary)
                if boundary < beta * size and witness is None:
                    witness = subset
            if best is not None:
                profile.append((size, best))
    else:
        rng = random.Random(seed)
        best_by_size: dict[int, int] = {}
        for _ in range(samples):
            size = rng.randrange(1, limit + 1)
            subset = tuple(sorted(rng.sample(range(len(masks)), size)))
            acc = 0
            for i in subset:
                acc ^= masks[i]
            boundary = acc.bit_count()
            best_by_size[size] = min(best_by_size.get(size, boundary), boundary)
            if boundary < beta * size and witness is None:
                witness = subset
        profile = sorted(best_by_size.items())

    return ExpansionReport(beta=beta, d=d, passed=witness is None, witness=witness,
                           exhaustive=exhaustive, profile=tuple(profile))


# -- the anticommutation obstruction value ------------------------------------------


def obstruction_polynomial(p: PauliOp, q: PauliOp) -> PauliPolynomial:
    """H = (-P + Q + PQ) / 3 for an anticommuting pair, as an exact polynomial."""
    if commutes(p, q):
        raise ValueError("obstruction polynomial needs an anticommuting pair")
    third = Fraction(1, 3)
    prod = mul_words(p, q)
    poly = PauliPolynomial.from_terms(p.n, [(p, ExactComplex.of(-third)),
                                            (q, ExactComplex.of(third))])
    poly._add(prod.op, ExactComplex.of(third) * ExactComplex.from_phase(prod.phase_exp))
    return poly


def obstruction_pseudo_expectation(p: PauliOp, q: PauliOp) -> PseudoExpectation:
    """The max-entropy-style map with pE[P] = pE[Q] = 1 for an anticommuting pair.

    The product word picks up the first derivation's value; no consistent
    extension exists, which is exactly what evaluating the squared
    obstruction polynomial exposes (value -1/9).
    """
    if commutes(p, q):
        raise ValueError("needs an anticommuting pair")
    values = {PauliOp.identity(p.n): _ONE, p: _ONE, q: _ONE}
    prod = mul_words(p, q)
    values[prod.op] = ExactComplex.from_phase(-prod.phase_exp)
    return PseudoExpectation(n=p.n, degree=2 * max(p.weight(), q.weight()),
                             values=values, experimental=True)


# -- lifting classical pseudo-expectations -------------------------------------------


class MomentOracleGap(KeyError):
    """The classical moment oracle has no value for a requested monomial."""


@dataclass
class MomentOracle:
    """Values of the multilinear monomials x_S over a classical pseudo-distribution."""

    n: int
    degree: int
    values: dict[int, ExactComplex]

    @staticmethod
    def from_distribution(n: int, assignments, weights=None, degree: int | None = None
                          ) -> "MomentOracle":
        """Exact moments of a distribution over +-1 assignments (uniform by default)."""
        if not assignments:
            raise ValueError("need at least one assignment")
        if weights is None:
            weights = [Fraction(1, len(assignments))] * len(assignments)
        weights = [Fraction(w) for w in weights]
        if sum(weights) != 1:
            raise ValueError("weights must sum to one")
        degree = n if degree is None else degree
        values: dict[int, ExactComplex] = {}
        for size in range(degree + 1):
            for sites in combinations(range(n), size):
                total = Fraction(0)
                for x, w in zip(assignments, weights):
                    prod = 1
                    for i in sites:
                        prod *= x[i]
                    total += w * prod
                mask = 0
                for i in sites:
                    mask |= 1 << i
                values[mask] = ExactComplex.of(total)
        return MomentOracle(n=n, degree=degree, values=values)

    def value(self, mask: int) -> ExactComplex:
        try:
            return self.values[mask]
        except KeyError:
            raise MomentOracleGap(f"no moment recorded for mask {mask:#x}") from None


def lift_classical(inst: Instance, moments: MomentOracle, d: int) -> PseudoExpectation:
    """Lift a classical degree-d pseudo-expectation to the Z-basis Hamiltonian.

    Z-type words of weight <= d get the classical monomial value on their
    support; every other word gets 0.  The lifted value of the Hamiltonian
    equals the classical objective value by construction.
    """
    if inst.model != "one-basis-z" and any(c.pauli.xmask for c in inst.constraints):
        raise ValueError("lifting needs a Z-basis instance")
    if moments.degree < d:
        raise MomentOracleGap(f"oracle degree {moments.degree} below requested {d}")
    values: dict[PauliOp, ExactComplex] = {}
    for size in range(d + 1):
        for sites in combinations(range(inst.n), size):
            mask = 0
            for i in sites:
                mask |= 1 << i
            val = moments.value(mask)
            if not val.is_zero():
                values[PauliOp(inst.n, 0, mask)] = val
    return PseudoExpectation(n=inst.n, degree=d, values=values)


def classical_energy(inst: Instance, moments: MomentOracle) -> ExactComplex:
    """The classical SoS objective 1/2 + (1/2|H|) sum_C b_C pE[x_C], exactly."""
    total = ZERO
    for c in inst.constraints:
        mask = 0
        for i in c.support:
            mask |= 1 << i
        total = total + ExactComplex.of(Fraction(c.coeff)) * moments.value(mask)
    return ExactComplex.of(Fraction(1, 2)) + ExactComplex.of(Fraction(1, 2 * inst.m)) * total
