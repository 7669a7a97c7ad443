"""Black-box Abelian groups: uniquely encoded elements, oracle multiply/invert.

Backends here are desk-scale stand-ins for the oracle model: Z_N^* under
multiplication and elliptic-curve groups over prime fields.  Every mul/inv
goes through the oracle counter, so tests can assert query budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .linalg import Matrix, hermite_reduce, smith_normal_form

DEFAULT_ORDER_CAP = 1 << 20


class BlackBoxError(ValueError):
    pass


class OracleCounter:
    """Tally of group-oracle queries; the cost measure of the black-box model."""

    def __init__(self) -> None:
        self.mul = 0
        self.inv = 0

    @property
    def total(self) -> int:
        return self.mul + self.inv

    def reset(self) -> None:
        self.mul = 0
        self.inv = 0


class BlackBoxGroup:
    """Finite Abelian group with unit-cost oracle multiplication.

    Elements are canonical immutable Python values; `encode` maps them to the
    unique strings of the black-box model.  Subclasses implement the raw
    operations; this base class wraps them with query counting.
    """

    encoding_length: int

    def __init__(self) -> None:
        self.counter = OracleCounter()

    # -- subclass surface ---------------------------------------------------

    def _mul(self, x, y):
        raise NotImplementedError

    def _inv(self, x):
        raise NotImplementedError

    def identity(self):
        raise NotImplementedError

    def is_element(self, x) -> bool:
        raise NotImplementedError

    def encode(self, x) -> str:
        raise NotImplementedError

    def elements(self) -> Iterator:
        """Desk-scale extension: exhaustive enumeration for test oracles."""
        raise NotImplementedError

    def order(self) -> int:
        raise NotImplementedError

    # -- oracle calls -------------------------------------------------------

    def mul(self, x, y):
        self.counter.mul += 1
        return self._mul(x, y)

    def inv(self, x):
        self.counter.inv += 1
        return self._inv(x)

    def power(self, x, k: int):
        """x^k by repeated squaring; counts the underlying oracle calls."""
        if k < 0:
            return self.power(self.inv(x), -k)
        result = self.identity()
        base = x
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def word(self, generators: Sequence, exponents: Sequence[int]):
        """generators[0]^e0 * generators[1]^e1 * ..."""
        if len(generators) != len(exponents):
            raise BlackBoxError("generator/exponent length mismatch")
        result = self.identity()
        for g, e in zip(generators, exponents):
            result = self.mul(result, self.power(g, e))
        return result

    def sample_generators(self, rng, max_tries: int = 256) -> list:
        """Random generating set, keeping only candidates that enlarge the
        generated subgroup (so the set stays logarithmically small)."""
        target = self.order()
        gens: list = []
        seen = 1
        tries = 0
        while seen < target:
            candidate = self.random_element(rng)
            tries += 1
            if tries > max_tries:
                raise BlackBoxError("failed to sample a generating set")
            enlarged = _generated_order(self, gens + [candidate])
            if enlarged > seen:
                gens.append(candidate)
                seen = enlarged
        if not gens:
            gens.append(self.identity())
        return gens

    def random_element(self, rng):
        raise NotImplementedError


def _generated_order(group: BlackBoxGroup, gens: Sequence) -> int:
    seen = {group.encode(group.identity())}
    frontier = [group.identity()]
    while frontier:
        current = frontier.pop()
        for g in gens:
            nxt = group.mul(current, g)
            key = group.encode(nxt)
            if key not in seen:
                seen.add(key)
                frontier.append(nxt)
    return len(seen)


class ZNStarGroup(BlackBoxGroup):
    """Multiplicative group of units modulo N; mul/inv via Euclid."""

    def __init__(self, modulus: int) -> None:
        super().__init__()
        if modulus < 2:
            raise BlackBoxError(f"modulus must be >= 2, got {modulus}")
        self.modulus = modulus
        self.encoding_length = max(1, (modulus - 1).bit_length())

    def _check(self, x) -> int:
        if not self.is_element(x):
            raise BlackBoxError(f"{x} is not a unit modulo {self.modulus}")
        return x

    def _mul(self, x, y):
        return (self._check(x) * self._check(y)) % self.modulus

    def _inv(self, x):
        return pow(self._check(x), -1, self.modulus)

    def identity(self):
        return 1

    def is_element(self, x) -> bool:
        return (
            isinstance(x, int)
            and 1 <= x < self.modulus
            and math.gcd(x, self.modulus) == 1
        )

    def encode(self, x) -> str:
        return format(self._check(x), "b").zfill(self.encoding_length)

    def elements(self) -> Iterator[int]:
        return (x for x in range(1, self.modulus) if math.gcd(x, self.modulus) == 1)

    def order(self) -> int:
        return sum(1 for _ in self.elements())

    def random_element(self, rng):
        # Rejection sampling of [0, N) by gcd.
        while True:
            x = int(rng.integers(self.modulus))
            if x >= 1 and math.gcd(x, self.modulus) == 1:
                return x

    def __repr__(self) -> str:
        return f"ZNStarGroup({self.modulus})"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return False
    return True


Point = tuple[int, int] | None  # affine point, or None for the point at infinity


class EllipticCurveGroup(BlackBoxGroup):
    """Points of y^2 = x^3 + a x + b over F_p (p > 3 prime), plus O.

    The chord-and-tangent law; O is the identity and -P reflects about the
    x axis.  Elements encode canonically as `x,y` with coordinates in [0, p)
    and O as a reserved tag.
    """

    def __init__(self, p: int, a: int, b: int) -> None:
        super().__init__()
        if p <= 3 or not _is_prime(p):
            raise BlackBoxError(f"field size must be a prime > 3, got {p}")
        a %= p
        b %= p
        if (-16 * (4 * a**3 + 27 * b**2)) % p == 0:
            raise BlackBoxError(f"singular curve: discriminant is 0 mod {p}")
        self.p = p
        self.a = a
        self.b = b
        self.encoding_length = 2 * max(1, (p - 1).bit_length()) + 1

    def is_element(self, pt: Point) -> bool:
        if pt is None:
            return True
        if not (isinstance(pt, tuple) and len(pt) == 2):
            return False
        x, y = pt
        if not (0 <= x < self.p and 0 <= y < self.p):
            return False
        return (y * y - (x**3 + self.a * x + self.b)) % self.p == 0

    def _check(self, pt: Point) -> Point:
        if not self.is_element(pt):
            raise BlackBoxError(f"{pt} is not on the curve")
        return pt

    def _mul(self, pt1: Point, pt2: Point) -> Point:
        self._check(pt1)
        self._check(pt2)
        if pt1 is None:
            return pt2
        if pt2 is None:
            return pt1
        x1, y1 = pt1
        x2, y2 = pt2
        if x1 == x2 and (y1 + y2) % self.p == 0:
            return None  # inverse pair meets at the point at infinity
        if pt1 == pt2:
            lam = (3 * x1 * x1 + self.a) * pow(2 * y1, -1, self.p) % self.p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, self.p) % self.p
        x3 = (lam * lam - x1 - x2) % self.p
        y3 = (lam * (x1 - x3) - y1) % self.p
        return (x3, y3)

    def _inv(self, pt: Point) -> Point:
        self._check(pt)
        if pt is None:
            return None
        x, y = pt
        return (x, (-y) % self.p)

    def identity(self) -> Point:
        return None

    def encode(self, pt: Point) -> str:
        self._check(pt)
        if pt is None:
            return "O"
        return f"{pt[0]},{pt[1]}"

    def elements(self) -> Iterator[Point]:
        yield None
        for x in range(self.p):
            rhs = (x**3 + self.a * x + self.b) % self.p
            for y in range(self.p):
                if (y * y) % self.p == rhs:
                    yield (x, y)

    def order(self) -> int:
        return sum(1 for _ in self.elements())

    def random_element(self, rng) -> Point:
        points = list(self.elements())
        return points[int(rng.integers(len(points)))]

    def __repr__(self) -> str:
        return f"EllipticCurveGroup(p={self.p}, a={self.a}, b={self.b})"


def ec_add(group: EllipticCurveGroup, p1: Point, p2: Point) -> Point:
    return group.mul(p1, p2)


def bb_order(group: BlackBoxGroup, a, cap: int = DEFAULT_ORDER_CAP) -> int:
    """Order of `a` by brute force; the classical test oracle."""
    current = a
    for r in range(1, cap + 1):
        if current == group.identity():
            return r
        current = group.mul(current, a)
    raise BlackBoxError(f"order of {a!r} exceeds cap {cap}")


@dataclass
class DecompositionTable:
    """Learned structure of a black-box group.

    beta are independent generators with orders c (so the group is the direct
    sum of the <beta_i>), and the integer matrices relate old and new
    generators: beta = alpha * A and alpha = beta * B, in multiplicative
    word notation.
    """

    alpha: list
    beta: list
    a: Matrix
    b: Matrix
    c: list[int]
    provenance: dict = field(default_factory=dict)

    def isomorphism_type(self) -> list[int]:
        """Invariant factors (sorted by divisibility) of the group."""
        rels = [
            [self.c[i] if i == j else 0 for j in range(len(self.c))]
            for i in range(len(self.c))
        ]
        factors = [d for d in smith_normal_form(rels).diagonal if d > 1]
        return factors

    def order(self) -> int:
        result = 1
        for ci in self.c:
            result *= ci
        return result

    def verify(self, group: BlackBoxGroup, exhaustive: bool = False) -> None:
        """Check the table's defining identities by oracle multiplication."""
        k, ell = len(self.alpha), len(self.beta)
        if any(len(row) != ell for row in self.a) or len(self.a) != k:
            raise BlackBoxError("matrix A has the wrong shape")
        if any(len(row) != k for row in self.b) or len(self.b) != ell:
            raise BlackBoxError("matrix B has the wrong shape")
        for j in range(ell):
            column = [self.a[i][j] for i in range(k)]
            if group.word(self.alpha, column) != self.beta[j]:
                raise BlackBoxError(f"beta[{j}] != alpha * A[:, {j}]")
        for j in range(k):
            column = [self.b[i][j] for i in range(ell)]
            if group.word(self.beta, column) != self.alpha[j]:
                raise BlackBoxError(f"alpha[{j}] != beta * B[:, {j}]")
        for i, (b_i, c_i) in enumerate(zip(self.beta, self.c)):
            if bb_order(group, b_i, cap=c_i) != c_i:
                raise BlackBoxError(f"order of beta[{i}] is not {c_i}")
        if exhaustive:
            # Direct-sum check: the c-box enumerates the group bijectively.
            seen = set()
            for exponents in _exponent_box(self.c):
                seen.add(group.encode(group.word(self.beta, exponents)))
            if len(seen) != self.order():
                raise BlackBoxError("beta generators are not independent")


def _exponent_box(moduli: Sequence[int]) -> Iterator[tuple[int, ...]]:
    if not moduli:
        yield ()
        return
    head, *tail = moduli
    for rest in _exponent_box(tail):
        for e in range(head):
            yield (e, *rest)


def cayley_relations(
    group: BlackBoxGroup, generators: Sequence, cap: int = DEFAULT_ORDER_CAP
) -> tuple[list[list[int]], int]:
    """Relation lattice generators for the exponent map Z^k -> <generators>.

    Walks the Cayley graph recording one exponent word per element; the
    closing edges generate the full relation lattice (spanning-tree
    argument).  Returns (relations, number of elements reached).
    """
    generators = list(generators)
    if not generators:
        raise BlackBoxError("need at least one generator")
    k = len(generators)
    identity_key = group.encode(group.identity())
    words: dict[str, list[int]] = {identity_key: [0] * k}
    values = {identity_key: group.identity()}
    relations: list[list[int]] = []
    frontier = [identity_key]
    while frontier:
        key = frontier.pop()
        base_word = words[key]
        for j, g in enumerate(generators):
            nxt = group.mul(values[key], g)
            nxt_key = group.encode(nxt)
            stepped = list(base_word)
            stepped[j] += 1
            if nxt_key in words:
                relation = [a - b for a, b in zip(stepped, words[nxt_key])]
                if any(relation):
                    relations.append(relation)
            else:
                if len(words) >= cap:
                    raise BlackBoxError(f"group order exceeds cap {cap}")
                words[nxt_key] = stepped
                values[nxt_key] = nxt
                frontier.append(nxt_key)
    return relations, len(words)


def bb_decompose_bruteforce(
    group: BlackBoxGroup, generators: Sequence, cap: int = DEFAULT_ORDER_CAP
) -> DecompositionTable:
    """Classical decomposition oracle: exhaust the group, then SNF the relations."""
    generators = list(generators)
    relations, size = cayley_relations(group, generators, cap)
    if group.order() != size:
        raise BlackBoxError("generators do not generate the group")
    table = decomposition_from_relations(group, generators, relations)
    if table.order() != size:
        raise BlackBoxError("relation lattice does not pin down the group")
    return table


def decomposition_from_relations(
    group: BlackBoxGroup, generators: Sequence, relations: Sequence[Sequence[int]]
) -> DecompositionTable:
    """Build a decomposition table from a full relation lattice for `generators`.

    The relation lattice L must satisfy Z^k / L isomorphic to the group via
    exponent words; the SNF change of basis U then gives independent
    generators beta_i = alpha^(U e_i) with the diagonal as their orders.
    """
    k = len(generators)
    rel_rows = hermite_reduce(relations) or []
    rel_cols = [[row[i] for row in rel_rows] for i in range(k)] if rel_rows else []
    matrix = rel_cols if rel_rows else [[0] * 1 for _ in range(k)]
    snf = smith_normal_form(matrix)
    diag = snf.diagonal + [0] * (k - len(snf.diagonal))
    if any(d == 0 for d in diag):
        raise BlackBoxError("relation lattice has infinite quotient")
    keep = [i for i in range(k) if diag[i] > 1]
    beta = []
    a_matrix = [[snf.u[i][j] for j in keep] for i in range(k)]
    for j in keep:
        column = [snf.u[i][j] for i in range(k)]
        beta.append(group.word(generators, column))
    c = [diag[i] for i in keep]
    b_matrix = [
        [snf.u_inv[i][j] % c[pos] for j in range(k)]
        for pos, i in enumerate(keep)
    ]
    return DecompositionTable(alpha=list(generators), beta=beta, a=a_matrix, b=b_matrix, c=c)
