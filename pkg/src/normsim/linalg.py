"""Exact integer/rational linear algebra: Smith normal form, linear systems
over groups with mixed moduli, integral pseudo-inverses, continued fractions.

Matrices are plain lists of lists of Python ints (or Fractions where noted),
so every result is exact.  Nothing here is asymptotically clever; desk-scale
inputs keep the classical elimination algorithms comfortably fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]
Vector = list[int]


class LinalgError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small dense helpers
# ---------------------------------------------------------------------------


def identity_matrix(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros_matrix(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


def mat_copy(a: Sequence[Sequence[int]]) -> Matrix:
    return [list(row) for row in a]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if a and b and len(a[0]) != len(b):
        raise LinalgError(f"shape mismatch: {len(a)}x{len(a[0])} @ {len(b)}x{len(b[0])}")
    cols = len(b[0]) if b else 0
    return [
        [sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(cols)]
        for i in range(len(a))
    ]


def mat_vec(a: Sequence[Sequence], x: Sequence) -> list:
    return [sum(row[j] * x[j] for j in range(len(x))) for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*a)] if a else []


def det(a: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise LinalgError("determinant needs a square matrix")
    if n == 0:
        return 1
    m = mat_copy(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass
class SmithDecomposition:
    """A = U @ D @ V with U, V unimodular and D diagonal, d1 | d2 | ...

    u_inv and v_inv hold the exact integer inverses of U and V; they come out
    of the elimination for free and every consumer of the decomposition wants
    at least one of them.
    """

    u: Matrix
    d: Matrix
    v: Matrix
    u_inv: Matrix
    v_inv: Matrix

    @property
    def diagonal(self) -> list[int]:
        return [self.d[i][i] for i in range(min(len(self.d), len(self.d[0]) if self.d else 0))]

    def verify(self, a: Sequence[Sequence[int]]) -> None:
        if mat_mul(self.u, mat_mul(self.d, self.v)) != mat_copy(a):
            raise LinalgError("U @ D @ V != A")
        if abs(det(self.u)) != 1 or abs(det(self.v)) != 1:
            raise LinalgError("U or V is not unimodular")
        if mat_mul(self.u, self.u_inv) != identity_matrix(len(self.u)):
            raise LinalgError("u_inv is wrong")
        if mat_mul(self.v, self.v_inv) != identity_matrix(len(self.v)):
            raise LinalgError("v_inv is wrong")
        diag = self.diagonal
        for i, entry in enumerate(diag):
            if entry < 0:
                raise LinalgError("negative diagonal entry")
            if i + 1 < len(diag) and diag[i] != 0 and diag[i + 1] % diag[i] != 0:
                raise LinalgError("divisibility chain broken")


def smith_normal_form(a: Sequence[Sequence[int]]) -> SmithDecomposition:
    """Smith normal form via elementary operations, smallest pivot first.

    Choosing the minimal-magnitude nonzero entry as pivot keeps coefficient
    growth in check on the integer matrices seen here.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    d = mat_copy(a)
    u = identity_matrix(rows)
    u_inv = identity_matrix(rows)
    v = identity_matrix(cols)
    v_inv = identity_matrix(cols)

    # Row op on d is mirrored inversely on u (columns) and directly on u_inv
    # (rows), maintaining u @ d @ v == a, u @ u_inv == I, v @ v_inv == I.
    def row_add(i: int, j: int, k: int) -> None:  # row_j += k * row_i
        d[j] = [x + k * y for x, y in zip(d[j], d[i])]
        for r in range(rows):
            u[r][i] -= k * u[r][j]
        u_inv[j] = [x + k * y for x, y in zip(u_inv[j], u_inv[i])]

    def row_swap(i: int, j: int) -> None:
        d[i], d[j] = d[j], d[i]
        for r in range(rows):
            u[r][i], u[r][j] = u[r][j], u[r][i]
        u_inv[i], u_inv[j] = u_inv[j], u_inv[i]

    def row_negate(i: int) -> None:
        d[i] = [-x for x in d[i]]
        for r in range(rows):
            u[r][i] = -u[r][i]
        u_inv[i] = [-x for x in u_inv[i]]

    def col_add(i: int, j: int, k: int) -> None:  # col_j += k * col_i
        for r in range(rows):
            d[r][j] += k * d[r][i]
        v[i] = [x - k * y for x, y in zip(v[i], v[j])]
        for r in range(cols):
            v_inv[r][j] += k * v_inv[r][i]

    def col_swap(i: int, j: int) -> None:
        for r in range(rows):
            d[r][i], d[r][j] = d[r][j], d[r][i]
        v[i], v[j] = v[j], v[i]
        for r in range(cols):
            v_inv[r][i], v_inv[r][j] = v_inv[r][j], v_inv[r][i]

    def smallest_pivot(k: int) -> tuple[int, int] | None:
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                if d[i][j] != 0 and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        return best

    for k in range(min(rows, cols)):
        while True:
            pivot = smallest_pivot(k)
            if pivot is None:
                break
            pi, pj = pivot
            if pi != k:
                row_swap(k, pi)
            if pj != k:
                col_swap(k, pj)
            if d[k][k] < 0:
                row_negate(k)
            # Clear column k below the pivot, then row k to its right.
            progressed = False
            for i in range(k + 1, rows):
                if d[i][k] != 0:
                    row_add(k, i, -(d[i][k] // d[k][k]))
                    progressed = progressed or d[i][k] != 0
            for j in range(k + 1, cols):
                if d[k][j] != 0:
                    col_add(k, j, -(d[k][j] // d[k][k]))
                    progressed = progressed or d[k][j] != 0
            if any(d[i][k] != 0 for i in range(k + 1, rows)):
                continue
            if any(d[k][j] != 0 for j in range(k + 1, cols)):
                continue
            # Pivot must divide the whole remaining block for the chain.
            offender = None
            for i in range(k + 1, rows):
                for j in range(k + 1, cols):
                    if d[i][j] % d[k][k] != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_add(offender, k, 1)
        if smallest_pivot(k) is None:
            break

    return SmithDecomposition(u=u, d=d, v=v, u_inv=u_inv, v_inv=v_inv)


def invariant_factors(a: Sequence[Sequence[int]]) -> list[int]:
    """Nontrivial diagonal entries (> 1) of the Smith normal form of `a`."""
    return [x for x in smith_normal_form(a).diagonal if x not in (0, 1)]


# ---------------------------------------------------------------------------
# Hermite reduction of generating sets
# ---------------------------------------------------------------------------


def hermite_reduce(vectors: Sequence[Sequence[int]]) -> list[Vector]:
    """Row-style Hermite normal form of the lattice spanned by `vectors`.

    Returns a deterministic, duplicate-free generating set: echelon shape
    with positive pivots, entries above each pivot reduced into [0, pivot).
    """
    work = [list(v) for v in vectors if any(v)]
    if not work:
        return []
    n = len(work[0])
    basis: list[Vector] = []
    for col in range(n):
        # Invariant: every row in `work` is zero left of `col`.
        while True:
            nonzero = sorted(
                (r for r in work if r[col] != 0), key=lambda r: abs(r[col])
            )
            if len(nonzero) <= 1:
                break
            head = nonzero[0]
            for r in nonzero[1:]:
                q = r[col] // head[col]
                for j in range(n):
                    r[j] -= q * head[j]
            work = [r for r in work if any(r)]
        remaining = [r for r in work if r[col] != 0]
        if remaining:
            head = remaining[0]
            if head[col] < 0:
                for j in range(n):
                    head[j] = -head[j]
            basis.append(head)
            work = [r for r in work if r is not head]
    # Reduce entries above each pivot for a canonical basis.
    for i in range(len(basis)):
        pivot_col = next(j for j in range(n) if basis[i][j] != 0)
        for k in range(i):
            q = basis[k][pivot_col] // basis[i][pivot_col]
            if q:
                for j in range(n):
                    basis[k][j] -= q * basis[i][j]
    return basis


# ---------------------------------------------------------------------------
# Linear systems over groups with mixed moduli
# ---------------------------------------------------------------------------


@dataclass
class GroupLinearSystem:
    """Rows are congruences: sum_j a[i][j] x_j = b[i]  (mod moduli[i]).

    A modulus of 0 means the row holds over Z.  Unknowns range over Z;
    callers whose unknowns live in Z_N get the N e_j relations in the kernel
    automatically whenever the system itself respects them.
    """

    a: Matrix
    b: Vector
    moduli: Vector

    def __post_init__(self) -> None:
        rows = len(self.a)
        if len(self.b) != rows or len(self.moduli) != rows:
            raise LinalgError("inconsistent system dimensions")
        width = len(self.a[0]) if rows else 0
        if any(len(row) != width for row in self.a):
            raise LinalgError("ragged coefficient matrix")
        if any(m < 0 for m in self.moduli):
            raise LinalgError("moduli must be nonnegative")


def solve_integer_system(
    a: Sequence[Sequence[int]], b: Sequence[int]
) -> tuple[Vector, list[Vector]] | None:
    """General solution of A x = b over Z, or None if infeasible.

    Returns (x0, kernel generators); the solution set is x0 + Z-span(kernel).
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if len(b) != rows:
        raise LinalgError("right-hand side has wrong length")
    if rows == 0:
        return [0] * cols, hermite_reduce(identity_matrix(cols))
    snf = smith_normal_form(a)
    c = mat_vec(snf.u_inv, list(b))
    diag = snf.diagonal
    z = [0] * cols
    free: list[int] = []
    for i in range(cols):
        di = diag[i] if i < len(diag) else 0
        ci = c[i] if i < rows else 0
        if di == 0:
            if i < rows and ci != 0:
                return None
            free.append(i)
        else:
            if ci % di != 0:
                return None
            z[i] = ci // di
    if any(c[i] != 0 for i in range(cols, rows)):
        return None
    x0 = mat_vec(snf.v_inv, z)
    kernel = [[snf.v_inv[r][i] for r in range(cols)] for i in free]
    return x0, hermite_reduce(kernel)


def solve_group_system(system: GroupLinearSystem) -> tuple[Vector, list[Vector]] | None:
    """General solution of a mixed-modulus system, or None if infeasible.

    Each row with modulus m gains an auxiliary unknown multiplied by m,
    homogenizing the system into a single integer system solved over Z via
    the Smith normal form; auxiliary coordinates are then projected away.
    """
    rows = len(system.a)
    cols = len(system.a[0]) if rows else 0
    aux = [i for i in range(rows) if system.moduli[i] != 0]
    widened = [list(row) + [0] * len(aux) for row in system.a]
    for pos, i in enumerate(aux):
        widened[i][cols + pos] = system.moduli[i]
    solved = solve_integer_system(widened, system.b)
    if solved is None:
        return None
    x0_wide, kernel_wide = solved
    x0 = x0_wide[:cols]
    kernel = hermite_reduce([k[:cols] for k in kernel_wide])
    # Shift the particular solution into a canonical corner of the lattice.
    for gen in kernel:
        pivot = next(j for j in range(cols) if gen[j] != 0)
        q = x0[pivot] // gen[pivot]
        if q:
            for j in range(cols):
                x0[j] -= q * gen[j]
    return x0, kernel


def integral_pseudo_inverse(a: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Rational A# with A (A# x) = x and A# x integral for integer x in im(A)."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    snf = smith_normal_form(a)
    diag = snf.diagonal
    d_sharp = [[Fraction(0)] * rows for _ in range(cols)]
    for i, entry in enumerate(diag):
        if entry != 0 and i < cols:
            d_sharp[i][i] = Fraction(1, entry)
    return mat_mul(snf.v_inv, mat_mul(d_sharp, snf.u_inv))


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------


def continued_fraction_reconstruct(p: Fraction, r_max: int) -> Fraction | None:
    """Best rational k/r with r <= r_max hidden in a noisy sample p in [0, 1).

    If some k/r with r <= r_max satisfies |p - k/r| <= 1/(2 r_max^2) it is
    unique and is found among the convergents of p; otherwise returns None.
    """
    if r_max < 1:
        raise LinalgError(f"r_max must be >= 1, got {r_max}")
    p = Fraction(p)
    if not 0 <= p < 1:
        raise LinalgError(f"sample must lie in [0, 1), got {p}")
    tolerance = Fraction(1, 2 * r_max * r_max)
    best: Fraction | None = None
    h_prev, h = 1, int(p)
    k_prev, k = 0, 1
    x = p - int(p)
    while True:
        candidate = Fraction(h, k)
        if k <= r_max and 0 <= candidate < 1 and abs(p - candidate) <= tolerance:
            if best is None or abs(p - candidate) < abs(p - best):
                best = candidate
        if x == 0 or k > r_max:
            break
        x = 1 / x
        digit = int(x)
        x -= digit
        h_prev, h = h, digit * h + h_prev
        k_prev, k = k, digit * k + k_prev
    return best
