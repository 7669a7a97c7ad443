"""Normalizer-circuit intermediate representation.

A circuit is a gate list over a designated basis that may change:
QFT gates flip infinite registers between their Z and T labels, while
automorphism and quadratic phase gates act relative to the basis in force.
Gates are either in normal form (block-structured matrices, quadratic-form
data) or black-box callables carrying a precision bound.

Phases are exact rationals q with xi = exp(2 pi i q) throughout; complex
numbers appear only in the dense simulator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .blackbox import BlackBoxGroup, EllipticCurveGroup, ZNStarGroup, bb_order
from .groups import (
    ElementaryGroup,
    Factor,
    GroupElement,
    GroupError,
    format_group,
    parse_group,
)
from .linalg import (
    GroupLinearSystem,
    det,
    identity_matrix,
    invariant_factors,
    mat_mul,
    solve_group_system,
)

Rational = Fraction | int


class InvalidGate(ValueError):
    """A gate failed normal-form validation; the message names the condition."""


class CircuitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrix representations of group automorphisms
# ---------------------------------------------------------------------------


def _entry_condition(target: Factor, source: Factor, value: Fraction) -> str | None:
    """First violated normal-form condition for one matrix entry, or None."""
    t, s = target.kind, source.kind
    if s == "T" and t in ("Z", "cyclic"):
        if value != 0:
            return f"entries from T into {target} must vanish, got {value}"
        return None
    if t == "Z" and s == "cyclic":
        if value != 0:
            return f"entries from {source} into Z must vanish, got {value}"
        return None
    if t == "T" and s == "T":
        if value.denominator != 1:
            return f"T-to-T entries must be integers, got {value}"
        return None
    if t == "T":  # source Z or cyclic
        if s == "cyclic" and (value * source.modulus).denominator != 1:
            return (
                f"entries from {source} into T need denominator dividing "
                f"{source.modulus}, got {value}"
            )
        return None
    if t == "cyclic" and s == "cyclic":
        if value.denominator != 1:
            return f"finite-to-finite entries must be integers, got {value}"
        step = target.modulus // math.gcd(target.modulus, source.modulus)
        if value % step != 0:
            return (
                f"entries from {source} into {target} must be multiples of "
                f"{step}, got {value}"
            )
        return None
    # target Z or cyclic, source Z: any integer
    if value.denominator != 1:
        return f"entries into {target} must be integers, got {value}"
    return None


def _reduce_entry(target: Factor, source: Factor, value: Fraction) -> Fraction:
    """Canonical representative of an entry, respecting what it is defined mod."""
    if target.kind == "T" and source.kind == "T":
        return value  # exact integers, not defined modulo anything
    if target.kind == "T":
        return value % 1
    if target.kind == "cyclic" and source.kind != "T":
        return value % target.modulus
    return value


@dataclass(frozen=True)
class MatrixRep:
    """Block-structured matrix realizing a group automorphism on coordinates."""

    group: ElementaryGroup
    matrix: tuple[tuple[Fraction, ...], ...]

    def apply(self, el: GroupElement) -> GroupElement:
        if el.group != self.group:
            raise CircuitError(f"element of {el.group} fed to a map on {self.group}")
        coords = [
            sum(row[j] * el.coords[j] for j in range(len(row)))
            for row in self.matrix
        ]
        return self.group.reduce(coords)

    def compose(self, other: MatrixRep) -> MatrixRep:
        """self after other (matrix product), re-validated."""
        if self.group != other.group:
            raise CircuitError("composition across different groups")
        product = mat_mul([list(r) for r in self.matrix], [list(r) for r in other.matrix])
        return validate_matrix_rep(product, self.group)

    def inverse(self) -> MatrixRep:
        return matrix_rep_inverse(self)

    def equals_as_map(self, other: MatrixRep) -> bool:
        if self.group != other.group:
            return False
        factors = self.group.factors
        for i, target in enumerate(factors):
            for j, source in enumerate(factors):
                a, b = self.matrix[i][j], other.matrix[i][j]
                if source.kind == "T" and target.kind == "T":
                    if a != b:
                        return False
                elif target.char == 0:
                    if a != b:
                        return False
                elif (a - b) % target.char != 0:
                    return False
        return True


def validate_matrix_rep(
    matrix: Sequence[Sequence[Rational]], group: ElementaryGroup
) -> MatrixRep:
    """Accept exactly the block-valid matrices that define automorphisms.

    Raises InvalidGate carrying the first violated condition: an entry
    outside its divisibility class, or failure of invertibility (unimodular
    Z and T blocks, bijective finite block).
    """
    m = len(group.factors)
    if len(matrix) != m or any(len(row) != m for row in matrix):
        raise InvalidGate(f"matrix must be {m}x{m} for {group}")
    entries = [[Fraction(x) for x in row] for row in matrix]
    for i, target in enumerate(group.factors):
        for j, source in enumerate(group.factors):
            problem = _entry_condition(target, source, entries[i][j])
            if problem is not None:
                raise InvalidGate(f"entry ({i},{j}): {problem}")
            entries[i][j] = _reduce_entry(target, source, entries[i][j])

    z_idx = [i for i, f in enumerate(group.factors) if f.kind == "Z"]
    t_idx = [i for i, f in enumerate(group.factors) if f.kind == "T"]
    f_idx = [i for i, f in enumerate(group.factors) if f.kind == "cyclic"]
    for name, idx in (("Z", z_idx), ("T", t_idx)):
        block = [[int(entries[i][j]) for j in idx] for i in idx]
        if idx and abs(det(block)) != 1:
            raise InvalidGate(f"{name} block is not unimodular")
    if f_idx:
        moduli = [group.factors[i].modulus for i in f_idx]
        block = [
            [int(entries[i][j]) for j in f_idx]
            + [moduli[r] if c == r else 0 for c in range(len(f_idx))]
            for r, i in enumerate(f_idx)
        ]
        if invariant_factors(block):
            raise InvalidGate("finite block is not bijective")
    return MatrixRep(group=group, matrix=tuple(tuple(row) for row in entries))


def matrix_rep_inverse(rep: MatrixRep) -> MatrixRep:
    """Two-sided inverse representation, by blockwise back-substitution."""
    group = rep.group
    factors = group.factors
    m = len(factors)
    a = [list(row) for row in rep.matrix]
    z_idx = [i for i, f in enumerate(factors) if f.kind == "Z"]
    t_idx = [i for i, f in enumerate(factors) if f.kind == "T"]
    f_idx = [i for i, f in enumerate(factors) if f.kind == "cyclic"]
    x = [[Fraction(0)] * m for _ in range(m)]

    def sub(rows, cols):
        return [[a[i][j] for j in cols] for i in rows]

    def int_inverse(idx):
        block = [[int(a[i][j]) for j in idx] for i in idx]
        d = det(block)
        inv = _adjugate(block)
        return [[v * d for v in row] for row in inv] if d == -1 else inv

    if z_idx:
        inv_zz = int_inverse(z_idx)
        for r, i in enumerate(z_idx):
            for c, j in enumerate(z_idx):
                x[i][j] = Fraction(inv_zz[r][c])
    if t_idx:
        inv_tt = int_inverse(t_idx)
        for r, i in enumerate(t_idx):
            for c, j in enumerate(t_idx):
                x[i][j] = Fraction(inv_tt[r][c])
    if f_idx:
        moduli = [factors[i].modulus for i in f_idx]
        a_ff = [[int(v) for v in row] for row in sub(f_idx, f_idx)]
        for c in range(len(f_idx)):
            rhs = [1 if r == c else 0 for r in range(len(f_idx))]
            solved = solve_group_system(GroupLinearSystem(a_ff, rhs, moduli))
            if solved is None:
                raise InvalidGate("finite block is not bijective")
            for r, i in enumerate(f_idx):
                x[i][f_idx[c]] = Fraction(solved[0][r] % moduli[r])
        if z_idx:
            # X_FZ A_ZZ + X_FF A_FZ = 0 (mod moduli)
            x_ff = sub_matrix(x, f_idx, f_idx)
            a_fz = sub(f_idx, z_idx)
            x_zz = sub_matrix(x, z_idx, z_idx)
            correction = mat_mul(mat_mul(x_ff, a_fz), x_zz)
            for r, i in enumerate(f_idx):
                for c, j in enumerate(z_idx):
                    x[i][j] = (-correction[r][c]) % moduli[r]
    if t_idx:
        x_tt = sub_matrix(x, t_idx, t_idx)
        if f_idx:
            # X_TF A_FF = -X_TT A_TF (mod 1), entries alpha/N_source.
            a_tf = sub(t_idx, f_idx)
            target = mat_mul(x_tt, a_tf)
            a_ff = [[int(v) for v in row] for row in sub(f_idx, f_idx)]
            moduli = [factors[i].modulus for i in f_idx]
            scale = math.lcm(*moduli)
            for r, i in enumerate(t_idx):
                # Unknown row u with u_k = alpha_k / N_k; solve in alpha.
                coeffs = [
                    [a_ff[k][c] * (scale // moduli[k]) for k in range(len(f_idx))]
                    for c in range(len(f_idx))
                ]
                rhs = []
                for c in range(len(f_idx)):
                    value = -target[r][c] * scale
                    if value.denominator != 1:
                        raise InvalidGate("inverse construction hit a non-integer")
                    rhs.append(int(value))
                solved = solve_group_system(
                    GroupLinearSystem(coeffs, rhs, [scale] * len(f_idx))
                )
                if solved is None:
                    raise InvalidGate("no inverse on the torus-to-finite block")
                for k in range(len(f_idx)):
                    x[i][f_idx[k]] = Fraction(solved[0][k], moduli[k]) % 1
        if z_idx:
            # X_TZ A_ZZ + X_TF A_FZ + X_TT A_TZ = 0 (mod 1)
            acc = mat_mul(x_tt, sub(t_idx, z_idx))
            if f_idx:
                acc2 = mat_mul(sub_matrix(x, t_idx, f_idx), sub(f_idx, z_idx))
                acc = [[p + q for p, q in zip(r1, r2)] for r1, r2 in zip(acc, acc2)]
            x_zz = sub_matrix(x, z_idx, z_idx)
            correction = mat_mul(acc, x_zz)
            for r, i in enumerate(t_idx):
                for c, j in enumerate(z_idx):
                    x[i][j] = (-correction[r][c]) % 1
    inverse = validate_matrix_rep(x, group)
    identity = validate_matrix_rep(identity_matrix(m), group)
    if not inverse.compose(rep).equals_as_map(identity):
        raise InvalidGate("constructed left inverse fails")
    if not rep.compose(inverse).equals_as_map(identity):
        raise InvalidGate("constructed right inverse fails")
    return inverse


def _adjugate(block: list[list[int]]) -> list[list[int]]:
    n = len(block)
    if n == 0:
        return []
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [block[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            out[j][i] = (-1) ** (i + j) * det(minor)
    return out


def sub_matrix(m, rows, cols):
    return [[m[i][j] for j in cols] for i in rows]


# ---------------------------------------------------------------------------
# quadratic phase functions
# ---------------------------------------------------------------------------


def _quadratic_entry_condition(fi: Factor, fj: Factor, value: Fraction) -> str | None:
    kinds = {fi.kind, fj.kind}
    if kinds == {"T"}:
        if value != 0:
            return f"T-T entries must vanish, got {value}"
        return None
    if kinds == {"Z", "T"}:
        if value.denominator != 1:
            return f"Z-T entries must be integers, got {value}"
        return None
    if kinds == {"Z"}:
        return None  # arbitrary rational
    if "T" in kinds:  # cyclic paired with T
        if value != 0:
            return f"finite-T entries must vanish, got {value}"
        return None
    divisor = math.gcd(
        fi.modulus if fi.kind == "cyclic" else 0,
        fj.modulus if fj.kind == "cyclic" else 0,
    )
    if (value * divisor).denominator != 1:
        return f"entry needs denominator dividing {divisor}, got {value}"
    return None


@dataclass(frozen=True)
class QuadraticForm:
    """Data (M, v) of a quadratic phase xi(g) = exp(pi i (gMg + Cg + 2vg)).

    C is never free: C(i) = M(i,i) char(G_i), which keeps xi well defined on
    the group even though gMg alone is not.
    """

    group: ElementaryGroup
    m: tuple[tuple[Fraction, ...], ...]
    v: tuple[Fraction, ...]

    @property
    def c(self) -> tuple[int, ...]:
        values = []
        for i, char in enumerate(self.group.chars):
            value = self.m[i][i] * char
            if value.denominator != 1:
                raise InvalidGate(f"C({i}) = M({i},{i}) char is not an integer")
            values.append(int(value))
        return tuple(values)

    def exponent(self, el: GroupElement) -> Fraction:
        """q(g) with xi(g) = exp(2 pi i q(g)), as a rational mod 1."""
        if el.group != self.group:
            raise CircuitError("element from the wrong group")
        g = el.coords
        quad = sum(
            g[i] * self.m[i][j] * g[j]
            for i in range(len(g))
            for j in range(len(g))
        )
        linear = sum(ci * gi for ci, gi in zip(self.c, g))
        cross = sum(2 * vi * gi for vi, gi in zip(self.v, g))
        return Fraction(quad + linear + cross) / 2 % 1

    def bilinear_exponent(self, g: GroupElement, h: GroupElement) -> Fraction:
        """Exponent of the bicharacter B(g,h) = exp(2 pi i g M h)."""
        total = sum(
            g.coords[i] * self.m[i][j] * h.coords[j]
            for i in range(len(g.coords))
            for j in range(len(h.coords))
        )
        return Fraction(total) % 1


def validate_quadratic(
    m: Sequence[Sequence[Rational]],
    v: Sequence[Rational],
    group: ElementaryGroup,
    check_law: bool = False,
) -> QuadraticForm:
    """Accept exactly the symmetric block-valid (M, v) pairs.

    With check_law=True the quadratic identity
    xi(g+h) = xi(g) xi(h) B(g,h) is verified exhaustively (finite groups
    small enough to enumerate only).
    """
    n = len(group.factors)
    if len(m) != n or any(len(row) != n for row in m):
        raise InvalidGate(f"M must be {n}x{n} for {group}")
    if len(v) != n:
        raise InvalidGate(f"v must have length {n}")
    entries = [[Fraction(x) for x in row] for row in m]
    for i in range(n):
        for j in range(n):
            if entries[i][j] != entries[j][i]:
                raise InvalidGate(f"M must be symmetric, differs at ({i},{j})")
            problem = _quadratic_entry_condition(
                group.factors[i], group.factors[j], entries[i][j]
            )
            if problem is not None:
                raise InvalidGate(f"entry ({i},{j}): {problem}")
    v_entries = []
    for i, factor in enumerate(group.factors):
        value = Fraction(v[i])
        if factor.kind == "T":
            if value.denominator != 1:
                raise InvalidGate(f"v[{i}] must be an integer for a T factor")
        elif factor.kind == "cyclic":
            if (value * factor.modulus).denominator != 1:
                raise InvalidGate(
                    f"v[{i}] needs denominator dividing {factor.modulus}"
                )
            value %= 1
        else:
            value %= 1
        v_entries.append(value)
    form = QuadraticForm(
        group=group,
        m=tuple(tuple(row) for row in entries),
        v=tuple(v_entries),
    )
    form.c  # forces the integrality assertion
    if check_law:
        elements = list(group.elements())
        for g in elements:
            for h in elements:
                lhs = form.exponent(g + h)
                rhs = (form.exponent(g) + form.exponent(h) + form.bilinear_exponent(g, h)) % 1
                if lhs != rhs:
                    raise InvalidGate(f"quadratic law fails at {g}, {h}")
    return form


# ---------------------------------------------------------------------------
# designated bases and gates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignatedBasis:
    """Group-element basis in force at one circuit time step.

    The elementary part records, register by register, which of the two
    standard bases an infinite register currently uses (Z or T label);
    finite factors and the optional black-box slot never change.
    """

    elementary: ElementaryGroup
    blackbox: BlackBoxGroup | None = None

    @property
    def num_registers(self) -> int:
        return len(self.elementary.factors) + (1 if self.blackbox else 0)

    @property
    def bb_register(self) -> int | None:
        return len(self.elementary.factors) if self.blackbox else None

    @property
    def is_finite(self) -> bool:
        return self.elementary.is_finite

    def dimension(self) -> int:
        size = self.elementary.order()
        if self.blackbox is not None:
            size *= self.blackbox.order()
        return size

    def make_point(self, values: Sequence) -> tuple:
        """Canonical point: reduced elementary coordinates plus bb element."""
        n = len(self.elementary.factors)
        if self.blackbox is None:
            if len(values) != n:
                raise CircuitError(f"point needs {n} coordinates")
            return tuple(self.elementary.reduce(values).coords)
        if len(values) != n + 1:
            raise CircuitError(f"point needs {n} coordinates plus a group element")
        if not self.blackbox.is_element(values[-1]):
            raise CircuitError(f"{values[-1]!r} is not in the black-box group")
        return tuple(self.elementary.reduce(values[:-1]).coords) + (values[-1],)

    def points(self, cap: int = 1 << 20) -> Iterator[tuple]:
        if self.dimension() > cap:
            raise CircuitError(f"basis dimension {self.dimension()} exceeds cap {cap}")
        if self.blackbox is None:
            for el in self.elementary.elements():
                yield el.coords
        else:
            bb_elements = sorted(self.blackbox.elements(), key=self.blackbox.encode)
            for el in self.elementary.elements():
                for b in bb_elements:
                    yield el.coords + (b,)

    def format_point(self, point: tuple) -> str:
        n = len(self.elementary.factors)
        inner = ", ".join(str(c) for c in point[:n])
        if self.blackbox is None:
            return f"({inner})"
        return f"({inner})|{_format_bb_element(self.blackbox, point[n])}"


def apply_qft_basis_update(
    basis: DesignatedBasis, registers: Sequence[int], over: str | None = None
) -> DesignatedBasis:
    """Flip Z and T labels on the targeted infinite registers.

    `over` pins the transform direction: "Z" demands the register currently
    carries the Z label, "T" the T label; omitted means either.  Finite
    registers are always legal and keep their label group.
    """
    factors = list(basis.elementary.factors)
    for r in registers:
        if basis.bb_register is not None and r == basis.bb_register:
            raise CircuitError("quantum Fourier transforms never touch the black-box slot")
        if not 0 <= r < len(factors):
            raise CircuitError(f"register {r} out of range")
        factor = factors[r]
        if factor.kind == "cyclic":
            if over not in (None, "finite"):
                raise CircuitError(f"register {r} is finite; direction {over!r} is meaningless")
            continue
        if over == "Z" and factor.kind != "Z":
            raise CircuitError(f"register {r} is in the T basis; QFT over Z is illegal")
        if over == "T" and factor.kind != "T":
            raise CircuitError(f"register {r} is in the Z basis; QFT over T is illegal")
        factors[r] = factor.dual()
    return DesignatedBasis(ElementaryGroup(tuple(factors)), basis.blackbox)


@dataclass(frozen=True)
class QFTGate:
    registers: tuple[int, ...]
    over: str | None = None

    def __post_init__(self):
        if len(set(self.registers)) != len(self.registers):
            raise CircuitError("duplicate registers in a QFT gate")


@dataclass(frozen=True)
class AutomorphismGate:
    """Basis permutation by a group automorphism.

    Either `rep` (normal form over the elementary label group, identity on
    any black-box slot) or `func` (black box on whole points, with the
    mandatory precision bound n_out when infinite registers are present).
    """

    rep: MatrixRep | None = None
    func: Callable | None = None
    name: str = ""
    n_out: int | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.rep is None) == (self.func is None):
            raise CircuitError("exactly one of rep/func must be given")

    @property
    def is_black_box(self) -> bool:
        return self.func is not None


@dataclass(frozen=True)
class QuadraticGate:
    """Diagonal phase gate; `func` maps a point to the rational exponent q."""

    form: QuadraticForm | None = None
    func: Callable | None = None
    name: str = ""
    n_out: int | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.form is None) == (self.func is None):
            raise CircuitError("exactly one of form/func must be given")

    @property
    def is_black_box(self) -> bool:
        return self.func is not None


Gate = QFTGate | AutomorphismGate | QuadraticGate


@dataclass
class NormalizerCircuit:
    """Gate sequence with its designated-basis trace.

    `validate` type-checks every gate against the basis in force at its
    position and records the trace; the final entry is the measurement basis.
    """

    initial_basis: DesignatedBasis
    gates: list

    def validate(self) -> list[DesignatedBasis]:
        trace = [self.initial_basis]
        basis = self.initial_basis
        for position, gate in enumerate(self.gates):
            basis = _check_gate(gate, basis, position)
            trace.append(basis)
        return trace

    @property
    def final_basis(self) -> DesignatedBasis:
        return self.validate()[-1]

    def qft_layers(self) -> int:
        """Number of maximal runs of consecutive QFT gates."""
        layers = 0
        previous_was_qft = False
        for gate in self.gates:
            is_qft = isinstance(gate, QFTGate)
            if is_qft and not previous_was_qft:
                layers += 1
            previous_was_qft = is_qft
        return layers

    def has_black_box_gates(self) -> bool:
        return any(
            isinstance(g, (AutomorphismGate, QuadraticGate)) and g.is_black_box
            for g in self.gates
        )


def _check_gate(gate, basis: DesignatedBasis, position: int) -> DesignatedBasis:
    try:
        if isinstance(gate, QFTGate):
            return apply_qft_basis_update(basis, gate.registers, gate.over)
        if isinstance(gate, (AutomorphismGate, QuadraticGate)):
            if gate.is_black_box:
                infinite = any(not f.is_finite for f in basis.elementary.factors)
                if infinite and gate.n_out is None:
                    raise CircuitError(
                        "black-box gates on infinite registers need a precision bound n_out"
                    )
                return basis
            data = gate.rep if isinstance(gate, AutomorphismGate) else gate.form
            if data.group != basis.elementary:
                raise CircuitError(
                    f"gate over {data.group} but the designated basis is {basis.elementary}"
                )
            return basis
        raise CircuitError(f"unknown gate type {type(gate).__name__}")
    except (CircuitError, InvalidGate) as exc:
        raise CircuitError(f"gate {position}: {exc}") from exc


# ---------------------------------------------------------------------------
# the repeated-squaring automorphism family and the finite-M obstruction
# ---------------------------------------------------------------------------


def word_exp_func(basis: DesignatedBasis, bases: Sequence) -> Callable:
    """Point map (k_1..k_m, x) -> (k_1..k_m, b_1^k_1 ... b_m^k_m x).

    `bases` holds one black-box element per elementary register (identity
    entries for registers that do not participate).  Exponent registers must
    carry integer labels (Z or cyclic) in the basis in force.
    """
    group = basis.blackbox
    if group is None:
        raise CircuitError("word-exponent gates need a black-box slot")
    bases = list(bases)
    if len(bases) != len(basis.elementary.factors):
        raise CircuitError("one base element per elementary register")
    for r, (factor, b) in enumerate(zip(basis.elementary.factors, bases)):
        if not group.is_element(b):
            raise CircuitError(f"base {b!r} is not a group element")
        if b != group.identity() and factor.kind == "T":
            raise CircuitError(f"register {r} carries a T label; exponents must be integers")

    def apply(point: tuple) -> tuple:
        *coords, x = point
        acc = x
        for b, k in zip(bases, coords):
            if b != group.identity():
                acc = group.mul(acc, group.power(b, int(k)))
        return tuple(coords) + (acc,)

    return apply


def check_modexp_normalizable(
    m: int,
    a,
    group: BlackBoxGroup,
    generators: Sequence | None = None,
    cap: int = 1 << 20,
):
    """Decide whether (k, x) -> (k, a^k x) on Z_M x B is an automorphism gate.

    Returns (True, MatrixRep over Z_M x Z_B) exactly when the order of `a`
    divides M; the emitted matrix is validated.  Otherwise (False, None):
    no normalizer circuit over the finite space approximates the gate.
    """
    from .blackbox import bb_decompose_bruteforce
    from .groups import cyclic as cyclic_factor

    if m < 1:
        raise CircuitError(f"modulus must be positive, got {m}")
    order = bb_order(group, a, cap=cap)
    if m % order != 0:
        return False, None
    if generators is None:
        import numpy as np

        generators = group.sample_generators(np.random.default_rng(0))
    if a not in generators:
        generators = [a] + list(generators)
    else:
        generators = [a] + [g for g in generators if g != a]
    table = bb_decompose_bruteforce(group, generators, cap=cap)
    # a is generator 0, so its beta-coordinates are the first column of B.
    a_coords = [table.b[i][0] for i in range(len(table.beta))]
    size = 1 + len(table.c)
    matrix = [[Fraction(0)] * size for _ in range(size)]
    matrix[0][0] = Fraction(1)
    for i, coord in enumerate(a_coords):
        matrix[i + 1][0] = Fraction(coord)
        matrix[i + 1][i + 1] = Fraction(1)
    target_group = ElementaryGroup(
        (cyclic_factor(m),) + tuple(cyclic_factor(c) for c in table.c)
    )
    rep = validate_matrix_rep(matrix, target_group)
    return True, rep


# ---------------------------------------------------------------------------
# circuit file format
# ---------------------------------------------------------------------------


def _format_bb_element(group: BlackBoxGroup, el) -> str:
    if isinstance(group, ZNStarGroup):
        return str(el)
    if isinstance(group, EllipticCurveGroup):
        return "O" if el is None else f"{el[0]},{el[1]}"
    return group.encode(el)


def _parse_bb_element(group: BlackBoxGroup, text: str):
    if isinstance(group, ZNStarGroup):
        el = int(text)
    elif isinstance(group, EllipticCurveGroup):
        if text.strip() == "O":
            el = None
        else:
            x, y = (int(part) for part in text.split(","))
            el = (x, y)
    else:
        raise CircuitError(f"cannot parse elements of {group!r}")
    if not group.is_element(el):
        raise CircuitError(f"{text!r} is not an element of {group!r}")
    return el


def group_descriptor(group: BlackBoxGroup) -> dict:
    if isinstance(group, ZNStarGroup):
        return {"type": "zn_star", "N": group.modulus}
    if isinstance(group, EllipticCurveGroup):
        return {"type": "ec", "p": group.p, "a": group.a, "b": group.b}
    raise CircuitError(f"no descriptor for {group!r}")


def group_from_descriptor(desc: dict) -> BlackBoxGroup:
    kind = desc.get("type")
    if kind == "zn_star":
        return ZNStarGroup(int(desc["N"]))
    if kind == "ec":
        return EllipticCurveGroup(int(desc["p"]), int(desc["a"]), int(desc["b"]))
    raise CircuitError(f"unknown group descriptor {desc!r}")


def _rational_to_json(value: Fraction) -> str:
    return str(value)


def _rational_from_json(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise CircuitError(f"bad rational literal {text!r}") from exc


def circuit_to_json(circuit: NormalizerCircuit) -> dict:
    basis = circuit.initial_basis
    underlying = ElementaryGroup(
        tuple(Factor("Z") if f.kind == "T" else f for f in basis.elementary.factors)
    )
    doc: dict = {
        "group": {"elementary": format_group(underlying)},
        "initial_basis": format_group(basis.elementary),
        "gates": [],
    }
    if basis.blackbox is not None:
        doc["group"]["blackbox"] = group_descriptor(basis.blackbox)
    for gate in circuit.gates:
        if isinstance(gate, QFTGate):
            entry: dict = {"qft": list(gate.registers)}
            if gate.over:
                entry["over"] = gate.over
        elif isinstance(gate, AutomorphismGate):
            if gate.is_black_box:
                if gate.name != "word_exp":
                    raise CircuitError(
                        f"black-box gate {gate.name!r} has no file representation"
                    )
                entry = {
                    "bb_automorphism": {
                        "name": "word_exp",
                        "bases": [
                            _format_bb_element(basis.blackbox, b)
                            for b in gate.params["bases"]
                        ],
                    }
                }
                if gate.n_out is not None:
                    entry["bb_automorphism"]["n_out"] = gate.n_out
            else:
                entry = {
                    "automorphism": {
                        "matrix": [
                            [_rational_to_json(x) for x in row]
                            for row in gate.rep.matrix
                        ]
                    }
                }
        elif isinstance(gate, QuadraticGate):
            if gate.is_black_box:
                raise CircuitError("black-box phase gates have no file representation")
            entry = {
                "quadratic": {
                    "M": [[_rational_to_json(x) for x in row] for row in gate.form.m],
                    "v": [_rational_to_json(x) for x in gate.form.v],
                }
            }
        else:
            raise CircuitError(f"unknown gate type {type(gate).__name__}")
        doc["gates"].append(entry)
    return doc


def circuit_from_json(doc: dict) -> NormalizerCircuit:
    try:
        group_doc = doc["group"]
        elementary = parse_group(doc.get("initial_basis") or group_doc["elementary"])
    except (KeyError, TypeError, GroupError) as exc:
        raise CircuitError(f"bad circuit header: {exc}") from exc
    blackbox = None
    if "blackbox" in group_doc:
        blackbox = group_from_descriptor(group_doc["blackbox"])
    basis = DesignatedBasis(elementary, blackbox)
    gates: list = []
    current = basis
    for position, entry in enumerate(doc.get("gates", [])):
        try:
            gate = _gate_from_json(entry, current)
        except (CircuitError, InvalidGate, KeyError, ValueError) as exc:
            raise CircuitError(f"gate {position}: {exc}") from exc
        gates.append(gate)
        current = _check_gate(gate, current, position)
    circuit = NormalizerCircuit(initial_basis=basis, gates=gates)
    circuit.validate()
    return circuit


def _gate_from_json(entry: dict, basis: DesignatedBasis):
    if "qft" in entry:
        return QFTGate(tuple(int(r) for r in entry["qft"]), entry.get("over"))
    if "automorphism" in entry:
        matrix = [
            [_rational_from_json(x) for x in row]
            for row in entry["automorphism"]["matrix"]
        ]
        return AutomorphismGate(rep=validate_matrix_rep(matrix, basis.elementary))
    if "quadratic" in entry:
        m = [[_rational_from_json(x) for x in row] for row in entry["quadratic"]["M"]]
        v = [_rational_from_json(x) for x in entry["quadratic"]["v"]]
        return QuadraticGate(form=validate_quadratic(m, v, basis.elementary))
    if "bb_automorphism" in entry:
        payload = entry["bb_automorphism"]
        if payload.get("name") != "word_exp":
            raise CircuitError(f"unknown black-box gate {payload.get('name')!r}")
        if basis.blackbox is None:
            raise CircuitError("word_exp needs a black-box slot")
        bases = [_parse_bb_element(basis.blackbox, text) for text in payload["bases"]]
        return AutomorphismGate(
            func=word_exp_func(basis, bases),
            name="word_exp",
            n_out=payload.get("n_out"),
            params={"bases": bases},
        )
    raise CircuitError(f"unrecognized gate entry {sorted(entry)}")


def load_circuit(path) -> NormalizerCircuit:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CircuitError(f"malformed JSON at line {exc.lineno}, column {exc.colno}") from exc
    return circuit_from_json(doc)


def save_circuit(circuit: NormalizerCircuit, path) -> None:
    with open(path, "w") as fh:
        json.dump(circuit_to_json(circuit), fh, indent=2)
        fh.write("\n")
