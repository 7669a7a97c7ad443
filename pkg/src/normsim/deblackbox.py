"""From black boxes to normal forms: encoding conversion and gate extraction.

Once a black-box group has been decomposed into independent generators, its
elements convert to exponent vectors and back, and every black-box gate of a
circuit can be upgraded in place to a validated normal form: automorphisms by
evaluating on unit vectors (with a scaled probe on torus factors), quadratic
phases through the difference identity q(x+y) - q(x) - q(y), the vector v
from the leftover linear part.  Extraction never trusts the promise: each
recovered form is re-validated and checked against the oracle before it is
installed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .blackbox import BlackBoxGroup, DecompositionTable, bb_decompose_bruteforce
from .circuits import (
    AutomorphismGate,
    CircuitError,
    DesignatedBasis,
    InvalidGate,
    MatrixRep,
    NormalizerCircuit,
    QFTGate,
    QuadraticForm,
    QuadraticGate,
    validate_matrix_rep,
    validate_quadratic,
)
from .groups import ElementaryGroup, GroupElement, cyclic

DEFAULT_ENTRY_BOUND = 1 << 10


class ExtractionError(ValueError):
    """The promised structure failed to materialize (or validation failed)."""


def next_prime_above(n: int) -> int:
    candidate = max(2, n + 1)
    while True:
        if all(candidate % p for p in range(2, int(candidate**0.5) + 1)):
            return candidate
        candidate += 1


# ---------------------------------------------------------------------------
# encoding bridge
# ---------------------------------------------------------------------------


@dataclass
class EncodingBridge:
    """Isomorphism between a decomposed coordinate group and a black-box group.

    encode maps an exponent vector g to beta_1^g(1) ... beta_d^g(d); decode
    inverts it.  Decoding is the multivariate discrete-logarithm problem; at
    desk scale it is answered from a memoized enumeration of the group, and
    the oracle calls spent building it are visible on the group's counter.
    """

    group: BlackBoxGroup
    table: DecompositionTable
    _decode_map: dict | None = field(default=None, repr=False)

    @property
    def z_group(self) -> ElementaryGroup:
        return ElementaryGroup(tuple(cyclic(c) for c in self.table.c))

    def encode(self, vector: Sequence[int] | GroupElement):
        if isinstance(vector, GroupElement):
            vector = [int(c) for c in vector.coords]
        return self.group.word(self.table.beta, list(vector))

    def decode(self, element) -> GroupElement:
        if not self.group.is_element(element):
            raise ExtractionError(f"{element!r} is not in the black-box group")
        if self._decode_map is None:
            self._decode_map = {}
            for candidate in self.z_group.elements():
                key = self.group.encode(self.encode(candidate))
                self._decode_map[key] = candidate
        return self._decode_map[self.group.encode(element)]


def build_bridge(
    group: BlackBoxGroup,
    generators: Sequence | None = None,
    decompose: Callable | None = None,
    rng=None,
) -> EncodingBridge:
    if decompose is None:
        decompose = bb_decompose_bruteforce
    if generators is None:
        generators = group.sample_generators(rng or np.random.default_rng(0))
    table = decompose(group, generators)
    return EncodingBridge(group=group, table=table)


# ---------------------------------------------------------------------------
# normal-form extraction
# ---------------------------------------------------------------------------


def _unit(group: ElementaryGroup, j: int, scale: Fraction = Fraction(1)) -> list:
    coords = [Fraction(0)] * len(group.factors)
    coords[j] = scale
    return coords


def _centered(value: Fraction) -> Fraction:
    """Representative of value mod 1 in (-1/2, 1/2]."""
    value %= 1
    return value - 1 if value > Fraction(1, 2) else value


def extract_matrix_entries(
    f: Callable, group: ElementaryGroup, bound: int | None = None
) -> list[list[Fraction]]:
    """Raw matrix recovery for a promised linear map on the group.

    Unit vectors pin down every column up to the target characteristics;
    torus-to-torus integers hide behind the mod-1 truncation, so those
    columns are probed at e_j / alpha with a prime alpha > 2 * bound.
    """
    m = len(group.factors)
    alpha = next_prime_above(2 * (bound or DEFAULT_ENTRY_BOUND))
    columns: list[list[Fraction]] = []
    for j, source in enumerate(group.factors):
        if source.kind == "T":
            image = f(tuple(_unit(group, j, Fraction(1, alpha))))
            column = []
            for i, target in enumerate(group.factors):
                value = Fraction(image[i])
                if target.kind == "T":
                    entry = _centered(value) * alpha
                else:
                    entry = value * alpha  # zero blocks when the promise holds
                column.append(entry)
        else:
            image = f(tuple(_unit(group, j)))
            column = [Fraction(image[i]) for i in range(m)]
        columns.append(column)
    return [[columns[j][i] for j in range(m)] for i in range(m)]


def extract_matrix_rep(
    f: Callable, group: ElementaryGroup, bound: int | None = None
) -> MatrixRep:
    """Recover and validate the matrix of a promised automorphism."""
    matrix = extract_matrix_entries(f, group, bound)
    try:
        rep = validate_matrix_rep(matrix, group)
    except InvalidGate as exc:
        raise ExtractionError(f"extracted matrix is not an automorphism: {exc}") from exc
    _spot_check_matrix(f, rep)
    return rep


def _sample_coords(group: ElementaryGroup, rng) -> tuple:
    coords = []
    for factor in group.factors:
        if factor.kind == "cyclic":
            coords.append(Fraction(int(rng.integers(factor.modulus))))
        elif factor.kind == "Z":
            coords.append(Fraction(int(rng.integers(-12, 13))))
        else:
            coords.append(Fraction(int(rng.integers(24)), 24))
    return tuple(coords)


def _spot_check_matrix(f: Callable, rep: MatrixRep, trials: int = 8) -> None:
    group = rep.group
    rng = np.random.default_rng(max(1, trials))
    if group.is_finite and group.order() <= 256:
        samples = [el.coords for el in group.elements()]
    else:
        samples = [_sample_coords(group, rng) for _ in range(trials)]
    for coords in samples:
        expected = group.reduce(list(f(coords)))
        if rep.apply(group.reduce(coords)) != expected:
            raise ExtractionError(f"extracted matrix disagrees with the oracle at {coords}")


def extract_quadratic(
    q: Callable, group: ElementaryGroup, bound: int | None = None
) -> QuadraticForm:
    """Recover (M, v) of a promised quadratic exponent q (xi = exp(2 pi i q)).

    The bilinear matrix comes from q(x+y) - q(x) - q(y); entries coupling a
    torus factor to an integer factor are integers recovered through the
    1/alpha probe; v is read off the residual linear part.
    """
    m = len(group.factors)
    alpha = next_prime_above(2 * (bound or DEFAULT_ENTRY_BOUND))

    def difference(x: list, y: list) -> Fraction:
        xy = [a + b for a, b in zip(x, y)]
        return Fraction(q(tuple(xy))) - Fraction(q(tuple(x))) - Fraction(q(tuple(y)))

    entries = [[Fraction(0)] * m for _ in range(m)]
    for i, fi in enumerate(group.factors):
        for j in range(i, m):
            fj = group.factors[j]
            kinds = {fi.kind, fj.kind}
            if kinds == {"T"} or kinds == {"T", "cyclic"}:
                value = Fraction(0)
            elif kinds == {"Z", "T"}:
                t_index, other = (i, j) if fi.kind == "T" else (j, i)
                probe = difference(
                    _unit(group, t_index, Fraction(1, alpha)), _unit(group, other)
                )
                value = _centered(probe) * alpha
                if value.denominator != 1:
                    raise ExtractionError(f"entry ({i},{j}) is not an integer")
            else:
                value = difference(_unit(group, i), _unit(group, j)) % 1
            entries[i][j] = entries[j][i] = value

    chars = group.chars
    c = [entries[i][i] * chars[i] for i in range(m)]

    def residual(coords: list) -> Fraction:
        gmg = sum(
            coords[i] * entries[i][j] * coords[j]
            for i in range(m)
            for j in range(m)
        )
        cg = sum(ci * gi for ci, gi in zip(c, coords))
        return (Fraction(q(tuple(coords))) - (gmg + cg) / 2) % 1

    v = []
    for i, factor in enumerate(group.factors):
        if factor.kind == "T":
            probe = residual(_unit(group, i, Fraction(1, alpha)))
            value = _centered(probe) * alpha
            if value.denominator != 1:
                raise ExtractionError(f"v[{i}] is not an integer")
        else:
            value = residual(_unit(group, i))
        v.append(value)
    try:
        form = validate_quadratic(entries, v, group)
    except InvalidGate as exc:
        raise ExtractionError(f"extracted phase data is invalid: {exc}") from exc
    _spot_check_quadratic(q, form)
    return form


def _spot_check_quadratic(q: Callable, form: QuadraticForm, trials: int = 12) -> None:
    group = form.group
    rng = np.random.default_rng(max(1, trials))
    if group.is_finite and group.order() <= 256:
        samples = [el.coords for el in group.elements()]
    else:
        samples = [_sample_coords(group, rng) for _ in range(trials)]
    for coords in samples:
        if form.exponent(group.reduce(coords)) != Fraction(q(tuple(coords))) % 1:
            raise ExtractionError(f"extracted phase disagrees with the oracle at {coords}")


def extract_hom_matrix(
    f: Callable, source: ElementaryGroup, target: ElementaryGroup
) -> list[list[int]]:
    """Columns f(e_j) of a promised homomorphism between finite groups."""
    if not (source.is_finite and target.is_finite):
        raise ExtractionError("homomorphism extraction is for finite groups")
    columns = []
    for j in range(len(source.factors)):
        image = f(tuple(_unit(source, j)))
        columns.append([int(Fraction(image[i])) for i in range(len(target.factors))])
    return [[columns[j][i] for j in range(len(source.factors))] for i in range(len(target.factors))]


# ---------------------------------------------------------------------------
# circuit rewriting
# ---------------------------------------------------------------------------


@dataclass
class DeblackboxResult:
    circuit: NormalizerCircuit
    bridge: EncodingBridge | None
    provenance: list[dict]

    def provenance_json(self) -> str:
        return json.dumps(self.provenance, indent=2)

    def point_to_decomposed(self, point: tuple) -> tuple:
        if self.bridge is None:
            return tuple(point)
        head = tuple(Fraction(c) for c in point[:-1])
        return head + self.bridge.decode(point[-1]).coords

    def point_from_decomposed(self, point: tuple) -> tuple:
        if self.bridge is None:
            return tuple(point)
        split = len(point) - len(self.bridge.table.c)
        head = tuple(Fraction(c) for c in point[:split])
        return head + (self.bridge.encode([int(c) for c in point[split:]]),)


def _extend_matrix(rep: MatrixRep, new_group: ElementaryGroup) -> MatrixRep:
    old = len(rep.group.factors)
    total = len(new_group.factors)
    matrix = [[Fraction(0)] * total for _ in range(total)]
    for i in range(old):
        for j in range(old):
            matrix[i][j] = rep.matrix[i][j]
    for i in range(old, total):
        matrix[i][i] = Fraction(1)
    return validate_matrix_rep(matrix, new_group)


def _extend_quadratic(form: QuadraticForm, new_group: ElementaryGroup) -> QuadraticForm:
    old = len(form.group.factors)
    total = len(new_group.factors)
    matrix = [[Fraction(0)] * total for _ in range(total)]
    for i in range(old):
        for j in range(old):
            matrix[i][j] = form.m[i][j]
    v = list(form.v) + [Fraction(0)] * (total - old)
    return validate_quadratic(matrix, v, new_group)


def _conjugated_point_map(func: Callable, bridge: EncodingBridge, split: int) -> Callable:
    def mapped(coords: tuple) -> tuple:
        head = coords[:split]
        b = bridge.encode([int(Fraction(c)) for c in coords[split:]])
        image = func(tuple(head) + (b,))
        return tuple(Fraction(c) for c in image[:split]) + bridge.decode(image[split]).coords

    return mapped


def _conjugated_exponent(func: Callable, bridge: EncodingBridge, split: int) -> Callable:
    def exponent(coords: tuple) -> Fraction:
        head = coords[:split]
        b = bridge.encode([int(Fraction(c)) for c in coords[split:]])
        return Fraction(func(tuple(head) + (b,)))

    return exponent


def deblackbox_circuit(
    circuit: NormalizerCircuit,
    decompose: Callable | None = None,
    generators: Sequence | None = None,
    rng=None,
) -> DeblackboxResult:
    """Rewrite a black-box circuit over the fully decomposed group.

    `decompose` plays the role of the group-decomposition oracle: it maps
    (group, generators) to a decomposition table.  Gates already in normal
    form are extended by the identity on the fresh cyclic registers; black
    boxes are conjugated through the bridge and extracted.  The provenance
    log records, per gate, what happened and how many oracle queries it cost.
    """
    trace = circuit.validate()
    bb = circuit.initial_basis.blackbox
    if bb is None:
        return DeblackboxResult(circuit=circuit, bridge=None, provenance=[
            {"gate": i, "action": "unchanged"} for i in range(len(circuit.gates))
        ])
    if decompose is None:
        decompose = bb_decompose_bruteforce
    if generators is None:
        generators = bb.sample_generators(rng or np.random.default_rng(0))
    start = bb.counter.total
    table = decompose(bb, list(generators))
    bridge = EncodingBridge(group=bb, table=table)
    provenance: list[dict] = [
        {
            "action": "decompose",
            "isomorphism_type": table.isomorphism_type(),
            "oracle_calls": bb.counter.total - start,
        }
    ]
    split = len(circuit.initial_basis.elementary.factors)
    appended = tuple(cyclic(order) for order in table.c)

    def widen(basis: DesignatedBasis) -> ElementaryGroup:
        return ElementaryGroup(basis.elementary.factors + appended)

    new_gates: list = []
    for index, gate in enumerate(circuit.gates):
        basis_before = trace[index]
        wide_group = widen(basis_before)
        start = bb.counter.total
        record: dict = {"gate": index}
        if isinstance(gate, QFTGate):
            new_gates.append(gate)
            record["action"] = "kept qft"
        elif isinstance(gate, AutomorphismGate):
            if gate.is_black_box:
                mapped = _conjugated_point_map(gate.func, bridge, split)
                bound = 1 << gate.n_out if gate.n_out is not None else None
                rep = extract_matrix_rep(mapped, wide_group, bound)
                new_gates.append(AutomorphismGate(rep=rep, name=gate.name))
                record["action"] = "extracted automorphism"
                record["matrix"] = [[str(x) for x in row] for row in rep.matrix]
            else:
                new_gates.append(AutomorphismGate(rep=_extend_matrix(gate.rep, wide_group)))
                record["action"] = "extended matrix"
        elif isinstance(gate, QuadraticGate):
            if gate.is_black_box:
                mapped = _conjugated_exponent(gate.func, bridge, split)
                bound = 1 << gate.n_out if gate.n_out is not None else None
                form = extract_quadratic(mapped, wide_group, bound)
                new_gates.append(QuadraticGate(form=form, name=gate.name))
                record["action"] = "extracted quadratic"
                record["M"] = [[str(x) for x in row] for row in form.m]
                record["v"] = [str(x) for x in form.v]
            else:
                new_gates.append(QuadraticGate(form=_extend_quadratic(gate.form, wide_group)))
                record["action"] = "extended quadratic"
        else:
            raise CircuitError(f"unknown gate type {type(gate).__name__}")
        record["oracle_calls"] = bb.counter.total - start
        provenance.append(record)
    new_circuit = NormalizerCircuit(
        initial_basis=DesignatedBasis(widen(circuit.initial_basis)),
        gates=new_gates,
    )
    new_circuit.validate()
    return DeblackboxResult(circuit=new_circuit, bridge=bridge, provenance=provenance)
