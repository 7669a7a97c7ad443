"""Dense state-vector execution of normalizer circuits on finite bases.

This is the brute-force oracle the structured simulator is judged against:
amplitudes are complex floats indexed by every basis label, gates act by
explicit permutation, pointwise phase, or DFT matrices.  Black-box gates run
here directly through their callables, which is what makes the engine usable
on circuits that have not been de-black-boxed yet.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circuits import (
    AutomorphismGate,
    CircuitError,
    DesignatedBasis,
    NormalizerCircuit,
    QFTGate,
    QuadraticGate,
)
from .config import dense_cap

NORM_TOLERANCE = 1e-12


@dataclass
class DenseState:
    """Amplitude tensor over a finite designated basis, one axis per register."""

    basis: DesignatedBasis
    amplitudes: np.ndarray
    bb_labels: list | None
    _bb_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.bb_labels is not None and not self._bb_index:
            self._bb_index = {label: i for i, label in enumerate(self.bb_labels)}

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def point_to_index(self, point) -> tuple[int, ...]:
        point = self.basis.make_point(point)
        n = len(self.basis.elementary.factors)
        index = [int(c) for c in point[:n]]
        if self.bb_labels is not None:
            index.append(self._bb_index[point[n]])
        return tuple(index)

    def index_to_point(self, index: tuple[int, ...]) -> tuple:
        n = len(self.basis.elementary.factors)
        point = tuple(Fraction(i) for i in index[:n])
        if self.bb_labels is not None:
            point = point + (self.bb_labels[index[n]],)
        return point

    def amplitude(self, point) -> complex:
        return complex(self.amplitudes[self.point_to_index(point)])

    def probabilities(self, tol: float = 1e-12) -> dict[tuple, float]:
        probs = np.abs(self.amplitudes) ** 2
        out = {}
        for index in np.ndindex(*self.amplitudes.shape):
            p = float(probs[index])
            if p > tol:
                out[self.index_to_point(index)] = p
        return out

    def support(self, tol: float = 1e-9) -> set[tuple]:
        return set(self.probabilities(tol=tol))


def _register_dims(basis: DesignatedBasis) -> list[int]:
    if not basis.is_finite:
        raise CircuitError("dense simulation needs every register finite")
    dims = [f.modulus for f in basis.elementary.factors]
    if basis.blackbox is not None:
        dims.append(basis.blackbox.order())
    return dims


def _initial_state(basis: DesignatedBasis, point, cap: int) -> DenseState:
    dims = _register_dims(basis)
    total = math.prod(dims)
    if total > cap:
        raise CircuitError(f"dense dimension {total} exceeds cap {cap}")
    bb_labels = None
    if basis.blackbox is not None:
        bb_labels = sorted(basis.blackbox.elements(), key=basis.blackbox.encode)
    amplitudes = np.zeros(dims, dtype=np.complex128)
    state = DenseState(basis=basis, amplitudes=amplitudes, bb_labels=bb_labels)
    amplitudes[state.point_to_index(point)] = 1.0
    return state


def _dft_matrix(n: int) -> np.ndarray:
    x = np.arange(n)
    return np.exp(2j * np.pi * np.outer(x, x) / n) / np.sqrt(n)


def _apply_qft(state: DenseState, registers) -> None:
    for r in registers:
        n = state.amplitudes.shape[r]
        f = _dft_matrix(n)
        moved = np.tensordot(f, state.amplitudes, axes=([1], [r]))
        state.amplitudes = np.moveaxis(moved, 0, r)


def _point_map(state: DenseState, gate: AutomorphismGate):
    basis = state.basis
    n = len(basis.elementary.factors)
    if gate.is_black_box:
        def mapped(point):
            return basis.make_point(gate.func(point))

        return mapped

    def mapped(point):
        el = basis.elementary.reduce(point[:n])
        image = gate.rep.apply(el)
        return image.coords + tuple(point[n:])

    return mapped


def _apply_automorphism(state: DenseState, gate: AutomorphismGate) -> None:
    mapped = _point_map(state, gate)
    out = np.zeros_like(state.amplitudes)
    for index in np.ndindex(*state.amplitudes.shape):
        value = state.amplitudes[index]
        if value == 0:
            continue
        out[state.point_to_index(mapped(state.index_to_point(index)))] += value
    state.amplitudes = out


def _apply_quadratic(state: DenseState, gate: QuadraticGate) -> None:
    basis = state.basis
    n = len(basis.elementary.factors)
    for index in np.ndindex(*state.amplitudes.shape):
        if state.amplitudes[index] == 0:
            continue
        point = state.index_to_point(index)
        if gate.is_black_box:
            exponent = gate.func(point)
        else:
            exponent = gate.form.exponent(basis.elementary.reduce(point[:n]))
        state.amplitudes[index] *= np.exp(2j * np.pi * float(exponent))


def dense_run(
    circuit: NormalizerCircuit, input_point, cap: int | None = None
) -> DenseState:
    """Run a finite-register circuit on one basis state, exactly by brute force."""
    cap = dense_cap(cap)
    trace = circuit.validate()
    if any(not b.is_finite for b in trace):
        raise CircuitError("dense simulation needs every register finite")
    state = _initial_state(circuit.initial_basis, input_point, cap)
    for gate in circuit.gates:
        if isinstance(gate, QFTGate):
            _apply_qft(state, gate.registers)
        elif isinstance(gate, AutomorphismGate):
            _apply_automorphism(state, gate)
        elif isinstance(gate, QuadraticGate):
            _apply_quadratic(state, gate)
        else:
            raise CircuitError(f"unknown gate type {type(gate).__name__}")
        if abs(state.norm() - 1.0) > 1e-9:
            raise CircuitError(f"norm drifted to {state.norm()}")
    return state


def dense_sample(state: DenseState, shots: int, rng) -> Counter:
    """Measure in the final designated basis `shots` times."""
    flat = np.abs(state.amplitudes.reshape(-1)) ** 2
    flat = flat / flat.sum()
    draws = rng.choice(len(flat), size=shots, p=flat)
    counts: Counter = Counter()
    shape = state.amplitudes.shape
    for flat_index, count in Counter(draws.tolist()).items():
        index = np.unravel_index(flat_index, shape)
        counts[state.index_to_point(tuple(int(i) for i in index))] += count
    return counts
