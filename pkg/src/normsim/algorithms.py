"""The algorithm suite: order finding, factoring, discrete logarithms
(multiplicative and elliptic-curve), Abelian hidden-subgroup solving, and
black-box group decomposition, each realized as a normalizer circuit run
through the simulators plus exact classical post-processing.

Every entry point takes an explicit rng; fixed seeds reproduce runs bit for
bit.  Results carry a JSON-serializable `log` with the circuit shape, the
samples drawn, and oracle-call counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .blackbox import (
    BlackBoxGroup,
    DecompositionTable,
    ZNStarGroup,
    bb_decompose_bruteforce,
    bb_order,
    cayley_relations,
)
from .circuits import (
    AutomorphismGate,
    DesignatedBasis,
    NormalizerCircuit,
    QFTGate,
    word_exp_func,
)
from .deblackbox import EncodingBridge
from .dense import dense_run, dense_sample
from .dirichlet import DirichletDistribution
from .groups import ElementaryGroup, GroupElement, cyclic_group
from .linalg import (
    GroupLinearSystem,
    continued_fraction_reconstruct,
    hermite_reduce,
    integral_pseudo_inverse,
    mat_vec,
    smith_normal_form,
    solve_group_system,
)


class AlgorithmError(RuntimeError):
    pass


class OrderFindingError(AlgorithmError):
    pass


class FactoringError(AlgorithmError):
    pass


class AttemptsExhausted(FactoringError):
    pass


class DiscreteLogError(AlgorithmError):
    pass


class HSPError(AlgorithmError):
    pass


def circuit_summary(circuit: NormalizerCircuit) -> dict:
    kinds = []
    for gate in circuit.gates:
        if isinstance(gate, QFTGate):
            kinds.append(f"qft{list(gate.registers)}")
        elif isinstance(gate, AutomorphismGate):
            kinds.append(gate.name or "automorphism")
        else:
            kinds.append(gate.name or "quadratic")
    return {
        "basis": str(circuit.initial_basis.elementary),
        "gates": kinds,
        "qft_layers": circuit.qft_layers(),
    }


# ---------------------------------------------------------------------------
# order finding
# ---------------------------------------------------------------------------


@dataclass
class OrderFindingRun:
    target: object
    comb_m: int
    samples: list[Fraction]
    order: int
    log: dict = field(default_factory=dict)


def find_order(
    group: BlackBoxGroup,
    a,
    rng,
    r_max: int | None = None,
    comb_m: int | None = None,
    grid_size: int | None = None,
    max_rounds: int = 64,
    cross_check: bool = False,
) -> OrderFindingRun:
    """Order of `a` recovered from torus-register measurement samples.

    The run simulates the physics in closed form: the comb collapses to a
    random residue and an outcome is drawn from the squared Dirichlet kernel.
    Recovery sees only the samples: continued fractions reconstruct nearby
    k/r fractions and the least common multiple of their denominators is
    accepted once the oracle confirms a^r = 1 (minimality is automatic
    because every denominator divides the true order).

    With cross_check=True (and r * M small enough to afford the dense DFT)
    the closed form is verified against the truncated (2M+1)-dimensional
    register before sampling.
    """
    if not group.is_element(a):
        raise OrderFindingError(f"{a!r} is not a group element")
    if r_max is None:
        r_max = 1 << group.encoding_length
    # Physics side: the closed-form distribution needs the actual period.
    r_true = bb_order(group, a, cap=r_max)
    m = comb_m if comb_m is not None else 2 * r_max * r_max
    if m < r_true:
        raise OrderFindingError(f"comb half-length {m} below the order")
    checked = None
    if cross_check:
        from .dirichlet import discretization_deviation

        if r_true * m > 1 << 14:
            raise OrderFindingError(
                f"cross-check needs r * M <= 2^14, got {r_true * m}"
            )
        checked = discretization_deviation(r_true, m)
        if checked > 1e-9:
            raise OrderFindingError(
                f"discretized register deviates from the closed form by {checked}"
            )
    samples: list[Fraction] = []
    fractions: list[Fraction] = []
    denominators: list[int] = []
    for round_index in range(max_rounds):
        s = int(rng.integers(r_true))
        dist = DirichletDistribution(r_true, m, s)
        grid = grid_size or _auto_grid(dist.l)
        p = dist.sample(1, rng, grid_size=grid)[0]
        samples.append(p)
        fraction = continued_fraction_reconstruct(p, r_max)
        if fraction is None:
            continue
        fractions.append(fraction)
        denominators.append(fraction.denominator)
        # A tail sample can reconstruct to a spurious fraction, so candidates
        # come from pairs, and a confirmed multiple is stripped down to the
        # actual order prime by prime.
        for other in denominators:
            candidate = math.lcm(denominators[-1], other)
            if candidate > r_max * r_max:
                continue
            if group.power(a, candidate) != group.identity():
                continue
            order = _minimal_confirmed_order(group, a, candidate)
            return OrderFindingRun(
                target=a,
                comb_m=m,
                samples=samples,
                order=order,
                log={
                    "comb_m": m,
                    "r_max": r_max,
                    "rounds": round_index + 1,
                    "samples": [str(p) for p in samples],
                    "fractions": [str(f) for f in fractions],
                    "oracle_calls": group.counter.total,
                    "discretization_deviation": checked,
                },
            )
    raise OrderFindingError(
        f"no confirmed order after {max_rounds} samples (r_max={r_max})"
    )


def _minimal_confirmed_order(group: BlackBoxGroup, a, multiple: int) -> int:
    """Smallest divisor r of `multiple` with a^r = identity (a^multiple = 1)."""
    order = multiple
    for p in _prime_factors(multiple):
        while order % p == 0 and group.power(a, order // p) == group.identity():
            order //= p
    return order


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _auto_grid(l: int, minimum: int = 1 << 16) -> int:
    """Grid fine enough to resolve 1/L-wide peaks of the sampling density."""
    return max(minimum, 1 << (32 * l - 1).bit_length())


# ---------------------------------------------------------------------------
# factoring
# ---------------------------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def _perfect_power(n: int) -> tuple[int, int] | None:
    for k in range(2, n.bit_length() + 1):
        root = round(n ** (1 / k))
        for candidate in (root - 1, root, root + 1):
            if candidate >= 2 and candidate**k == n:
                return candidate, k
    return None


@dataclass
class FactoringRun:
    n: int
    divisor: int
    attempts: int
    log: dict = field(default_factory=dict)


def factor(n: int, rng, attempts: int = 10, **order_kwargs) -> FactoringRun:
    """Nontrivial divisor of n via the reduction to order finding.

    Preconditions follow the classical reduction: n odd, composite, and not
    a prime power (those cases are handled classically up front).
    """
    if n < 3 or n % 2 == 0:
        raise FactoringError(f"{n} must be an odd integer >= 3")
    if _is_prime(n):
        raise FactoringError(f"{n} is prime")
    power = _perfect_power(n)
    if power is not None:
        raise FactoringError(f"{n} is a prime power: {power[0]}^{power[1]}")
    transcript = []
    group = ZNStarGroup(n)
    for attempt in range(1, attempts + 1):
        a = int(rng.integers(2, n - 1))
        g = math.gcd(a, n)
        if g > 1:
            transcript.append({"a": a, "event": "gcd shortcut", "divisor": g})
            return FactoringRun(n=n, divisor=g, attempts=attempt, log={"transcript": transcript})
        run = find_order(group, a, rng, **order_kwargs)
        r = run.order
        entry = {"a": a, "order": r, "samples": run.log["samples"]}
        if r % 2 == 1:
            entry["event"] = "odd order"
            transcript.append(entry)
            continue
        x = pow(a, r // 2, n)
        if x == n - 1:
            entry["event"] = "trivial square root"
            transcript.append(entry)
            continue
        for divisor in (math.gcd(x - 1, n), math.gcd(x + 1, n)):
            if 1 < divisor < n:
                entry["event"] = "split"
                entry["divisor"] = divisor
                transcript.append(entry)
                return FactoringRun(
                    n=n, divisor=divisor, attempts=attempt, log={"transcript": transcript}
                )
        entry["event"] = "no split"
        transcript.append(entry)
    raise AttemptsExhausted(f"no factor of {n} found in {attempts} attempts")


# ---------------------------------------------------------------------------
# discrete logarithm over Z_p^*
# ---------------------------------------------------------------------------


@dataclass
class DiscreteLogRun:
    p: int
    base: int
    target: int
    exponent: int
    samples: list[tuple[int, int]]
    log: dict = field(default_factory=dict)


def dlog_circuit(p: int, a: int, b: int) -> NormalizerCircuit:
    """The two-QFT-layer circuit over Z_{p-1}^2 x Z_p^*."""
    group = ZNStarGroup(p)
    basis = DesignatedBasis(cyclic_group(p - 1, p - 1), group)
    return NormalizerCircuit(
        basis,
        [
            QFTGate((0, 1)),
            AutomorphismGate(
                func=word_exp_func(basis, [a, b]),
                name="word_exp",
                params={"bases": [a, b]},
            ),
            QFTGate((0, 1)),
        ],
    )


def discrete_log(
    p: int,
    a: int,
    b: int,
    rng,
    repetitions: int = 10,
    cap: int | None = None,
) -> DiscreteLogRun:
    """Least s with a^s = b mod p, for a generating Z_p^*.

    Measurement outcomes are pairs (k, ks); the runs are pooled into one
    linear system mod p-1, which pins s down unless every sampled k shares a
    factor with p-1 (probability at most about 2^-repetitions).
    """
    if not _is_prime(p):
        raise DiscreteLogError(f"{p} is not prime")
    group = ZNStarGroup(p)
    if not group.is_element(b):
        raise DiscreteLogError(f"{b} is not a unit mod {p}")
    if bb_order(group, a, cap=p) != p - 1:
        raise DiscreteLogError(f"{a} does not generate the units mod {p}")
    circuit = dlog_circuit(p, a, b)
    state = dense_run(circuit, (0, 0, 1), cap=cap)
    counts = dense_sample(state, repetitions, rng)
    pairs: list[tuple[int, int]] = []
    for point, count in counts.items():
        pairs.extend([(int(point[0]), int(point[1]))] * count)
    rows = [[k1] for k1, _ in pairs]
    rhs = [k2 for _, k2 in pairs]
    moduli = [p - 1] * len(pairs)
    solved = solve_group_system(GroupLinearSystem(rows, rhs, moduli))
    if solved is None:
        raise DiscreteLogError("inconsistent samples; the oracle promise failed")
    x0, kernel = solved
    ambiguous = any(any(g % (p - 1) for g in gen) for gen in kernel)
    if ambiguous:
        raise DiscreteLogError(
            f"samples do not determine the exponent (all {len(pairs)} pairs degenerate)"
        )
    s = x0[0] % (p - 1)
    if pow(a, s, p) != b:
        raise DiscreteLogError("postprocessing produced a wrong exponent")
    return DiscreteLogRun(
        p=p,
        base=a,
        target=b,
        exponent=s,
        samples=pairs,
        log={
            "circuit": circuit_summary(circuit),
            "pairs": pairs,
            "repetitions": repetitions,
        },
    )


# ---------------------------------------------------------------------------
# elliptic-curve discrete logarithm
# ---------------------------------------------------------------------------


@dataclass
class EcDlogRun:
    base: object
    target: object
    exponent: int
    order: int
    log: dict = field(default_factory=dict)


def ec_dlog_circuit(curve, a, b, n: int) -> NormalizerCircuit:
    basis = DesignatedBasis(cyclic_group(n, n), curve)
    return NormalizerCircuit(
        basis,
        [
            QFTGate((0, 1)),
            AutomorphismGate(
                func=word_exp_func(basis, [a, b]),
                name="word_exp",
                params={"bases": [a, b]},
            ),
            QFTGate((0, 1)),
        ],
    )


def ec_discrete_log(curve, a, b, rng, repetitions: int = 12, cap: int | None = None) -> EcDlogRun:
    """Least s with s a = b on the curve, by the two-ancilla circuit.

    The ancilla modulus is the order of `a`, found by the order-finding run;
    outcomes (u, v) satisfy v = s u, pooled and solved mod that order.
    """
    order_run = find_order(curve, a, rng, r_max=curve.order())
    n = order_run.order
    multiples = {}
    acc = curve.identity()
    for k in range(n):
        multiples[curve.encode(acc)] = k
        acc = curve.mul(acc, a)
    if curve.encode(b) not in multiples:
        raise DiscreteLogError(f"{b!r} is not a multiple of {a!r}")
    circuit = ec_dlog_circuit(curve, a, b, n)
    state = dense_run(circuit, (0, 0, curve.identity()), cap=cap)
    counts = dense_sample(state, repetitions, rng)
    pairs = []
    for point, count in counts.items():
        pairs.extend([(int(point[0]), int(point[1]))] * count)
    solved = solve_group_system(
        GroupLinearSystem([[u] for u, _ in pairs], [v for _, v in pairs], [n] * len(pairs))
    )
    if solved is None:
        raise DiscreteLogError("inconsistent samples; the oracle promise failed")
    x0, kernel = solved
    if any(any(g % n for g in gen) for gen in kernel):
        raise DiscreteLogError("samples do not determine the exponent")
    s = x0[0] % n
    expected = multiples[curve.encode(b)]
    if s != expected:
        raise DiscreteLogError(f"postprocessing produced {s}, expected {expected}")
    return EcDlogRun(
        base=a,
        target=b,
        exponent=s,
        order=n,
        log={
            "circuit": circuit_summary(circuit),
            "pairs": pairs,
            "order_samples": order_run.log["samples"],
        },
    )


# ---------------------------------------------------------------------------
# the hidden subgroup problem
# ---------------------------------------------------------------------------


class OracularGroup(BlackBoxGroup):
    """Group structure induced on an HSP oracle's value set.

    Multiplication goes through stored preimage representatives:
    x * y = f(g_x + g_y).  Well-definedness is exactly the coset promise of
    the oracle; `certify_homomorphism` checks it exhaustively at desk scale.
    """

    def __init__(self, domain: ElementaryGroup, oracle: Callable) -> None:
        super().__init__()
        self.domain = domain
        self.oracle = oracle
        self._representative: dict = {}
        for el in domain.elements():
            value = oracle(el.coords)
            self._representative.setdefault(value, el)
        self._values = sorted(self._representative, key=repr)
        self.encoding_length = max(1, (len(self._values) - 1).bit_length())

    def _mul(self, x, y):
        gx = self._representative[x]
        gy = self._representative[y]
        return self.oracle((gx + gy).coords)

    def _inv(self, x):
        gx = self._representative[x]
        return self.oracle((-gx).coords)

    def identity(self):
        return self.oracle(self.domain.identity().coords)

    def is_element(self, x) -> bool:
        return x in self._representative

    def encode(self, x) -> str:
        return repr(x)

    def elements(self):
        return iter(self._values)

    def order(self) -> int:
        return len(self._values)

    def random_element(self, rng):
        return self._values[int(rng.integers(len(self._values)))]

    def certify_homomorphism(self) -> bool:
        """Check f(g+h) = f(g) f(h) over the whole domain."""
        for g in self.domain.elements():
            for h in self.domain.elements():
                lhs = self.oracle((g + h).coords)
                rhs = self._mul(self.oracle(g.coords), self.oracle(h.coords))
                if lhs != rhs:
                    return False
        return True


@dataclass
class HSPInstance:
    group: ElementaryGroup  # finite, explicitly decomposed
    oracle: Callable  # coords tuple -> hashable value


@dataclass
class HSPRun:
    domain: ElementaryGroup
    generators: list[GroupElement]
    log: dict = field(default_factory=dict)

    def subgroup_elements(self) -> set:
        seen = {self.domain.identity()}
        frontier = [self.domain.identity()]
        while frontier:
            current = frontier.pop()
            for gen in self.generators:
                nxt = current + gen
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen


def hsp_circuit(instance: HSPInstance, oracular: OracularGroup) -> NormalizerCircuit:
    basis = DesignatedBasis(instance.group, oracular)
    registers = tuple(range(len(instance.group.factors)))
    bases = [oracular.oracle(el.coords) for el in _unit_elements(instance.group)]
    return NormalizerCircuit(
        basis,
        [
            QFTGate(registers),
            AutomorphismGate(
                func=word_exp_func(basis, bases),
                name="word_exp",
                params={"bases": bases},
            ),
            QFTGate(registers),
        ],
    )


def _unit_elements(group: ElementaryGroup) -> list[GroupElement]:
    units = []
    for i in range(len(group.factors)):
        coords = [0] * len(group.factors)
        coords[i] = 1
        units.append(group.reduce(coords))
    return units


def solve_hsp(
    instance: HSPInstance,
    rng,
    rounds: int = 16,
    max_batches: int = 8,
    cap: int | None = None,
) -> HSPRun:
    """Generating set of the hidden subgroup, recovered from dual samples.

    Each measured vector y annihilates H; batches of samples are turned into
    a congruence system whose solution set estimates H, and sampling
    continues until the estimate is stable across two batches.
    """
    group = instance.group
    if not group.is_finite:
        raise HSPError("the hidden subgroup domain must be finite here")
    oracular = OracularGroup(group, instance.oracle)
    certified = oracular.certify_homomorphism()
    if not certified:
        raise HSPError("oracle does not hide a subgroup: induced product ill-defined")
    circuit = hsp_circuit(instance, oracular)
    state = dense_run(circuit, group.identity().coords + (oracular.identity(),), cap=cap)
    moduli = [f.modulus for f in group.factors]
    d = math.lcm(*moduli)
    samples: list[tuple[int, ...]] = []
    estimate: set | None = None
    estimate_gens: list[GroupElement] = []
    for batch in range(max_batches):
        counts = dense_sample(state, rounds, rng)
        for point, count in counts.items():
            samples.extend([tuple(int(c) for c in point[: len(moduli)])] * count)
        # Only the lattice generated by the sampled duals matters; reduce it
        # (together with the d-wraparounds) so the system stays m-by-m-sized.
        raw_rows = [
            [y[j] * (d // moduli[j]) for j in range(len(moduli))]
            for y in set(samples)
        ]
        wraps = [
            [d if i == j else 0 for j in range(len(moduli))]
            for i in range(len(moduli))
        ]
        rows = hermite_reduce(raw_rows + wraps)
        solved = solve_group_system(
            GroupLinearSystem(rows, [0] * len(rows), [d] * len(rows))
        )
        if solved is None:
            raise HSPError("homogeneous system cannot be infeasible")
        _, kernel = solved
        gens = [group.reduce(gen) for gen in kernel]
        gens = [g for g in gens if not g.is_identity()]
        current = HSPRun(domain=group, generators=gens).subgroup_elements()
        if estimate is not None and current == estimate:
            return HSPRun(
                domain=group,
                generators=estimate_gens,
                log={
                    "circuit": circuit_summary(circuit),
                    "circuit_validated": True,  # dense_run replayed the trace
                    "samples": samples,
                    "batches": batch + 1,
                    "homomorphism_certified": certified,
                    "oracular_order": oracular.order(),
                },
            )
        estimate = current
        estimate_gens = gens
    raise HSPError(f"estimate did not stabilize after {max_batches} batches")


# ---------------------------------------------------------------------------
# group decomposition (the extended structure-learning algorithm)
# ---------------------------------------------------------------------------


@dataclass
class GroupDecompositionRun:
    table: DecompositionTable
    log: dict = field(default_factory=dict)


def decompose_group(
    group: BlackBoxGroup,
    generators: Sequence,
    rng,
    dense_cap: int | None = None,
    **order_kwargs,
) -> GroupDecompositionRun:
    """Full decomposition table for <generators> = B.

    Steps: per-generator orders by the order-finding run; the kernel of the
    exponent map by the hidden-subgroup machinery (dense route when the
    simulation fits, classical kernel oracle otherwise, recorded in the
    log); independent generators from the Smith normal form of the kernel
    lattice; and the reverse change-of-basis matrix from a linear system
    over the kernel, finished with an integral pseudo-inverse.
    """
    generators = list(generators)
    if not generators:
        raise AlgorithmError("need at least one generator")
    k = len(generators)
    log: dict = {"steps": []}
    r_max = order_kwargs.pop("r_max", None)
    if r_max is None:
        r_max = group.order()

    orders = []
    for g in generators:
        run = find_order(group, g, rng, r_max=r_max, **order_kwargs)
        orders.append(run.order)
    d = math.lcm(*orders)
    log["steps"].append({"step": "orders", "orders": orders, "lcm": d})

    kernel_rows, route = _exponent_kernel(group, generators, d, rng, dense_cap)
    log["steps"].append({"step": "kernel", "route": route, "generators": kernel_rows})

    # Independent generators via the SNF of the kernel lattice in Z^k.
    lattice_rows = kernel_rows + [
        [d if i == j else 0 for j in range(k)] for i in range(k)
    ]
    columns = [[row[i] for row in lattice_rows] for i in range(k)]
    snf = smith_normal_form(columns)
    diag = snf.diagonal + [0] * (k - len(snf.diagonal))
    if any(entry == 0 for entry in diag):
        raise AlgorithmError("kernel lattice does not have finite quotient")
    keep = [i for i in range(k) if diag[i] > 1]
    a_matrix = [[snf.u[i][j] for j in keep] for i in range(k)]
    beta = [group.word(generators, [snf.u[i][j] for i in range(k)]) for j in keep]
    c = []
    for index, b_el in zip(keep, beta):
        run = find_order(group, b_el, rng, r_max=r_max, **order_kwargs)
        if run.order != diag[index]:
            raise AlgorithmError(
                f"order finding returned {run.order}, lattice says {diag[index]}"
            )
        c.append(run.order)
    log["steps"].append({"step": "independent generators", "type": c})

    # Reverse matrix: for each original generator solve
    # (A | -H) (y; z) = e_i (mod d), set x_i = A y_i, then B = A# X.
    ell = len(keep)
    h_cols = len(kernel_rows)
    b_matrix: list[list[int]] = [[0] * k for _ in range(ell)]
    x_columns: list[list[int]] = []
    for i in range(k):
        rows = [
            [a_matrix[r][j] for j in range(ell)]
            + [-kernel_rows[t][r] for t in range(h_cols)]
            for r in range(k)
        ]
        rhs = [1 if r == i else 0 for r in range(k)]
        solved = solve_group_system(GroupLinearSystem(rows, rhs, [d] * k))
        if solved is None:
            raise AlgorithmError("change-of-basis system infeasible; not a generating set?")
        y = solved[0][:ell]
        x_columns.append(mat_vec(a_matrix, y))
    a_sharp = integral_pseudo_inverse(a_matrix)
    for j, x_col in enumerate(x_columns):
        image = mat_vec(a_sharp, x_col)
        for i in range(ell):
            value = Fraction(image[i])
            if value.denominator != 1:
                raise AlgorithmError("pseudo-inverse produced a non-integer word")
            b_matrix[i][j] = int(value) % c[i]
    table = DecompositionTable(
        alpha=generators, beta=beta, a=a_matrix, b=b_matrix, c=c,
        provenance={"kernel_route": route},
    )
    table.verify(group)
    log["oracle_calls"] = group.counter.total
    return GroupDecompositionRun(table=table, log=log)


def _exponent_kernel(
    group: BlackBoxGroup, generators: Sequence, d: int, rng, dense_cap: int | None
) -> tuple[list[list[int]], str]:
    """Kernel generators of x -> prod generators[i]^x(i) on Z_d^k."""
    k = len(generators)
    domain = cyclic_group(*([d] * k))
    dense_size = (d**k) * group.order()
    from .config import dense_cap as cap_value

    if dense_size <= cap_value(dense_cap):
        instance = HSPInstance(
            group=domain,
            oracle=lambda coords: group.encode(
                group.word(generators, [int(c) for c in coords])
            ),
        )
        run = solve_hsp(instance, rng, cap=dense_cap)
        rows = [[int(c) for c in gen.coords] for gen in run.generators]
        return rows, "hidden-subgroup rounds (dense)"
    relations, _ = cayley_relations(group, generators)
    rows = hermite_reduce([[value % d for value in rel] for rel in relations])
    return rows, "classical kernel oracle (dense cap exceeded)"


# ---------------------------------------------------------------------------
# hidden kernel problem and linear systems over black-box groups
# ---------------------------------------------------------------------------


def solve_hkp(
    domain: ElementaryGroup,
    group: BlackBoxGroup,
    f: Callable,
    rng,
    cap: int | None = None,
) -> HSPRun:
    """Kernel generators of a homomorphism oracle f: domain -> B.

    Infinite Z factors are first reduced modulo the lcm of the image orders
    of the canonical generators, turning the instance into a finite
    hidden-subgroup run whose hidden subgroup is ker f.
    """
    if domain.is_finite:
        finite_domain = domain
        lift = None
    else:
        orders = []
        for unit in _unit_elements(domain):
            image = f(unit.coords)
            run = find_order(group, image, rng, r_max=group.order())
            orders.append(run.order)
        d = math.lcm(*orders)
        moduli = [
            f_.modulus if f_.kind == "cyclic" else d for f_ in domain.factors
        ]
        finite_domain = cyclic_group(*moduli)
        lift = moduli
    instance = HSPInstance(
        group=finite_domain,
        oracle=lambda coords: group.encode(f(coords)),
    )
    run = solve_hsp(instance, rng, cap=cap)
    if lift is None:
        return run
    gens = [domain.reduce(tuple(int(c) for c in g.coords)) for g in run.generators]
    for i, factor in enumerate(domain.factors):
        if factor.kind == "Z":
            coords = [0] * len(domain.factors)
            coords[i] = lift[i]
            gens.append(domain.reduce(coords))
    run.generators = gens
    run.log["domain"] = str(domain)
    return run


@dataclass
class LinearSystemRun:
    solution: GroupElement | None
    kernel: list[GroupElement]
    log: dict = field(default_factory=dict)

    @property
    def infeasible(self) -> bool:
        return self.solution is None


def solve_linear_system_bb(
    domain: ElementaryGroup,
    group: BlackBoxGroup,
    f: Callable,
    target,
    rng,
    generators: Sequence | None = None,
) -> LinearSystemRun:
    """General solution of f(x) = target over a finite domain.

    The black-box side is decomposed, f is rewritten as an integer matrix
    through the encoding bridge, and the resulting congruence system yields
    a particular solution plus kernel generators (or infeasibility, which is
    a legitimate outcome, not an error).
    """
    if not domain.is_finite:
        raise AlgorithmError("finite domains only at desk scale")
    if generators is None:
        generators = group.sample_generators(rng)
    table = bb_decompose_bruteforce(group, list(generators))
    bridge = EncodingBridge(group=group, table=table)
    columns = [
        [int(c) for c in bridge.decode(f(unit.coords)).coords]
        for unit in _unit_elements(domain)
    ]
    target_vec = [int(c) for c in bridge.decode(target).coords]
    rows = [
        [columns[j][i] for j in range(len(domain.factors))]
        for i in range(len(table.c))
    ]
    solved = solve_group_system(GroupLinearSystem(rows, target_vec, list(table.c)))
    log = {"isomorphism_type": table.isomorphism_type()}
    if solved is None:
        return LinearSystemRun(solution=None, kernel=[], log=log)
    x0, kernel = solved
    solution = domain.reduce(x0)
    kernel_els = []
    for gen in kernel:
        el = domain.reduce(gen)
        if not el.is_identity() and el not in kernel_els:
            kernel_els.append(el)
    if f(solution.coords) != target:
        raise AlgorithmError("solver returned a non-solution")
    return LinearSystemRun(solution=solution, kernel=kernel_els, log=log)


def multivariate_dlog(
    group: BlackBoxGroup, beta: Sequence, b, orders: Sequence[int] | None = None
) -> list[int]:
    """Exponent vector x with beta_1^x1 ... beta_l^xl = b.

    beta must be independent; their orders are taken from the caller or
    measured by the classical oracle.
    """
    if orders is None:
        orders = [bb_order(group, g) for g in beta]
    table = DecompositionTable(
        alpha=list(beta),
        beta=list(beta),
        a=[[1 if i == j else 0 for j in range(len(beta))] for i in range(len(beta))],
        b=[[1 if i == j else 0 for j in range(len(beta))] for i in range(len(beta))],
        c=list(orders),
    )
    bridge = EncodingBridge(group=group, table=table)
    try:
        return [int(c) for c in bridge.decode(b).coords]
    except KeyError:
        raise AlgorithmError(f"{b!r} is not generated by the given elements") from None
