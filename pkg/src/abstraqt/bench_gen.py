"""Seeded generators for the benchmark families and a semantics-preserving obfuscator.

Each family builds ``c1`` on the upper half of the register, ``c2`` on the lower
half (or across both halves), and ``c3 = obfuscate(inverse(c2))``. Running the
result from ``|0...0>`` leaves every lower qubit in ``|0>``, which is what the
analysis is asked to prove.

Gate draws pick one of the family's gate types uniformly, then its qubits
uniformly (ordered, distinct). All randomness comes from :class:`SplitMix64`
so circuits reproduce across platforms and implementations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .circuit_ir import Circuit, Gate, inverse

MASK64 = (1 << 64) - 1

FAMILIES = (
    "cliff-cliff",
    "cliff+t-cliff",
    "cliff+t-cx+t",
    "cliff+t-h-cz+rx",
    "ccx+h-cliff",
    "ccx+h-cx+t",
    "rz2+h-cx",
    "measure-ghz",
)

RZ2_ANGLE = 2.0
RX_ANGLE = 0.7853981633974483  # pi/4


class SplitMix64:
    """The SplitMix64 generator (Steele, Lea and Flood 2014), with rejection-sampled bounded draws."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, k: int) -> int:
        """Uniform integer in ``[0, k)``."""
        if k <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % k

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]

    def chance(self, num: int, den: int) -> bool:
        return self.below(den) < num

    def distinct(self, pools: Sequence[Sequence[int]]) -> tuple[int, ...]:
        """One draw from each pool, redrawn until all values differ."""
        while True:
            picks = tuple(self.choice(p) for p in pools)
            if len(set(picks)) == len(picks):
                return picks


@dataclass(frozen=True)
class BenchSpec:
    family: str
    n_total: int = 16
    gates_per_block: int = 500
    seed: int = 1
    rounds: int = 20

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n_total < 4 or self.n_total % 2:
            raise ValueError("n_total must be even and at least 4")
        if self.gates_per_block < 1:
            raise ValueError("gates_per_block must be at least 1")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")

    @property
    def upper(self) -> tuple[int, ...]:
        return tuple(range(self.n_total // 2))

    @property
    def lower(self) -> tuple[int, ...]:
        return tuple(range(self.n_total // 2, self.n_total))


# a gate type is (name, angle tuple, one qubit pool per target)
GateType = tuple[str, tuple[float, ...], tuple[tuple[int, ...], ...]]


def _draw(rng: SplitMix64, types: Sequence[GateType], count: int) -> list[Gate]:
    gates = []
    for _ in range(count):
        name, params, pools = rng.choice(types)
        gates.append(Gate(name, rng.distinct(pools), params))
    return gates


def _single(names: Sequence[str], pool: tuple[int, ...]) -> list[GateType]:
    return [(name, (), (pool,)) for name in names]


def _block_types(family: str, up: tuple[int, ...], lo: tuple[int, ...]) -> tuple[list[GateType], list[GateType]]:
    cliff_up = _single("hs", up) + [("cx", (), (up, up))]
    cliff_t_up = _single("hst", up) + [("cx", (), (up, up))]
    ccx_h_up = [("ccx", (), (up, up, up)), ("h", (), (up,))]
    cliff_lo = _single("hs", lo) + [("cx", (), (lo, lo))]
    cx_t_cross = [("cx", (), (up, lo)), ("t", (), (lo,))]
    if family == "cliff-cliff":
        return cliff_up, cliff_lo
    if family == "cliff+t-cliff":
        return cliff_t_up, cliff_lo
    if family == "cliff+t-cx+t":
        return cliff_t_up, cx_t_cross
    if family == "cliff+t-h-cz+rx":
        return cliff_t_up, [("cz", (), (up, lo)), ("rx", (RX_ANGLE,), (lo,))]
    if family == "ccx+h-cliff":
        return ccx_h_up, _single("hs", lo) + [("cx", (), (lo, up + lo))]
    if family == "ccx+h-cx+t":
        return ccx_h_up, cx_t_cross
    if family == "rz2+h-cx":
        return [("rz", (RZ2_ANGLE,), (up,)), ("h", (), (up,))], [("cx", (), (up, lo))]
    raise ValueError(f"no block structure for {family!r}")


def measure_ghz(n: int, rounds: int) -> Circuit:
    """``rounds`` repetitions of ``H(0); fan-out; measure(0); fan-out`` with fan-out ``CX(0,1)...CX(0,n-1)``."""
    fan = [Gate("cx", (0, j)) for j in range(1, n)]
    body = [Gate("h", (0,))] + fan + [Gate.measure(0)] + fan
    return Circuit(n, tuple(body * rounds))


def generate(spec: BenchSpec) -> Circuit:
    if spec.family == "measure-ghz":
        return measure_ghz(spec.n_total, spec.rounds)
    rng = SplitMix64(spec.seed)
    t1, t2 = _block_types(spec.family, spec.upper, spec.lower)
    c1 = _draw(rng, t1, spec.gates_per_block)
    c2 = Circuit(spec.n_total, tuple(_draw(rng, t2, spec.gates_per_block)))
    c3 = obfuscate(inverse(c2), rng.next_u64())
    body = c1 + list(c2.instructions) + list(c3.instructions)
    if spec.family == "cliff+t-h-cz+rx":
        ch = [Gate("h", (q,)) for q in spec.lower]
        body = c1 + ch + list(c2.instructions) + list(c3.instructions) + ch
    return Circuit(spec.n_total, tuple(body))


# --- obfuscation -------------------------------------------------------------------

DIAGONAL = frozenset({"id", "z", "s", "sdg", "t", "tdg", "rz", "cz"})
MAX_PASSES = 3


def _is_inverse_pair(a: Gate, b: Gate) -> bool:
    if a.targets != b.targets and not (a.name in ("cz", "swap") and set(a.targets) == set(b.targets)):
        return False
    adj = a.adjoint()
    return adj.name == b.name and adj.params == b.params


def _commute(a: Gate, b: Gate) -> bool:
    if not set(a.targets) & set(b.targets):
        return True
    return a.name in DIAGONAL and b.name in DIAGONAL


def _expand(g: Gate, rng: SplitMix64) -> list[Gate]:
    """Rewrite one gate into an equivalent short sequence, or keep it."""
    if g.name == "x" and rng.chance(1, 4):
        return [Gate("h", g.targets), Gate("z", g.targets), Gate("h", g.targets)]
    if g.name == "z" and rng.chance(1, 4):
        return [Gate("h", g.targets), Gate("x", g.targets), Gate("h", g.targets)]
    if g.name == "cx" and rng.chance(1, 4):
        tgt = (g.targets[1],)
        return [Gate("h", tgt), Gate("cz", g.targets), Gate("h", tgt)]
    return [g]


def _cancel(gates: list[Gate]) -> list[Gate]:
    out: list[Gate] = []
    for g in gates:
        if out and _is_inverse_pair(out[-1], g):
            out.pop()
        else:
            out.append(g)
    return out


def obfuscate(c: Circuit, seed: int, passes: int = MAX_PASSES) -> Circuit:
    """Apply a seeded mix of cancellations, commuting swaps and H-conjugation identities."""
    if c.has_measurements():
        raise ValueError("cannot obfuscate a circuit containing measurements")
    rng = SplitMix64(seed)
    gates = _cancel(list(c.instructions))
    for _ in range(min(passes, MAX_PASSES)):
        swapped = list(gates)
        i = 0
        while i + 1 < len(swapped):
            if _commute(swapped[i], swapped[i + 1]) and rng.chance(1, 2):
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                i += 2
            else:
                i += 1
        expanded: list[Gate] = []
        for g in swapped:
            expanded.extend(_expand(g, rng))
        gates = _cancel(expanded)
    return Circuit(c.n, tuple(gates))


# --- random circuits for testing -----------------------------------------------------

CLIFFORD_1Q = ("h", "s", "sdg", "x", "y", "z")
CLIFFORD_2Q = ("cx", "cz", "swap")
NON_CLIFFORD = ("t", "tdg", "ccx", "rx", "rz")
_NON_CLIFFORD_PARAMS = {"rx": (RX_ANGLE,), "rz": (RZ2_ANGLE,)}


def random_circuit(
    rng: SplitMix64,
    n: int,
    num_gates: int,
    max_non_clifford: int = 0,
    clifford_1q: Sequence[str] = CLIFFORD_1Q,
    clifford_2q: Sequence[str] = CLIFFORD_2Q,
    non_clifford: Sequence[str] = NON_CLIFFORD,
    measure_rate: tuple[int, int] = (0, 1),
) -> Circuit:
    """Random circuit with at most ``max_non_clifford`` non-Clifford gates.

    ``measure_rate = (k, d)`` turns roughly ``k/d`` of the draws into a
    ``measure`` or ``project`` instruction.
    """
    wide = [g for g in non_clifford if g != "ccx" or n >= 3]
    budget = max_non_clifford
    gates: list[Gate] = []
    qubits = tuple(range(n))
    for _ in range(num_gates):
        if measure_rate[0] and rng.chance(*measure_rate):
            q = rng.below(n)
            if rng.chance(1, 2):
                gates.append(Gate.measure(q))
            else:
                gates.append(Gate.project(q, rng.choice(("0", "1", "+", "-"))))
            continue
        if budget and wide and rng.chance(1, 3):
            budget -= 1
            name = rng.choice(wide)
            k = 3 if name == "ccx" else 1
            gates.append(Gate(name, rng.distinct([qubits] * k), _NON_CLIFFORD_PARAMS.get(name, ())))
        elif n >= 2 and clifford_2q and rng.chance(1, 3):
            gates.append(Gate(rng.choice(clifford_2q), rng.distinct([qubits, qubits])))
        else:
            gates.append(Gate(rng.choice(clifford_1q), (rng.below(n),)))
    return Circuit(n, tuple(gates))
