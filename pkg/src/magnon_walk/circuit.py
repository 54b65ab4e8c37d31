"""Gate-level simulation of the Trotterised spin-flip walk on a qubit chain.

Qubit ``i`` holds site ``i``; |1> is a flipped spin (one boson). The chain
Hamiltonian, constant dropped, is

    H = -J1 [2 sum_n n_n - sum_n (a_n a+_{n+1} + a+_n a_{n+1})]

which for J1 = -1 is the paper's setting. One symmetric Trotter step is
U1 U2 U1 with U1 = exp(i J1 dt sum_n n_n) realised by phase gates and U2
the hopping factor, itself split symmetrically over layers of disjoint
bonds so the whole step is second order in dt.

Basis ordering: qubit 0 is the most significant bit, so label "10000"
has the flip on qubit 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .walk import HopMatrix

MAX_QUBITS = 20
GATE_KINDS = ("u1", "ry", "rz", "cx", "unitary")

_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "cx" else 1
        if self.kind == "unitary":
            arity = int(round(np.log2(self.matrix.shape[0])))
        if len(self.qubits) != arity or len(set(self.qubits)) != arity:
            raise ValidationError(f"{self.kind} gate needs {arity} distinct qubits, got {self.qubits}")
        if self.kind in ("u1", "ry", "rz") and self.theta is None:
            raise ValidationError(f"{self.kind} gate needs an angle")

    def to_matrix(self) -> np.ndarray:
        th = self.theta
        if self.kind == "u1":
            return np.diag([1.0, np.exp(1j * th)])
        if self.kind == "ry":
            c, s = math.cos(th / 2), math.sin(th / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if self.kind == "rz":
            return np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)])
        if self.kind == "cx":
            return _CX
        return np.asarray(self.matrix, dtype=complex)


def u1(q: int, theta: float) -> Gate:
    return Gate("u1", (q,), float(theta))


def ry(q: int, theta: float) -> Gate:
    return Gate("ry", (q,), float(theta))


def rz(q: int, theta: float) -> Gate:
    return Gate("rz", (q,), float(theta))


def cx(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValidationError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if any(not 0 <= q < self.n_qubits for q in g.qubits):
            raise ValidationError(f"gate {g.kind} on {g.qubits} outside {self.n_qubits} qubits")

    def append(self, g: Gate) -> "Circuit":
        self._check(g)
        self.gates.append(g)
        return self

    def compose(self, other: "Circuit", qubits: tuple[int, ...] | None = None) -> "Circuit":
        """Append ``other``'s gates, relabelling its qubit i to ``qubits[i]``."""
        qubits = tuple(range(other.n_qubits)) if qubits is None else tuple(qubits)
        if len(qubits) != other.n_qubits:
            raise DimensionMismatchError("qubit map does not match fragment width")
        for g in other.gates:
            self.append(Gate(g.kind, tuple(qubits[q] for q in g.qubits), g.theta, g.matrix))
        return self

    def __len__(self) -> int:
        return len(self.gates)

    def unitary(self) -> np.ndarray:
        """Dense 2^L x 2^L matrix of the whole circuit (small L only)."""
        dim = 1 << self.n_qubits
        cols = [run(self, Statevector(np.eye(dim, dtype=complex)[:, j])).amplitudes for j in range(dim)]
        return np.column_stack(cols)


@dataclass
class Statevector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(a.size))) if a.size else -1
        if a.size == 0 or a.size != 1 << n:
            raise DimensionMismatchError(f"length {a.size} is not a power of two")
        if n > MAX_QUBITS:
            raise ValidationError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit guard")
        self.amplitudes = a

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        a = np.zeros(1 << n_qubits, dtype=complex)
        a[0] = 1.0
        return cls(a)

    @classmethod
    def from_label(cls, label: str) -> "Statevector":
        """Computational basis state; character i is qubit i."""
        if not label or set(label) - {"0", "1"}:
            raise ValidationError(f"bad basis label {label!r}")
        a = np.zeros(1 << len(label), dtype=complex)
        a[int(label, 2)] = 1.0
        return cls(a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def apply_gate(psi: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    k = len(gate.qubits)
    tensor = psi.reshape((2,) * n_qubits)
    op = gate.to_matrix().reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(gate.qubits)))
    return np.moveaxis(out, list(range(k)), list(gate.qubits)).reshape(-1)


def run(circuit: Circuit, initial: Statevector) -> Statevector:
    """Apply the circuit's gates in order to a copy of ``initial``."""
    if initial.n_qubits != circuit.n_qubits:
        raise DimensionMismatchError(
            f"circuit has {circuit.n_qubits} qubits, state has {initial.n_qubits}"
        )
    psi = initial.amplitudes.copy()
    for g in circuit.gates:
        psi = apply_gate(psi, g, circuit.n_qubits)
    return Statevector(psi)


def measure_densities(state: Statevector) -> np.ndarray:
    """<n_i> for every qubit: probability of finding it in |1>."""
    L = state.n_qubits
    p = (np.abs(state.amplitudes) ** 2).reshape((2,) * L)
    return np.array([p.sum(axis=tuple(a for a in range(L) if a != i))[1] for i in range(L)])


def build_u1(n_qubits: int, delta_t: float, j1: float = -1.0) -> Circuit:
    """On-site factor exp(i J1 dt n) as one phase gate per qubit."""
    return Circuit(n_qubits, [u1(q, j1 * delta_t) for q in range(n_qubits)])


def build_u2_pair(delta_t: float, j1: float = -1.0) -> Circuit:
    """Two-qubit hopping factor exp(-i J1 dt (s+ s- + s- s+)).

    The pair exchange is a rotation in span{|01>, |10>}. A CNOT from
    qubit 1 onto qubit 0 maps that span onto qubit 0 = 1, where the
    exchange becomes an X rotation of qubit 1 controlled by qubit 0. The
    controlled X rotation is a controlled Y rotation conjugated by Z
    rotations of the target.
    """
    theta = -j1 * delta_t
    gates = [
        cx(1, 0),
        rz(1, math.pi / 2),
        ry(1, -theta),
        cx(0, 1),
        ry(1, theta),
        cx(0, 1),
        rz(1, -math.pi / 2),
        cx(1, 0),
    ]
    return Circuit(2, gates)


def hopping_pair_unitary(delta_t: float, j1: float = -1.0) -> np.ndarray:
    """Closed form of the target two-qubit exchange unitary."""
    theta = -j1 * delta_t
    U = np.eye(4, dtype=complex)
    U[1, 1] = U[2, 2] = math.cos(theta)
    U[1, 2] = U[2, 1] = 1j * math.sin(theta)
    return U


def bond_layers(n_qubits: int, periodic: bool = False) -> list[list[tuple[int, int]]]:
    """Nearest-neighbour bonds grouped into layers of disjoint pairs.

    Layer 0 holds bonds (i, i+1) with even i, layer 1 those with odd i. A
    periodic closing bond (L-1, 0) joins layer 1 for even L and forms a
    third layer for odd L.
    """
    if periodic and n_qubits < 3:
        raise ValidationError("periodic chains need at least 3 qubits")
    even = [(i, i + 1) for i in range(0, n_qubits - 1, 2)]
    odd = [(i, i + 1) for i in range(1, n_qubits - 1, 2)]
    layers = [even, odd]
    if periodic:
        if n_qubits % 2 == 0:
            odd.append((n_qubits - 1, 0))
        else:
            layers.append([(n_qubits - 1, 0)])
    return [layer for layer in layers if layer]


def build_trotter_step(n_qubits: int, delta_t: float, j1: float = -1.0, periodic: bool = False) -> Circuit:
    """One symmetric step U1 U2 U1.

    U2 runs the bond layers as l0(dt/2) l1(dt/2) ... l_last(dt) ... l1(dt/2) l0(dt/2).
    """
    if n_qubits < 2:
        raise ValidationError("a Trotter step needs at least 2 qubits")
    layers = bond_layers(n_qubits, periodic)
    half = [(layer, 0.5 * delta_t) for layer in layers[:-1]]
    sequence = half + [(layers[-1], delta_t)] + half[::-1]

    c = Circuit(n_qubits, metadata={"delta_t": delta_t, "j1": j1, "steps": 1, "periodic": periodic})
    c.compose(build_u1(n_qubits, delta_t, j1))
    for layer, tau in sequence:
        frag = build_u2_pair(tau, j1)
        for a, b in layer:
            c.compose(frag, (a, b))
    c.compose(build_u1(n_qubits, delta_t, j1))
    return c


def trotter_schedule(t: float, delta_t: float) -> list[float]:
    """Step sizes reaching time ``t``: full ``delta_t`` steps plus one shorter remainder.

    ``delta_t = 0`` gives a single zero-length step, i.e. no evolution.
    """
    if t < 0 or delta_t < 0:
        raise ValidationError("t and delta_t must be non-negative")
    if delta_t == 0:
        return [0.0]
    n = int(math.floor(t / delta_t + 1e-9))
    rest = t - n * delta_t
    steps = [delta_t] * n
    if rest > 1e-12:
        steps.append(rest)
    return steps


def build_evolution_circuit(
    n_qubits: int,
    t: float,
    delta_t: float,
    j1: float = -1.0,
    flip: int | None = None,
    periodic: bool = False,
) -> Circuit:
    """Prepare a flip on qubit ``flip`` (default centre) from |0...0> and evolve to ``t``.

    The flip is ry(pi), which maps |0> to |1> exactly.
    """
    flip = n_qubits // 2 if flip is None else flip
    steps = trotter_schedule(t, delta_t)
    c = Circuit(
        n_qubits,
        [ry(flip, math.pi)],
        metadata={"t": t, "delta_t": delta_t, "j1": j1, "steps": len(steps), "flip": flip, "periodic": periodic},
    )
    for tau in steps:
        c.compose(build_trotter_step(n_qubits, tau, j1, periodic))
    return c


def chain_hop_matrix(n_sites: int, j1: float = -1.0, periodic: bool = False) -> HopMatrix:
    """Single-boson block of the chain Hamiltonian: diagonal -2 J1, hopping J1."""
    import scipy.sparse as sp

    M = np.diag(np.full(n_sites, -2.0 * j1))
    for a, b in (pair for layer in bond_layers(n_sites, periodic) for pair in layer):
        M[a, b] += j1
        M[b, a] += j1
    return HopMatrix(sp.csr_matrix(M), (n_sites, 1))


def chain_hamiltonian(n_qubits: int, j1: float = -1.0, periodic: bool = False) -> np.ndarray:
    """Dense 2^L chain Hamiltonian in the qubit basis (constant term dropped)."""
    dim = 1 << n_qubits
    H = np.zeros((dim, dim), dtype=complex)
    states = np.arange(dim)

    def bit(q):
        return (states >> (n_qubits - 1 - q)) & 1

    for q in range(n_qubits):
        H[states, states] += -2.0 * j1 * bit(q)
    for a, b in (pair for layer in bond_layers(n_qubits, periodic) for pair in layer):
        swap = np.flatnonzero(bit(a) != bit(b))
        mask = (1 << (n_qubits - 1 - a)) | (1 << (n_qubits - 1 - b))
        H[swap ^ mask, swap] += j1
    return H


def phase_aligned_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Spectral-norm distance between U and V minimised over a global phase."""
    ov = np.trace(V.conj().T @ U)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(U - phase * V, 2))
