"""Dense state-vector simulation of small qubit registers.

Conventions, used consistently across the whole package:

* Qubit k is bit k of the basis index (qubit 0 is the least significant
  bit), so basis state |b_{n-1} ... b_1 b_0> sits at index sum_k b_k 2^k.
* Bitstrings returned by :func:`sample_bitstrings` are written like binary
  numbers, most-significant qubit first: "10" means qubit 1 set, qubit 0
  clear.
* Pauli strings (see :mod:`varqsim.hamiltonian`) are site labels and read
  the other way round: character k acts on qubit k, so "XZI" is X on
  qubit 0 and Z on qubit 1.
* Rotations use the half-angle convention Rx(a) = exp(-i a X / 2), same
  for Ry, Rz, and tensor-product rotations exp(-i a P / 2).

Gate matrices are applied by strided kernels on a reshaped amplitude
tensor; the full 2^n x 2^n unitary is never formed. Global phase is never
normalised away, so phase-insensitive comparisons must go through
|inner(a, b)|.

States are immutable from the caller's point of view: every operation
returns a fresh :class:`StateVec` and amplitude buffers are marked
read-only, so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Gate",
    "StateVec",
    "apply_controlled",
    "apply_gate",
    "apply_gates",
    "basis_state",
    "cnot",
    "cz",
    "expect_pauli",
    "gate_matrix",
    "h",
    "inner",
    "inverse_gate",
    "pauli_gate",
    "plus_state",
    "prot",
    "rx",
    "ry",
    "rz",
    "s",
    "sdg",
    "sample_bitstrings",
    "x",
    "y",
    "z",
    "zero_state",
]

_SQRT2 = float(np.sqrt(2.0))

_FIXED_1Q = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": _FIXED_1Q["X"],
    "Y": _FIXED_1Q["Y"],
    "Z": _FIXED_1Q["Z"],
}

#: kinds whose `angle` field is meaningful
ROTATION_KINDS = frozenset({"RX", "RY", "RZ", "PROT"})
#: all accepted gate kinds; PAULI is a plain tensor product of Pauli
#: matrices (used as the generator inserted by derivative decompositions)
GATE_KINDS = ROTATION_KINDS | frozenset(
    {"H", "X", "Y", "Z", "S", "SDG", "CZ", "CNOT", "PAULI"}
)

_ROTATION_AXIS = {"RX": "X", "RY": "Y", "RZ": "Z"}


@dataclass(frozen=True)
class Gate:
    """One concrete gate.

    `targets` are qubit indices; for CNOT the first target is the control.
    `angle` is set for rotation kinds only. `pauli` holds the per-target
    letter string of PROT (a rotation exp(-i angle P / 2)) and PAULI (the
    bare tensor product P itself).
    """

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    pauli: str | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(q) for q in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate target qubits in {self.kind}: {targets}")
        if any(q < 0 for q in targets):
            raise ValueError(f"negative target qubit in {self.kind}: {targets}")
        if self.kind in ("CZ", "CNOT"):
            if len(targets) != 2:
                raise ValueError(f"{self.kind} takes exactly two targets")
        elif self.kind in _FIXED_1Q or self.kind in _ROTATION_AXIS:
            if len(targets) != 1:
                raise ValueError(f"{self.kind} takes exactly one target")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind} needs an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")
        if self.kind in ("PROT", "PAULI"):
            if not self.pauli or len(self.pauli) != len(targets):
                raise ValueError("pauli string must have one letter per target")
            if any(c not in "XYZ" for c in self.pauli):
                raise ValueError(f"bad pauli letters {self.pauli!r} (use X, Y, Z)")
        elif self.pauli is not None:
            raise ValueError(f"{self.kind} takes no pauli string")


def h(q: int) -> Gate:
    return Gate("H", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


def y(q: int) -> Gate:
    return Gate("Y", (q,))


def z(q: int) -> Gate:
    return Gate("Z", (q,))


def s(q: int) -> Gate:
    return Gate("S", (q,))


def sdg(q: int) -> Gate:
    return Gate("SDG", (q,))


def rx(q: int, angle: float) -> Gate:
    return Gate("RX", (q,), angle)


def ry(q: int, angle: float) -> Gate:
    return Gate("RY", (q,), angle)


def rz(q: int, angle: float) -> Gate:
    return Gate("RZ", (q,), angle)


def cz(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def prot(pauli: str, targets: tuple[int, ...], angle: float) -> Gate:
    """Rotation exp(-i angle P / 2) for a Pauli product P on `targets`."""
    return Gate("PROT", tuple(targets), angle, pauli)


def pauli_gate(pauli: str, targets: tuple[int, ...]) -> Gate:
    """The bare Pauli product P on `targets` (unitary and Hermitian)."""
    return Gate("PAULI", tuple(targets), None, pauli)


def _pauli_kron(letters: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis; letters[0] is the most
    significant bit of the local matrix index."""
    m = _PAULI_1Q[letters[0]]
    for c in letters[1:]:
        m = np.kron(m, _PAULI_1Q[c])
    return m


def gate_matrix(gate: Gate) -> np.ndarray:
    """Local unitary of `gate`, with targets[0] as the most significant bit
    of the local index (so CNOT = diag-block basis |control target>)."""
    if gate.kind in _FIXED_1Q:
        return _FIXED_1Q[gate.kind]
    if gate.kind in _ROTATION_AXIS:
        p = _PAULI_1Q[_ROTATION_AXIS[gate.kind]]
        a = gate.angle
        return np.cos(a / 2) * np.eye(2) - 1j * np.sin(a / 2) * p
    if gate.kind == "PROT":
        p = _pauli_kron(gate.pauli)
        a = gate.angle
        return np.cos(a / 2) * np.eye(len(p)) - 1j * np.sin(a / 2) * p
    if gate.kind == "PAULI":
        return _pauli_kron(gate.pauli)
    if gate.kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if gate.kind == "CNOT":
        m = np.eye(4, dtype=complex)
        m[[2, 3]] = m[[3, 2]]
        return m
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def inverse_gate(gate: Gate) -> Gate:
    """Exact inverse as another Gate."""
    if gate.kind in ("H", "X", "Y", "Z", "CZ", "CNOT", "PAULI"):
        return gate
    if gate.kind == "S":
        return Gate("SDG", gate.targets)
    if gate.kind == "SDG":
        return Gate("S", gate.targets)
    return Gate(gate.kind, gate.targets, -gate.angle, gate.pauli)


@dataclass(frozen=True)
class StateVec:
    """Pure state of `n_qubits` qubits as a dense complex amplitude vector."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude vector of length {amps.size} does not match "
                f"{self.n_qubits} qubits"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def zero_state(n_qubits: int) -> StateVec:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVec(n_qubits, amps)


def basis_state(n_qubits: int, index: int) -> StateVec:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVec(n_qubits, amps)


def plus_state(n_qubits: int) -> StateVec:
    amps = np.full(1 << n_qubits, 1.0 / np.sqrt(1 << n_qubits), dtype=complex)
    return StateVec(n_qubits, amps)


def _apply_matrix(amps: np.ndarray, n: int, mat: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix on `targets` of an n-qubit amplitude vector.

    The amplitude vector is viewed as an n-axis tensor where axis (n-1-q)
    carries qubit q; the target axes are moved to the front, hit with one
    small matmul, and moved back.
    """
    k = len(targets)
    t = amps.reshape((2,) * n)
    axes = tuple(n - 1 - q for q in targets)
    t = np.moveaxis(t, axes, range(k))
    rest = t.shape[k:]
    out = (mat @ t.reshape(1 << k, -1)).reshape((2,) * k + rest)
    out = np.moveaxis(out, range(k), axes)
    return np.ascontiguousarray(out).reshape(-1)


def _check_targets(gate: Gate, n_qubits: int):
    for q in gate.targets:
        if q >= n_qubits:
            raise ValueError(
                f"gate {gate.kind} targets qubit {q} but state has {n_qubits} qubits"
            )


def apply_gate(state: StateVec, gate: Gate) -> StateVec:
    """Apply one gate, returning a new state. Raises ValueError for targets
    out of range (duplicates are rejected at Gate construction)."""
    _check_targets(gate, state.n_qubits)
    out = _apply_matrix(state.amplitudes, state.n_qubits, gate_matrix(gate), gate.targets)
    return StateVec(state.n_qubits, out)


def apply_gates(state: StateVec, gates) -> StateVec:
    for g in gates:
        state = apply_gate(state, g)
    return state


def apply_controlled(state: StateVec, gate: Gate, control: int) -> StateVec:
    """Apply `gate` controlled on qubit `control` being |1>."""
    if control in gate.targets:
        raise ValueError("control qubit collides with gate targets")
    _check_targets(gate, state.n_qubits)
    if control >= state.n_qubits:
        raise ValueError(f"control qubit {control} out of range")
    m = gate_matrix(gate)
    dim = len(m)
    cm = np.eye(2 * dim, dtype=complex)
    cm[dim:, dim:] = m
    out = _apply_matrix(
        state.amplitudes, state.n_qubits, cm, (control,) + gate.targets
    )
    return StateVec(state.n_qubits, out)


def inner(a: StateVec, b: StateVec) -> complex:
    """<a|b>, conjugate-linear in `a`."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _pauli_masks(string: str) -> tuple[int, int, int]:
    xmask = zmask = n_y = 0
    for q, p in enumerate(string):
        if p in "XY":
            xmask |= 1 << q
        if p in "ZY":
            zmask |= 1 << q
        if p == "Y":
            n_y += 1
        elif p not in "IXZ":
            raise ValueError(f"bad pauli letter {p!r} in {string!r}")
    return xmask, zmask, n_y


def _parity(idx: np.ndarray, mask: int) -> np.ndarray:
    par = np.zeros(idx.shape, dtype=np.int64)
    b = 0
    while mask >> b:
        if (mask >> b) & 1:
            par ^= (idx >> b) & 1
        b += 1
    return par


def apply_pauli_string(amps: np.ndarray, string: str) -> np.ndarray:
    """P @ amps for a full-width Pauli string (character k acts on qubit k)."""
    xmask, zmask, n_y = _pauli_masks(string)
    idx = np.arange(amps.size)
    src = idx ^ xmask
    sign = 1.0 - 2.0 * _parity(src, zmask)
    return (1j**n_y) * sign * amps[src]


def expect_pauli(state: StateVec, obs) -> float:
    """<state|obs|state> for a Hermitian weighted Pauli sum.

    `obs` is anything with `terms` (iterable of (coeff, string) with real
    coefficients; character k of each string acts on qubit k) or such an
    iterable directly. Strings may cover fewer qubits than the state; the
    remaining qubits are implicitly identity.
    """
    terms = getattr(obs, "terms", obs)
    amps = state.amplitudes
    val = 0.0 + 0.0j
    for coeff, string in terms:
        if isinstance(coeff, complex):
            if coeff.imag != 0.0:
                raise ValueError(f"non-Hermitian (complex) coefficient {coeff}")
            coeff = coeff.real
        if len(string) > state.n_qubits:
            raise ValueError(
                f"pauli string {string!r} is wider than the {state.n_qubits}-qubit state"
            )
        val += coeff * np.vdot(amps, apply_pauli_string(amps, string))
    return float(val.real)


def sample_bitstrings(state: StateVec, shots: int, seed: int) -> dict[str, int]:
    """Multinomial bitstring counts from |amplitudes|^2; deterministic for a
    fixed seed. Keys are binary strings, most-significant qubit first."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    n = state.n_qubits
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c}
