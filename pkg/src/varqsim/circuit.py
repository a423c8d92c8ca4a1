"""Parameterized circuits, their analytic derivative decomposition, the
reference ansatz families, and a peephole gate-list compiler.

A circuit is an ordered gate list where each rotation gate may be bound to
a 1-based parameter slot; several gates may share one slot, in which case
they all receive the same angle and the derivative picks up one branch per
gate (product rule). For a rotation exp(-i theta P / 2) the derivative
branch has coefficient -i/2 and inserts the bare Pauli product P directly
before the gate, so the branch circuit stays unitary.

The circuit text format is one gate per line::

    # comment
    H q0
    CNOT q0 q1
    RX q0 theta:1        # bound to slot 1
    PROT ZZ q0 q1 theta:2
    RZ q1 -0.25          # concrete angle in radians

Qubits are written q<i>; parameter slots theta:<k> with k in 1..L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import (
    Gate,
    StateVec,
    apply_gates,
    cnot,
    gate_matrix,
    h,
    inverse_gate,
    pauli_gate,
    prot,
    rx,
    rz,
    x,
    z,
    zero_state,
)

__all__ = [
    "AnsatzSpec",
    "DerivativeTerm",
    "ParamCircuit",
    "ParamGate",
    "branch_state",
    "compile_circuit",
    "derivative_terms",
    "evaluate",
    "format_circuit",
    "parse_circuit",
    "reference_ansatz",
]

_ROTATION_GENERATOR = {"RX": "X", "RY": "Y", "RZ": "Z"}


@dataclass(frozen=True)
class ParamGate:
    """A gate optionally bound to a parameter slot (1-based). For bound
    gates the stored angle is ignored and replaced by theta[slot-1]."""

    gate: Gate
    slot: int | None = None

    def __post_init__(self):
        if self.slot is not None and self.gate.kind not in _ROTATION_GENERATOR and self.gate.kind != "PROT":
            raise ValueError(f"cannot bind a parameter to a {self.gate.kind} gate")


@dataclass(frozen=True)
class ParamCircuit:
    """Gate sequence over `n_qubits` qubits with `n_params` shared slots."""

    n_qubits: int
    gates: tuple[ParamGate, ...]
    n_params: int

    def __post_init__(self):
        seen = set()
        for pg in self.gates:
            for q in pg.gate.targets:
                if q >= self.n_qubits:
                    raise ValueError(
                        f"gate targets qubit {q}, circuit has {self.n_qubits}"
                    )
            if pg.slot is not None:
                if not 1 <= pg.slot <= self.n_params:
                    raise ValueError(f"slot {pg.slot} outside 1..{self.n_params}")
                seen.add(pg.slot)
        missing = set(range(1, self.n_params + 1)) - seen
        if missing:
            raise ValueError(f"unused parameter slots: {sorted(missing)}")

    def bind(self, theta) -> list[Gate]:
        """Concrete gate list at parameter vector theta (length n_params)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(
                f"got {theta.size} parameters, circuit has {self.n_params}"
            )
        out = []
        for pg in self.gates:
            g = pg.gate
            if pg.slot is not None:
                g = Gate(g.kind, g.targets, float(theta[pg.slot - 1]), g.pauli)
            out.append(g)
        return out


def evaluate(circuit: ParamCircuit, theta) -> StateVec:
    """State produced by the bound circuit on |0...0>."""
    return apply_gates(zero_state(circuit.n_qubits), circuit.bind(theta))


@dataclass(frozen=True)
class DerivativeTerm:
    """One branch of d/dtheta_i of the circuit unitary: coefficient `coeff`
    times the original circuit with `gate` inserted at `position` (that is,
    applied just before the gate currently at that index)."""

    param: int
    branch: int
    coeff: complex
    gate: Gate
    position: int


def derivative_terms(circuit: ParamCircuit, i: int) -> list[DerivativeTerm]:
    """Branches of the derivative with respect to slot i (1-based): one per
    gate bound to the slot, each with coefficient -i/2 and the gate's
    generator Pauli product inserted before it."""
    if not 1 <= i <= circuit.n_params:
        raise ValueError(f"parameter slot {i} outside 1..{circuit.n_params}")
    terms = []
    for pos, pg in enumerate(circuit.gates):
        if pg.slot != i:
            continue
        g = pg.gate
        if g.kind in _ROTATION_GENERATOR:
            gen = pauli_gate(_ROTATION_GENERATOR[g.kind], g.targets)
        else:  # PROT
            gen = pauli_gate(g.pauli, g.targets)
        terms.append(
            DerivativeTerm(
                param=i,
                branch=len(terms),
                coeff=-0.5j,
                gate=gen,
                position=pos,
            )
        )
    if not terms:
        raise ValueError(f"parameter slot {i} is not used by any gate")
    return terms


def branch_gates(circuit: ParamCircuit, theta, term: DerivativeTerm) -> list[Gate]:
    """Concrete gate list of the branch unitary U_{i,k} (insertion applied)."""
    gates = circuit.bind(theta)
    gates.insert(term.position, term.gate)
    return gates


def branch_state(circuit: ParamCircuit, theta, term: DerivativeTerm) -> StateVec:
    """U_{i,k} |0...0> (without the branch coefficient)."""
    return apply_gates(zero_state(circuit.n_qubits), branch_gates(circuit, theta, term))


def state_derivative(circuit: ParamCircuit, theta, i: int) -> np.ndarray:
    """d|phi>/dtheta_i as an amplitude vector, summed over branches."""
    out = np.zeros(1 << circuit.n_qubits, dtype=complex)
    for term in derivative_terms(circuit, i):
        out += term.coeff * branch_state(circuit, theta, term).amplitudes
    return out


# ---------------------------------------------------------------------------
# reference ansatz families


@dataclass(frozen=True)
class AnsatzSpec:
    """A reference circuit family: name/variant, the full parameterized
    circuit (Clifford preparation included), the starting parameters, and
    which eigenstate of the field term the start prepares (`level`, counted
    from the ground state up)."""

    name: str
    variant: str
    circuit: ParamCircuit
    theta0: np.ndarray
    level: int

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    @property
    def label(self) -> str:
        return f"{self.name}:{self.variant}"


def _pc(n: int, prep: list[Gate], bound: list[tuple[Gate, int]]) -> ParamCircuit:
    gates = [ParamGate(g) for g in prep] + [ParamGate(g, slot) for g, slot in bound]
    n_params = max(slot for _, slot in bound)
    return ParamCircuit(n, tuple(gates), n_params)


def reference_ansatz(name: str, variant: str | None = None) -> AnsatzSpec:
    """The three reference families.

    tfim2_even (variants "ground", "third"): prepare |++> or |-->, then one
    shared-angle ZZ rotation and an X rotation shared across both qubits.
    Covers the even (X X = +1) sector exactly, Bell states included.

    tfim2_odd (variants "plus", "minus"): a Clifford layer preparing
    (|+-> + |-+>)/sqrt(2) = (|00> - |11>)/sqrt(2), or the singlet
    (|01> - |10>)/sqrt(2) for "minus", then Rz and Rx on qubit 0.

    tfim3_qaoa (variant "ground"): |+++>, one shared angle on all three
    ring ZZ bonds, one shared X-rotation angle on all qubits. Deliberately
    too small to cover the full 3-spin evolution path.

    All families start at theta0 = (0, 0), where the circuit reduces to its
    Clifford preparation.
    """
    theta0 = np.zeros(2)
    if name == "tfim2_even":
        variant = variant or "ground"
        if variant == "ground":
            prep, level = [h(0), h(1)], 0
        elif variant == "third":
            prep, level = [x(0), h(0), x(1), h(1)], 3
        else:
            raise ValueError(f"unknown tfim2_even variant {variant!r}")
        bound = [
            (prot("ZZ", (0, 1), 0.0), 2),
            (rx(0, 0.0), 1),
            (rx(1, 0.0), 1),
        ]
        return AnsatzSpec(name, variant, _pc(2, prep, bound), theta0, level)
    if name == "tfim2_odd":
        variant = variant or "plus"
        bell_minus = [h(0), cnot(0, 1), z(0)]  # (|00> - |11>)/sqrt(2)
        if variant == "plus":
            prep, level = bell_minus, 1
        elif variant == "minus":
            prep, level = bell_minus + [x(0)], 2  # (|01> - |10>)/sqrt(2)
        else:
            raise ValueError(f"unknown tfim2_odd variant {variant!r}")
        bound = [
            (rz(0, 0.0), 2),
            (rx(0, 0.0), 1),
        ]
        return AnsatzSpec(name, variant, _pc(2, prep, bound), theta0, level)
    if name == "tfim3_qaoa":
        variant = variant or "ground"
        if variant != "ground":
            raise ValueError(f"unknown tfim3_qaoa variant {variant!r}")
        prep = [h(0), h(1), h(2)]
        bound = [
            (prot("ZZ", (0, 1), 0.0), 2),
            (prot("ZZ", (1, 2), 0.0), 2),
            (prot("ZZ", (2, 0), 0.0), 2),
            (rx(0, 0.0), 1),
            (rx(1, 0.0), 1),
            (rx(2, 0.0), 1),
        ]
        return AnsatzSpec(name, variant, _pc(3, prep, bound), theta0, 0)
    raise ValueError(f"unknown ansatz {name!r}")


ANSATZ_VARIANTS = {
    "tfim2_even": ("ground", "third"),
    "tfim2_odd": ("plus", "minus"),
    "tfim3_qaoa": ("ground",),
}


def spectrum_ansatze() -> list[AnsatzSpec]:
    """The four 2-spin ansatze ordered by starting level (0..3)."""
    specs = [
        reference_ansatz("tfim2_even", "ground"),
        reference_ansatz("tfim2_odd", "plus"),
        reference_ansatz("tfim2_odd", "minus"),
        reference_ansatz("tfim2_even", "third"),
    ]
    return sorted(specs, key=lambda a: a.level)


# ---------------------------------------------------------------------------
# peephole compiler

_SELF_INVERSE = {"H", "X", "Y", "Z", "CZ", "CNOT", "PAULI"}
_INVERSE_PAIRS = {("S", "SDG"), ("SDG", "S")}
_DIAGONAL_1Q = {"Z", "S", "SDG", "RZ"}
_X_FAMILY_1Q = {"X", "RX"}
_AXIS = {"X": "X", "RX": "X", "Y": "Y", "RY": "Y", "Z": "Z", "S": "Z", "SDG": "Z", "RZ": "Z"}


def _pauli_axes(g: Gate) -> dict[int, str] | None:
    """Per-qubit Pauli axis when the gate is a Pauli product or a rotation
    generated by one; None when no such description exists."""
    if g.kind in _AXIS:
        return {g.targets[0]: _AXIS[g.kind]}
    if g.kind in ("PROT", "PAULI"):
        return dict(zip(g.targets, g.pauli))
    if g.kind == "CZ":
        return {g.targets[0]: "Z", g.targets[1]: "Z"}
    return None


def _is_diagonal(g: Gate) -> bool:
    if g.kind in _DIAGONAL_1Q or g.kind == "CZ":
        return True
    return g.kind in ("PROT", "PAULI") and set(g.pauli) == {"Z"}


def _commutes(a: Gate, b: Gate) -> bool:
    """Sound (possibly conservative) commutation test."""
    shared = set(a.targets) & set(b.targets)
    if not shared:
        return True
    if _is_diagonal(a) and _is_diagonal(b):
        return True
    ax_a, ax_b = _pauli_axes(a), _pauli_axes(b)
    if ax_a is not None and ax_b is not None and a.kind != "CZ" and b.kind != "CZ":
        anti = sum(1 for q in shared if ax_a[q] != ax_b[q])
        return anti % 2 == 0
    for first, second in ((a, b), (b, a)):
        if first.kind != "CNOT":
            continue
        control, target = first.targets
        if second.kind == "CNOT":
            c2, t2 = second.targets
            if (control == c2 and target != t2) or (target == t2 and control != c2):
                return True
            continue
        ax = _pauli_axes(second)
        if ax is None:
            continue
        ok = all(
            (q == control and ax[q] == "Z") or (q == target and ax[q] == "X")
            for q in shared
            if q in ax
        )
        if ok and shared <= set(ax):
            return True
    return False


def _merge(a: Gate, b: Gate) -> Gate | None:
    """Merged rotation when a and b are same-axis rotations on the same
    targets; None otherwise. A zero merged angle (mod 2 pi) is reported as
    a None-angle sentinel via angle 0."""
    if a.kind != b.kind or a.targets != b.targets or a.kind not in ("RX", "RY", "RZ", "PROT"):
        return None
    if a.kind == "PROT" and a.pauli != b.pauli:
        return None
    return Gate(a.kind, a.targets, a.angle + b.angle, a.pauli)


def _cancels(a: Gate, b: Gate) -> bool:
    if a.targets != b.targets:
        return False
    if a.kind == b.kind and a.kind in _SELF_INVERSE:
        return a.pauli == b.pauli if a.kind == "PAULI" else True
    return (a.kind, b.kind) in _INVERSE_PAIRS


def _angle_is_trivial(angle: float) -> bool:
    # exp(-i a P / 2) is the identity up to global phase at multiples of 2 pi
    return abs((angle + np.pi) % (2 * np.pi) - np.pi) < 1e-12


def compile_circuit(gates) -> list[Gate]:
    """Peephole pass over a concrete gate list: cancel adjacent inverses,
    merge same-axis rotations, and look for partners across gates that
    provably commute. Output never has more gates than the input and its
    unitary equals the input's up to global phase."""
    out = list(gates)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(out):
            g = out[i]
            if g.kind in ("RX", "RY", "RZ", "PROT") and _angle_is_trivial(g.angle):
                del out[i]
                changed = True
                continue
            j = i + 1
            while j < len(out):
                other = out[j]
                if _cancels(g, other):
                    del out[j], out[i]
                    changed = True
                    break
                merged = _merge(g, other)
                if merged is not None:
                    del out[j]
                    if _angle_is_trivial(merged.angle):
                        del out[i]
                    else:
                        out[i] = merged
                    changed = True
                    break
                if not _commutes(g, other):
                    break
                j += 1
            else:
                i += 1
                continue
            if changed:
                continue
            i += 1
    return out


def circuit_unitary(gates, n_qubits: int) -> np.ndarray:
    """Dense unitary of a concrete gate list (small n only; test helper and
    compiler verification)."""
    dim = 1 << n_qubits
    cols = np.zeros((dim, dim), dtype=complex)
    from .statevector import basis_state

    for k in range(dim):
        cols[:, k] = apply_gates(basis_state(n_qubits, k), gates).amplitudes
    return cols


# ---------------------------------------------------------------------------
# text format


def format_circuit(circuit: ParamCircuit) -> str:
    lines = []
    for pg in circuit.gates:
        g = pg.gate
        parts = [g.kind]
        if g.pauli is not None:
            parts.append(g.pauli)
        parts.extend(f"q{q}" for q in g.targets)
        if pg.slot is not None:
            parts.append(f"theta:{pg.slot}")
        elif g.kind in ("RX", "RY", "RZ", "PROT"):
            parts.append(repr(g.angle))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_circuit(
    text: str, n_qubits: int | None = None, n_params: int | None = None
) -> ParamCircuit:
    """Parse the one-gate-per-line format (see module docstring). Qubit
    count and parameter count are inferred when not given."""
    pgates: list[ParamGate] = []
    max_q = -1
    max_slot = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts.pop(0).upper()
        if kind not in {"H", "X", "Y", "Z", "S", "SDG", "RX", "RY", "RZ", "CZ", "CNOT", "PROT", "PAULI"}:
            raise ValueError(f"line {lineno}: unknown gate {kind!r}")
        pauli = None
        if kind in ("PROT", "PAULI"):
            if not parts:
                raise ValueError(f"line {lineno}: {kind} needs a pauli string")
            pauli = parts.pop(0).upper()
        targets = []
        while parts and parts[0].lower().startswith("q"):
            targets.append(int(parts.pop(0)[1:]))
        slot = None
        angle = None
        if kind in ("RX", "RY", "RZ", "PROT"):
            if not parts:
                raise ValueError(f"line {lineno}: {kind} needs an angle or theta:<k>")
            tok = parts.pop(0)
            if tok.lower().startswith("theta:"):
                slot = int(tok.split(":", 1)[1])
                angle = 0.0
            else:
                angle = float(tok)
        if parts:
            raise ValueError(f"line {lineno}: trailing tokens {parts}")
        gate = Gate(kind, tuple(targets), angle, pauli)
        pgates.append(ParamGate(gate, slot))
        max_q = max(max_q, *targets)
        if slot is not None:
            max_slot = max(max_slot, slot)
    n = n_qubits if n_qubits is not None else max_q + 1
    length = n_params if n_params is not None else max_slot
    return ParamCircuit(n, tuple(pgates), length)
