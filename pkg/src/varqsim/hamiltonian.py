"""Weighted Pauli-sum observables, the driven transverse-field Ising chain,
and the exact oracle (dense eigenspectra and RK4 Schrodinger integration).

The chain interpolates H(t) = B(t) H0 + J(t) HT with the linear ramp
B(t) = 1 - t/T, J(t) = t/T, where H0 = -sum_j X_j and HT = -sum_<jk> Z_j Z_k.
Energies are dimensionless (hbar = 1).

Pauli strings are site labels: character k of a string acts on qubit k
("XZI" = X on qubit 0, Z on qubit 1). The text form of a PauliSum is one
term per line, "coeff string", e.g. "-1.0 XZI".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .statevector import StateVec, apply_pauli_string

__all__ = [
    "IntegrationError",
    "PauliSum",
    "Schedule",
    "Spectrum",
    "build_tfim",
    "eigenspectrum",
    "exact_evolve",
    "hamiltonian_at",
]

_DENSE_LIMIT = 12  # dense eigensolver bound


class IntegrationError(RuntimeError):
    """Raised when the oracle integrator loses more norm than tolerated."""


def _check_coeff(c) -> float:
    if isinstance(c, complex):
        if c.imag != 0.0:
            raise ValueError(f"PauliSum coefficients must be real, got {c}")
        return float(c.real)
    return float(c)


@dataclass(frozen=True)
class PauliSum:
    """Hermitian operator sum_k coeff_k * P_k with real coefficients.

    Duplicate strings are merged (and exact cancellations dropped) on
    construction; all strings must have length `n_qubits`.
    """

    n_qubits: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        merged: dict[str, float] = {}
        for coeff, string in self.terms:
            coeff = _check_coeff(coeff)
            string = str(string).upper()
            if len(string) != self.n_qubits:
                raise ValueError(
                    f"string {string!r} has length {len(string)}, expected {self.n_qubits}"
                )
            if any(c not in "IXYZ" for c in string):
                raise ValueError(f"bad pauli letters in {string!r}")
            merged[string] = merged.get(string, 0.0) + coeff
        canon = tuple(
            (c, s) for s, c in sorted(merged.items()) if c != 0.0
        )
        object.__setattr__(self, "terms", canon)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot add PauliSums of different width")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    def __rmul__(self, scalar) -> "PauliSum":
        scalar = _check_coeff(scalar)
        return PauliSum(
            self.n_qubits, tuple((scalar * c, s) for c, s in self.terms)
        )

    __mul__ = __rmul__

    def __neg__(self) -> "PauliSum":
        return -1.0 * self

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """Matrix-vector product with a dense amplitude vector."""
        out = np.zeros_like(amps)
        for coeff, string in self.terms:
            out += coeff * apply_pauli_string(amps, string)
        return out

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (kron built per term; fine for small n)."""
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        eye = np.eye(dim, dtype=complex)
        for coeff, string in self.terms:
            cols = np.stack(
                [apply_pauli_string(eye[:, k], string) for k in range(dim)],
                axis=1,
            )
            mat += coeff * cols
        return mat

    def to_text(self) -> str:
        return "\n".join(f"{c!r} {s}" for c, s in self.terms) + "\n"

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        terms = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'coeff string', got {raw!r}")
            terms.append((float(parts[0]), parts[1]))
        if not terms and n_qubits is None:
            raise ValueError("empty PauliSum text needs an explicit n_qubits")
        n = n_qubits if n_qubits is not None else len(terms[0][1])
        return cls(n, tuple(terms))


@dataclass(frozen=True)
class Schedule:
    """Linear ramp over [0, T]: B(t) = 1 - t/T, J(t) = t/T."""

    total_time: float = 10.0

    def __post_init__(self):
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")

    def b(self, t: float) -> float:
        return 1.0 - t / self.total_time

    def j(self, t: float) -> float:
        return t / self.total_time


def build_tfim(
    n: int, boundary: str = "periodic", n2_double_bond: bool = False
) -> tuple[PauliSum, PauliSum]:
    """Field and coupling parts of the transverse-field Ising chain.

    H0 = -sum_j X_j; HT = -sum of Z Z bonds: n-1 bonds for an open chain,
    n bonds for a periodic chain with n >= 3. For n = 2 the periodic ring
    collapses onto one bond, which is counted once by default; pass
    n2_double_bond=True to keep the doubled coefficient.
    """
    if n < 2:
        raise ValueError("need at least 2 sites")
    if boundary not in ("open", "periodic"):
        raise ValueError(f"unknown boundary {boundary!r}")

    def site_string(positions: tuple[int, ...], letter: str) -> str:
        return "".join(letter if k in positions else "I" for k in range(n))

    h0 = PauliSum(n, tuple((-1.0, site_string((j,), "X")) for j in range(n)))
    bonds = [(j, j + 1) for j in range(n - 1)]
    if boundary == "periodic":
        if n >= 3:
            bonds.append((n - 1, 0))
        elif n2_double_bond:
            bonds.append((0, 1))
    ht = PauliSum(n, tuple((-1.0, site_string(b, "Z")) for b in bonds))
    return h0, ht


def hamiltonian_at(
    h0: PauliSum, ht: PauliSum, schedule: Schedule, t: float
) -> PauliSum:
    """B(t) * h0 + J(t) * ht with merged terms; t must lie in [0, T]."""
    if not 0.0 <= t <= schedule.total_time:
        raise ValueError(f"t={t} outside [0, {schedule.total_time}]")
    return schedule.b(t) * h0 + schedule.j(t) * ht


@dataclass(frozen=True)
class Spectrum:
    """Full sorted eigensystem of a PauliSum."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: tuple[StateVec, ...] = field(repr=False)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> StateVec:
        return self.eigenvectors[0]


def eigenspectrum(h: PauliSum) -> Spectrum:
    """Dense ascending eigendecomposition (n_qubits <= 12)."""
    if h.n_qubits > _DENSE_LIMIT:
        raise ValueError(
            f"{h.n_qubits} qubits exceeds the dense solver bound {_DENSE_LIMIT}"
        )
    vals, vecs = np.linalg.eigh(h.to_matrix())
    vals = np.asarray(vals, dtype=float)
    states = tuple(StateVec(h.n_qubits, vecs[:, k]) for k in range(len(vals)))
    return Spectrum(vals, states)


class ExactEvolution:
    """RK4 integration of dpsi/dt = -i H(t) psi on a cached time grid.

    Calling the object at any t in [0, T] returns the state there: grid
    times come from the cache, off-grid times take one partial RK4 step
    from the grid point below. This is the fidelity oracle every
    variational trajectory is compared against.
    """

    def __init__(
        self,
        initial: StateVec,
        schedule: Schedule,
        h0: PauliSum,
        ht: PauliSum,
        dt: float = 1e-3,
        norm_tol: float = 1e-8,
    ):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.schedule = schedule
        self.dt = float(dt)
        self.n_qubits = initial.n_qubits
        self._h0 = h0
        self._ht = ht
        n_steps = int(round(schedule.total_time / dt))
        if abs(n_steps * dt - schedule.total_time) > 1e-9:
            n_steps = int(np.ceil(schedule.total_time / dt))
        states = np.empty((n_steps + 1, initial.amplitudes.size), dtype=complex)
        states[0] = initial.amplitudes
        psi = states[0].copy()
        for k in range(n_steps):
            t = k * dt
            step = min(dt, schedule.total_time - t)
            psi = self._rk4_step(psi, t, step)
            states[k + 1] = psi
        drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
        if drift > norm_tol:
            raise IntegrationError(
                f"norm drift {drift:.3e} exceeds {norm_tol:.1e}; reduce dt"
            )
        self.norm_drift = drift
        self._states = states

    def _rhs(self, t: float, psi: np.ndarray) -> np.ndarray:
        b = self.schedule.b(t)
        j = self.schedule.j(t)
        return -1j * (b * self._h0.apply(psi) + j * self._ht.apply(psi))

    def _rk4_step(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        k1 = self._rhs(t, psi)
        k2 = self._rhs(t + h / 2, psi + (h / 2) * k1)
        k3 = self._rhs(t + h / 2, psi + (h / 2) * k2)
        k4 = self._rhs(t + h, psi + h * k3)
        return psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    def __call__(self, t: float) -> StateVec:
        T = self.schedule.total_time
        if not -1e-12 <= t <= T + 1e-12:
            raise ValueError(f"t={t} outside [0, {T}]")
        t = min(max(t, 0.0), T)
        k = min(int(np.floor(t / self.dt + 1e-12)), len(self._states) - 1)
        rem = t - k * self.dt
        psi = self._states[k]
        if abs(rem) > 1e-12:
            psi = self._rk4_step(psi.copy(), k * self.dt, rem)
        return StateVec(self.n_qubits, psi)


def exact_evolve(
    initial: StateVec,
    schedule: Schedule,
    h0: PauliSum,
    ht: PauliSum,
    dt: float = 1e-3,
) -> ExactEvolution:
    """Integrate the driven Schrodinger equation from `initial`; returns a
    callable t -> StateVec. Raises IntegrationError on norm drift > 1e-8."""
    return ExactEvolution(initial, schedule, h0, ht, dt=dt)
