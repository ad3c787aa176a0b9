"""Truncated multimode bosonic Hilbert space.

Basis enumeration, state vectors, operators and tensor products for a
register of harmonic modes, each truncated at a per-mode occupation cutoff.
Internally hbar = 1, so every energy in the package is an angular frequency
(rad/s).  Basis order is row-major in the mode occupations with the global
vacuum |0...0> at flat index 0.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError

HBAR = 1.0

DEFAULT_DIMENSION_CAP = 4096
DIMENSION_CAP_ENV = "ERGODYN_DIM_CAP"

#: tolerance for hermiticity / normalization checks on construction
ATOL = 1e-12


def dimension_cap() -> int:
    """Active Hilbert-space dimension cap (env override via ERGODYN_DIM_CAP)."""
    raw = os.environ.get(DIMENSION_CAP_ENV)
    if raw is None:
        return DEFAULT_DIMENSION_CAP
    return int(raw)


@dataclass(frozen=True)
class ModeSystem:
    """A register of bosonic modes with per-mode frequency and Fock cutoff.

    ``omega[i]`` is the angular frequency of mode i (> 0) and ``cutoff[i]``
    the largest occupation retained for that mode (>= 1), so the local
    dimension of mode i is ``cutoff[i] + 1``.
    """

    omega: tuple[float, ...]
    cutoff: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        object.__setattr__(self, "cutoff", tuple(int(c) for c in self.cutoff))
        if len(self.omega) == 0:
            raise ValueError("at least one mode is required")
        if len(self.omega) != len(self.cutoff):
            raise ValueError(
                f"omega has {len(self.omega)} entries but cutoff has {len(self.cutoff)}"
            )
        if any(w <= 0 for w in self.omega):
            raise ValueError(f"mode frequencies must be positive, got {self.omega}")
        if any(c < 1 for c in self.cutoff):
            raise ValueError(f"cutoffs must be >= 1, got {self.cutoff}")
        cap = dimension_cap()
        if self.dimension > cap:
            raise DimensionCapError(
                f"total dimension {self.dimension} exceeds cap {cap} "
                f"(override with {DIMENSION_CAP_ENV})"
            )

    @property
    def modes(self) -> int:
        return len(self.omega)

    @property
    def dimension(self) -> int:
        dim = 1
        for c in self.cutoff:
            dim *= c + 1
        return dim


@dataclass(frozen=True)
class BasisIndex:
    """Occupation label of one Fock basis vector."""

    occupations: tuple[int, ...]


def build_basis(system: ModeSystem) -> list[BasisIndex]:
    """Enumerate the full basis in row-major order, vacuum first."""
    shape = tuple(c + 1 for c in system.cutoff)
    return [BasisIndex(occ) for occ in np.ndindex(*shape)]


def flat_index(system: ModeSystem, occupations) -> int:
    """Flat index of an occupation tuple under row-major ordering."""
    occ = tuple(int(n) for n in occupations)
    if len(occ) != system.modes:
        raise ValueError(f"expected {system.modes} occupations, got {len(occ)}")
    idx = 0
    for n, c in zip(occ, system.cutoff):
        if not 0 <= n <= c:
            raise ValueError(f"occupation {n} outside [0, {c}]")
        idx = idx * (c + 1) + n
    return idx


def occupations_of(system: ModeSystem, index: int) -> tuple[int, ...]:
    """Inverse of :func:`flat_index`."""
    if not 0 <= index < system.dimension:
        raise ValueError(f"index {index} outside [0, {system.dimension})")
    occ = []
    for c in reversed(system.cutoff):
        occ.append(index % (c + 1))
        index //= c + 1
    return tuple(reversed(occ))


class Ket:
    """Normalized complex state vector over the truncated basis."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        vec = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        self.amplitudes = vec / norm

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "Ket") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


class Operator:
    """Dense complex square matrix, optionally asserted Hermitian."""

    __slots__ = ("matrix", "hermitian_hint")

    def __init__(self, matrix, hermitian_hint: bool = False):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {mat.shape}")
        if hermitian_hint:
            scale = max(np.abs(mat).max(), 1.0)
            dev = np.abs(mat - mat.conj().T).max()
            if dev > ATOL * scale:
                raise ValueError(f"hermitian_hint set but max|A - A^dag| = {dev:g}")
        self.matrix = mat
        self.hermitian_hint = hermitian_hint

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, hermitian_hint=self.hermitian_hint)

    def expectation(self, ket: Ket) -> complex:
        return complex(ket.amplitudes.conj() @ (self.matrix @ ket.amplitudes))


class DensityOperator:
    """Hermitian, unit-trace, (numerically) positive matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density operator must be square, got {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > ATOL:
            raise ValueError("density operator is not Hermitian within 1e-12")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > ATOL:
            raise ValueError(f"density operator trace {tr!r} differs from 1")
        evals = np.linalg.eigvalsh(mat)
        if evals.min() < -1e-10:
            raise ValueError(f"density operator has eigenvalue {evals.min():g} < -1e-10")
        self.matrix = mat

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def fock_ket(system: ModeSystem, occupations) -> Ket:
    """Basis vector |n_1 ... n_k>."""
    vec = np.zeros(system.dimension, dtype=complex)
    vec[flat_index(system, occupations)] = 1.0
    return Ket(vec)


def vacuum_ket(system: ModeSystem) -> Ket:
    return fock_ket(system, (0,) * system.modes)


def superposition(system: ModeSystem, terms) -> Ket:
    """Normalized combination sum_occ amp * |occ> from {occupations: amplitude}."""
    vec = np.zeros(system.dimension, dtype=complex)
    for occ, amp in dict(terms).items():
        vec[flat_index(system, occ)] += amp
    return Ket(vec)


def free_hamiltonian(system: ModeSystem) -> Operator:
    """Diagonal free Hamiltonian: |n_1...n_k> has energy sum_i n_i omega_i."""
    shape = tuple(c + 1 for c in system.cutoff)
    energies = np.zeros(shape)
    for axis, w in enumerate(system.omega):
        local = np.arange(shape[axis]) * w
        energies += local.reshape([-1 if a == axis else 1 for a in range(len(shape))])
    return Operator(np.diag(energies.ravel()), hermitian_hint=True)


def number_operator(system: ModeSystem) -> Operator:
    """Total occupation operator, diagonal with entry sum_i n_i."""
    shape = tuple(c + 1 for c in system.cutoff)
    counts = np.zeros(shape)
    for axis in range(len(shape)):
        local = np.arange(shape[axis], dtype=float)
        counts += local.reshape([-1 if a == axis else 1 for a in range(len(shape))])
    return Operator(np.diag(counts.ravel()), hermitian_hint=True)


def projector(ket: Ket) -> Operator:
    """Rank-1 projector |k><k|."""
    v = ket.amplitudes
    return Operator(np.outer(v, v.conj()), hermitian_hint=True)


def identity_operator(dimension: int) -> Operator:
    return Operator(np.eye(dimension), hermitian_hint=True)


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product in the fixed mode order (a acts on the leading modes)."""
    return Operator(
        np.kron(a.matrix, b.matrix),
        hermitian_hint=a.hermitian_hint and b.hermitian_hint,
    )


def pure_density(ket: Ket) -> DensityOperator:
    v = ket.amplitudes
    return DensityOperator(np.outer(v, v.conj()))
