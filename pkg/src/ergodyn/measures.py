"""Coherence and entanglement quantifiers in the fixed Fock basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import DensityOperator, ModeSystem


@dataclass(frozen=True)
class BipartitionSpec:
    """Split of the mode register into two disjoint, covering, nonempty sets."""

    subsystem_a: tuple[int, ...]
    subsystem_b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "subsystem_a", tuple(self.subsystem_a))
        object.__setattr__(self, "subsystem_b", tuple(self.subsystem_b))
        if not self.subsystem_a or not self.subsystem_b:
            raise ValueError("both subsystems must be nonempty")
        if set(self.subsystem_a) & set(self.subsystem_b):
            raise ValueError("subsystems must be disjoint")

    def validate_for(self, system: ModeSystem):
        covered = set(self.subsystem_a) | set(self.subsystem_b)
        if covered != set(range(system.modes)):
            raise ValueError(
                f"partition {sorted(covered)} does not cover modes "
                f"0..{system.modes - 1}"
            )


def l1_coherence(rho: DensityOperator) -> float:
    """Sum of the absolute off-diagonal entries of the density matrix."""
    mat = np.abs(rho.matrix)
    return float(mat.sum() - np.trace(mat))


def partial_transpose(
    rho: DensityOperator, system: ModeSystem, part: BipartitionSpec
) -> np.ndarray:
    """Transpose the second subsystem's indices of the density matrix."""
    part.validate_for(system)
    if rho.dimension != system.dimension:
        raise ValueError(
            f"state dimension {rho.dimension} does not match system "
            f"{system.dimension}"
        )
    dims = [c + 1 for c in system.cutoff]
    k = system.modes
    tensor = rho.matrix.reshape(dims + dims)
    axes = list(range(2 * k))
    for mode in part.subsystem_b:
        axes[mode], axes[k + mode] = axes[k + mode], axes[mode]
    return tensor.transpose(axes).reshape(rho.matrix.shape)


def negativity(
    rho: DensityOperator, system: ModeSystem, part: BipartitionSpec
) -> float:
    """Entanglement negativity: |sum of negative eigenvalues| of the partial
    transpose.  The partial transpose of a Hermitian matrix is Hermitian, so
    the spectrum comes from the symmetric eigensolver."""
    pt = partial_transpose(rho, system, part)
    evals = np.linalg.eigvalsh(pt)
    return float(-evals[evals < 0.0].sum())
