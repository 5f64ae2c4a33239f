"""Single-photon Hilbert space: interferometer arm x circular polarisation.

The space is four-dimensional.  Basis states are ordered

    (arm 1, +), (arm 1, -), (arm 2, +), (arm 2, -)

where ``+``/``-`` are the two circular polarisations (angular momentum
eigenvalues +1/-1).  Linear polarisations follow the real convention

    H = (+  +  -) / sqrt(2),        V = (+  -  -) / sqrt(2)

so every canonical state and observable in this package has real
coefficients in the canonical basis.

Operators are plain 4x4 complex numpy arrays; states carry an explicit
``normalized`` flag because intermediate results of projections are
deliberately left unnormalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DIM = 4

# Absolute tolerance for algebraic identities.  The space is 4-dimensional
# and dominated by exactly representable values, so this is not generous.
ATOL = 1e-12

ARMS = (1, 2)
POLS = (+1, -1)


class BasisLabel(NamedTuple):
    """Canonical basis label: interferometer arm and circular polarisation."""

    arm: int
    pol: int


#: Canonical basis order: (1,+), (1,-), (2,+), (2,-).
BASIS = tuple(BasisLabel(arm, pol) for arm in ARMS for pol in POLS)

_INDEX = {label: i for i, label in enumerate(BASIS)}


def basis_index(label: BasisLabel | tuple[int, int]) -> int:
    """Return the canonical index of a (arm, pol) label."""
    label = BasisLabel(*label)
    try:
        return _INDEX[label]
    except KeyError:
        raise ValueError(f"invalid basis label {label!r}: arm must be 1 or 2, pol +1 or -1") from None


@dataclass(frozen=True, eq=False)
class Ket:
    """State vector over the canonical basis.

    ``amps`` is a read-only complex array of length 4.  ``normalized`` is
    True only when the squared norm is 1 within ``ATOL``; projections and
    other intermediates carry False.
    """

    amps: np.ndarray
    normalized: bool

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (DIM,):
            raise ValueError(f"ket must have {DIM} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("ket amplitudes must be finite")
        if self.normalized and abs(np.vdot(amps, amps).real - 1.0) > ATOL:
            raise ValueError("ket flagged normalized but its squared norm is not 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def ket(amps) -> Ket:
    """Build a Ket from amplitudes, setting the normalized flag from the norm."""
    amps = np.asarray(amps, dtype=np.complex128)
    norm2 = float(np.vdot(amps, amps).real) if amps.shape == (DIM,) else np.nan
    return Ket(amps, normalized=bool(abs(norm2 - 1.0) <= ATOL))


def basis_ket(label: BasisLabel | tuple[int, int]) -> Ket:
    """Unit ket with amplitude 1 at ``label`` and 0 elsewhere."""
    amps = np.zeros(DIM, dtype=np.complex128)
    amps[basis_index(label)] = 1.0
    return Ket(amps, normalized=True)


def normalize(state: Ket) -> Ket:
    """Rescale to unit norm; rejects (near-)zero vectors."""
    n = state.norm()
    if n < ATOL:
        raise ValueError("cannot normalize a zero ket")
    return Ket(state.amps / n, normalized=True)


def inner(bra: Ket, ket: Ket) -> complex:
    """Inner product <bra|ket>, conjugate-linear in the first argument."""
    return complex(np.vdot(bra.amps, ket.amps))


def apply(op: np.ndarray, state: Ket) -> Ket:
    """Matrix-vector product ``op @ state``; the result is flagged unnormalized."""
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (DIM, DIM):
        raise ValueError(f"operator must be {DIM}x{DIM}, got shape {op.shape}")
    return Ket(op @ state.amps, normalized=False)


def identity() -> np.ndarray:
    return np.eye(DIM, dtype=np.complex128)


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.all(np.abs(op - op.conj().T) <= atol))


def is_unitary(op: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.all(np.abs(op @ op.conj().T - identity()) <= atol))


def is_projector(op: np.ndarray, atol: float = ATOL) -> bool:
    return is_hermitian(op, atol) and bool(np.all(np.abs(op @ op - op) <= atol))


@dataclass(frozen=True)
class SpectralObservable:
    """Observable given by its spectral data: (eigenvalue, eigenspace projector) pairs.

    Degenerate eigenspaces are kept as single higher-rank projectors; the
    conditional-probability and collapse rules only ever need the projectors.
    """

    branches: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self) -> None:
        frozen = []
        for value, proj in self.branches:
            proj = np.asarray(proj, dtype=np.complex128).copy()
            proj.setflags(write=False)
            frozen.append((float(value), proj))
        object.__setattr__(self, "branches", tuple(frozen))

    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(value for value, _ in self.branches)

    def projector(self, eigenvalue: float, atol: float = ATOL) -> np.ndarray:
        for value, proj in self.branches:
            if abs(value - eigenvalue) <= atol:
                return proj
        raise ValueError(f"{eigenvalue!r} is not an eigenvalue of this observable")


def observable_operator(obs: SpectralObservable) -> np.ndarray:
    """The operator sum_a a * P_a of a spectral observable."""
    total = np.zeros((DIM, DIM), dtype=np.complex128)
    for value, proj in obs.branches:
        total += value * proj
    return total


@dataclass(frozen=True)
class SpectralViolation:
    """First invariant violated by a would-be spectral observable."""

    reason: str
    residual: float

    def __str__(self) -> str:
        return f"{self.reason} (max entrywise residual {self.residual:.3e})"


def validate_spectral(obs: SpectralObservable, atol: float = ATOL) -> SpectralViolation | None:
    """Check the spectral-observable invariants; None means valid.

    Checks, in order: every projector is a projector (hermitian and
    idempotent), projectors are pairwise orthogonal, they sum to the
    identity, and eigenvalues are pairwise distinct.  Returns a report for
    the first violation instead of raising.
    """
    branches = obs.branches
    if not branches:
        return SpectralViolation("observable has no branches", 0.0)
    for value, proj in branches:
        res = float(np.max(np.abs(proj - proj.conj().T)))
        if res > atol:
            return SpectralViolation(f"projector for eigenvalue {value} is not hermitian", res)
        res = float(np.max(np.abs(proj @ proj - proj)))
        if res > atol:
            return SpectralViolation(f"projector for eigenvalue {value} is not idempotent", res)
    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            res = float(np.max(np.abs(branches[i][1] @ branches[j][1])))
            if res > atol:
                return SpectralViolation(
                    f"projectors for eigenvalues {branches[i][0]} and {branches[j][0]}"
                    " are not orthogonal",
                    res,
                )
    total = sum(proj for _, proj in branches)
    res = float(np.max(np.abs(total - identity())))
    if res > atol:
        return SpectralViolation("projectors do not sum to the identity", res)
    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            if abs(branches[i][0] - branches[j][0]) <= atol:
                return SpectralViolation(f"duplicate eigenvalue {branches[i][0]}", 0.0)
    return None


def _diag_projector(diagonal) -> np.ndarray:
    return np.diag(np.asarray(diagonal, dtype=np.complex128))


def canonical_states() -> tuple[Ket, Ket]:
    """The pre- and post-selected states of the experiment.

    pre  = (|1> + |2>)(|+> + |->)/2            -- arms superposed, H polarised
    post = (|1>(|+> + |->) + |2>(|+> - |->))/2 -- H in arm 1, V in arm 2
    """
    pre = ket(np.full(DIM, 0.5))
    post = ket([0.5, 0.5, 0.5, -0.5])
    return pre, post


def canonical_observables() -> dict[str, SpectralObservable]:
    """The experiment's observables, all diagonal in the canonical basis.

    - ``photon_in_arm1`` / ``photon_in_arm2``: non-demolition presence
      detectors, eigenvalues {1, 0}.
    - ``angular_momentum``: circular polarisation +/-1, each eigenvalue
      doubly degenerate across the two arms (rank-2 projectors).
    - ``angular_momentum_arm1`` / ``angular_momentum_arm2``: polarisation
      detector restricted to one arm; eigenvalues {+1, -1, 0} with the 0
      eigenspace spanned by both polarisations of the other arm.
    """
    arm1 = _diag_projector([1, 1, 0, 0])
    arm2 = _diag_projector([0, 0, 1, 1])
    plus = _diag_projector([1, 0, 1, 0])
    minus = _diag_projector([0, 1, 0, 1])
    return {
        "photon_in_arm1": SpectralObservable(((1.0, arm1), (0.0, arm2))),
        "photon_in_arm2": SpectralObservable(((1.0, arm2), (0.0, arm1))),
        "angular_momentum": SpectralObservable(((+1.0, plus), (-1.0, minus))),
        "angular_momentum_arm1": SpectralObservable(
            ((+1.0, _diag_projector([1, 0, 0, 0])), (-1.0, _diag_projector([0, 1, 0, 0])), (0.0, arm2))
        ),
        "angular_momentum_arm2": SpectralObservable(
            ((+1.0, _diag_projector([0, 0, 1, 0])), (-1.0, _diag_projector([0, 0, 0, 1])), (0.0, arm1))
        ),
    }
