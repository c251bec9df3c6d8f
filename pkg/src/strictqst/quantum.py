"""Quantum-state model: density matrices, Haar-random sampling, random
bounded-rank states, and the pure-target fidelity metric.

All sampling operations take an explicit ``numpy.random.Generator`` so that
experiments are reproducible bit-for-bit from a single seed; generators are
split (never shared) when work fans out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadRank, DimensionMismatch, NotPure
from .linalg import hermitize, require_hermitian
from .measurement import BasisSet
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "QuantumState",
    "StateModel",
    "haar_random_unitary",
    "random_pure_state",
    "random_rank_r_state",
    "random_full_rank_state",
    "global_random_bases",
    "local_random_bases",
    "fidelity",
    "infidelity",
]


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A density matrix: PSD, unit trace, with cached spectral data.

    Parameters
    ----------
    rho : ndarray
        d x d Hermitian PSD matrix with unit trace.
    declared_rank : int, optional
        If given, the number of eigenvalues above the rank cutoff must
        equal it (checked at construction).
    """

    rho: np.ndarray
    declared_rank: int | None = None
    _eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tol: Tolerances = DEFAULT
        rho = require_hermitian(np.asarray(self.rho, dtype=complex), tol.hermitian)
        lam = np.linalg.eigvalsh(rho)[::-1].copy()
        if lam[-1] < -tol.psd:
            raise ValueError(f"state is not PSD: min eigenvalue {lam[-1]:.3e}")
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > tol.trace:
            raise ValueError(f"state trace {tr!r} deviates from 1 beyond {tol.trace:.1e}")
        if self.declared_rank is not None:
            got = int(np.sum(lam > tol.rank_cut))
            if got != self.declared_rank:
                raise ValueError(
                    f"declared rank {self.declared_rank} but {got} eigenvalues above cutoff"
                )
        rho.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "_eigenvalues", lam)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues sorted descending (cached at construction)."""
        return self._eigenvalues

    def rank(self, cut: float = DEFAULT.rank_cut) -> int:
        return int(np.sum(self._eigenvalues > cut))

    @property
    def is_pure(self) -> bool:
        return self.rank() == 1

    def purity(self) -> float:
        return float(np.sum(self._eigenvalues**2))


@dataclass(frozen=True, eq=False)
class StateModel:
    """Near-pure state model: (1-q) |psi><psi| + q tau.

    target must be pure; background is any full-rank state; mixing_weight q
    interpolates between them.
    """

    target: QuantumState
    mixing_weight: float
    background: QuantumState

    def __post_init__(self):
        if not 0.0 <= self.mixing_weight <= 1.0:
            raise ValueError("mixing_weight must lie in [0, 1]")
        if not self.target.is_pure:
            raise NotPure("StateModel target must be a pure state")
        if self.target.dim != self.background.dim:
            raise DimensionMismatch("target and background dimensions differ")

    def realize(self) -> QuantumState:
        q = self.mixing_weight
        rho = (1.0 - q) * self.target.rho + q * self.background.rho
        return QuantumState(hermitize(rho))


def haar_random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a d x d unitary from the Haar measure.

    QR-factor a matrix of iid standard complex Gaussians, then absorb the
    phases of diag(R) into Q.  With that phase fix the R factor has a
    positive diagonal, which makes the QR decomposition unique and the Q
    factor exactly Haar distributed.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_pure_state(d: int, rng: np.random.Generator) -> QuantumState:
    """Haar-random pure state: first column of a Haar unitary, outer-producted."""
    psi = haar_random_unitary(d, rng)[:, 0]
    return QuantumState(np.outer(psi, psi.conj()), declared_rank=1)


def random_rank_r_state(d: int, r: int, rng: np.random.Generator) -> QuantumState:
    """Rank-r state from the Gaussian-induced measure: W W^dag normalized,
    W a d x r matrix of iid standard complex Gaussians."""
    if not 1 <= r <= d:
        raise BadRank(f"rank {r} outside 1..{d}")
    w = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    x = w @ w.conj().T
    return QuantumState(hermitize(x / np.trace(x).real), declared_rank=r)


def random_full_rank_state(d: int, rng: np.random.Generator) -> QuantumState:
    """Full-rank state from the Hilbert-Schmidt (r = d induced) measure."""
    return random_rank_r_state(d, d, rng)


def global_random_bases(
    d: int, n_bases: int, rng: np.random.Generator, seed_label: str | None = None
) -> BasisSet:
    """n_bases independent Haar-random orthonormal bases of a d-dim space."""
    bases = tuple(haar_random_unitary(d, rng) for _ in range(n_bases))
    labels = tuple(f"global[{i}]" + (f" seed={seed_label}" if seed_label else "") for i in range(n_bases))
    return BasisSet(dim=d, bases=bases, kind="global", labels=labels)


def local_random_bases(
    n_qubits: int, n_bases: int, rng: np.random.Generator, seed_label: str | None = None
) -> BasisSet:
    """Bases that factor as tensor products of independent single-qubit
    Haar unitaries; global dimension 2**n_qubits."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    d = 2**n_qubits
    mats = []
    for _ in range(n_bases):
        u = haar_random_unitary(2, rng)
        for _ in range(n_qubits - 1):
            u = np.kron(u, haar_random_unitary(2, rng))
        mats.append(u)
    labels = tuple(f"local[{i}]" + (f" seed={seed_label}" if seed_label else "") for i in range(n_bases))
    return BasisSet(dim=d, bases=tuple(mats), kind="local", labels=labels)


def fidelity(psi: QuantumState, rho: QuantumState, tol: Tolerances = DEFAULT) -> float:
    """Overlap <psi| rho |psi> of a pure target with a state, clamped to [0, 1].

    Raises
    ------
    NotPure
        If psi has rank > 1.
    DimensionMismatch
        If the states live in different dimensions.
    """
    if psi.dim != rho.dim:
        raise DimensionMismatch(f"dim {psi.dim} vs {rho.dim}")
    if not psi.is_pure:
        raise NotPure(f"fidelity target has rank {psi.rank()}")
    # for pure psi: <psi|rho|psi> = Tr(|psi><psi| rho)
    val = float(np.trace(psi.rho @ rho.rho).real)
    if val < -tol.psd or val > 1.0 + tol.psd:
        raise ValueError(f"fidelity {val!r} outside [0,1] beyond tolerance")
    return min(max(val, 0.0), 1.0)


def infidelity(psi: QuantumState, rho: QuantumState) -> float:
    return 1.0 - fidelity(psi, rho)
