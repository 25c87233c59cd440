"""Finite-dimensional pre/post-selection toolkit: weak values, ABL, pointer distributions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

HERMITIAN_TOL = 1e-12
OVERLAP_TOL = 1e-12
DEGENERACY_TOL = 1e-10


class QuantumState:
    """Normalised complex amplitude vector (d >= 2)."""

    def __init__(self, amplitudes) -> None:
        v = np.asarray(amplitudes, dtype=complex).ravel()
        if v.size < 2:
            raise DomainError("a state needs dimension >= 2")
        norm = np.linalg.norm(v)
        if not norm > 0 or not np.isfinite(norm):
            raise DomainError("cannot normalise a zero or non-finite vector")
        self.amplitudes = v / norm
        self.amplitudes.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "QuantumState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: "QuantumState") -> "QuantumState":
        return QuantumState(np.kron(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"QuantumState({self.amplitudes!r})"


class Observable:
    """Hermitian matrix; construction fails loudly for non-Hermitian input."""

    def __init__(self, matrix) -> None:
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("an observable must be a square matrix")
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if dev > HERMITIAN_TOL:
            raise DomainError(f"matrix is not Hermitian (max |A - A^H| = {dev:.3e})")
        self.matrix = m
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other: "Observable") -> "Observable":
        return Observable(self.matrix + other.matrix)

    def tensor(self, other: "Observable") -> "Observable":
        return Observable(np.kron(self.matrix, other.matrix))

    def eigenspaces(self, tol: float = DEGENERACY_TOL) -> list[tuple[float, np.ndarray]]:
        """(eigenvalue, projector) pairs with eigenvalues grouped within ``tol``."""
        w, v = np.linalg.eigh(self.matrix)
        groups: list[list[int]] = []
        for i in range(len(w)):
            if groups and abs(w[i] - w[groups[-1][0]]) <= tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        out = []
        for g in groups:
            vecs = v[:, g]
            out.append((float(np.mean(w[g])), vecs @ vecs.conj().T))
        return out


# standard spin-1/2 objects
SIGMA_X = Observable([[0, 1], [1, 0]])
SIGMA_Y = Observable([[0, -1j], [1j, 0]])
SIGMA_Z = Observable([[1, 0], [0, -1]])
IDENTITY2 = Observable(np.eye(2))
UP_X = QuantumState([1, 1])
DOWN_X = QuantumState([1, -1])
UP_Y = QuantumState([1, 1j])
UP_Z = QuantumState([1, 0])
DOWN_Z = QuantumState([0, 1])


def sigma_xi() -> Observable:
    """(sigma_x + sigma_y)/sqrt(2)."""
    return Observable((SIGMA_X.matrix + SIGMA_Y.matrix) / math.sqrt(2))


def _check_dims(*objs) -> None:
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DomainError(f"dimension mismatch: {sorted(dims)}")


def weak_value(A: Observable, psi_in: QuantumState, psi_fin: QuantumState) -> complex:
    """<fin|A|in> / <fin|in>."""
    _check_dims(A, psi_in, psi_fin)
    ov = psi_fin.overlap(psi_in)
    if abs(ov) <= OVERLAP_TOL:
        raise DomainError(f"pre- and post-selected states are orthogonal (|overlap| = {abs(ov):.3e})")
    return complex(np.vdot(psi_fin.amplitudes, A.matrix @ psi_in.amplitudes)) / ov


@dataclass(frozen=True)
class Decomposition:
    mean: float
    spread: float
    perp: QuantumState | None


def orthogonal_decomposition(A: Observable, psi: QuantumState) -> Decomposition:
    """A|psi> = <A>|psi> + dA |psi_perp> with <psi|psi_perp> = 0."""
    _check_dims(A, psi)
    v = psi.amplitudes
    Av = A.matrix @ v
    mean = float(np.real(np.vdot(v, Av)))
    rest = Av - mean * v
    spread = float(np.linalg.norm(rest))
    if spread < 1e-12:
        return Decomposition(mean, 0.0, None)
    perp = QuantumState(rest)
    return Decomposition(mean, spread, perp)


def evolution_operator(H: Observable, dt: float) -> np.ndarray:
    """U = exp(-i H dt) by eigendecomposition."""
    w, v = np.linalg.eigh(H.matrix)
    U = (v * np.exp(-1j * w * dt)) @ v.conj().T
    recon = (v * w) @ v.conj().T
    if np.max(np.abs(recon - H.matrix)) > 1e-12 * max(1.0, np.max(np.abs(H.matrix))):
        raise DomainError("eigendecomposition failed to reconstruct H")
    return U


def _check_unitary(U: np.ndarray, d: int) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (d, d):
        raise DomainError(f"unitary must be {d}x{d}")
    if np.max(np.abs(U.conj().T @ U - np.eye(d))) > 1e-10:
        raise DomainError("matrix is not unitary within 1e-10")
    return U


def abl_probabilities(A: Observable, psi_in: QuantumState, psi_fin: QuantumState,
                      U_before=None, U_after=None) -> list[tuple[float, float]]:
    """[(eigenvalue, conditional probability)] from the two-step collapse amplitudes."""
    _check_dims(A, psi_in, psi_fin)
    d = A.dim
    Ub = np.eye(d) if U_before is None else _check_unitary(U_before, d)
    Ua = np.eye(d) if U_after is None else _check_unitary(U_after, d)
    start = Ub @ psi_in.amplitudes
    weights = []
    for val, P in A.eigenspaces():
        amp = np.vdot(psi_fin.amplitudes, Ua @ (P @ start))
        weights.append((val, abs(amp) ** 2))
    total = sum(w for _, w in weights)
    if total <= 1e-30:
        raise DomainError("post-selection is unreachable: every path amplitude vanishes")
    return [(val, w / total) for val, w in weights]


def abl_probability(A: Observable, psi_in: QuantumState, psi_fin: QuantumState,
                    U_before=None, U_after=None, j: int = 0) -> float:
    """Conditional probability of the j-th (ascending, degeneracy-grouped) eigenvalue."""
    probs = abl_probabilities(A, psi_in, psi_fin, U_before, U_after)
    if not 0 <= j < len(probs):
        raise DomainError(f"eigenvalue index {j} outside [0, {len(probs)})")
    return probs[j][1]


@dataclass(frozen=True)
class EnsembleMember:
    """Weight alpha_i, pre-selected Psi_i and post-selected Phi_i."""

    alpha: complex
    psi: QuantumState
    phi: QuantumState


def _projector(A: Observable, a: float) -> np.ndarray:
    for val, P in A.eigenspaces():
        if abs(val - a) <= DEGENERACY_TOL * max(1.0, abs(a)):
            return P
    raise DomainError(f"{a} is not an eigenvalue of the observable")


def strong_prob(A: Observable, a: float, ensemble: Sequence[EnsembleMember]) -> float:
    """|sum alpha_i <Phi_i|P_a|Psi_i>|^2 / sum_b |sum alpha_i <Phi_i|P_b|Psi_i>|^2."""
    spaces = A.eigenspaces()
    _projector(A, a)

    def amp(P):
        return sum(m.alpha * np.vdot(m.phi.amplitudes, P @ m.psi.amplitudes) for m in ensemble)
    total = sum(abs(amp(P)) ** 2 for _, P in spaces)
    if total <= 1e-30:
        raise DomainError("every outcome amplitude vanishes: the conditional is undefined")
    return abs(amp(_projector(A, a))) ** 2 / total


def generalized_weak_value(A: Observable, ensemble: Sequence[EnsembleMember]) -> complex:
    """sum alpha_i <Phi_i|A|Psi_i> / sum alpha_i <Phi_i|Psi_i>."""
    num = sum(m.alpha * np.vdot(m.phi.amplitudes, A.matrix @ m.psi.amplitudes) for m in ensemble)
    den = sum(m.alpha * np.vdot(m.phi.amplitudes, m.psi.amplitudes) for m in ensemble)
    if abs(den) <= OVERLAP_TOL:
        raise DomainError("the ensemble overlap vanishes")
    return complex(num / den)


def product_state_weak_value(A1: Observable, A2: Observable, psi1_in: QuantumState,
                             psi2_in: QuantumState, psi1_fin: QuantumState,
                             psi2_fin: QuantumState, direct: bool = False) -> complex:
    """<A1 A2>_w on product states; ``direct`` uses the tensor-product space."""
    if direct:
        return weak_value(A1.tensor(A2), psi1_in.tensor(psi2_in), psi1_fin.tensor(psi2_fin))
    return weak_value(A1, psi1_in, psi1_fin) * weak_value(A2, psi2_in, psi2_fin)


def dichotomic_pps(target: float = 1.0, seed_state: QuantumState | None = None) -> tuple:
    """A (pre, post) pair for sigma_z with weak value equal to the eigenvalue ``target``.

    The post-selection is chosen orthogonal to P_{-target}|in>, which forces
    <sigma_z>_w = target.
    """
    psi = seed_state or QuantumState([math.cos(0.4), math.sin(0.4) * np.exp(0.3j)])
    other = _projector(SIGMA_Z, -target) @ psi.amplitudes
    # any vector orthogonal to `other` but not to psi
    perp = np.array([-np.conj(other[1]), np.conj(other[0])])
    fin = QuantumState(perp if np.linalg.norm(other) > 0 else psi.amplitudes)
    return psi, fin


# ---------------------------------------------------------------------------
# pointer distributions


@dataclass(frozen=True)
class PointerModel:
    delta: float
    g0: float = 1.0
    grid: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise DomainError("pointer width delta must be positive")

    def sample_grid(self, lo: float, hi: float, count: int = 4001) -> np.ndarray:
        if self.grid is not None:
            return np.asarray(self.grid, dtype=float)
        pad = 6 * self.delta
        return np.linspace(lo - pad, hi + pad, count)


def _normalise(values: np.ndarray, grid: np.ndarray) -> float:
    return float(np.trapezoid(values, grid))


def _single_raw(P, delta: float, angle: float, g0: float) -> np.ndarray:
    c2, s2 = math.cos(angle) ** 2, math.sin(angle) ** 2
    P = np.asarray(P, dtype=float)
    return (c2 * np.exp(-(P - g0) ** 2 / delta ** 2) - s2 * np.exp(-(P + g0) ** 2 / delta ** 2)) ** 2


def pointer_distribution_single(model: PointerModel, P, angle: float = math.pi / 8):
    """N^2 [cos^2 e^{-(P-1)^2/D^2} - sin^2 e^{-(P+1)^2/D^2}]^2, normalised on the model grid."""
    grid = model.sample_grid(-model.g0 - 2.0, model.g0 + 2.0)
    norm = _normalise(_single_raw(grid, model.delta, angle, model.g0), grid)
    out = _single_raw(P, model.delta, angle, model.g0) / norm
    return float(out) if np.ndim(P) == 0 else out


def _ensemble_raw(N: int, Q, delta: float, convention: str) -> np.ndarray:
    c2, s2 = math.cos(math.pi / 8) ** 2, math.sin(math.pi / 8) ** 2
    Q = np.asarray(Q, dtype=float)
    total = np.zeros_like(Q)
    if convention == "binomial":
        for k in range(N + 1):
            w = math.comb(N, k) * (-1) ** k * c2 ** (N - k) * s2 ** k
            total = total + w * np.exp(-(Q - (N - 2 * k) / N) ** 2 / (2 * delta ** 2))
    elif convention == "literal":
        for i in range(1, N + 1):
            w = (-1) ** i * c2 ** (N - i) * s2 ** i
            total = total + w * np.exp(-(Q - (2 * N - i) / N) ** 2 / (2 * delta ** 2))
    else:
        raise DomainError(f"unknown convention {convention!r}")
    return total ** 2


def pointer_distribution_ensemble(N: int, model: PointerModel, Q, convention: str = "literal"):
    """Pointer density after post-selection of N spins.

    ``binomial``: amplitudes sum_k binom(N,k)(-1)^k c^{2(N-k)} s^{2k} on the
    eigenvalues (N-2k)/N of the averaged spin operator.
    ``literal``: the displayed sum over i = 1..N at locations (2N-i)/N.
    Both are normalised by quadrature on the model grid.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    lo, hi = (-1.0, 1.0) if convention == "binomial" else (1.0, 2.0)
    grid = model.sample_grid(lo, hi)
    norm = _normalise(_ensemble_raw(N, grid, model.delta, convention), grid)
    out = _ensemble_raw(N, Q, model.delta, convention) / norm
    return float(out) if np.ndim(Q) == 0 else out


def ensemble_eigenvalues(N: int, convention: str = "literal") -> np.ndarray:
    if convention == "binomial":
        return np.array([(N - 2 * k) / N for k in range(N + 1)])
    return np.array([(2 * N - i) / N for i in range(1, N + 1)])
