"""Frustration-free Hamiltonians and the ancilla gap-amplification construction.

For H = Σ_k Π_k with Π_k ≥ 0 and a common zero-energy state ψ, the amplified
Hamiltonian H' = sqrt(||Π||) Σ_k sqrt(Π_k) ⊗ (|k><0| + |0><k|) acts on the system
tensored with an (L+1)-level ancilla (system index first). H'² restricted to the
ancilla-0 sector equals ||Π|| H, so the nonzero spectrum of H' is ±sqrt(||Π|| λ)
for the nonzero eigenvalues λ of H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from eigenpath import spectral
from eigenpath.errors import NotFrustrationFree, NotPSD
from eigenpath.families import random_hermitian
from eigenpath.ham_path import FrustrationFreePath, hermitian, rotated_path
from eigenpath.rm_engine import (DistributionPolicy, Schedule, _path_step_data, build_schedule,
                                 path_speed, traverse)

PSD_TOL = 1e-10
NEG_CLIP_TOL = 1e-8
KERNEL_TOL = 1e-9
ZERO_EIG_TOL = 1e-9
ROUNDOFF = 1e-12


def psd_sqrt(pi, tol: float = NEG_CLIP_TOL) -> np.ndarray:
    """Principal square root through an eigendecomposition.

    Eigenvalues in [-tol, 0) are clipped to zero; anything lower raises NotPSD.
    Eigenvalues at roundoff level (<= 1e-12 ||Π||) are also zeroed, since their
    square roots (~1e-8) would otherwise spoil the kernel of the result.
    """
    m = hermitian(pi)
    w, v = np.linalg.eigh(m)
    if w[0] < -tol:
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e}")
    w = np.where(w <= ROUNDOFF * max(abs(w[-1]), abs(w[0])), 0.0, w)
    r = v @ (np.sqrt(w)[:, None] * v.conj().T)
    return 0.5 * (r + r.conj().T)


@dataclass
class FrustrationFreeSet:
    """PSD terms Π_1..Π_L sharing the zero-energy state ``psi``."""

    terms: list
    psi: np.ndarray
    dim: int = field(init=False)
    pi_norm: float = field(init=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one term")
        self.terms = [hermitian(t) for t in self.terms]
        self.dim = self.terms[0].shape[0]
        if any(t.shape != (self.dim, self.dim) for t in self.terms):
            raise ValueError("all terms must share one dimension")
        psi = np.asarray(self.psi, dtype=complex).reshape(-1)
        if psi.shape != (self.dim,):
            raise ValueError("witness state has the wrong dimension")
        self.psi = psi / np.linalg.norm(psi)
        self.pi_norm = max(float(np.linalg.norm(t, 2)) for t in self.terms)
        self.validate()

    def validate(self) -> None:
        for k, t in enumerate(self.terms):
            lo = np.linalg.eigvalsh(t)[0]
            if lo < -PSD_TOL:
                raise NotPSD(f"term {k} has eigenvalue {lo:.3e}")
            res = float(np.linalg.norm(t @ self.psi))
            if res > KERNEL_TOL:
                raise NotFrustrationFree(f"term {k} does not annihilate the witness (residual {res:.2e})")
        e0 = self.eigenvalues()[0]
        if abs(e0) > KERNEL_TOL:
            raise NotFrustrationFree(f"ground energy {e0:.3e} is not zero")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def hamiltonian(self) -> np.ndarray:
        return sum(self.terms)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.hamiltonian)

    @property
    def gap(self) -> float:
        """Gap above the zero-energy ground level (assumed nondegenerate)."""
        return float(self.eigenvalues()[1])


@dataclass
class AmplifiedHamiltonian:
    h_prime: np.ndarray
    ancilla_dim: int
    delta_prime: float
    eigenvalues: np.ndarray = field(repr=False)

    def embed(self, psi) -> np.ndarray:
        """psi ⊗ |0> in the system-first ordering."""
        e0 = np.zeros(self.ancilla_dim, dtype=complex)
        e0[0] = 1.0
        return np.kron(np.asarray(psi, dtype=complex), e0)

    def kernel_residual(self, psi) -> float:
        return float(np.linalg.norm(self.h_prime @ self.embed(psi)))

    def symmetry_error(self) -> float:
        """max |λ_i + λ_{n-1-i}| over the sorted spectrum (0 for a ±λ-paired spectrum)."""
        w = self.eigenvalues
        return float(np.max(np.abs(w + w[::-1])))


def amplified_matrix(terms: Sequence[np.ndarray], pi_norm: Optional[float] = None) -> np.ndarray:
    terms = [np.asarray(t, dtype=complex) for t in terms]
    if pi_norm is None:
        pi_norm = max(float(np.linalg.norm(t, 2)) for t in terms)
    n_anc = len(terms) + 1
    out = np.zeros((terms[0].shape[0] * n_anc,) * 2, dtype=complex)
    for k, t in enumerate(terms, start=1):
        hop = np.zeros((n_anc, n_anc))
        hop[k, 0] = hop[0, k] = 1.0
        out += np.kron(psd_sqrt(t), hop)
    return math.sqrt(pi_norm) * out


def _nonzero_gap(w) -> float:
    nz = np.abs(w[np.abs(w) > ZERO_EIG_TOL])
    if nz.size == 0:
        raise ValueError("amplified Hamiltonian has no nonzero eigenvalue")
    return float(nz.min())


def build_amplified(ff: FrustrationFreeSet) -> AmplifiedHamiltonian:
    """Δ' is the smallest nonzero |eigenvalue| of H' (|λ| <= 1e-9 counts as zero)."""
    hp = amplified_matrix(ff.terms, ff.pi_norm)
    w = np.linalg.eigvalsh(hp)
    return AmplifiedHamiltonian(hp, ff.n_terms + 1, _nonzero_gap(w), w)


def generate_ff_ensemble(d: int, n_terms: int, seed) -> FrustrationFreeSet:
    """Random terms Q A_k Q with Q = I - |ψ><ψ| and A_k = B B†, scaled so max ||Π_k|| = 1."""
    if d < 2 or n_terms < 1:
        raise ValueError("need d >= 2 and at least one term")
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    q = np.eye(d) - np.outer(psi, psi.conj())
    terms = []
    for _ in range(n_terms):
        b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        t = q @ (b @ b.conj().T) @ q
        terms.append(0.5 * (t + t.conj().T))
    scale = max(float(np.linalg.norm(t, 2)) for t in terms)
    return FrustrationFreeSet([t / scale for t in terms], psi)


def random_ff_path(d: int, n_terms: int, seed, angle: float = 1.0) -> FrustrationFreePath:
    """A generated frustration-free set rotated by exp(-i s G) with random Hermitian G."""
    rng = np.random.default_rng(seed)
    ff = generate_ff_ensemble(d, n_terms, rng)
    gen = angle * random_hermitian(d, rng)
    return FrustrationFreePath([rotated_path(t, gen) for t in ff.terms])


def ff_set_at(path: FrustrationFreePath, s: float) -> FrustrationFreeSet:
    terms = path.term_values(s)
    psi = spectral.decompose(sum(terms), s=s).ground_state
    return FrustrationFreeSet(terms, psi)


# --- costs -------------------------------------------------------------------

def _require_ff(path):
    if not isinstance(path, FrustrationFreePath):
        raise TypeError("a frustration-free path is required")


def path_pi_norm(path: FrustrationFreePath, grid=spectral.DEFAULT_GRID) -> float:
    """max over the grid and the terms of ||Π_k(s)||."""
    _require_ff(path)
    return max(float(np.linalg.norm(t._h(s), 2)) for s in spectral._grid(grid) for t in path.terms)


def amplified_rm_cost_formula(ddh_norm, gap, pi_norm: float, epsilon: float, kappa_prime: float = 1.0):
    """κ' ||H''|| / (2 ε ||Π||^{1/2} Δ^{3/2}) pointwise."""
    return kappa_prime * np.asarray(ddh_norm) / (2 * epsilon * math.sqrt(pi_norm) * np.asarray(gap) ** 1.5)


def fixed_point_cost_formula(ddh_norm, gap, pi_norm: float, epsilon: float, kappa_prime: float = 1.0):
    """κ' sqrt(||H''||/2) log(sqrt(||H''||/(2Δ))/ε) / (ε ||Π||^{1/2} Δ) pointwise, log floored at 0."""
    ddh = np.asarray(ddh_norm, dtype=float)
    gap = np.asarray(gap, dtype=float)
    arg = np.sqrt(ddh / (2 * gap)) / epsilon
    logs = np.log(np.where(arg > 0, arg, 1.0))
    return kappa_prime * np.sqrt(ddh / 2) * np.maximum(logs, 0.0) / (epsilon * math.sqrt(pi_norm) * gap)


def _kp(kappa_prime):
    return DistributionPolicy().kappa_prime if kappa_prime is None else kappa_prime


def rm_cost_amplified(path: FrustrationFreePath, epsilon: float, grid=spectral.DEFAULT_GRID,
                      kappa_prime: Optional[float] = None, _scan=None) -> float:
    """Maximum over the grid of the amplified RM cost formula."""
    _require_ff(path)
    sc = _scan or spectral.scan(path, grid)
    return float(np.max(amplified_rm_cost_formula(sc.ddh_norm, sc.gap, path_pi_norm(path, sc.s),
                                                  epsilon, _kp(kappa_prime))))


def fixed_point_cost(path: FrustrationFreePath, epsilon: float, grid=spectral.DEFAULT_GRID,
                     kappa_prime: Optional[float] = None, _scan=None) -> float:
    """Maximum over the grid of the fixed-point-search cost formula (formula only)."""
    _require_ff(path)
    sc = _scan or spectral.scan(path, grid)
    return float(np.max(fixed_point_cost_formula(sc.ddh_norm, sc.gap, path_pi_norm(path, sc.s),
                                                 epsilon, _kp(kappa_prime))))


# --- randomized traversal on H' ---------------------------------------------------

def _amplified_step_data(path: FrustrationFreePath):
    plain = _path_step_data(path)
    n_anc = len(path.terms) + 1
    e0 = np.zeros(n_anc, dtype=complex)
    e0[0] = 1.0

    def step(s):
        terms = path.term_values(s)
        _, _, psi, _ = plain(s)
        w, v = np.linalg.eigh(amplified_matrix(terms))
        return w, v, np.kron(psi, e0), _nonzero_gap(w)
    return step


def run_rm_amplified(path: FrustrationFreePath, epsilon: float, policy: Optional[DistributionPolicy] = None,
                     mode: str = "exact", seed=0, n_samples: int = 1000,
                     schedule: Optional[Schedule] = None, l_star: Optional[float] = None,
                     grid_size: int = spectral.DEFAULT_GRID):
    """Randomized traversal where step j evolves under H'(s_j) and targets ψ(s_j) ⊗ |0>.

    The schedule is the one of the plain path (the ancilla does not move), while
    each step's random time is scaled by 1/Δ'(s_j).
    """
    _require_ff(path)
    policy = policy or DistributionPolicy()
    if l_star is None:
        l_star = spectral.path_length_bound_improved(path, grid_size)
    schedule = schedule or build_schedule(l_star, epsilon)
    report = traverse(schedule.points, _amplified_step_data(path), path_speed(path), epsilon, policy,
                      mode, seed, n_samples, l_star)
    report.schedule = schedule
    return report
