"""Coherent Gibbs-state paths for quantum simulated annealing.

The path |ψ(β)> ∝ Σ_σ e^{-βE[σ]/2} |σ> moves at rate ||∂_β ψ||² = Var_β(E)/4
= -∂_β<E>/4, which turns the step count of the randomization method into a
thermodynamic quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from eigenpath.errors import ConfigError
from eigenpath.ham_path import FunctionPath, max_dim

MAX_ISING_SPINS = 20
MAX_CHAIN_CONFIGS = 4096
_DISTINCT_TOL = 1e-12


@dataclass
class ObjectiveFunction:
    """Values E[σ] over d configurations, shifted to zero uniform mean by default."""

    values: np.ndarray
    shift: bool = True
    n_spins: Optional[int] = None      # set for Ising objectives (enables single-flip moves)
    offset: float = field(init=False)  # subtracted constant

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size < 2:
            raise ValueError("an objective needs at least two configurations")
        if not np.all(np.isfinite(v)):
            raise ValueError("objective values must be finite")
        self.offset = float(np.mean(v)) if self.shift else 0.0
        self.values = v - self.offset

    @property
    def d(self) -> int:
        return self.values.size

    @property
    def gamma(self) -> float:
        """Difference between the two smallest distinct values (0 for a constant objective)."""
        u = np.unique(self.values)
        u = u[np.concatenate(([True], np.diff(u) > _DISTINCT_TOL * max(1.0, np.abs(u).max())))]
        return float(u[1] - u[0]) if u.size > 1 else 0.0

    @property
    def e_max(self) -> float:
        return float(np.max(np.abs(self.values)))

    @classmethod
    def ising(cls, n: int, couplings=None, fields=None, shift: bool = True) -> "ObjectiveFunction":
        """E(σ) = Σ_{i<j} J_ij σ_i σ_j + Σ_i h_i σ_i with σ_i = 1 - 2 b_i, b_i bit i of the index.

        ``couplings`` is an n×n matrix (upper triangle used) or a list of
        ``[i, j, J_ij]`` triples.
        """
        if not 1 <= n <= MAX_ISING_SPINS:
            raise ValueError(f"Ising objectives support 1..{MAX_ISING_SPINS} spins")
        idx = np.arange(2 ** n)
        spins = 1 - 2 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)
        energy = np.zeros(2 ** n)
        for i, j, jij in _coupling_triples(n, couplings):
            energy += jij * spins[:, i] * spins[:, j]
        if fields is not None:
            h = np.asarray(fields, dtype=float)
            if h.shape != (n,):
                raise ValueError("fields must have one entry per spin")
            energy += spins @ h
        return cls(energy, shift, n_spins=n)

    @classmethod
    def from_json(cls, doc: dict) -> "ObjectiveFunction":
        try:
            if "values" in doc:
                return cls(doc["values"], doc.get("shift", True))
            if "ising" in doc:
                spec = doc["ising"]
                return cls.ising(int(spec["n"]), spec.get("J"), spec.get("h"), doc.get("shift", True))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad objective document: {exc}") from exc
        raise ConfigError("objective document needs 'values' or 'ising'")


def _coupling_triples(n, couplings):
    if couplings is None:
        return []
    arr = np.asarray(couplings, dtype=float)
    if arr.ndim == 2 and arr.shape == (n, n):
        return [(i, j, arr[i, j]) for i in range(n) for j in range(i + 1, n) if arr[i, j] != 0]
    if arr.ndim == 2 and arr.shape[1] == 3:
        out = []
        for i, j, jij in arr:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bad coupling indices ({i}, {j})")
            out.append((i, j, jij))
        return out
    if arr.size == 0:
        return []
    raise ValueError("couplings must be an n×n matrix or a list of [i, j, J] triples")


@dataclass
class GibbsPathPoint:
    beta: float
    psi: np.ndarray
    mean_energy: float
    var_energy: float
    log_partition: float

    @property
    def partition(self) -> float:
        return math.exp(self.log_partition)


def _gibbs(values: np.ndarray, beta: float) -> GibbsPathPoint:
    # valid for any real beta; the public entry point restricts to beta >= 0
    logw = -beta * values
    log_z = float(logsumexp(logw))
    p = np.exp(logw - log_z)
    psi = np.exp(0.5 * (logw - log_z))
    mean = float(p @ values)
    var = float(p @ (values - mean) ** 2)
    return GibbsPathPoint(beta, psi, mean, var, log_z)


def coherent_gibbs(obj: ObjectiveFunction, beta: float) -> GibbsPathPoint:
    """Amplitudes e^{-βE/2}/sqrt(Z), with Z evaluated by log-sum-exp."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return _gibbs(obj.values, beta)


def _fd_step(obj: ObjectiveFunction) -> float:
    spread = float(np.ptp(obj.values))
    return 1e-3 / max(1.0, spread)


def _d1(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


@dataclass
class RateCheck:
    state_rate: float       # ||∂_β ψ||² by differencing the state
    variance_rate: float    # Var(E)/4
    energy_rate: float      # -∂_β<E>/4 by differencing <E>
    rel_err: float


def rate_identity(obj: ObjectiveFunction, beta: float, h: Optional[float] = None) -> RateCheck:
    """Three evaluations of the squared speed of the Gibbs path at ``beta``.

    Derivatives use a fourth-order central stencil; the stencil may reach
    slightly negative β, where the Gibbs formulas remain well defined.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    h = _fd_step(obj) if h is None else h
    v = obj.values
    dpsi = _d1(lambda b: _gibbs(v, b).psi, beta, h)
    state = float(dpsi @ dpsi)
    here = _gibbs(v, beta)
    var = here.var_energy / 4
    # difference <E - c> with c = <E>_β: same derivative, roundoff set by the spread around c
    centred = v - here.mean_energy
    energy = -_d1(lambda b: _gibbs(centred, b).mean_energy, beta, h) / 4
    vals = (state, var, energy)
    scale = max(abs(var), 1e-300)
    rel = (max(vals) - min(vals)) / scale if var > 0 else max(abs(x) for x in vals)
    return RateCheck(state, var, energy, rel)


def rate_identity_check(obj: ObjectiveFunction, beta: float, h: Optional[float] = None):
    """(state-derivative rate, Var/4, relative spread of the three rate evaluations)."""
    rc = rate_identity(obj, beta, h)
    return rc.state_rate, rc.variance_rate, rc.rel_err


def beta_final(obj: ObjectiveFunction, epsilon: float, scale: float = 1.0) -> float:
    """scale * log(d/ε)/γ."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if obj.gamma <= 0:
        raise ValueError("a constant objective has no gap")
    return scale * math.log(obj.d / epsilon) / obj.gamma


@dataclass
class QStar:
    exact: float
    cap: float

    @property
    def holds(self) -> bool:
        return self.exact <= self.cap + 1e-9


def q_star(obj: ObjectiveFunction, beta_q: float, epsilon: float) -> QStar:
    """β_q(<E>_0 - <E>_{β_q})/(4ε) and its cap β_q E_M/(4ε)."""
    if epsilon <= 0 or beta_q < 0:
        raise ValueError("need epsilon > 0 and beta_q >= 0")
    e0 = _gibbs(obj.values, 0.0).mean_energy
    eq = _gibbs(obj.values, beta_q).mean_energy
    return QStar(beta_q * (e0 - eq) / (4 * epsilon), beta_q * obj.e_max / (4 * epsilon))


@dataclass
class QsaCosts:
    t_qsa: float
    t_old: float
    beta_q: float
    min_gap: float

    @property
    def ratio(self) -> float:
        return self.t_old / self.t_qsa if self.t_qsa > 0 else math.inf


def qsa_cost_formulas(beta_q: float, e_max: float, gap: float, epsilon: float, kappa_prime: float = 1.0):
    """(T_QSA, older cost) for one gap value; κ' multiplies both so the ratio is κ'-free."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    root = math.sqrt(gap)
    t_qsa = kappa_prime * beta_q * e_max / (4 * epsilon * root)
    x = (beta_q * e_max) ** 2
    t_old = kappa_prime * x * math.log(x / epsilon) / (epsilon * root) if x > 0 else 0.0
    return t_qsa, t_old


def qsa_costs(obj: ObjectiveFunction, epsilon: float, gap_provider: Callable[[float], float],
              beta_q: Optional[float] = None, kappa_prime: float = 1.0, n_beta: int = 201) -> QsaCosts:
    """Both costs maximized over a uniform β grid on [0, β_q]; both are largest where Δ(β) is smallest."""
    beta_q = beta_final(obj, epsilon) if beta_q is None else beta_q
    gaps = np.array([float(gap_provider(b)) for b in np.linspace(0.0, beta_q, n_beta)])
    if np.any(~np.isfinite(gaps)) or np.any(gaps <= 0):
        raise ValueError("gap_provider must be positive on [0, beta_q]")
    gmin = float(gaps.min())
    t_qsa, t_old = qsa_cost_formulas(beta_q, obj.e_max, gmin, epsilon, kappa_prime)
    return QsaCosts(t_qsa, t_old, beta_q, gmin)


# --- classical chain gap -------------------------------------------------------

def _proposal(obj: ObjectiveFunction) -> np.ndarray:
    d = obj.d
    if d > MAX_CHAIN_CONFIGS:
        raise ValueError(f"chain construction limited to {MAX_CHAIN_CONFIGS} configurations")
    if obj.n_spins is None:
        return (np.ones((d, d)) - np.eye(d)) / (d - 1)
    prop = np.zeros((d, d))
    idx = np.arange(d)
    for b in range(obj.n_spins):
        prop[idx, idx ^ (1 << b)] = 1.0 / obj.n_spins
    return prop


def metropolis_matrix(obj: ObjectiveFunction, beta: float) -> np.ndarray:
    """Lazy Metropolis chain (I + P)/2 targeting the Gibbs distribution.

    Ising objectives propose a uniformly random single-spin flip; plain value
    lists propose a uniformly random other configuration.
    """
    e = obj.values
    p = _proposal(obj) * np.exp(-beta * np.clip(e[None, :] - e[:, None], 0.0, None))
    p[np.diag_indices(obj.d)] = 1.0 - p.sum(axis=1)
    return 0.5 * (np.eye(obj.d) + p)


def metropolis_gap(obj: ObjectiveFunction, beta: float) -> float:
    """1 - λ_2 of the lazy chain, via its symmetrization D^{1/2} P D^{-1/2}.

    Off the diagonal the symmetrized Metropolis kernel is prop_ij exp(-β|E_i - E_j|/2),
    which is formed directly so that vanishing Gibbs weights never get divided.
    """
    e = obj.values
    p = metropolis_matrix(obj, beta)
    sym = 0.5 * _proposal(obj) * np.exp(-0.5 * beta * np.abs(e[:, None] - e[None, :]))
    sym[np.diag_indices(obj.d)] = np.diag(p)
    w = np.linalg.eigvalsh(sym)
    return float(1.0 - w[-2])


# --- Hamiltonian path with the Gibbs state as ground state ------------------------

def gibbs_rm_path(obj: ObjectiveFunction, beta_q: float,
                  gap: float | Callable[[float], float] = 1.0) -> FunctionPath:
    """H(s) = Δ(β)(I - |ψ(β)><ψ(β)|) with β = s β_q.

    A stand-in Hamiltonian whose ground state is exactly the coherent Gibbs
    state and whose gap is prescribed. Derivatives are analytic for a constant
    gap and finite-differenced otherwise.
    """
    if beta_q <= 0:
        raise ValueError("beta_q must be positive")
    d = obj.d
    if d > max_dim():
        raise ValueError("objective too large for a dense path")
    v = obj.values
    eye = np.eye(d)

    def gap_at(s):
        return float(gap(s * beta_q)) if callable(gap) else float(gap)

    def h(s):
        psi = _gibbs(v, s * beta_q).psi
        return (gap_at(s) * (eye - np.outer(psi, psi))).astype(complex)

    if callable(gap):
        return FunctionPath(d, h)

    def derivs(s):
        pt = _gibbs(v, s * beta_q)
        psi, m = pt.psi, pt.mean_energy
        d1 = 0.5 * (m - v) * psi                          # ∂_β ψ
        d2 = 0.5 * (-pt.var_energy * psi + (m - v) * d1)  # ∂²_β ψ
        return psi, beta_q * d1, beta_q ** 2 * d2

    def dh(s):
        psi, d1, _ = derivs(s)
        return (-gap * (np.outer(d1, psi) + np.outer(psi, d1))).astype(complex)

    def ddh(s):
        psi, d1, d2 = derivs(s)
        return (-gap * (np.outer(d2, psi) + 2 * np.outer(d1, d1) + np.outer(psi, d2))).astype(complex)

    return FunctionPath(d, h, dh, ddh)
