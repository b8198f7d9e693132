"""Randomization method: traverse a ground-state path by evolving for random times.

At step j the state is evolved under H(s_j) for a random time t drawn from
a distribution whose width scales as 1/Δ(s_j). Averaged over t this is the
dephasing channel

    ρ'_{ab} = ρ_{ab} φ(λ_a - λ_b),    φ(ω) = ∫ f(t) e^{-iωt} dt,

in the eigenbasis of H(s_j). The channel can be applied exactly or sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special, stats

from eigenpath import spectral
from eigenpath.ham_path import HamiltonianPath
from eigenpath.report import BoundCheck

DEFAULT_SAMPLES = 1000
_GL_NODES = 8
_REL_TOL = 1e-6
_ABS_TOL = 1e-12
_FID_TOL = 1e-10


# --- time distributions ---------------------------------------------------

class TimeDistribution:
    """Law of the random evolution time of one step."""

    kind = "abstract"

    def char(self, omega):
        """Characteristic function φ(ω) = E[exp(-iωt)]."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def expected_abs_time(self) -> float:
        raise NotImplementedError

    def epsilon_prime(self, gap_lower: float) -> float:
        """sup of |φ(ω)| over |ω| >= gap_lower (|φ| is even in ω for real t)."""
        return float(abs(self.char(gap_lower)))


@dataclass(frozen=True)
class Gaussian(TimeDistribution):
    sigma: float
    mean: float = 0.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def char(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(-1j * self.mean * omega - 0.5 * (self.sigma * omega) ** 2)

    def sample(self, rng, n):
        return rng.normal(self.mean, self.sigma, size=n)

    def expected_abs_time(self):
        mu, sd = self.mean, self.sigma
        return float(sd * math.sqrt(2 / math.pi) * math.exp(-mu * mu / (2 * sd * sd))
                     + mu * (1 - 2 * stats.norm.cdf(-mu / sd)))


@dataclass(frozen=True)
class OneSidedExponential(TimeDistribution):
    scale: float
    kind = "exponential"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def char(self, omega):
        return 1.0 / (1.0 + 1j * np.asarray(omega, dtype=float) * self.scale)

    def sample(self, rng, n):
        return rng.exponential(self.scale, size=n)

    def expected_abs_time(self):
        return float(self.scale)


@dataclass(frozen=True)
class ShiftedTruncatedGaussian(TimeDistribution):
    """Normal(mean, sigma) conditioned on t >= 0."""

    mean: float
    sigma: float
    kind = "truncated"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def _law(self):
        return stats.truncnorm(-self.mean / self.sigma, np.inf, loc=self.mean, scale=self.sigma)

    def char(self, omega):
        # E[e^{-iωt}] = exp(-μ²/2σ²) w(iz) / (2 Φ(μ/σ)),  iz = -(σω + iμ/σ)/√2
        omega = np.asarray(omega, dtype=float)
        a = self.mean / self.sigma
        iz = -(self.sigma * omega + 1j * a) / math.sqrt(2)
        return 0.5 * np.exp(-0.5 * a * a) * special.wofz(iz) / special.ndtr(a)

    def sample(self, rng, n):
        return self._law.rvs(size=n, random_state=rng)

    def expected_abs_time(self):
        return float(self._law.mean())

    def epsilon_prime(self, gap_lower):
        # |φ| is not monotone for this law; take the max over a dense frequency grid.
        w = gap_lower * np.concatenate([np.linspace(1.0, 10.0, 4001), np.geomspace(10.0, 1e4, 4001)])
        return float(np.max(np.abs(self.char(w))))


def char_factor(dist: TimeDistribution, omega):
    """φ(ω) for the given distribution (closed form)."""
    return dist.char(omega)


def epsilon_prime(dist: TimeDistribution, gap_lower: float) -> float:
    """Worst-case coherence reduction factor for frequencies at least ``gap_lower``."""
    return dist.epsilon_prime(gap_lower)


@dataclass(frozen=True)
class DistributionPolicy:
    """Maps a gap Δ to a time distribution of width ``scale / Δ``.

    The default scales give ε' = 1/3 for the Gaussian and exponential kinds.
    ``shift`` (truncated kind only) places the mean at ``shift * scale / Δ``.
    """

    kind: str = "gaussian"
    scale: Optional[float] = None
    shift: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "exponential", "truncated"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @property
    def width(self) -> float:
        if self.scale is not None:
            return self.scale
        return {"gaussian": math.sqrt(2 * math.log(3)), "exponential": math.sqrt(8.0),
                "truncated": math.sqrt(2 * math.log(3))}[self.kind]

    def for_gap(self, gap: float) -> TimeDistribution:
        w = self.width / gap
        if self.kind == "gaussian":
            return Gaussian(w)
        if self.kind == "exponential":
            return OneSidedExponential(w)
        return ShiftedTruncatedGaussian(self.shift * w, w)

    @property
    def kappa_prime(self) -> float:
        """Δ · E|t|, the per-step cost constant of this policy (gap independent)."""
        return self.for_gap(1.0).expected_abs_time()


# --- channel ---------------------------------------------------------------

def _as_spectral(h_or_spec):
    if isinstance(h_or_spec, spectral.SpectralData):
        return h_or_spec.eigenvalues, h_or_spec.eigenvectors
    if isinstance(h_or_spec, tuple):
        return h_or_spec
    return np.linalg.eigh(np.asarray(h_or_spec))


def _dephase(rho, w, v, factors):
    rt = v.conj().T @ rho @ v
    out = v @ (rt * factors) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def randomized_step_exact(rho, spec, dist: TimeDistribution) -> np.ndarray:
    """Exact random-time average of e^{-iHt} ρ e^{iHt}.

    ``spec`` is a :class:`SpectralData` (or a Hermitian matrix to decompose).
    """
    w, v = _as_spectral(spec)
    return _dephase(np.asarray(rho, dtype=complex), w, v, dist.char(w[:, None] - w[None, :]))


def randomized_step_mc(rho, h, dist: TimeDistribution, n_samples: int = DEFAULT_SAMPLES, seed=0) -> np.ndarray:
    """Sample average of e^{-iHt} ρ e^{iHt} over ``n_samples`` draws of t.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    w, v = _as_spectral(h)
    t = dist.sample(rng, n_samples)
    phases = np.exp(-1j * np.outer(t, w))  # row k: diagonal of e^{-iHt_k} in the eigenbasis
    factors = phases.T @ phases.conj() / n_samples
    return _dephase(np.asarray(rho, dtype=complex), w, v, factors)


# --- schedule --------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    epsilon: float
    delta_s: float
    q: int
    points: np.ndarray = field(repr=False)  # s_0 = 0, s_1, ..., s_q = 1

    @classmethod
    def uniform(cls, delta_s: float, epsilon: float) -> "Schedule":
        if not 0 < delta_s:
            raise ValueError("delta_s must be positive")
        q = max(1, math.ceil(1.0 / delta_s - 1e-9))
        pts = np.minimum(np.arange(q + 1) * delta_s, 1.0)
        pts[-1] = 1.0
        return cls(epsilon, delta_s, q, pts)


def build_schedule(l_star: float, epsilon: float) -> Schedule:
    """Uniform schedule δs = ε / L*², q = ceil(L*²/ε) steps, last point clamped to 1."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if l_star < 0:
        raise ValueError("l_star must be nonnegative")
    if l_star == 0:
        return Schedule(epsilon, 1.0, 1, np.array([0.0, 1.0]))
    return Schedule.uniform(epsilon / l_star ** 2, epsilon)


# --- traversal -------------------------------------------------------------

@dataclass
class RmState:
    rho: np.ndarray
    step: int
    fidelity: float
    coherence: float
    accumulated_cost: float


@dataclass
class RmStep:
    j: int
    s: float
    gap: float
    alpha: float
    sin2_bound: float     # δs_j ∫ ||ψ'||² over the step
    sin_bound: float      # ∫ ||ψ'|| over the step
    pr: float
    c: float
    c_bound: float
    eps_prime: float
    step_cost: float
    cum_cost: float


@dataclass
class RmReport:
    epsilon: float
    schedule: Schedule
    l_star: float
    mode: str
    policy: DistributionPolicy
    rows: list
    final_state: RmState
    kappa_prime: float
    eps_prime_max: float
    cost_bound: Optional["CostBound"] = None

    @property
    def final_fidelity(self) -> float:
        return self.rows[-1].pr

    @property
    def fidelity_bound(self) -> float:
        return fidelity_lower_bound(self.epsilon, self.eps_prime_max)

    @property
    def total_cost(self) -> float:
        return self.rows[-1].cum_cost

    def csv_rows(self):
        for r in self.rows:
            yield (r.j, r.s, r.gap, r.alpha, r.sin2_bound, r.pr, r.c, r.c_bound,
                   r.eps_prime, r.step_cost, r.cum_cost)


CSV_COLUMNS = ("j", "s_j", "gap", "alpha_j", "sin2_bound", "pr_j", "c_j", "c_bound",
               "eps_prime", "step_cost", "cum_cost")


def fidelity_lower_bound(epsilon: float, eps_prime: float) -> float:
    """1 - ε - 2εε' / ((1 - ε)(1 - ε'))."""
    return 1.0 - epsilon - 2 * epsilon * eps_prime / ((1 - epsilon) * (1 - eps_prime))


def _speed_integrals(speed: Callable[[float], float], a: float, b: float, nodes: int = _GL_NODES):
    x, wts = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (b - a) * x + 0.5 * (a + b)
    v = np.array([speed(si) for si in s])
    half = 0.5 * (b - a)
    return half * float(np.dot(wts, v ** 2)), half * float(np.dot(wts, v))


def path_speed(path: HamiltonianPath) -> Callable[[float], float]:
    return lambda s: float(np.linalg.norm(spectral.state_derivative(path, s)))


def traverse(points, step_data, speed, epsilon, policy, mode="exact", seed=0,
             n_samples=DEFAULT_SAMPLES, l_star=float("nan")) -> RmReport:
    """Core loop shared by plain and gap-amplified runs.

    ``step_data(s)`` returns ``(eigenvalues, eigenvectors, target_state, gap)``
    for the Hamiltonian used at ``s``; ``speed(s)`` is ||ψ'(s)|| of the target path.
    """
    if mode not in ("exact", "mc"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    w, v, psi, gap = step_data(points[0])
    rho = np.outer(psi, psi.conj())
    rows = [RmStep(0, float(points[0]), gap, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)]
    cum = 0.0
    acc = 0.0  # running Σ_i (Π_{m>=i} ε'_m) sin α_i
    eps_max = 0.0
    prev = psi
    for j in range(1, len(points)):
        s_prev, s = float(points[j - 1]), float(points[j])
        w, v, psi, gap = step_data(s)
        dist = policy.for_gap(gap)
        if mode == "exact":
            rho = _dephase(rho, w, v, dist.char(w[:, None] - w[None, :]))
        else:
            rho = randomized_step_mc(rho, (w, v), dist, n_samples, rng)
        ov = np.vdot(prev, psi)
        sin_a = float(np.linalg.norm(psi - ov * prev))
        alpha = math.asin(min(sin_a, 1.0)) if abs(ov) >= sin_a else math.acos(min(abs(ov), 1.0))
        sq_int, lin_int = _speed_integrals(speed, s_prev, s)
        rho_psi = rho @ psi
        pr = float(np.real(np.vdot(psi, rho_psi)))
        c = float(np.linalg.norm(rho_psi - pr * psi))
        ep = dist.epsilon_prime(gap)
        eps_max = max(eps_max, ep)
        acc = ep * (math.sin(alpha) + acc)
        step_cost = dist.expected_abs_time()
        cum += step_cost
        rows.append(RmStep(j, s, gap, alpha, (s - s_prev) * sq_int, lin_int, pr, c,
                           acc / (1 - epsilon), ep, step_cost, cum))
        prev = psi
    final = RmState(rho, len(points) - 1, rows[-1].pr, rows[-1].c, cum)
    return RmReport(epsilon, None, l_star, mode, policy, rows, final, policy.kappa_prime, eps_max)


def _path_step_data(path: HamiltonianPath):
    def step(s):
        spec = spectral.decompose(path.h(s), s=s)
        return spec.eigenvalues, spec.eigenvectors, spec.ground_state, spec.gap
    return step


def run_rm(path: HamiltonianPath, epsilon: float, policy: Optional[DistributionPolicy] = None,
           mode: str = "exact", seed=0, n_samples: int = DEFAULT_SAMPLES,
           schedule: Optional[Schedule] = None, l_star: Optional[float] = None,
           grid_size: int = spectral.DEFAULT_GRID) -> RmReport:
    """Run the randomization method from ψ(0) to ψ(1).

    The schedule defaults to :func:`build_schedule` with the curvature bound L*
    of ``path``; pass ``schedule`` to override it (e.g. to probe violations).
    """
    policy = policy or DistributionPolicy()
    if l_star is None:
        l_star = spectral.path_length_bound_improved(path, grid_size)
    schedule = schedule or build_schedule(l_star, epsilon)
    report = traverse(schedule.points, _path_step_data(path), path_speed(path), epsilon, policy,
                      mode, seed, n_samples, l_star)
    report.schedule = schedule
    return report


# --- verification ------------------------------------------------------------

def verify_step_bounds(report: RmReport, path: Optional[HamiltonianPath] = None) -> list:
    """Evaluate every per-step and end-to-end inequality on a finished run.

    Returns a list of :class:`BoundCheck`; violations are counted, never raised.
    If ``path`` is given the angle bounds are recomputed with a finer quadrature.
    """
    rows = report.rows
    eps = report.epsilon
    angle = BoundCheck("angle_bound")
    angle_len = BoundCheck("angle_length_bound")
    step_fid = BoundCheck("fidelity_step")
    coherence = BoundCheck("coherence_bound")
    speed = path_speed(path) if path is not None else None
    for prev, r in zip(rows, rows[1:]):
        sin2_bound, sin_bound = r.sin2_bound, r.sin_bound
        if speed is not None:
            sq, lin = _speed_integrals(speed, prev.s, r.s, nodes=2 * _GL_NODES)
            sin2_bound, sin_bound = (r.s - prev.s) * sq, lin
        s2 = math.sin(r.alpha) ** 2
        angle.record(s2, sin2_bound, s2 <= sin2_bound * (1 + _REL_TOL) + _ABS_TOL)
        sa = math.sin(r.alpha)
        angle_len.record(sa, sin_bound, sa <= sin_bound * (1 + _REL_TOL) + _ABS_TOL)
        step_rhs = math.cos(r.alpha) ** 2 * prev.pr - 2 * math.sin(r.alpha) * prev.c
        step_fid.record(step_rhs, r.pr, r.pr >= step_rhs - _FID_TOL)
        coherence.record(r.c, r.c_bound, r.c <= r.c_bound * (1 + _REL_TOL) + _ABS_TOL)
    total_sin2 = sum(math.sin(r.alpha) ** 2 for r in rows[1:])
    disc = BoundCheck("discretization_infidelity").record(total_sin2, eps)
    prod = math.prod(math.cos(r.alpha) ** 2 for r in rows[1:])
    iter_rhs = prod - 2 * sum(math.sin(r.alpha) * p.c for p, r in zip(rows, rows[1:]))
    iterated = BoundCheck("fidelity_iterated").record(iter_rhs, report.final_fidelity,
                                                      report.final_fidelity >= iter_rhs - _FID_TOL)
    guarantee = BoundCheck("fidelity_guarantee").record(
        report.fidelity_bound, report.final_fidelity, report.final_fidelity >= report.fidelity_bound - _FID_TOL)
    return [angle, angle_len, disc, step_fid, coherence, iterated, guarantee]


# --- cost -------------------------------------------------------------------

@dataclass
class CostBound:
    l_star_cost: float     # κ' L*² / (ε min Δ)
    closed_form: float     # κ' max (||H''|| + 2||H'||) / (2 ε Δ²)
    kappa_prime: float


def total_cost_bound(path: HamiltonianPath, epsilon: float, grid=spectral.DEFAULT_GRID,
                     kappa_prime: Optional[float] = None) -> CostBound:
    """Average-cost bounds of the randomization method from the curvature bound.

    ``kappa_prime`` defaults to the per-step constant of the default policy.
    """
    kp = DistributionPolicy().kappa_prime if kappa_prime is None else kappa_prime
    sc = spectral.scan(path, grid)
    l_star_sq = max(float(spectral.simpson(sc.integrand, x=sc.s)), 0.0)
    closed = float(np.max((sc.ddh_norm + 2 * sc.dh_norm) / (2 * epsilon * sc.gap ** 2)))
    return CostBound(kp * l_star_sq / (epsilon * float(np.min(sc.gap))), kp * closed, kp)
