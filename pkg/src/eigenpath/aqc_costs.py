"""Adiabatic and eigenpath-traversal cost formulas, plus an adiabatic integrator."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from eigenpath import spectral
from eigenpath.ham_path import HamiltonianPath
from eigenpath.rm_engine import DistributionPolicy, total_cost_bound


def _check_eps(epsilon):
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")


def t_aqc(path: HamiltonianPath, epsilon: float, kappa: float = 1.0, grid=spectral.DEFAULT_GRID,
          _scan=None) -> float:
    """κ max_s max(||H''|| / (εΔ²), ||H'||² / (εΔ³))."""
    _check_eps(epsilon)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    sc = _scan or spectral.scan(path, grid)
    curv = sc.ddh_norm / (epsilon * sc.gap ** 2)
    speed = sc.dh_norm ** 2 / (epsilon * sc.gap ** 3)
    return float(kappa * np.max(np.maximum(curv, speed)))


def t_ept(length: float, gap_min: float, epsilon: float, c: int = 2, kappa_prime: float = 1.0) -> float:
    """κ' L^c log(L/ε) / (ε min Δ); zero for L = 0.

    The logarithm is floored at 0 so that L < ε (already within tolerance)
    does not produce a negative cost.
    """
    if c not in (1, 2):
        raise ValueError("c must be 1 or 2")
    if length < 0 or gap_min <= 0:
        raise ValueError("need length >= 0 and gap_min > 0")
    if length == 0:
        return 0.0
    return kappa_prime * length ** c * max(math.log(length / epsilon), 0.0) / (epsilon * gap_min)


def t_ept_standard(path: HamiltonianPath, epsilon: float, c: int = 2, kappa_prime: float = 1.0,
                   grid=spectral.DEFAULT_GRID, _scan=None) -> float:
    """κ' max_s ||H'||^c / (εΔ^{c+1}) log(||H'|| / (εΔ)), i.e. t_ept with L -> max ||H'||/Δ."""
    sc = _scan or spectral.scan(path, grid)
    ratio = sc.dh_norm / sc.gap
    logs = np.log(np.where(ratio > 0, ratio / epsilon, 1.0))
    vals = sc.dh_norm ** c / (epsilon * sc.gap ** (c + 1)) * np.maximum(logs, 0.0)
    return float(kappa_prime * np.max(vals))


@dataclass
class CostReport:
    t_aqc: float
    t_ept_c1: float
    t_ept_c2: float
    t_ept_standard: float
    rm_bound: float
    epsilon: float
    kappa: float
    kappa_prime: float
    min_gap: float
    max_dh: float
    max_ddh: float
    L: float
    L_star: float

    def to_dict(self) -> dict:
        return asdict(self)


def cost_report(path: HamiltonianPath, epsilon: float, kappa: float = 1.0, kappa_prime: float | None = None,
                grid=spectral.DEFAULT_GRID) -> CostReport:
    """All baseline costs for one path. T_EPT values use L* in place of L."""
    kp = DistributionPolicy().kappa_prime if kappa_prime is None else kappa_prime
    sc = spectral.scan(path, grid)
    lengths = spectral.path_length_report(path, grid)
    gmin = float(np.min(sc.gap))
    return CostReport(
        t_aqc=t_aqc(path, epsilon, kappa, _scan=sc),
        t_ept_c1=t_ept(lengths.L_star, gmin, epsilon, 1, kp),
        t_ept_c2=t_ept(lengths.L_star, gmin, epsilon, 2, kp),
        t_ept_standard=t_ept_standard(path, epsilon, 2, kp, _scan=sc),
        rm_bound=total_cost_bound(path, epsilon, grid, kp).closed_form,
        epsilon=epsilon, kappa=kappa, kappa_prime=kp, min_gap=gmin,
        max_dh=float(np.max(sc.dh_norm)), max_ddh=float(np.max(sc.ddh_norm)),
        L=lengths.L, L_star=lengths.L_star,
    )


def simulate_adiabatic(path: HamiltonianPath, total_time: float, steps: int = 2000) -> float:
    """Final ground-state fidelity after evolving ψ(0) with s(t) = t / T.

    Piecewise-constant propagation, each slice exp(-i H(s_k) T/steps) applied
    exactly through an eigendecomposition, with H sampled at slice midpoints.
    """
    if total_time < 0:
        raise ValueError("total_time must be nonnegative")
    if steps < 1:
        raise ValueError("steps must be positive")
    state = spectral.decompose(path.h(0.0), s=0.0).ground_state.copy()
    target = spectral.decompose(path.h(1.0), s=1.0).ground_state
    if total_time > 0:
        dt = total_time / steps
        mids = (np.arange(steps) + 0.5) / steps
        for start in range(0, steps, 64):
            ws, vs = np.linalg.eigh(path.h_batch(mids[start:start + 64]))
            for w, v in zip(ws, vs):
                state = v @ (np.exp(-1j * w * dt) * (v.conj().T @ state))
    return float(abs(np.vdot(target, state)) ** 2)


def simulate_adiabatic_converged(path: HamiltonianPath, total_time: float, steps: int = 1000,
                                 tol: float = 1e-6, max_steps: int = 256000):
    """Double ``steps`` until the fidelity changes by less than ``tol``.

    Returns ``(fidelity, steps, last_change)``.
    """
    prev = simulate_adiabatic(path, total_time, steps)
    while True:
        steps *= 2
        cur = simulate_adiabatic(path, total_time, steps)
        change = abs(cur - prev)
        if change < tol or steps >= max_steps:
            return cur, steps, change
        prev = cur
