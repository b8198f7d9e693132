"""Ground-state spectral data along a path, with the path length and its upper bounds.

The exact length ``L = ∫ ||ψ'(s)|| ds`` is compared against

* ``L_star``: ``sqrt(∫ (<ψ|H''|ψ> - E'') / (2Δ) ds)``, the curvature bound for ground states;
* ``bound_standard``: ``max ||H'|| / Δ``;
* the closed forms for general, linear and frustration-free paths.

Derivatives of the state use the reduced resolvent
``ψ' = -Σ_{k>0} |k><k|H'|ψ> / (λ_k - E)``, which fixes the gauge ``<ψ|ψ'> = 0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from eigenpath.errors import DegenerateGroundState, NegativeIntegrandWarning, NotFrustrationFree
from eigenpath.ham_path import FrustrationFreePath, HamiltonianPath, LinearPath

DEFAULT_GRID = 1001
DEFAULT_CURVATURE_STEP = 1e-3
NEGATIVE_TOL = 1e-8
FF_ENERGY_TOL = 1e-8
_CHUNK = 64


@dataclass(frozen=True)
class SpectralData:
    s: Optional[float]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


@dataclass(frozen=True)
class GaugedState:
    s: float
    amplitudes: np.ndarray
    convention: str = "parallel-transport"


@dataclass
class PathLengthReport:
    L: float
    L_star: float
    L_standard: float
    L_general: float
    L_linear: Optional[float]
    L_ff: Optional[float]
    grid_size: int
    L_half: float
    L_star_half: float
    s: np.ndarray = field(repr=False)
    speed: np.ndarray = field(repr=False)


@dataclass
class GridScan:
    """Per-point spectral quantities along a grid (all arrays of length n)."""

    s: np.ndarray
    energy: np.ndarray
    gap: np.ndarray
    dh_norm: np.ndarray
    ddh_norm: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray  # <ψ|H''|ψ> - E''
    states: np.ndarray  # gauge-aligned ground states, shape (n, dim)

    @property
    def integrand(self) -> np.ndarray:
        return np.clip(self.curvature, 0.0, None) / (2.0 * self.gap)


def _default_tol(eigenvalues) -> float:
    return 1e-10 * max(float(np.max(np.abs(eigenvalues))), 1e-300)


def decompose(h, degeneracy_tol: Optional[float] = None, s: Optional[float] = None) -> SpectralData:
    """Full eigendecomposition of a Hermitian matrix, refusing degenerate ground states."""
    w, v = np.linalg.eigh(np.asarray(h))
    tol = _default_tol(w) if degeneracy_tol is None else degeneracy_tol
    if len(w) < 2:
        raise DegenerateGroundState("1-dimensional space has no gap", s=s)
    gap = w[1] - w[0]
    if not gap > tol:
        raise DegenerateGroundState(f"ground gap {gap:.3e} below tolerance {tol:.3e}"
                                    + (f" at s={s}" if s is not None else ""), s=s, gap=gap)
    return SpectralData(s, w, v)


def _ground_derivative(spec: SpectralData, dh: np.ndarray) -> np.ndarray:
    v, w = spec.eigenvectors, spec.eigenvalues
    coupling = v[:, 1:].conj().T @ (dh @ v[:, 0])
    return -(v[:, 1:] @ (coupling / (w[1:] - w[0])))


def state_derivative(path: HamiltonianPath, s: float, degeneracy_tol: Optional[float] = None) -> np.ndarray:
    """dψ/ds of the ground state via the reduced resolvent (gauge <ψ|ψ'> = 0)."""
    spec = decompose(path.h(s), degeneracy_tol, s)
    return _ground_derivative(spec, path.dh(s))


def _grid(grid) -> np.ndarray:
    if np.isscalar(grid):
        n = int(grid)
        if n < 3:
            raise ValueError("grid needs at least 3 points")
        return np.linspace(0.0, 1.0, n)
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 3 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be an increasing array of at least 3 points")
    return g


def _norm2(m) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


def _stencil_points(s: float, h: float):
    """Offsets and weights for a 4th-order E'' stencil that stays inside [0, 1]."""
    if s - 2 * h >= 0.0 and s + 2 * h <= 1.0:
        return np.array([-2, -1, 0, 1, 2]) * h, np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    sign = 1.0 if s + 5 * h <= 1.0 else -1.0
    return sign * np.arange(6) * h, np.array([45, -154, 214, -156, 61, -10]) / (12 * h * h)


def _ground_energies(path: HamiltonianPath, s_values: np.ndarray) -> np.ndarray:
    out = np.empty(len(s_values))
    for start in range(0, len(s_values), _CHUNK):
        chunk = s_values[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.linalg.eigvalsh(path.h_batch(chunk))[:, 0]
    return out


def energy_second_derivative_fd(path: HamiltonianPath, s_values, step: float = DEFAULT_CURVATURE_STEP) -> np.ndarray:
    """E''(s) by 4th-order finite differences of the scalar ground energy.

    Accurate only while ``step`` is well below the avoided-crossing width
    Δ/||H'||; near small gaps prefer :func:`energy_second_derivative`.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    stencils = [_stencil_points(s, step) for s in s_values]
    pts = np.concatenate([s + off for s, (off, _) in zip(s_values, stencils)])
    pts = np.clip(pts, 0.0, 1.0)
    energies = _ground_energies(path, pts)
    out = np.empty(len(s_values))
    pos = 0
    for i, (off, wts) in enumerate(stencils):
        out[i] = float(np.dot(wts, energies[pos:pos + len(off)]))
        pos += len(off)
    return out


def _energy_curvature(spec: SpectralData, dh, ddh) -> float:
    """E'' = <ψ|H''|ψ> - 2 Σ_{k>0} |<k|H'|ψ>|² / (λ_k - E)."""
    v, w = spec.eigenvectors, spec.eigenvalues
    psi = v[:, 0]
    coupling = v[:, 1:].conj().T @ (dh @ psi)
    hpp = float(np.real(np.vdot(psi, ddh @ psi)))
    return hpp - 2.0 * float(np.sum(np.abs(coupling) ** 2 / (w[1:] - w[0])))


def energy_second_derivative(path: HamiltonianPath, s_values) -> np.ndarray:
    """E''(s) from second-order perturbation theory at each point."""
    out = []
    for s in np.atleast_1d(np.asarray(s_values, dtype=float)):
        spec = decompose(path.h(s), s=s)
        out.append(_energy_curvature(spec, path.dh(s), path.ddh(s)))
    return np.array(out)


def scan(path: HamiltonianPath, grid=DEFAULT_GRID, degeneracy_tol: Optional[float] = None,
         curvature: str = "perturbative", curvature_step: float = DEFAULT_CURVATURE_STEP) -> GridScan:
    """Evaluate all per-point quantities needed by the length and bound operations.

    ``curvature`` selects how E'' is obtained: ``"perturbative"`` (closed form
    from the eigendecomposition, default) or ``"fd"`` (finite differences of E).
    """
    if curvature not in ("perturbative", "fd"):
        raise ValueError(f"unknown curvature method {curvature!r}")
    s_values = _grid(grid)
    n = len(s_values)
    energy = np.empty(n)
    gap = np.empty(n)
    dh_norm = np.empty(n)
    ddh_norm = np.empty(n)
    speed = np.empty(n)
    hpp = np.empty(n)
    states = np.empty((n, path.dim), dtype=complex)
    linear = isinstance(path, LinearPath)
    epp = np.empty(n)
    if linear:
        dh_const = path.dh(0.0)
        ddh_const = path.ddh(0.0)
        dh_norm[:] = _norm2(dh_const)
        ddh_norm[:] = 0.0
        hpp[:] = 0.0
    prev = None
    for start in range(0, n, _CHUNK):
        chunk = s_values[start:start + _CHUNK]
        ws, vs = np.linalg.eigh(path.h_batch(chunk))
        for j, s in enumerate(chunk):
            i = start + j
            w, v = ws[j], vs[j]
            tol = _default_tol(w) if degeneracy_tol is None else degeneracy_tol
            g = w[1] - w[0]
            if not g > tol:
                raise DegenerateGroundState(f"ground gap {g:.3e} below tolerance at s={s}", s=s, gap=g)
            spec = SpectralData(float(s), w, v)
            dh = dh_const if linear else path.dh(s)
            psi = v[:, 0]
            if prev is not None:
                ov = np.vdot(prev, psi)
                if abs(ov) > 0:
                    psi = psi * (abs(ov) / ov)
            states[i] = psi
            prev = psi
            energy[i] = w[0]
            gap[i] = g
            speed[i] = np.linalg.norm(_ground_derivative(spec, dh))
            ddh = ddh_const if linear else path.ddh(s)
            if not linear:
                dh_norm[i] = _norm2(dh)
                ddh_norm[i] = _norm2(ddh)
                hpp[i] = float(np.real(np.vdot(psi, ddh @ psi)))
            epp[i] = _energy_curvature(spec, dh, ddh)
    if curvature == "fd":
        epp = energy_second_derivative_fd(path, s_values, curvature_step)
    curvature = hpp - epp
    worst = float(np.min(curvature))
    if worst < -NEGATIVE_TOL:
        warnings.warn(f"curvature integrand reached {worst:.3e}; clipped to 0 "
                      "(inaccurate derivatives or not a ground-state path)", NegativeIntegrandWarning)
    return GridScan(s_values, energy, gap, dh_norm, ddh_norm, speed, curvature, states)


def _integrate(y, x) -> float:
    return float(simpson(y, x=x))


def path_length(path: HamiltonianPath, grid_size: int = DEFAULT_GRID) -> float:
    """Exact path length ∫ ||ψ'|| ds by composite Simpson on a uniform grid."""
    return path_length_report(path, grid_size).L


def path_length_bound_improved(path: HamiltonianPath, grid_size: int = DEFAULT_GRID) -> float:
    """Curvature bound L* = sqrt(∫ (<ψ|H''|ψ> - E'') / (2Δ) ds)."""
    sc = scan(path, grid_size)
    return float(np.sqrt(max(_integrate(sc.integrand, sc.s), 0.0)))


def bound_standard(path: HamiltonianPath, grid=DEFAULT_GRID, _scan: Optional[GridScan] = None) -> float:
    sc = _scan or scan(path, grid)
    return float(np.max(sc.dh_norm / sc.gap))


def bound_general(path: HamiltonianPath, grid=DEFAULT_GRID, _scan: Optional[GridScan] = None) -> float:
    sc = _scan or scan(path, grid)
    return float(np.max(np.sqrt((sc.ddh_norm + 2 * sc.dh_norm) / (2 * sc.gap))))


def bound_linear(path: HamiltonianPath, grid=DEFAULT_GRID, _scan: Optional[GridScan] = None) -> float:
    if not isinstance(path, LinearPath):
        raise TypeError("bound_linear requires a linear interpolation path")
    sc = _scan or scan(path, grid)
    return float(np.max(np.sqrt(sc.dh_norm / sc.gap)))


def bound_ff(path: HamiltonianPath, grid=DEFAULT_GRID, _scan: Optional[GridScan] = None) -> float:
    if not isinstance(path, FrustrationFreePath):
        raise TypeError("bound_ff requires a frustration-free path")
    sc = _scan or scan(path, grid)
    worst = float(np.max(np.abs(sc.energy)))
    if worst > FF_ENERGY_TOL:
        raise NotFrustrationFree(f"ground energy reaches {worst:.3e}")
    return float(np.max(np.sqrt(sc.ddh_norm / (2 * sc.gap))))


def path_length_report(path: HamiltonianPath, grid_size: int = DEFAULT_GRID) -> PathLengthReport:
    sc = scan(path, grid_size)
    integrand = sc.integrand
    half = slice(None, None, 2)
    L_ff = None
    if isinstance(path, FrustrationFreePath):
        L_ff = bound_ff(path, _scan=sc)
    return PathLengthReport(
        L=_integrate(sc.speed, sc.s),
        L_star=float(np.sqrt(max(_integrate(integrand, sc.s), 0.0))),
        L_standard=bound_standard(path, _scan=sc),
        L_general=bound_general(path, _scan=sc),
        L_linear=bound_linear(path, _scan=sc) if isinstance(path, LinearPath) else None,
        L_ff=L_ff,
        grid_size=len(sc.s),
        L_half=_integrate(sc.speed[half], sc.s[half]),
        L_star_half=float(np.sqrt(max(_integrate(integrand[half], sc.s[half]), 0.0))),
        s=sc.s,
        speed=sc.speed,
    )


def check_local_rate_bound(path: HamiltonianPath, s: float, tol: float = 1e-8, curvature: str = "perturbative",
                           curvature_step: float = DEFAULT_CURVATURE_STEP):
    """Pointwise check of ||ψ'||² <= (<ψ|H''|ψ> - E'') / (2Δ). Returns (lhs, rhs, holds)."""
    spec = decompose(path.h(s), s=s)
    dh, ddh = path.dh(s), path.ddh(s)
    lhs = float(np.linalg.norm(_ground_derivative(spec, dh)) ** 2)
    psi = spec.ground_state
    hpp = float(np.real(np.vdot(psi, ddh @ psi)))
    if curvature == "fd":
        epp = float(energy_second_derivative_fd(path, [s], curvature_step)[0])
    else:
        epp = _energy_curvature(spec, dh, ddh)
    rhs = (hpp - epp) / (2 * spec.gap)
    return lhs, rhs, bool(lhs <= rhs + tol)


def gauged_ground_states(path: HamiltonianPath, grid=DEFAULT_GRID) -> list:
    """Ground states on a grid with each overlap <ψ(s_{j-1})|ψ(s_j)> real and nonnegative."""
    out = []
    prev = None
    for s in _grid(grid):
        psi = decompose(path.h(s), s=s).ground_state
        if prev is None:
            k = int(np.argmax(np.abs(psi)))
            psi = psi * (abs(psi[k]) / psi[k])
        else:
            ov = np.vdot(prev, psi)
            if abs(ov) > 0:
                psi = psi * (abs(ov) / ov)
        out.append(GaugedState(float(s), psi))
        prev = psi
    return out
