"""Brute-force validators.

Everything here works from raw matrices (``path.h``) and numpy eigensolvers and
deliberately avoids the ``spectral``, ``rm_engine`` and ``qsa`` code paths it is
used to check. The suite runner at the bottom imports those modules only to
compare against them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
import numpy as np

from eigenpath.ham_path import HamiltonianPath

_CHUNK = 2048


@dataclass
class OracleReport:
    name: str
    computed: float
    reference: float
    error: float
    tolerance: float
    passed: bool

    @classmethod
    def compare(cls, name: str, computed, reference, tolerance: float, relative: bool = False) -> "OracleReport":
        err = abs(float(computed) - float(reference))
        if relative:
            err /= max(abs(float(reference)), 1e-300)
        return cls(name, float(computed), float(reference), err, tolerance, err <= tolerance)

    def to_dict(self) -> dict:
        return asdict(self)


def _ground(h):
    w, v = np.linalg.eigh(h)
    return v[:, 0]


def _align(ref, vec):
    ov = np.vdot(ref, vec)
    return vec * (abs(ov) / ov) if abs(ov) > 0 else vec


def fd_state_derivative(path: HamiltonianPath, s: float, h: float = 1e-4) -> np.ndarray:
    """Derivative of the ground state, phase-aligned to ψ(s).

    Fourth-order central stencil in the interior, fourth-order one-sided stencil
    within 2h of an endpoint.
    """
    psi = _ground(path.h(s))

    def at(x):
        return _align(psi, _ground(path.h(x)))

    if s - 2 * h >= 0 and s + 2 * h <= 1:
        return (at(s - 2 * h) - 8 * at(s - h) + 8 * at(s + h) - at(s + 2 * h)) / (12 * h)
    sign = 1.0 if s - 2 * h < 0 else -1.0
    coef = (-25, 48, -36, 16, -3)
    return sign * sum(c * (psi if k == 0 else at(s + sign * k * h)) for k, c in enumerate(coef)) / (12 * h)


def dense_grid_length(path: HamiltonianPath, points: int = 100_001) -> float:
    """Sum of Fubini-Study angles between consecutive ground states on a uniform grid."""
    if points < 2:
        raise ValueError("need at least two points")
    s = np.linspace(0.0, 1.0, points)
    total = 0.0
    prev = None
    for start in range(0, points, _CHUNK):
        chunk = s[start:start + _CHUNK]
        mats = np.stack([path.h(x) for x in chunk])
        _, vecs = np.linalg.eigh(mats)
        ground = vecs[:, :, 0]
        if prev is not None:
            ground = np.vstack([prev[None, :], ground])
        ov = np.einsum("ij,ij->i", ground[:-1].conj(), ground[1:])
        perp = ground[1:] - ov[:, None] * ground[:-1]
        total += math.fsum(np.arctan2(np.linalg.norm(perp, axis=1), np.abs(ov)))
        prev = ground[-1]
    return total


def mc_channel_check(rho, h, dist, n: int = 100_000, seed=0, factor: float = 3.0,
                     floor: float = 1e-12, exact=None) -> OracleReport:
    """Compare a sample average of e^{-iHt} ρ e^{iHt} with the exact channel output.

    ``exact`` defaults to ``rm_engine.randomized_step_exact``. The envelope is
    the expected Frobenius error sqrt(Σ_ab |ρ_ab|²(1 - |φ_ab|²)/n) in the eigenbasis.
    """
    if exact is None:
        from eigenpath.rm_engine import randomized_step_exact as exact
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(np.asarray(h, dtype=complex))
    rt = v.conj().T @ rho @ v
    rng = np.random.default_rng(seed)
    t = dist.sample(rng, n)
    acc = np.zeros(rt.shape, dtype=complex)
    for start in range(0, n, _CHUNK):
        ph = np.exp(-1j * np.outer(t[start:start + _CHUNK], w))
        acc += ph.T @ ph.conj()
    mc = v @ (rt * acc / n) @ v.conj().T
    ref = exact(rho, h, dist)
    dist_f = float(np.linalg.norm(mc - ref))
    phi = dist.char(w[:, None] - w[None, :])
    envelope = math.sqrt(float(np.sum(np.abs(rt) ** 2 * (1 - np.abs(phi) ** 2))) / n)
    tol = factor * envelope + floor
    return OracleReport("mc_channel", dist_f, 0.0, dist_f, tol, dist_f <= tol)


def brute_partition(values, beta: float):
    """(Z, <E>, <E²>) by sorted compensated summation; ``values`` may be an objective."""
    vals = getattr(values, "values", values)
    vals = sorted(float(x) for x in np.asarray(vals).reshape(-1))
    e_min = vals[0]
    weights = [math.exp(-beta * (e - e_min)) for e in vals]
    z_rel = math.fsum(weights)
    mean = math.fsum(w * e for w, e in zip(weights, vals)) / z_rel
    second = math.fsum(w * e * e for w, e in zip(weights, vals)) / z_rel
    return math.exp(-beta * e_min) * z_rel, mean, second


# --- suite ---------------------------------------------------------------------

def run_suite(seed: int = 0, quick: bool = False) -> list:
    """Compare every main-path computation with its oracle; returns OracleReports."""
    from eigenpath import families, ff_amplify, qsa, rm_engine, spectral

    out = []
    rng = np.random.default_rng(seed)
    qubit = families.qubit_path()
    n_len = 10_001 if quick else 100_001

    out.append(OracleReport.compare("qubit_dense_length", dense_grid_length(qubit, n_len), math.pi / 4,
                                    1e-6 if quick else 1e-8))
    out.append(OracleReport.compare("qubit_grid_length", spectral.path_length(qubit),
                                    dense_grid_length(qubit, n_len), 1e-6, relative=True))

    checks = [(qubit, 0.5)] + [(families.random_linear_path(6, rng), x) for x in np.linspace(0.1, 0.9, 5)]
    for k, (p, x) in enumerate(checks):
        fd = fd_state_derivative(p, x)
        an = spectral.state_derivative(p, x)
        rel = float(np.linalg.norm(fd - an) / max(np.linalg.norm(an), 1e-300))
        out.append(OracleReport(f"state_derivative_{k}", rel, 0.0, rel, 1e-6, rel <= 1e-6))

    policy = rm_engine.DistributionPolicy()
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    h = np.array([[0, 0], [0, 1]], dtype=complex)
    rep = mc_channel_check(rho, h, policy.for_gap(1.0), 20_000 if quick else 100_000, seed)
    out.append(rep)
    out.append(OracleReport("qubit_mc_distance", rep.computed, 0.0, rep.computed, 0.02, rep.computed <= 0.02))

    spin = qsa.ObjectiveFunction([-0.5, 0.5])
    _, mean, _ = brute_partition(spin, 2.0)
    out.append(OracleReport.compare("single_spin_mean_energy", mean, -math.tanh(1) / 2, 1e-15))
    n_spins = 8 if quick else 12
    ising = qsa.ObjectiveFunction.ising(n_spins, rng.normal(size=(n_spins, n_spins)), rng.normal(size=n_spins))
    z, mean, second = brute_partition(ising, 1.0)
    pt = qsa.coherent_gibbs(ising, 1.0)
    out.append(OracleReport.compare("ising_log_partition", pt.log_partition, math.log(z), 1e-12, relative=True))
    out.append(OracleReport.compare("ising_mean_energy", pt.mean_energy, mean, 1e-12, relative=True))
    out.append(OracleReport.compare("ising_variance", pt.var_energy, second - mean ** 2, 1e-10, relative=True))

    amp = ff_amplify.build_amplified(ff_amplify.FrustrationFreeSet([np.diag([0.0, 1.0])], [1.0, 0.0]))
    out.append(OracleReport.compare("single_projector_amplified_gap", amp.delta_prime, 1.0, 1e-10))
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    psd = a @ a.conj().T
    r = ff_amplify.psd_sqrt(psd)
    out.append(OracleReport.compare("psd_sqrt_reconstruction", float(np.linalg.norm(r @ r - psd)), 0.0, 1e-9))
    return out
