import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from eigenpath import families, oracle, spectral
from eigenpath.errors import DegenerateGroundState, NegativeIntegrandWarning, NotFrustrationFree
from eigenpath.ham_path import FrustrationFreePath, FunctionPath, LinearPath
from conftest import random_paths

# frozen oracle values
QUBIT_L_STAR = math.sqrt(quad(lambda s: 1 / (4 * ((1 - s) ** 2 + s ** 2) ** 2), 0, 1, epsabs=1e-14)[0])
GROVER3_DENSE_LENGTH = 1.2094292028881812  # oracle.dense_grid_length(grover_path(3)), 1e5 points


def test_decompose_basic():
    spec = spectral.decompose(np.diag([0.0, 2.0]))
    assert np.allclose(spec.eigenvalues, [0, 2]) and spec.gap == 2
    spec = spectral.decompose((families.I2 - families.X) / 2)
    assert np.allclose(spec.eigenvalues, [0, 1])
    assert abs(abs(np.vdot(spec.ground_state, [1 / math.sqrt(2)] * 2)) - 1) < 1e-12


def test_decompose_reconstructs(rng):
    h = families.random_hermitian(8, rng)
    spec = spectral.decompose(h)
    v, w = spec.eigenvectors, spec.eigenvalues
    assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - h) <= 1e-10 * np.linalg.norm(h, 2)


def test_decompose_degenerate():
    with pytest.raises(DegenerateGroundState) as info:
        spectral.decompose(np.eye(3), s=0.5)
    assert info.value.s == 0.5


def test_state_derivative_qubit_start(qubit):
    d = spectral.state_derivative(qubit, 0.0)
    assert abs(np.linalg.norm(d) - 0.5) < 1e-12
    psi = spectral.decompose(qubit.h(0.0)).ground_state
    assert abs(np.vdot(psi, d)) < 1e-10


def test_state_derivative_constant_path():
    assert np.allclose(spectral.state_derivative(families.constant_path(families.Z), 0.3), 0)


def test_qubit_lengths(qubit):
    rep = spectral.path_length_report(qubit)
    assert abs(rep.L - math.pi / 4) < 1e-10
    assert abs(rep.L_star - QUBIT_L_STAR) < 1e-9
    assert rep.L <= rep.L_star <= spectral.bound_linear(qubit)
    assert abs(rep.L_standard - 1) < 1e-9 and abs(rep.L_general - 1) < 1e-9 and abs(rep.L_linear - 1) < 1e-9


def test_constant_path_everything_zero():
    p = families.constant_path(np.diag([0.0, 1.0, 3.0]))
    rep = spectral.path_length_report(p, 101)
    assert rep.L == 0 and rep.L_star == 0 and rep.L_standard == 0 and rep.L_general == 0
    lhs, rhs, holds = spectral.check_local_rate_bound(p, 0.5)
    assert lhs == 0 and abs(rhs) < 1e-15 and holds


def test_commuting_diag_path_bounds():
    p = LinearPath(np.diag([0.0, 1.0]), np.diag([0.0, 2.0]))
    assert abs(spectral.bound_standard(p, 101) - 1.0) < 1e-12
    assert abs(spectral.bound_linear(p, 101) - 1.0) < 1e-12
    assert spectral.path_length(p, 101) == 0


def test_grover3_length_matches_dense_oracle():
    assert abs(spectral.path_length(families.grover_path(3)) - GROVER3_DENSE_LENGTH) < 1e-4


def test_dense_oracle_frozen_value_reproduces():
    assert abs(oracle.dense_grid_length(families.grover_path(3), 20_001) - GROVER3_DENSE_LENGTH) < 1e-7


def test_grover_linear_bound_grows_with_n():
    vals = [spectral.bound_linear(families.grover_path(n), 401) for n in range(2, 7)]
    # brute-force grid check of the closed form: sqrt(||H'|| / Δ_min) with Δ_min = 2^{-n/2}
    for n, v in zip(range(2, 7), vals):
        p = families.grover_path(n)
        ref = math.sqrt(np.linalg.norm(p.hf - p.h0, 2) / 2 ** (-n / 2))
        assert abs(v - ref) < 1e-6 * ref
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_random_paths_bound_chain():
    for p in random_paths(20, [4], seed=7):
        rep = spectral.path_length_report(p, 401)
        assert rep.L <= rep.L_star + 1e-6
        assert rep.L_star <= rep.L_general + 1e-6 and rep.L_star <= rep.L_linear + 1e-6


def test_local_rate_bound_random_6x6():
    for p in random_paths(50, [6], seed=11):
        for s in np.linspace(0, 1, 11):
            assert spectral.check_local_rate_bound(p, s)[2]


def test_local_rate_bound_tight_for_qubit(qubit):
    lhs, rhs, holds = spectral.check_local_rate_bound(qubit, 0.5)
    assert holds and abs(lhs - rhs) < 1e-12


def test_fd_curvature_option_agrees(qubit):
    pert = spectral.scan(qubit, 101)
    fd = spectral.scan(qubit, 101, curvature="fd")
    assert np.allclose(pert.curvature, fd.curvature, atol=1e-6)


def test_rotating_projector_closed_forms():
    p = families.rotating_projector_path()
    rep = spectral.path_length_report(p, 401)
    assert abs(rep.L - math.pi / 4) < 1e-9
    assert abs(rep.L_star - math.pi / 4) < 1e-9
    assert abs(rep.L_ff - math.pi / 4) < 1e-9


def test_ff_bound_zero_curvature():
    term = LinearPath(np.diag([0.0, 1.0]), np.diag([0.0, 2.0]))
    assert spectral.bound_ff(FrustrationFreePath([term]), 51) == 0


def test_ff_bound_requires_zero_energy():
    shifted = FrustrationFreePath([LinearPath(np.diag([0.1, 1.0]), np.diag([0.1, 2.0]))])
    with pytest.raises(NotFrustrationFree):
        spectral.bound_ff(shifted, 11)
    with pytest.raises(TypeError):
        spectral.bound_ff(families.qubit_path(), 11)
    with pytest.raises(TypeError):
        spectral.bound_linear(families.rotating_projector_path(), 11)


def test_gauge_overlaps_real_nonnegative(qubit):
    states = spectral.gauged_ground_states(qubit, 51)
    for a, b in zip(states, states[1:]):
        ov = np.vdot(a.amplitudes, b.amplitudes)
        assert abs(ov.imag) < 1e-12 and ov.real >= 0
        assert abs(np.linalg.norm(b.amplitudes) - 1) < 1e-12


def test_refinement_converges(qubit):
    rep = spectral.path_length_report(qubit, 201)
    fine = spectral.path_length_report(qubit, 401)
    assert abs(fine.L - math.pi / 4) <= abs(rep.L - math.pi / 4) + 1e-15


def test_excited_crossing_warns_or_raises():
    # a level crossing makes the tracked state jump; the scan must not silently succeed
    p = LinearPath(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))
    with pytest.raises(DegenerateGroundState):
        spectral.scan(p, 11)


def test_perturbative_integrand_is_nonnegative_by_construction():
    for p in random_paths(10, [5], seed=3):
        assert np.all(spectral.scan(p, 51).curvature >= -1e-12)


def test_negative_integrand_warning_with_inconsistent_derivatives():
    # supplied H'' disagrees with H(s); the finite-difference E'' exposes it
    bad = FunctionPath(2, lambda s: np.diag([0.0, 1.0 + s]),
                       dh=lambda s: np.diag([0.0, 1.0]), ddh=lambda s: np.diag([-5.0, 0.0]))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        sc = spectral.scan(bad, 5, curvature="fd")
    assert any(issubclass(x.category, NegativeIntegrandWarning) for x in w)
    assert np.all(sc.integrand >= 0)
