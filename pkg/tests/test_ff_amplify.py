import math

import numpy as np
import pytest

from eigenpath import families, ff_amplify, rm_engine, spectral
from eigenpath.errors import NotFrustrationFree, NotPSD
from eigenpath.ff_amplify import FrustrationFreeSet, build_amplified, generate_ff_ensemble, psd_sqrt
from eigenpath.ham_path import FrustrationFreePath, LinearPath


def test_psd_sqrt_examples(rng):
    assert np.allclose(psd_sqrt(np.diag([0.0, 4.0])), np.diag([0.0, 2.0]))
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    proj = np.outer(v, v.conj()) / np.vdot(v, v)
    assert np.allclose(psd_sqrt(proj), proj, atol=1e-12)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    psd = a @ a.conj().T
    r = psd_sqrt(psd)
    assert np.linalg.norm(r @ r - psd) <= 1e-9
    assert np.linalg.eigvalsh(r)[0] >= -1e-12


def test_psd_sqrt_clipping():
    assert np.allclose(psd_sqrt(np.diag([-1e-9, 1.0])), np.diag([0.0, 1.0]))
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([-1e-3, 1.0]))


def test_single_projector_amplified():
    ff = FrustrationFreeSet([np.diag([0.0, 1.0])], [1.0, 0.0])
    amp = build_amplified(ff)
    assert amp.h_prime.shape == (4, 4) and amp.ancilla_dim == 2
    assert np.allclose(np.sort(amp.eigenvalues), [-1, 0, 0, 1], atol=1e-12)
    assert amp.delta_prime == pytest.approx(1.0)
    assert amp.delta_prime == pytest.approx(math.sqrt(ff.gap * ff.pi_norm))
    assert amp.kernel_residual(ff.psi) <= 1e-12


def test_amplified_matrix_layout():
    # system index first: H' = sqrt(||Π||) Σ sqrt(Π_k) ⊗ (|k><0| + |0><k|)
    t1, t2 = np.diag([0.0, 1.0]), np.diag([0.0, 0.25])
    hp = ff_amplify.amplified_matrix([t1, t2])
    expect = np.zeros((6, 6))
    for k, t in ((1, t1), (2, t2)):
        e = np.zeros((3, 3))
        e[k, 0] = e[0, k] = 1
        expect += np.kron(np.sqrt(t), e)
    assert np.allclose(hp, expect)


def test_all_zero_terms_rejected():
    with pytest.raises((ValueError, NotFrustrationFree)):
        build_amplified(FrustrationFreeSet([np.zeros((2, 2))], [1.0, 0.0]))


def test_invalid_sets():
    with pytest.raises(NotPSD):
        FrustrationFreeSet([np.diag([0.0, -1.0])], [1.0, 0.0])
    with pytest.raises(NotFrustrationFree):
        FrustrationFreeSet([np.diag([1.0, 0.0])], [1.0, 0.0])
    with pytest.raises(ValueError):
        FrustrationFreeSet([], [1.0])
    with pytest.raises(ValueError):
        FrustrationFreeSet([np.eye(2), np.eye(3)], [1.0, 0.0])


def test_ensemble_properties():
    for seed in range(50):
        ff = generate_ff_ensemble(8, 3, seed)
        assert all(np.linalg.norm(t @ ff.psi) <= 1e-12 for t in ff.terms)
        assert abs(ff.eigenvalues()[0]) <= 1e-10
        assert ff.pi_norm == pytest.approx(1.0)
        amp = build_amplified(ff)
        assert amp.delta_prime >= math.sqrt(ff.gap * ff.pi_norm) - 1e-8
        assert amp.delta_prime ** 2 >= ff.gap * ff.pi_norm - 1e-8
        assert amp.symmetry_error() <= 1e-9
        assert amp.kernel_residual(ff.psi) <= 1e-9


def test_ensemble_deterministic():
    a, b = generate_ff_ensemble(4, 2, 7), generate_ff_ensemble(4, 2, 7)
    assert all(np.array_equal(x, y) for x, y in zip(a.terms, b.terms))
    assert np.array_equal(a.psi, b.psi)
    with pytest.raises(ValueError):
        generate_ff_ensemble(1, 2, 0)


def test_parity_anticommutes():
    ff = generate_ff_ensemble(4, 3, 2)
    hp = build_amplified(ff).h_prime
    parity = np.kron(np.eye(4), np.diag([1.0, -1.0, -1.0, -1.0]))
    assert np.linalg.norm(hp @ parity + parity @ hp) <= 1e-12


def test_square_restricted_to_ancilla_zero():
    ff = generate_ff_ensemble(5, 2, 11)
    hp = build_amplified(ff).h_prime
    sq = (hp @ hp).reshape(5, 3, 5, 3)[:, 0, :, 0]
    assert np.allclose(sq, ff.pi_norm * ff.hamiltonian, atol=1e-12)


# --- cost formulas ------------------------------------------------------------

def test_fixed_point_formula_example():
    assert ff_amplify.fixed_point_cost_formula(2.0, 1.0, 1.0, 1 / math.e) == pytest.approx(math.e)


def test_fixed_point_formula_scaling():
    a = ff_amplify.fixed_point_cost_formula(2.0, 1e-3, 1.0, 0.1)
    b = ff_amplify.fixed_point_cost_formula(2.0, 5e-4, 1.0, 0.1)
    logs = math.log(math.sqrt(1 / 5e-4) / 0.1) / math.log(math.sqrt(1 / 1e-3) / 0.1)
    assert b / a == pytest.approx(2 * logs)


def test_amplified_formula_values():
    assert ff_amplify.amplified_rm_cost_formula(2.0, 0.25, 4.0, 0.1) == pytest.approx(2 / (2 * 0.1 * 2 * 0.125))
    assert ff_amplify.amplified_rm_cost_formula(0.0, 0.25, 1.0, 0.1) == 0.0


def test_zero_curvature_path_costs_zero():
    proj = np.diag([0.0, 1.0]).astype(complex)
    p = FrustrationFreePath([LinearPath(proj, proj)])
    assert ff_amplify.rm_cost_amplified(p, 0.1) == 0.0
    assert ff_amplify.fixed_point_cost(p, 0.1) == 0.0


def test_cost_requires_ff(qubit):
    with pytest.raises(TypeError):
        ff_amplify.rm_cost_amplified(qubit, 0.1)


def test_amplified_rm_within_formula():
    p = families.rotating_projector_path()
    run = ff_amplify.run_rm_amplified(p, 0.1)
    formula = ff_amplify.rm_cost_amplified(p, 0.1, kappa_prime=run.kappa_prime)
    allowance = run.kappa_prime / min(r.gap for r in run.rows[1:])
    assert run.total_cost <= formula + allowance
    assert run.final_fidelity >= run.fidelity_bound
    assert all(c.holds for c in rm_engine.verify_step_bounds(run, p))


def test_amplified_rm_cost_ratio_sqrt_gap():
    gaps = [1 / 4, 1 / 16, 1 / 64]
    ratios = []
    for g in gaps:
        p = families.rotated_ff_path(g)
        ratios.append(ff_amplify.run_rm_amplified(p, 0.1).total_cost / rm_engine.run_rm(p, 0.1).total_cost)
    slope = np.polyfit(np.log(gaps), np.log(ratios), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.05)


def test_fixed_point_below_amplified_small_gap():
    for g in (1 / 256, 1 / 1024):
        p = families.rotated_ff_path(g)
        sc = spectral.scan(p, 201)
        for eps in (0.1, 0.2):
            assert ff_amplify.fixed_point_cost(p, eps, _scan=sc) <= ff_amplify.rm_cost_amplified(p, eps, _scan=sc)


def test_random_ff_path_is_ff():
    p = ff_amplify.random_ff_path(4, 2, 3)
    for s in (0.0, 0.4, 1.0):
        ff = ff_amplify.ff_set_at(p, s)
        assert abs(ff.eigenvalues()[0]) <= 1e-9
        assert ff.gap > 0
