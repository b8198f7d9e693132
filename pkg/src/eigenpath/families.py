"""Standard Hamiltonian families used by tests, sweeps and the CLI."""

from __future__ import annotations

import numpy as np

from eigenpath.ham_path import FrustrationFreePath, LinearPath, rotated_path

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def qubit_path() -> LinearPath:
    """(I - X)/2 -> (I - Z)/2: ground state rotates from |+> to |0>, min gap 1/sqrt(2)."""
    return LinearPath((I2 - X) / 2, (I2 - Z) / 2)


def constant_path(h) -> LinearPath:
    return LinearPath(h, h)


def grover_path(n: int, seed: int = 0, marked: int | None = None) -> LinearPath:
    """Linear interpolation from I - |+^n><+^n| to I - |m><m|; min gap 2**(-n/2)."""
    dim = 2 ** n
    if marked is None:
        marked = int(np.random.default_rng(seed).integers(dim))
    plus = np.full(dim, 1 / np.sqrt(dim), dtype=complex)
    h0 = np.eye(dim, dtype=complex) - np.outer(plus, plus.conj())
    hf = np.eye(dim, dtype=complex)
    hf[marked, marked] = 0.0
    return LinearPath(h0, hf)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / (2 * np.sqrt(dim))


def random_linear_path(dim: int, rng: np.random.Generator) -> LinearPath:
    return LinearPath(random_hermitian(dim, rng), random_hermitian(dim, rng))


def rotating_projector_path(angle: float = np.pi / 2) -> FrustrationFreePath:
    """Single-term qubit path Pi(s) = |1(s)><1(s)|, rotated about Y by ``angle * s``.

    The ground state rotates at constant speed angle/2 and the gap is 1, so the
    path length, the curvature bound and the frustration-free closed form coincide.
    """
    proj = np.array([[0, 0], [0, 1]], dtype=complex)
    return FrustrationFreePath([rotated_path(proj, angle * Y / 2)])


def rotated_ff_path(gap: float, angle: float = np.pi / 2) -> FrustrationFreePath:
    """Qutrit frustration-free path with tunable gap and unit term norm.

    Terms |1><1| and gap*|2><2| are rotated together so the kernel |0(s)> moves
    while the spectrum {0, gap, 1} stays fixed.
    """
    if not 0 < gap <= 1:
        raise ValueError("gap must be in (0, 1]")
    gen = np.zeros((3, 3), dtype=complex)
    gen[0, 1] = gen[1, 0] = 0.5
    gen[0, 2] = gen[2, 0] = 0.5
    gen *= angle
    p1 = np.diag([0, 1, 0]).astype(complex)
    p2 = gap * np.diag([0, 0, 1]).astype(complex)
    return FrustrationFreePath([rotated_path(p1, gen), rotated_path(p2, gen)])


def qubit_angle_path(theta: float) -> LinearPath:
    """(I - X)/2 -> (I - cos(θ) X - sin(θ) Z)/2, i.e. Bloch vectors at angle θ.

    θ = π/2 is :func:`qubit_path`; the minimum gap cos(θ/2) closes as θ -> π.
    """
    if not 0 <= theta < np.pi:
        raise ValueError("theta must lie in [0, pi)")
    hf = (I2 - np.cos(theta) * X - np.sin(theta) * Z) / 2
    return LinearPath((I2 - X) / 2, hf)


def path_from_config(doc: dict):
    """Build a path from a path document or a family shorthand {"family": name, ...}."""
    from eigenpath.errors import ConfigError
    from eigenpath.ham_path import path_from_json

    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "family" not in doc:
        return path_from_json(doc)
    fam = doc["family"]
    try:
        if fam == "qubit":
            return qubit_angle_path(float(doc["theta"])) if "theta" in doc else qubit_path()
        if fam == "grover":
            return grover_path(int(doc["n"]), int(doc.get("seed", 0)), doc.get("marked"))
        if fam == "rotating_projector":
            return rotating_projector_path(float(doc.get("angle", np.pi / 2)))
        if fam == "rotated_ff":
            return rotated_ff_path(float(doc["gap"]), float(doc.get("angle", np.pi / 2)))
        if fam == "random_linear":
            return random_linear_path(int(doc["dim"]), np.random.default_rng(int(doc.get("seed", 0))))
        if fam == "random_ff":
            from eigenpath.ff_amplify import random_ff_path
            return random_ff_path(int(doc["d"]), int(doc.get("terms", 2)), int(doc.get("seed", 0)),
                                  float(doc.get("angle", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {fam!r} family config: {exc}") from exc
    raise ConfigError(f"unknown family {fam!r}")
