"""Parametrized Hermitian families H(s), s in [0, 1], and their s-derivatives.

Four kinds are provided:

* ``LinearPath``: (1 - s) h0 + s hf, with exact derivatives.
* ``TabulatedPath``: entrywise interpolation of sampled matrices.
* ``FrustrationFreePath``: a sum of positive semidefinite terms, each itself a path.
* ``FunctionPath``: user callables, optionally with analytic derivatives.

All evaluators return dense ``complex128`` arrays that are exactly Hermitian.
"""

from __future__ import annotations

import os
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from eigenpath.errors import ConfigError, NotPSD, PathDomainError

DEFAULT_FD_STEP = 1e-4
DEFAULT_MAX_DIM = 4096
PSD_TOL = 1e-10

# 4th-order stencils: (offsets, weights) applied as sum(w * f(s + k h)) / h**order
_CENTRAL = {
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
}
_FORWARD = {
    1: ((0, 1, 2, 3, 4), (-25 / 12, 48 / 12, -36 / 12, 16 / 12, -3 / 12)),
    2: ((0, 1, 2, 3, 4, 5), (45 / 12, -154 / 12, 214 / 12, -156 / 12, 61 / 12, -10 / 12)),
}


def max_dim() -> int:
    """Dimension cap, overridable through ``EIGENPATH_MAX_DIM``."""
    return int(os.environ.get("EIGENPATH_MAX_DIM", DEFAULT_MAX_DIM))


def hermitian(m, tol: float = 1e-8) -> np.ndarray:
    """Return ``m`` as a symmetrized complex Hermitian matrix.

    Inputs whose anti-Hermitian part exceeds ``tol`` (relative to the largest
    entry) are rejected rather than silently repaired.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > max_dim():
        raise ValueError(f"dimension {a.shape[0]} exceeds cap {max_dim()} (EIGENPATH_MAX_DIM)")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return 0.5 * (a + a.conj().T)


def finite_difference(f: Callable[[float], np.ndarray], s: float, h: float, order: int,
                      lo: float = 0.0, hi: float = 1.0):
    """4th-order finite difference of ``f`` at ``s`` restricted to ``[lo, hi]``.

    Uses the central stencil when it fits inside the interval, otherwise the
    one-sided stencil pointing into the interval.
    """
    if s - 2 * h >= lo and s + 2 * h <= hi:
        offsets, weights = _CENTRAL[order]
        sign = 1.0
    else:
        offsets, weights = _FORWARD[order]
        # backward stencil: mirror offsets; odd derivatives flip sign
        sign = 1.0 if s + max(offsets) * h <= hi else -1.0
    acc = None
    for k, w in zip(offsets, weights):
        val = w * f(s + sign * k * h)
        acc = val if acc is None else acc + val
    return acc * (sign ** order) / h ** order


class HamiltonianPath:
    """Base class. Subclasses implement ``_h`` and optionally ``_dh``/``_ddh``."""

    kind = "abstract"

    def __init__(self, dim: int, derivative_scheme: str = "central", fd_step: float = DEFAULT_FD_STEP):
        if dim < 1:
            raise ValueError("dim must be positive")
        if dim > max_dim():
            raise ValueError(f"dimension {dim} exceeds cap {max_dim()} (EIGENPATH_MAX_DIM)")
        if derivative_scheme not in ("analytic", "central"):
            raise ValueError(f"unknown derivative scheme {derivative_scheme!r}")
        self.dim = dim
        self.derivative_scheme = derivative_scheme
        self.fd_step = fd_step

    def _check(self, s: float) -> float:
        s = float(s)
        if not (0.0 <= s <= 1.0) or np.isnan(s):
            raise PathDomainError(f"s={s} outside [0, 1]")
        return s

    def h(self, s: float) -> np.ndarray:
        return self._h(self._check(s))

    def dh(self, s: float) -> np.ndarray:
        return self._dh(self._check(s))

    def ddh(self, s: float) -> np.ndarray:
        return self._ddh(self._check(s))

    def _h(self, s):
        raise NotImplementedError

    def _dh(self, s):
        return _sym(finite_difference(self._h, s, self.fd_step, 1))

    def _ddh(self, s):
        return _sym(finite_difference(self._h, s, self.fd_step, 2))

    def h_batch(self, s_values) -> np.ndarray:
        """Stack of H(s) for an array of s values, shape (n, dim, dim)."""
        return np.stack([self.h(s) for s in s_values])


def _sym(a):
    return 0.5 * (a + a.conj().T)


class LinearPath(HamiltonianPath):
    """H(s) = (1 - s) h0 + s hf."""

    kind = "linear"

    def __init__(self, h0, hf):
        h0 = hermitian(h0)
        hf = hermitian(hf)
        if h0.shape != hf.shape:
            raise ValueError("h0 and hf must have the same shape")
        super().__init__(h0.shape[0], "analytic")
        self.h0 = h0
        self.hf = hf
        self._diff = hf - h0
        self._zero = np.zeros_like(h0)

    def _h(self, s):
        return (1.0 - s) * self.h0 + s * self.hf

    def _dh(self, s):
        return self._diff.copy()

    def _ddh(self, s):
        return self._zero.copy()

    def h_batch(self, s_values):
        s = np.asarray(s_values, dtype=float)
        if np.any((s < 0) | (s > 1)):
            raise PathDomainError("s outside [0, 1]")
        s = s[:, None, None]
        return (1.0 - s) * self.h0 + s * self.hf


class TabulatedPath(HamiltonianPath):
    """Entrywise interpolation between sampled Hermitian matrices.

    ``interpolation="linear"`` (the default) uses finite-difference
    derivatives, which vanish inside each cell for Ḧ. ``"cubic"`` fits a
    not-a-knot spline per entry and differentiates it exactly; it reproduces
    polynomial families up to degree three.
    """

    kind = "tabulated"

    def __init__(self, s_grid: Sequence[float], samples: Sequence, interpolation: str = "linear",
                 fd_step: float = DEFAULT_FD_STEP):
        grid = np.asarray(s_grid, dtype=float)
        mats = np.stack([hermitian(m) for m in samples])
        if grid.ndim != 1 or len(grid) != len(mats) or len(grid) < 2:
            raise ValueError("need at least two (s, matrix) samples")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("tabulated grid must be strictly increasing")
        if grid[0] > 0.0 or grid[-1] < 1.0:
            raise ValueError("tabulated grid must cover [0, 1]")
        if interpolation not in ("linear", "cubic"):
            raise ValueError(f"unknown interpolation {interpolation!r}")
        scheme = "analytic" if interpolation == "cubic" else "central"
        super().__init__(mats.shape[1], scheme, fd_step)
        self.grid = grid
        self.samples = mats
        self.interpolation = interpolation
        if interpolation == "cubic":
            if len(grid) < 4:
                raise ValueError("cubic interpolation needs at least four samples")
            self._spline = CubicSpline(grid, mats, axis=0)

    def _h(self, s):
        if self.interpolation == "cubic":
            return _sym(self._spline(s))
        i = int(np.clip(np.searchsorted(self.grid, s, side="right") - 1, 0, len(self.grid) - 2))
        s0, s1 = self.grid[i], self.grid[i + 1]
        w = (s - s0) / (s1 - s0)
        return _sym((1.0 - w) * self.samples[i] + w * self.samples[i + 1])

    def _dh(self, s):
        if self.interpolation == "cubic":
            return _sym(self._spline(s, 1))
        return super()._dh(s)

    def _ddh(self, s):
        if self.interpolation == "cubic":
            return _sym(self._spline(s, 2))
        return super()._ddh(s)


class FunctionPath(HamiltonianPath):
    """Path defined by callables; missing derivatives fall back to finite differences."""

    kind = "function"

    def __init__(self, dim: int, h: Callable[[float], np.ndarray],
                 dh: Optional[Callable] = None, ddh: Optional[Callable] = None,
                 fd_step: float = DEFAULT_FD_STEP):
        scheme = "analytic" if dh is not None and ddh is not None else "central"
        super().__init__(dim, scheme, fd_step)
        self._fh, self._fdh, self._fddh = h, dh, ddh

    def _h(self, s):
        return hermitian(self._fh(s))

    def _dh(self, s):
        return hermitian(self._fdh(s)) if self._fdh is not None else super()._dh(s)

    def _ddh(self, s):
        return hermitian(self._fddh(s)) if self._fddh is not None else super()._ddh(s)


def rotated_path(base, generator) -> FunctionPath:
    """Path U(s) base U(s)^† with U(s) = exp(-i s G); derivatives are exact commutators."""
    base = hermitian(base)
    g = hermitian(generator)
    w, v = np.linalg.eigh(g)

    def u(s):
        return (v * np.exp(-1j * s * w)) @ v.conj().T

    def h(s):
        us = u(s)
        return us @ base @ us.conj().T

    def dh(s):
        m = h(s)
        return -1j * (g @ m - m @ g)

    def ddh(s):
        c = dh(s)
        return -1j * (g @ c - c @ g)

    return FunctionPath(base.shape[0], h, dh, ddh)


class FrustrationFreePath(HamiltonianPath):
    """H(s) = sum_k Pi_k(s), each term a PSD-valued path of its own."""

    kind = "frustration_free"

    def __init__(self, terms: Sequence[HamiltonianPath], check_psd: bool = True):
        terms = list(terms)
        if not terms:
            raise ValueError("frustration-free path needs at least one term")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise ValueError("all terms must share one dimension")
        scheme = "analytic" if all(t.derivative_scheme == "analytic" for t in terms) else "central"
        super().__init__(dims.pop(), scheme)
        self.terms = terms
        self.check_psd = check_psd

    def term_values(self, s: float) -> list:
        s = self._check(s)
        vals = [t._h(s) for t in self.terms]
        if self.check_psd:
            for k, v in enumerate(vals):
                lo = np.linalg.eigvalsh(v)[0]
                if lo < -PSD_TOL:
                    raise NotPSD(f"term {k} has eigenvalue {lo:.3e} at s={s}")
        return vals

    def _h(self, s):
        return _sym(sum(self.term_values(s)))

    def _dh(self, s):
        return _sym(sum(t._dh(s) for t in self.terms))

    def _ddh(self, s):
        return _sym(sum(t._ddh(s) for t in self.terms))


def eval_h(path: HamiltonianPath, s: float) -> np.ndarray:
    """H(s); raises ``PathDomainError`` outside [0, 1]."""
    return path.h(s)


def eval_dh(path: HamiltonianPath, s: float) -> np.ndarray:
    """dH/ds at ``s``."""
    return path.dh(s)


def eval_ddh(path: HamiltonianPath, s: float) -> np.ndarray:
    """d²H/ds² at ``s``."""
    return path.ddh(s)


# --- JSON path documents -------------------------------------------------

def matrix_from_json(doc) -> np.ndarray:
    """Decode a row-major matrix of ``[re, im]`` pairs (plain reals also accepted)."""
    a = np.asarray(doc, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == 2:
        return a.astype(complex)
    raise ConfigError(f"cannot read matrix of shape {a.shape}")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def path_from_json(doc: dict) -> HamiltonianPath:
    """Build a path from its JSON description (see README for the schema)."""
    try:
        kind = doc["kind"]
        scheme = doc.get("derivative_scheme") or {}
        step = float(scheme.get("step", DEFAULT_FD_STEP))
        if kind == "linear":
            path = LinearPath(matrix_from_json(doc["h0"]), matrix_from_json(doc["hf"]))
        elif kind == "tabulated":
            samples = doc["samples"]
            path = TabulatedPath([x["s"] for x in samples],
                                 [matrix_from_json(x["h"]) for x in samples],
                                 interpolation=doc.get("interpolation", "linear"), fd_step=step)
        elif kind == "frustration_free":
            path = FrustrationFreePath([path_from_json(t) for t in doc["terms"]])
        else:
            raise ConfigError(f"unknown path kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad path document: {exc}") from exc
    if "dim" in doc and int(doc["dim"]) != path.dim:
        raise ConfigError(f"declared dim {doc['dim']} does not match matrices ({path.dim})")
    return path


def path_to_json(path: HamiltonianPath) -> dict:
    if isinstance(path, LinearPath):
        return {"dim": path.dim, "kind": "linear", "h0": matrix_to_json(path.h0),
                "hf": matrix_to_json(path.hf), "derivative_scheme": {"type": "analytic"}}
    if isinstance(path, TabulatedPath):
        return {"dim": path.dim, "kind": "tabulated", "interpolation": path.interpolation,
                "samples": [{"s": float(s), "h": matrix_to_json(m)}
                            for s, m in zip(path.grid, path.samples)],
                "derivative_scheme": {"type": path.derivative_scheme, "step": path.fd_step}}
    if isinstance(path, FrustrationFreePath):
        return {"dim": path.dim, "kind": "frustration_free",
                "terms": [path_to_json(t) for t in path.terms]}
    raise ConfigError(f"{path.kind} paths have no JSON form")
