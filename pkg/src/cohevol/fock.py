"""Brute-force truncated-basis ground truth for the quartic models.

Ladder operators carry the scaled convention ``a|k> = sqrt(hbar k)|k-1>``,
``adag|k> = sqrt(hbar (k+1))|k+1>``, so ``[a, adag] = hbar`` and the coherent
state is the eigenvector ``a|alpha> = alpha |alpha>``.  Propagation uses a
full Hermitian eigendecomposition (exact in time, no integrator error); the
decomposition is computed once per representation and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .core import (
    ConvergenceError,
    DimensionError,
    DomainError,
    SystemParams,
    TailMassError,
)

DEFAULT_TAIL_TOL = 1e-14
DEFAULT_START_DIM = 64
DEFAULT_DIM_CAP = 8192
_UNITARITY_TOL = 1e-10


def ladder_matrices(dim: int, hbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense annihilation/creation matrices on ``|0>..|dim-1>``."""
    offdiag = np.sqrt(hbar * np.arange(1, dim))
    a = np.diag(offdiag, 1)
    return a, a.T.copy()


@dataclass
class FockRepresentation:
    """Truncated-basis matrices for one model at one basis size.

    Immutable after construction (arrays are write-protected); the
    eigendecomposition of ``ham`` is computed lazily exactly once.
    """

    kind: str
    params: SystemParams
    dim: int
    ham: np.ndarray
    x_op: np.ndarray
    _eig: "tuple[np.ndarray, np.ndarray] | None" = field(default=None, repr=False)
    _obs_cache: dict = field(default_factory=dict, repr=False)

    @property
    def hbar(self) -> float:
        return self.params.hbar

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            evals, evecs = scipy.linalg.eigh(self.ham, check_finite=False)
            evals.flags.writeable = False
            evecs.flags.writeable = False
            self._eig = (evals, evecs)
        return self._eig

    def x_power(self, n: int) -> np.ndarray:
        key = ("x", n)
        if key not in self._obs_cache:
            self._obs_cache[key] = np.linalg.matrix_power(self.x_op, n)
        return self._obs_cache[key]

    def monomial_matrix(self, m: int, q: int) -> np.ndarray:
        key = ("mono", m, q)
        if key not in self._obs_cache:
            a, adag = ladder_matrices(self.dim, self.hbar)
            self._obs_cache[key] = np.linalg.matrix_power(
                adag, m
            ) @ np.linalg.matrix_power(a, q)
        return self._obs_cache[key]


@lru_cache(maxsize=8)
def _cached_representation(
    kind: str, omega: float, mu: float, hbar: float, dim: int
) -> FockRepresentation:
    params = SystemParams(omega, mu, hbar)
    a, adag = ladder_matrices(dim, hbar)
    if kind == "elliptic":
        ham = omega * (adag @ a) + mu * (adag @ adag @ a @ a)
        ham = ham.astype(complex)
    elif kind == "hyperbolic":
        gen = adag @ adag - a @ a
        ham = 1j * omega * gen + mu * (gen @ gen)
    else:
        raise DomainError(f"unknown Hamiltonian kind {kind!r}")
    x_op = (adag + a) / math.sqrt(2.0)
    x_op = x_op.astype(complex)
    ham.flags.writeable = False
    x_op.flags.writeable = False
    return FockRepresentation(kind=kind, params=params, dim=dim, ham=ham, x_op=x_op)


def build_hamiltonian(kind: str, params: SystemParams, dim: int) -> FockRepresentation:
    """Matrix representation of the chosen model on a ``dim``-state basis.

    The hyperbolic quartic is assembled literally as ``i w G + mu G^2`` with
    ``G = adag^2 - a^2`` built from ladder matrices, so the operator is
    Hermitian by construction and no hand expansion is involved.

    Raises
    ------
    DimensionError
        If ``dim < 5`` (degree-4 couplings do not fit).
    """
    if dim < 5:
        raise DimensionError(f"degree-4 couplings need dim >= 5, got {dim}")
    return _cached_representation(kind, params.omega, params.mu, params.hbar, int(dim))


@dataclass(frozen=True)
class CoherentVector:
    """Truncated coherent-state coefficients and the mass left beyond them."""

    dim: int
    hbar: float
    alpha: complex
    coeffs: np.ndarray
    tail_mass: float


def coherent_vector(
    alpha: complex,
    hbar: float,
    dim: int,
    tail_tol: "float | None" = None,
) -> CoherentVector:
    """Coefficients ``exp(-|a|^2/2hbar) a^k / sqrt(hbar^k k!)`` for k < dim.

    Built by the stable forward recurrence ``c_{k+1} = c_k a / sqrt(hbar(k+1))``.
    With ``tail_tol`` given, raises :class:`TailMassError` when the truncated
    tail mass exceeds it (the caller's ``dim`` acts as the growth cap).
    """
    if dim < 1:
        raise DimensionError("coherent vector needs dim >= 1")
    a = complex(alpha)
    coeffs = np.empty(dim, dtype=complex)
    coeffs[0] = math.exp(-abs(a) ** 2 / (2.0 * hbar))
    for k in range(dim - 1):
        coeffs[k + 1] = coeffs[k] * a / math.sqrt(hbar * (k + 1))
    tail = 1.0 - float(np.vdot(coeffs, coeffs).real)
    tail = max(tail, 0.0)
    if tail_tol is not None and tail > tail_tol:
        raise TailMassError(
            f"tail mass {tail:.3e} above tolerance {tail_tol:.3e} at dim {dim}"
        )
    coeffs.flags.writeable = False
    return CoherentVector(dim=dim, hbar=hbar, alpha=a, coeffs=coeffs, tail_mass=tail)


def _propagate(rep: FockRepresentation, vec: np.ndarray, t: float) -> np.ndarray:
    evals, evecs = rep.eigensystem()
    phases = np.exp(-1j * evals * (t / rep.hbar))
    out = evecs @ (phases * (evecs.conj().T @ vec))
    drift = abs(np.linalg.norm(out) - np.linalg.norm(vec))
    if drift > _UNITARITY_TOL:
        raise RuntimeError(f"propagator lost unitarity: norm drift {drift:.3e}")
    return out


def propagate_expectation(
    rep: FockRepresentation, v: CoherentVector, obs_power: int, t: float
) -> complex:
    """``<v| exp(iHt/hbar) X^n exp(-iHt/hbar) |v>`` at a single basis size.

    Norm preservation of the spectral propagator is checked on every call.
    Truncation convergence is the caller's concern; see :func:`oracle_average`
    for the dimension-doubling protocol.
    """
    if rep.dim != v.dim or rep.hbar != v.hbar:
        raise DomainError("representation and state must share dim and hbar")
    if obs_power < 1:
        raise DomainError("obs_power must be >= 1")
    state = _propagate(rep, v.coeffs, t)
    return complex(np.vdot(state, rep.x_power(obs_power) @ state))


def monomial_expectation(
    rep: FockRepresentation, v: CoherentVector, m: int, q: int, t: float
) -> complex:
    """Evolved average of the normal-ordered observable ``adag^m a^q``."""
    if rep.dim != v.dim or rep.hbar != v.hbar:
        raise DomainError("representation and state must share dim and hbar")
    state = _propagate(rep, v.coeffs, t)
    return complex(np.vdot(state, rep.monomial_matrix(m, q) @ state))


def _expectation(
    kind: str,
    params: SystemParams,
    alpha: complex,
    obs: "int | tuple[int, int]",
    t: float,
    dim: int,
    tail_tol: float,
) -> complex:
    rep = build_hamiltonian(kind, params, dim)
    vec = coherent_vector(alpha, params.hbar, dim, tail_tol=tail_tol)
    if isinstance(obs, tuple):
        return monomial_expectation(rep, vec, obs[0], obs[1], t)
    return propagate_expectation(rep, vec, obs, t)


def _observable_scale(params: SystemParams, obs: "int | tuple[int, int]") -> float:
    # Coherent zero-point scale of the observable; floors the relative
    # convergence metric so identically-zero averages (vacuum x^n by parity)
    # stabilize instead of dividing roundoff by roundoff.
    degree = obs[0] + obs[1] if isinstance(obs, tuple) else obs
    return params.hbar ** (degree / 2.0)


def oracle_average(
    kind: str,
    params: SystemParams,
    alpha: complex,
    obs: "int | tuple[int, int]",
    t: float,
    tol: float = 1e-6,
    start_dim: int = DEFAULT_START_DIM,
    dim_cap: int = DEFAULT_DIM_CAP,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> complex:
    """Truncation-converged average: double the basis until the value is stable.

    ``obs`` is either an integer (power of the position operator) or an
    ``(m, q)`` pair for the normal-ordered monomial.  Returns the value at the
    first doubled dimension whose relative change is below ``tol``.

    Raises
    ------
    ConvergenceError
        If the doubling schedule reaches ``dim_cap`` without stabilizing
        (expected near collapse times, where no truncation suffices).
    """
    dim = start_dim
    previous = None
    floor = _observable_scale(params, obs)
    while dim <= dim_cap:
        try:
            value = _expectation(kind, params, alpha, obs, t, dim, tail_tol)
        except TailMassError:
            dim *= 2
            continue
        if previous is not None:
            delta = abs(value - previous) / (abs(value) + floor)
            if delta < tol:
                return value
        previous = value
        dim *= 2
    raise ConvergenceError(
        f"no stabilization by dim {dim_cap} for t={t} (last delta at cap; "
        "the state may have outgrown every allowed truncation)"
    )


def adaptive_dimension(
    alpha: complex,
    params: SystemParams,
    t_max: float,
    tol: float,
    kind: str = "hyperbolic",
    obs_power: int = 1,
    start_dim: int = DEFAULT_START_DIM,
    dim_cap: int = DEFAULT_DIM_CAP,
    probe_points: int = 5,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> int:
    """Smallest dimension in the doubling schedule stable on a probe grid.

    Probes ``propagate_expectation`` on ``probe_points`` times spanning
    ``(0, t_max]`` and returns the first dimension whose values all move by
    less than ``tol`` (relative) under one further doubling.

    Raises
    ------
    ConvergenceError
        At the cap, reporting the best achieved delta.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    ts = [t_max * (k + 1) / probe_points for k in range(probe_points)]
    floor = _observable_scale(params, obs_power)

    def probe(dim: int) -> "np.ndarray | None":
        try:
            return np.array(
                [_expectation(kind, params, alpha, obs_power, t, dim, tail_tol) for t in ts]
            )
        except TailMassError:
            return None

    dim = start_dim
    values = probe(dim)
    best_delta = math.inf
    while dim * 2 <= dim_cap:
        doubled = probe(dim * 2)
        if values is not None and doubled is not None:
            delta = float(
                np.max(np.abs(doubled - values) / (np.abs(doubled) + floor))
            )
            if delta < tol:
                return dim
            best_delta = min(best_delta, delta)
        values = doubled
        dim *= 2
    raise ConvergenceError(
        f"probe grid not stable at cap {dim_cap}; best relative delta {best_delta:.3e}"
    )
