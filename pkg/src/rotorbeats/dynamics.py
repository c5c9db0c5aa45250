"""
Time evolution of coherent states under ``H = J**2/2`` and ``H0 = omega . J``.

Expectation values are computed from the evolved coefficient vector and the
band matrices of ``X``; probability densities on the sphere are evaluated
directly from the Legendre series for the wavefunction.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coherent import (
    ComplexDirection,
    _as_direction,
    adequate_config,
    coherent_coefficients,
    legendre_series,
    norm_sq,
)
from .hilbert import StateVector, apply_blockwise_exp, j_operator, x_operator, xpm_operator

log = logging.getLogger(__name__)

__all__ = [
    "Free",
    "Rotation",
    "SphericalGrid",
    "DensityField",
    "TimeSeries",
    "UndefinedPhaseError",
    "free_evolve",
    "rotation_evolve",
    "evolve",
    "z_of_t",
    "coherent_state",
    "theta_of_t",
    "phi_of_t",
    "evolve_series",
    "wavefunction",
    "density_free",
    "density_rotation",
    "trajectory",
    "PHASE_THRESHOLD",
]

TWO_PI = 2.0 * math.pi
PHASE_THRESHOLD = 1e-13
THETA_SCALE = math.exp(0.25)
_CHUNK = 64


class UndefinedPhaseError(ArithmeticError):
    def __init__(self, times):
        self.times = list(times)
        super().__init__(f"<X+> vanishes, phase undefined at t = {self.times}")


@dataclass(frozen=True)
class Free:
    """``H = J**2 / 2``."""


@dataclass(frozen=True, eq=False)
class Rotation:
    """``H0 = omega . J``."""

    omega: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).reshape(3))

    @property
    def axial(self):
        return self.omega[0] == 0.0 and self.omega[1] == 0.0


def free_evolve(s, t):
    """``exp(-i t J**2/2) s``; the phase per shell is ``t j(j+1)/2`` reduced mod 2 pi."""
    jj, _ = s.config.labels
    energy = (jj * (jj + 1)) // 2
    tr = math.fmod(t, TWO_PI)
    return StateVector(s.config, s.coefficients * np.exp(-1j * tr * energy))


def rotation_evolve(s, omega, t):
    """``exp(-i t omega . J) s``, diagonal phases when omega is along e3."""
    omega = np.asarray(omega, dtype=float)
    if omega[0] == 0.0 and omega[1] == 0.0:
        _, mm = s.config.labels
        angle = math.fmod(omega[2] * t, TWO_PI)
        return StateVector(s.config, s.coefficients * np.exp(-1j * angle * mm))
    return apply_blockwise_exp(s, -1j * t * omega)


def evolve(s, t, hamiltonian):
    if isinstance(hamiltonian, Free):
        return free_evolve(s, t)
    if isinstance(hamiltonian, Rotation):
        return rotation_evolve(s, hamiltonian.omega, t)
    raise TypeError(f"unknown Hamiltonian {hamiltonian!r}")


def z_of_t(z, omega, t):
    """Rotate ``z`` about ``omega`` by the angle ``|omega| t`` (Rodrigues form)."""
    z = _as_direction(z)
    omega = np.asarray(omega, dtype=float)
    w = float(np.linalg.norm(omega))
    if w == 0.0:
        return z
    c, s = math.cos(w * t), math.sin(w * t)
    vec = z.z
    out = c * vec + (s / w) * np.cross(omega, vec) + ((1.0 - c) / w**2) * omega * np.dot(omega, vec)
    return ComplexDirection(out)


def coherent_state(z, cfg=None):
    """Unit-norm coherent state at an adequate (or the given) truncation."""
    z = _as_direction(z)
    if cfg is None:
        cfg = adequate_config(z)
    return coherent_coefficients(z, cfg, check=False, normalize=True)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observables of an evolved coherent state sampled at increasing times."""

    times: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    x3_mean: np.ndarray
    xplus_mean: np.ndarray
    j_mean: np.ndarray
    clamped: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def phi_unwrapped(self):
        return np.unwrap(self.phi)

    @property
    def clamp_count(self):
        return int(np.count_nonzero(self.clamped))

    def __len__(self):
        return len(self.times)


def _theta_from_x3(x3):
    arg = THETA_SCALE * x3
    clamped = abs(arg) > 1.0
    return math.acos(max(-1.0, min(1.0, arg))), clamped


def _phi_from_xplus(xp):
    phi = math.atan2(xp.imag, xp.real) % TWO_PI
    # atan2 of a tiny negative angle rounds up to exactly 2 pi
    return 0.0 if phi >= TWO_PI else phi


def _observables(state):
    cfg = state.config
    c = state.coefficients
    nrm = np.vdot(c, c).real
    x3 = np.vdot(c, x_operator(cfg, 3).matrix @ c).real / nrm
    xp = complex(np.vdot(c, xpm_operator(cfg, 1).matrix @ c) / nrm)
    jm = [np.vdot(c, j_operator(cfg, a).matrix @ c).real / nrm for a in (1, 2, 3)]
    return x3, xp, jm


def _resolve(z, hamiltonian, cfg):
    z = _as_direction(z)
    if hamiltonian is None:
        hamiltonian = Free()
    return z, hamiltonian, coherent_state(z, cfg)


def theta_of_t(z, t, hamiltonian=None, cfg=None):
    """``arccos(e**(1/4) <X3(t)>)`` with the argument clamped into [-1, 1]."""
    z, hamiltonian, s0 = _resolve(z, hamiltonian, cfg)
    x3, _, _ = _observables(evolve(s0, t, hamiltonian))
    theta, clamped = _theta_from_x3(x3)
    if clamped:
        log.warning("clamped e^(1/4)<X3> = %.6g at t = %g", THETA_SCALE * x3, t)
    return theta


def phi_of_t(z, t, hamiltonian=None, cfg=None):
    """``Arg <X+(t)>`` reduced into [0, 2 pi)."""
    z, hamiltonian, s0 = _resolve(z, hamiltonian, cfg)
    _, xp, _ = _observables(evolve(s0, t, hamiltonian))
    if abs(xp) < PHASE_THRESHOLD:
        raise UndefinedPhaseError([t])
    return _phi_from_xplus(xp)


def _map_chunks(fn, items, threads):
    """Apply ``fn`` to fixed-size chunks of ``items`` and concatenate in order.

    Chunk boundaries do not depend on ``threads``, so results are identical
    for any thread count.
    """
    chunks = [items[i : i + _CHUNK] for i in range(0, len(items), _CHUNK)]
    if threads and threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return [r for part in parts for r in part]


def evolve_series(z, times, hamiltonian=None, cfg=None, threads=1):
    """Sample theta, phi and the underlying averages at each time.

    Parameters
    ----------
    z : ComplexDirection
        Initial coherent state label.
    times : array_like
        Strictly increasing sample times.
    hamiltonian : Free or Rotation, optional
        Defaults to the free rotor.
    cfg : RepresentationConfig, optional
        Truncation; chosen adaptively when omitted.
    threads : int
        Worker threads; output does not depend on it.

    Returns
    -------
    TimeSeries
    """
    z, hamiltonian, s0 = _resolve(z, hamiltonian, cfg)
    times = np.asarray(times, dtype=float)

    def work(ts):
        return [_observables(evolve(s0, float(t), hamiltonian)) for t in ts]

    rows = _map_chunks(work, times, threads)
    x3 = np.array([r[0] for r in rows])
    xp = np.array([r[1] for r in rows], dtype=complex)
    jm = np.array([r[2] for r in rows]).reshape(len(times), 3)
    theta, clamped = zip(*(_theta_from_x3(v) for v in x3)) if len(x3) else ((), ())
    clamped = np.array(clamped, dtype=bool)
    if clamped.any():
        log.warning("clamped e^(1/4)<X3> into [-1, 1] at %d of %d samples", clamped.sum(), len(times))
    phi = np.array([_phi_from_xplus(v) for v in xp])
    return TimeSeries(times, np.array(theta, dtype=float), phi, x3, xp, jm, clamped)


def wavefunction(z, x, t=0.0, j_cut=None):
    """``<x|z, t>`` for the free rotor, from the Legendre series in ``x . z``."""
    z = _as_direction(z)
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise ValueError("x must be a unit vector")
    tr = math.fmod(t, TWO_PI)
    total, _ = legendre_series(
        complex(np.dot(x, z.z)), lambda j: -0.5 * j * (j + 1.0) * (1.0 + 1j * tr), j_cut
    )
    return complex(total) / math.sqrt(4.0 * math.pi)


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Midpoint grid in theta, uniform in phi, with sin(theta) dtheta dphi weights."""

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 2:
            raise ValueError("grid needs at least 2 nodes in each direction")

    @property
    def theta(self):
        return (np.arange(self.n_theta) + 0.5) * math.pi / self.n_theta

    @property
    def phi(self):
        return TWO_PI * np.arange(self.n_phi) / self.n_phi

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def weights(self):
        w = np.sin(self.theta) * (math.pi / self.n_theta) * (TWO_PI / self.n_phi)
        return np.repeat(w[:, None], self.n_phi, axis=1)

    def points(self):
        """Unit vectors at the nodes, shape ``(n_theta, n_phi, 3)``."""
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


@dataclass(frozen=True, eq=False)
class DensityField:
    grid: SphericalGrid
    values: np.ndarray
    time: float

    def integral(self):
        """Quadrature of the density, summed in fixed row-major order."""
        return math.fsum((self.values * self.grid.weights).ravel())

    def argmax(self):
        a, b = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(a), int(b)


def _density(z_kernel, z_norm, grid, t, threads):
    pts = grid.points()
    denom = 4.0 * math.pi * norm_sq(z_norm)
    tr = math.fmod(t, TWO_PI)
    rows = list(range(grid.n_theta))

    def work(row_ids):
        out = []
        for a in row_ids:
            u = pts[a] @ z_kernel.z
            total, _ = legendre_series(u, lambda j: -0.5 * j * (j + 1.0) * (1.0 + 1j * tr))
            out.append(np.abs(total) ** 2 / denom)
        return out

    return np.array(_map_chunks(work, rows, threads))


def density_free(z, grid, t, threads=1):
    """Probability density on ``grid`` at time ``t`` under ``H = J**2/2``."""
    z = _as_direction(z)
    return DensityField(grid, _density(z, z, grid, t, threads), float(t))


def density_rotation(z, grid, omega, t, threads=1):
    """Density under ``H0 = omega . J``: the initial packet carried by ``z(t)``.

    The normalization uses ``|z|**2``, which the rotation leaves unchanged.
    """
    z = _as_direction(z)
    zt = z_of_t(z, omega, t)
    return DensityField(grid, _density(zt, z, grid, 0.0, threads), float(t))


def trajectory(z, times, hamiltonian=None, cfg=None, threads=1):
    """Points ``(sin th cos ph, sin th sin ph, cos th)`` along the evolution.

    Raises
    ------
    UndefinedPhaseError
        Listing every time at which ``|<X+>|`` falls below the threshold.
    """
    series = evolve_series(z, times, hamiltonian, cfg, threads)
    bad = np.abs(series.xplus_mean) < PHASE_THRESHOLD
    if bad.any():
        raise UndefinedPhaseError(series.times[bad])
    th, ph = series.theta, series.phi
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
