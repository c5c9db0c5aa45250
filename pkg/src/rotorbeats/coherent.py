"""
Coherent states of a particle on the unit sphere.

A coherent state is labelled by a complex direction ``z`` with ``z.z = 1``
(bilinear, no conjugation), obtained from a classical position ``xbar`` and
angular momentum ``l`` as ``z = cosh|l| xbar + i sinh|l|/|l| (l x xbar)``.
Its expansion coefficients in the ``|j, m>`` basis involve Gegenbauer
polynomials of ``z_3``, which are evaluated in scaled form and only collapsed
after the Gaussian damping ``exp(-j(j+1)/2)`` has been applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .hilbert import (
    RepresentationConfig,
    StateVector,
    apply_blockwise_exp,
    build_z_operator,
)
from .specfun import ScaledComplex, gegenbauer_table, legendre_iter

__all__ = [
    "PhasePoint",
    "ComplexDirection",
    "InadequateTruncationError",
    "DegenerateAxisError",
    "ZeroStateError",
    "z_from_phase",
    "z_from_angles",
    "auto_j_max",
    "adequate_config",
    "coherent_coefficients",
    "fiducial_state",
    "rotation_oracle",
    "legendre_series",
    "overlap_series",
    "norm_sq",
    "expectation",
    "eigen_residual",
    "z_eigen_residual",
    "TOP_SHELL_TOLERANCE",
    "J_MAX_CAP",
]

TOP_SHELL_TOLERANCE = 1e-20
J_MAX_CAP = 200
SERIES_CAP = 200
SERIES_RTOL = 1e-16


class InadequateTruncationError(RuntimeError):
    """The top retained shell carries more weight than allowed."""


class DegenerateAxisError(ValueError):
    pass


class ZeroStateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """Classical phase-space point: unit position ``xbar`` and tangent ``l``."""

    xbar: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.xbar, dtype=float)
        l = np.asarray(self.l, dtype=float)
        if x.shape != (3,) or l.shape != (3,):
            raise ValueError("xbar and l must be 3-vectors")
        if abs(np.linalg.norm(x) - 1.0) > 1e-12:
            raise ValueError(f"xbar must be a unit vector, |xbar| = {np.linalg.norm(x)!r}")
        if abs(np.dot(l, x)) > 1e-12 * max(1.0, np.linalg.norm(l)):
            raise ValueError(f"l must be tangent to the sphere at xbar, l.xbar = {np.dot(l, x)!r}")
        object.__setattr__(self, "xbar", x)
        object.__setattr__(self, "l", l)

    @classmethod
    def from_angles(cls, theta_bar, phi_bar, l_norm, alpha):
        """Point with ``l`` of norm ``l_norm`` at angle ``alpha`` from the meridian."""
        x, n, n0 = _local_frame(theta_bar, phi_bar)
        # l x xbar = |l| (sin(alpha) n + cos(alpha) n0)
        l = l_norm * np.cross(x, math.sin(alpha) * n + math.cos(alpha) * n0)
        return cls(x, l)

    @classmethod
    def standard(cls, l3, l_norm, theta_bar=math.pi / 2, phi_bar=0.0):
        """Family used for the beat plots: ``alpha = arccos(l3 / |l|)``."""
        if l_norm < abs(l3):
            raise ValueError(f"need |l| >= |l3|, got |l|={l_norm}, l3={l3}")
        alpha = math.acos(l3 / l_norm) if l_norm > 0 else 0.0
        return cls.from_angles(theta_bar, phi_bar, l_norm, alpha)

    @classmethod
    def from_j(cls, j, theta_bar=math.pi / 2, phi_bar=0.0):
        """``l3 = j`` and ``|l| = sqrt(j(j+1))``."""
        return cls.standard(float(j), math.sqrt(j * (j + 1.0)), theta_bar, phi_bar)

    @property
    def l_norm(self):
        return float(np.linalg.norm(self.l))

    @property
    def theta_bar(self):
        return math.acos(max(-1.0, min(1.0, self.xbar[2])))

    @property
    def phi_bar(self):
        return math.atan2(self.xbar[1], self.xbar[0]) % (2 * math.pi)

    @property
    def alpha(self):
        """Angle between ``l`` and the meridian through ``xbar``."""
        _, n, n0 = _local_frame(self.theta_bar, self.phi_bar)
        t = np.cross(self.l, self.xbar)
        return math.atan2(np.dot(t, n), np.dot(t, n0))


def _local_frame(theta, phi):
    st, ct, sp_, cp = math.sin(theta), math.cos(theta), math.sin(phi), math.cos(phi)
    x = np.array([st * cp, st * sp_, ct])
    n = np.array([cp * ct, sp_ * ct, -st])
    n0 = np.array([-sp_, cp, 0.0])
    return x, n, n0


@dataclass(frozen=True, eq=False)
class ComplexDirection:
    """Complex 3-vector ``z`` with ``z.z = 1``.

    The constraint is checked relative to ``|z|**2``; for large ``|l|`` the
    cancellation ``cosh**2 - sinh**2`` loses that many digits.
    """

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if z.shape != (3,):
            raise ValueError("z must be a complex 3-vector")
        if abs(np.sum(z * z) - 1.0) > 1e-12 * max(1.0, self.norm2_of(z)):
            raise ValueError(f"z.z must equal 1, got {np.sum(z * z)!r}")
        object.__setattr__(self, "z", z)

    @staticmethod
    def norm2_of(z):
        return float(np.sum(np.abs(z) ** 2))

    @property
    def norm2(self):
        """``|z|**2 = sum |z_i|**2``, equal to ``cosh(2|l|)``."""
        return self.norm2_of(self.z)

    @property
    def l_norm(self):
        return 0.5 * math.acosh(max(1.0, self.norm2))

    def __iter__(self):
        return iter(self.z)

    def __getitem__(self, i):
        return self.z[i]


def z_from_phase(p):
    ln = p.l_norm
    shc = math.sinh(ln) / ln if ln > 0 else 1.0
    return ComplexDirection(math.cosh(ln) * p.xbar + 1j * shc * np.cross(p.l, p.xbar))


def z_from_angles(theta_bar, phi_bar, l_norm, alpha):
    x, n, n0 = _local_frame(theta_bar, phi_bar)
    return ComplexDirection(
        math.cosh(l_norm) * x + 1j * math.sinh(l_norm) * (math.sin(alpha) * n + math.cos(alpha) * n0)
    )


def _as_direction(z):
    return z if isinstance(z, ComplexDirection) else ComplexDirection(z)


def auto_j_max(l_norm):
    """Initial truncation: a margin of ``max(15, 3 sqrt(|l|+1))`` above ``|l|``."""
    return int(math.ceil(l_norm)) + max(15, int(math.ceil(3.0 * math.sqrt(l_norm + 1.0))))


def _log_abs_factorial_ratio(m, j):
    # log[(2m)!/m! * sqrt((j-m)!/(j+m)!)]
    return gammaln(2 * m + 1) - gammaln(m + 1) + 0.5 * (gammaln(j - m + 1) - gammaln(j + m + 1))


def _top_shell_fraction(state):
    peak = np.max(np.abs(state.coefficients))
    if peak == 0:
        return 0.0
    w = (state * (1.0 / peak)).shell_weights()
    total = w.sum()
    return float(w[-1] / total) if total > 0 else 0.0


def coherent_coefficients(z, cfg, check=True, normalize=False):
    """Expansion coefficients ``<j, m | z>`` on the truncated basis.

    Parameters
    ----------
    z : ComplexDirection or array_like
        Coherent-state label.
    cfg : RepresentationConfig
        Truncation.
    check : bool
        Raise :class:`InadequateTruncationError` when the top shell holds more
        than ``TOP_SHELL_TOLERANCE`` of the squared norm.
    normalize : bool
        Return the unit vector instead.  The largest coefficient grows like
        ``exp(|l|**2 / 2)`` and overflows beyond ``|l|`` of about 26 unless
        the common scale is removed before collapsing.

    Returns
    -------
    StateVector
        Without ``normalize`` the squared norm is ``norm_sq(z)`` up to
        truncation.
    """
    z = _as_direction(z)
    z1, z2, z3 = (complex(v) for v in z.z)
    jmax = cfg.j_max
    out = np.zeros(cfg.dim, dtype=complex)

    # (-eps(m) z1 + i z2)/2 for m > 0 and m < 0
    bases = {1: ScaledComplex.from_complex((-z1 + 1j * z2) / 2), -1: ScaledComplex.from_complex((z1 + 1j * z2) / 2)}
    powers = {1: ScaledComplex.one(), -1: ScaledComplex.one()}

    logs = np.full(cfg.dim, -np.inf)
    for am in range(jmax + 1):
        if am > 0:
            for sgn in (1, -1):
                powers[sgn] = powers[sgn] * bases[sgn]
        geg = gegenbauer_table(jmax - am, am + 0.5, z3)
        j = np.arange(am, jmax + 1)
        log_pref = -0.5 * j * (j + 1.0) + 0.5 * np.log(2.0 * j + 1.0) + _log_abs_factorial_ratio(am, j)
        signs = (1,) if am == 0 else (1, -1)
        for sgn in signs:
            pw = powers[sgn]
            if pw.zero:
                continue
            idx = j * j + sgn * am + j
            out[idx] = geg.mantissa * np.exp(1j * pw.phase)
            logs[idx] = geg.log_scale + log_pref + pw.log_magnitude

    shift = 0.0
    if normalize:
        shift = float(np.max(np.log(np.abs(out[out != 0])) + logs[out != 0]))
    elif np.max(logs) > 700.0:
        raise OverflowError("coefficients exceed the double range; use normalize=True")
    with np.errstate(under="ignore"):
        out = out * np.exp(logs - shift)
    state = StateVector(cfg, out)
    if normalize:
        state = state.normalized()
    if check:
        frac = _top_shell_fraction(state)
        if frac > TOP_SHELL_TOLERANCE:
            raise InadequateTruncationError(
                f"top shell j={jmax} holds fraction {frac:.3e} of the norm (> {TOP_SHELL_TOLERANCE:g})"
            )
    return state


def adequate_config(z, j_max=None):
    """Smallest truncation, grown in steps of 5, whose top shell is negligible."""
    z = _as_direction(z)
    j = auto_j_max(z.l_norm) if j_max is None else int(j_max)
    while j <= J_MAX_CAP:
        cfg = RepresentationConfig(j)
        state = coherent_coefficients(z, cfg, check=False, normalize=True)
        if _top_shell_fraction(state) <= TOP_SHELL_TOLERANCE:
            return cfg
        j += 5
    raise InadequateTruncationError(f"no adequate truncation up to j_max={J_MAX_CAP}")


def fiducial_state(cfg):
    """``|e_3> = sum_j exp(-j(j+1)/2) sqrt(2j+1) |j, 0>``."""
    c = np.zeros(cfg.dim, dtype=complex)
    j = np.arange(cfg.j_max + 1)
    with np.errstate(under="ignore"):
        c[j * j + j] = np.exp(-0.5 * j * (j + 1.0)) * np.sqrt(2.0 * j + 1.0)
    return StateVector(cfg, c)


def _arccos_ratio(x):
    """``arccos(x)/sqrt(1-x**2)``, analytic through x = 1."""
    if x.imag == 0 and x.real > 1:
        r = x.real
        return math.acosh(r) / math.sqrt(r * r - 1.0)
    return complex(np.arccos(x) / np.sqrt(1.0 - x * x))


def rotation_oracle(z, cfg):
    """Coherent state generated from the fiducial vector by a complex rotation.

    ``|z> = exp[kappa (z x e_3) . J] |e_3>`` with ``kappa`` the analytic
    continuation of ``arccosh(z_3)/sqrt(1 - z_3**2)`` that is regular at
    ``z_3 = 1``, namely ``i arccos(z_3)/sqrt(1 - z_3**2)``.
    """
    z = _as_direction(z)
    z1, z2, z3 = (complex(v) for v in z.z)
    if abs(z1) == 0 and abs(z2) == 0 and z3 == 1:
        return fiducial_state(cfg)
    if abs(1.0 - z3 * z3) < 1e-14:
        raise DegenerateAxisError(f"rotation axis z x e3 degenerates at z3={z3!r}")
    kappa = 1j * _arccos_ratio(z3)
    return apply_blockwise_exp(fiducial_state(cfg), kappa * np.array([z2, -z1, 0.0]))


def legendre_series(u, log_weight, j_cut=None):
    """``sum_j exp(log_weight(j)) (2j+1) P_j(u)`` for scalar or array ``u``.

    ``log_weight(j)`` may be complex.  With ``j_cut=None`` the sum stops once
    three consecutive terms are below ``1e-16`` times the partial sum at every
    element of ``u`` (at most 200 terms).

    Returns
    -------
    (sum, j_last)
    """
    u = np.asarray(u, dtype=complex)
    total = np.zeros(u.shape, dtype=complex)
    small_run = 0
    cap = SERIES_CAP if j_cut is None else int(j_cut)
    j = 0
    for j, (mant, scale) in enumerate(legendre_iter(u)):
        with np.errstate(under="ignore"):
            term = (2 * j + 1) * mant * np.exp(scale + log_weight(j))
        total = total + term
        if j >= cap:
            break
        if j_cut is None:
            if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
                small_run += 1
                if small_run >= 3:
                    break
            else:
                small_run = 0
    return total, j


def overlap_series(z, w, j_cut=None):
    """``<z|w> = sum_j exp(-j(j+1)) (2j+1) P_j(z* . w)``."""
    z, w = _as_direction(z), _as_direction(w)
    u = complex(np.sum(np.conj(z.z) * w.z))
    total, _ = legendre_series(u, lambda j: -j * (j + 1.0), j_cut)
    return complex(total)


def norm_sq(z, j_cut=None):
    """``<z|z>``, a real number not smaller than 1."""
    z = _as_direction(z)
    total, _ = legendre_series(z.norm2, lambda j: -j * (j + 1.0), j_cut)
    return float(np.real(total))


def expectation(op, s):
    """``<s|op|s> / <s|s>``."""
    nrm = np.vdot(s.coefficients, s.coefficients).real
    if nrm == 0:
        raise ZeroStateError("expectation value in the zero state")
    return complex(np.vdot(s.coefficients, op.apply(s).coefficients) / nrm)


def eigen_residual(state, z, best=False):
    """``max_i |(Z_i - z_i) s| / |s|``.

    With ``best=True`` each ``z_i`` is replaced by the least-squares optimal
    constant ``<s|Z_i s>/<s|s>``, measuring distance from the whole coherent
    family rather than from one member.
    """
    nrm = state.norm()
    if nrm == 0:
        raise ZeroStateError("residual of the zero state")
    res = 0.0
    for axis in (1, 2, 3):
        zs = build_z_operator(state.config, axis).apply(state).coefficients
        target = np.vdot(state.coefficients, zs) / nrm**2 if best else complex(z[axis - 1])
        res = max(res, float(np.linalg.norm(zs - target * state.coefficients)) / nrm)
    return res


def z_eigen_residual(z, cfg, check=False):
    """Eigenrelation residual ``Z|z> = z|z>`` of the truncated coherent state."""
    z = _as_direction(z)
    return eigen_residual(coherent_coefficients(z, cfg, check=check), z.z)
