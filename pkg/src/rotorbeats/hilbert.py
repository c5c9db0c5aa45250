"""
Truncated angular-momentum representation of the e(3) algebra.

Basis vectors ``|j, m>`` with ``0 <= j <= j_max`` are stored densely, ordered
by ``j`` then ``m``, at offset ``j**2 + m + j``.  Only the unit sphere with
vanishing helicity (``X**2 = 1``, ``J.X = 0``) is represented.

The raising channel of ``X`` out of the top shell is dropped, so operator
identities hold exactly only on states supported on ``j <= j_max - 2``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .expm import expm_taylor

__all__ = [
    "RepresentationConfig",
    "StateVector",
    "BandOperator",
    "basis_index",
    "basis_state",
    "random_state",
    "j_operator",
    "jpm_operator",
    "x_operator",
    "xpm_operator",
    "build_z_operator",
    "apply_j3",
    "apply_jpm",
    "apply_x3",
    "apply_xpm",
    "inner_product",
    "angular_momentum_block",
    "apply_blockwise_exp",
]


@dataclass(frozen=True)
class RepresentationConfig:
    j_max: int
    radius: float = 1.0
    helicity: float = 0.0

    def __post_init__(self):
        if int(self.j_max) != self.j_max or self.j_max < 2:
            raise ValueError(f"j_max must be an integer >= 2, got {self.j_max}")
        if self.radius != 1.0 or self.helicity != 0.0:
            raise ValueError("only the unit sphere with zero helicity is supported")
        object.__setattr__(self, "j_max", int(self.j_max))

    @property
    def dim(self):
        return (self.j_max + 1) ** 2

    @functools.cached_property
    def labels(self):
        """Arrays ``(j, m)`` of the quantum numbers at each storage offset."""
        j = np.concatenate([np.full(2 * k + 1, k) for k in range(self.j_max + 1)])
        m = np.concatenate([np.arange(-k, k + 1) for k in range(self.j_max + 1)])
        return j, m


def basis_index(j, m):
    if abs(m) > j:
        raise ValueError(f"|m| must not exceed j, got j={j}, m={m}")
    return j * j + m + j


@dataclass(frozen=True, eq=False)
class StateVector:
    config: RepresentationConfig
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.config.dim,):
            raise ValueError(
                f"expected {self.config.dim} coefficients for j_max={self.config.j_max}, "
                f"got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", c)

    def component(self, j, m):
        return self.coefficients[basis_index(j, m)]

    def block(self, j):
        return self.coefficients[j * j : (j + 1) ** 2]

    def norm(self):
        return float(np.linalg.norm(self.coefficients))

    def shell_weights(self):
        """Squared norm carried by each shell j."""
        jj, _ = self.config.labels
        return np.bincount(jj, weights=np.abs(self.coefficients) ** 2, minlength=self.config.j_max + 1)

    def normalized(self):
        return StateVector(self.config, self.coefficients / self.norm())

    def _check(self, other):
        if not isinstance(other, StateVector) or other.config != self.config:
            raise ValueError("states belong to different representations")

    def __add__(self, other):
        self._check(other)
        return StateVector(self.config, self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check(other)
        return StateVector(self.config, self.coefficients - other.coefficients)

    def __mul__(self, scalar):
        return StateVector(self.config, self.coefficients * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return StateVector(self.config, -self.coefficients)


def basis_state(cfg, j, m):
    c = np.zeros(cfg.dim, dtype=complex)
    c[basis_index(j, m)] = 1.0
    return StateVector(cfg, c)


def random_state(cfg, rng, j_support=None):
    """Gaussian random state supported on shells ``j <= j_support``."""
    if j_support is None:
        j_support = cfg.j_max
    jj, _ = cfg.labels
    c = rng.standard_normal(cfg.dim) + 1j * rng.standard_normal(cfg.dim)
    c[jj > j_support] = 0.0
    return StateVector(cfg, c)


@dataclass(frozen=True, eq=False)
class BandOperator:
    """Sparse operator coupling only neighbouring shells and neighbouring m."""

    config: RepresentationConfig
    matrix: sp.csr_matrix

    def __post_init__(self):
        jj, mm = self.config.labels
        coo = self.matrix.tocoo()
        if np.any(np.abs(jj[coo.row] - jj[coo.col]) > 1) or np.any(np.abs(mm[coo.row] - mm[coo.col]) > 1):
            raise ValueError("entries violate the band structure |dj| <= 1, |dm| <= 1")

    def apply(self, state):
        if state.config != self.config:
            raise ValueError("operator and state belong to different representations")
        return StateVector(self.config, self.matrix @ state.coefficients)

    def __matmul__(self, state):
        return self.apply(state)

    def entries(self):
        """Yield ``((j', m'), (j, m), value)`` for every stored element."""
        jj, mm = self.config.labels
        coo = self.matrix.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            yield (int(jj[r]), int(mm[r])), (int(jj[c]), int(mm[c])), complex(v)

    def element(self, row, col):
        return complex(self.matrix[basis_index(*row), basis_index(*col)])

    def dense(self):
        return self.matrix.toarray()


def _assemble(cfg, rows, cols, vals):
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(cfg.dim, cfg.dim), dtype=complex)
    mat = mat.tocsr()
    mat.eliminate_zeros()
    return mat


@functools.lru_cache(maxsize=32)
def _jpm_matrix(cfg, sign):
    jj, mm = cfg.labels
    amp = np.sqrt((jj - sign * mm) * (jj + sign * mm + 1.0))
    keep = np.abs(mm + sign) <= jj
    src = np.flatnonzero(keep)
    dst = jj[src] ** 2 + mm[src] + sign + jj[src]
    return _assemble(cfg, dst, src, amp[src])


@functools.lru_cache(maxsize=32)
def _xpm_matrix(cfg, sign):
    # X_+- |j,m> = -+ a |j+1, m+-1>  +- b |j-1, m+-1>
    jj, mm = cfg.labels
    j = jj.astype(float)
    rows, cols, vals = [], [], []

    up = np.flatnonzero(jj < cfg.j_max)
    a = np.sqrt((j + sign * mm + 1) * (j + sign * mm + 2) / ((2 * j + 1) * (2 * j + 3)))
    rows.append((jj[up] + 1) ** 2 + mm[up] + sign + jj[up] + 1)
    cols.append(up)
    vals.append(-sign * a[up])

    down = np.flatnonzero((jj > 0) & (np.abs(mm + sign) <= jj - 1))
    jd = j[down]
    md = mm[down]
    b = np.sqrt((jd - sign * md - 1) * (jd - sign * md) / ((2 * jd - 1) * (2 * jd + 1)))
    rows.append((jj[down] - 1) ** 2 + md + sign + jj[down] - 1)
    cols.append(down)
    vals.append(sign * b)

    return _assemble(cfg, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


@functools.lru_cache(maxsize=32)
def _x3_matrix(cfg):
    jj, mm = cfg.labels
    j = jj.astype(float)
    up = np.flatnonzero(jj < cfg.j_max)
    a = np.sqrt((j - mm + 1) * (j + mm + 1) / ((2 * j + 1) * (2 * j + 3)))
    down = np.flatnonzero(np.abs(mm) <= jj - 1)
    jd, md = j[down], mm[down]
    b = np.sqrt((jd - md) * (jd + md) / ((2 * jd - 1) * (2 * jd + 1)))
    rows = np.concatenate([(jj[up] + 1) ** 2 + mm[up] + jj[up] + 1, (jj[down] - 1) ** 2 + md + jj[down] - 1])
    cols = np.concatenate([up, down])
    return _assemble(cfg, rows, cols, np.concatenate([a[up], b]))


def _check_axis(axis):
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def _check_sign(sign):
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")


def jpm_operator(cfg, sign):
    _check_sign(sign)
    return BandOperator(cfg, _jpm_matrix(cfg, sign))


def xpm_operator(cfg, sign):
    _check_sign(sign)
    return BandOperator(cfg, _xpm_matrix(cfg, sign))


@functools.lru_cache(maxsize=96)
def j_operator(cfg, axis):
    """Cartesian angular momentum component ``J_axis``."""
    _check_axis(axis)
    if axis == 3:
        _, mm = cfg.labels
        return BandOperator(cfg, sp.diags(mm.astype(complex)).tocsr())
    jp, jm = _jpm_matrix(cfg, 1), _jpm_matrix(cfg, -1)
    mat = (jp + jm) / 2 if axis == 1 else (jp - jm) / 2j
    return BandOperator(cfg, mat.tocsr())


@functools.lru_cache(maxsize=96)
def x_operator(cfg, axis):
    """Cartesian position component ``X_axis``."""
    _check_axis(axis)
    if axis == 3:
        return BandOperator(cfg, _x3_matrix(cfg))
    xp, xm = _xpm_matrix(cfg, 1), _xpm_matrix(cfg, -1)
    mat = (xp + xm) / 2 if axis == 1 else (xp - xm) / 2j
    return BandOperator(cfg, mat.tocsr())


@functools.lru_cache(maxsize=96)
def build_z_operator(cfg, axis):
    """``Z_axis = exp(-J**2/2) X_axis exp(J**2/2)`` as a band matrix.

    Each element of ``X`` between shells j and j' picks up
    ``exp((j(j+1) - j'(j'+1))/2)``, i.e. ``exp(-(j+1))`` going up and
    ``exp(j)`` going down.
    """
    x = x_operator(cfg, axis).matrix.tocoo()
    jj, _ = cfg.labels
    jr, jc = jj[x.row], jj[x.col]
    factor = np.exp((jc * (jc + 1.0) - jr * (jr + 1.0)) / 2.0)
    return BandOperator(cfg, _assemble(cfg, x.row, x.col, x.data * factor))


def apply_j3(s):
    return j_operator(s.config, 3).apply(s)


def apply_jpm(s, sign):
    return jpm_operator(s.config, sign).apply(s)


def apply_x3(s):
    return x_operator(s.config, 3).apply(s)


def apply_xpm(s, sign):
    return xpm_operator(s.config, sign).apply(s)


def inner_product(a, b):
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.config != b.config:
        raise ValueError(
            f"dimension mismatch: j_max={a.config.j_max} vs j_max={b.config.j_max}"
        )
    return complex(np.vdot(a.coefficients, b.coefficients))


@functools.lru_cache(maxsize=256)
def angular_momentum_block(j):
    """Dense ``(J1, J2, J3)`` on the ``2j+1`` dimensional shell j."""
    m = np.arange(-j, j + 1)
    jp = np.zeros((2 * j + 1, 2 * j + 1), dtype=complex)
    jp[np.arange(1, 2 * j + 1), np.arange(2 * j)] = np.sqrt((j - m[:-1]) * (j + m[:-1] + 1.0))
    jm = jp.T.copy()
    j1 = (jp + jm) / 2
    j2 = (jp - jm) / 2j
    j3 = np.diag(m.astype(complex))
    for block in (j1, j2, j3):
        block.setflags(write=False)
    return j1, j2, j3


def apply_blockwise_exp(s, vector):
    """Apply ``exp(vector . J)`` shell by shell; ``vector`` may be complex."""
    v = np.asarray(vector, dtype=complex)
    out = np.empty_like(s.coefficients)
    for j in range(s.config.j_max + 1):
        j1, j2, j3 = angular_momentum_block(j)
        gen = v[0] * j1 + v[1] * j2 + v[2] * j3
        out[j * j : (j + 1) ** 2] = expm_taylor(gen) @ s.block(j)
    return StateVector(s.config, out)
