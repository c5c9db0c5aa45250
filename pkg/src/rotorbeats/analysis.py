"""
Phenomenology extracted from time series and density fields: beat envelopes,
the phase slip of ``phi(t)`` at beat nodes, critical points of densities on the
sphere, and periodicity checks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import TimeSeries

__all__ = [
    "BeatReport",
    "CriticalPoint",
    "Event",
    "TooCoarseSamplingError",
    "IndeterminateEventError",
    "beat_envelope",
    "classify_t_star_event",
    "find_critical_points",
    "periodicity_check",
    "cluster_points",
]


class TooCoarseSamplingError(ValueError):
    pass


class IndeterminateEventError(ValueError):
    pass


class Event(str, enum.Enum):
    PULSE = "pulse"
    OSCILLATION = "oscillation"


@dataclass(frozen=True, eq=False)
class BeatReport:
    envelope_times: np.ndarray
    envelope_values: np.ndarray
    minima_times: np.ndarray
    beat_period_estimate: float
    clamp_count: int = 0

    @property
    def degenerate(self):
        """True when fewer than two envelope minima were found."""
        return not np.isfinite(self.beat_period_estimate)


@dataclass(frozen=True)
class CriticalPoint:
    index: tuple
    theta: float
    phi: float
    value: float
    kind: str


def _peaks(d):
    """Indices of local maxima of ``d`` (plateaus count once, at their left edge)."""
    i = np.arange(1, len(d) - 1)
    return i[(d[i] > d[i - 1]) & (d[i] >= d[i + 1])]


def _parabolic(t, d, i):
    """Vertex of the parabola through samples i-1, i, i+1."""
    y0, y1, y2 = d[i - 1], d[i], d[i + 1]
    den = y0 - 2 * y1 + y2
    if den == 0:
        return t[i], y1
    off = 0.5 * (y0 - y2) / den
    h = t[i + 1] - t[i]
    return t[i] + off * h, y1 - 0.25 * (y0 - y2) * off


def beat_envelope(times, values=None, center=0.0, neighbourhood=3):
    """Envelope of ``|values - center|`` and the times of its minima.

    Parameters
    ----------
    times : array_like or TimeSeries
        Sample times; a :class:`TimeSeries` supplies ``theta`` as the values
        and its clamp count.
    values : array_like, optional
        Signal samples.
    center : float
        Level the oscillation is measured from.
    neighbourhood : int
        An envelope sample is a minimum only if it is the smallest among this
        many envelope samples on either side.

    Returns
    -------
    BeatReport
        ``beat_period_estimate`` is the mean spacing of consecutive minima, or
        NaN when fewer than two were found.
    """
    clamp_count = 0
    if isinstance(times, TimeSeries):
        series = times
        times, values, clamp_count = series.times, series.theta, series.clamp_count
    t = np.asarray(times, dtype=float)
    d = np.abs(np.asarray(values, dtype=float) - center)

    idx = _peaks(d)
    if len(idx) > 1 and np.min(np.diff(idx)) < 4:
        raise TooCoarseSamplingError(
            f"consecutive extrema only {int(np.min(np.diff(idx)))} samples apart (need >= 4)"
        )
    if len(idx) < 3:
        return BeatReport(t[idx], d[idx], np.array([]), math.nan, clamp_count)

    env = np.array([_parabolic(t, d, i) for i in idx])
    et, ev = env[:, 0], env[:, 1]

    minima = []
    for k in range(1, len(ev) - 1):
        lo, hi = max(0, k - neighbourhood), min(len(ev), k + neighbourhood + 1)
        if ev[k] < ev[k - 1] and ev[k] <= ev[k + 1] and ev[k] == ev[lo:hi].min():
            minima.append(_refine_minimum(et, ev, k))
    minima = np.array(minima)
    period = float(np.mean(np.diff(minima))) if len(minima) > 1 else math.nan
    return BeatReport(et, ev, minima, period, clamp_count)


def _refine_minimum(et, ev, k):
    # Near a node the envelope is V-shaped, so its square is close to a
    # parabola; near a smooth minimum the square is parabolic as well.
    lo, hi = max(0, k - 2), min(len(ev), k + 3)
    if hi - lo < 3:
        return et[k]
    a, b, _ = np.polyfit(et[lo:hi] - et[k], ev[lo:hi] ** 2, 2)
    if a <= 0:
        return et[k]
    tv = -b / (2 * a)
    if not et[lo] - et[k] <= tv <= et[hi - 1] - et[k]:
        return et[k]
    return et[k] + tv


def _wrap(angle):
    return (angle + math.pi) % (2 * math.pi) - math.pi


def classify_t_star_event(times, phi, t_star, window, reference=0.0, noise_floor=1e-9):
    """Classify the phase slip of ``phi(t)`` near a beat node.

    Around ``t_star`` the averaged position passes close to the axis and its
    azimuth slips by roughly pi on top of the uniform drift.  The slip is
    located as the steepest point of the detrended, unwrapped phase.  When
    it occurs close to the reference meridian (within pi/2) the wrapped plot
    shows an isolated spike across the branch cut: a *pulse*.  When it occurs
    on the opposite side the wrapped curve swings up and back within one
    turn: an *oscillation*.

    Parameters
    ----------
    times, phi : array_like
        Samples of the azimuth, wrapped or unwrapped.
    t_star : float
        Nominal node time.
    window : float
        Half-width of the analysed interval; the trend is fitted outside the
        inner half of it.
    reference : float
        Azimuth of the reference meridian (the classical starting azimuth).
    noise_floor : float
        Residual scatter below this level is treated as zero.

    Raises
    ------
    IndeterminateEventError
        If the detrended excursion is below five times the noise floor.
    """
    t = np.asarray(times, dtype=float)
    u = np.unwrap(np.asarray(phi, dtype=float))
    sel = np.abs(t - t_star) <= window
    if np.count_nonzero(sel) < 40:
        raise ValueError(f"window holds {np.count_nonzero(sel)} samples, need at least 40")
    t, u = t[sel], u[sel]
    inner = np.abs(t - t_star) < window / 2
    if np.count_nonzero(~inner) < 4:
        raise ValueError("not enough samples outside the inner window to fit the trend")

    coef = np.polyfit(t[~inner] - t_star, u[~inner], 1)
    resid = u - np.polyval(coef, t - t_star)
    floor = max(float(np.std(resid[~inner])), noise_floor)
    r_in = resid[inner]
    if np.ptp(r_in) < 5 * floor:
        raise IndeterminateEventError(
            f"no phase event near t={t_star}: excursion {np.ptp(r_in):.3g} vs floor {floor:.3g}"
        )

    ti = t[inner]
    slope = np.gradient(r_in, ti)
    k = int(np.argmax(np.abs(slope)))
    offset = _wrap(float(u[inner][k]) - reference)
    return Event.PULSE if abs(offset) < math.pi / 2 else Event.OSCILLATION


def _padded(values):
    """Pad one ring of neighbours: wrap in phi, reflect through the poles."""
    n_theta, n_phi = values.shape
    if n_phi % 2:
        raise ValueError("pole handling needs an even number of phi nodes")
    half = n_phi // 2
    top = np.roll(values[0], -half)
    bottom = np.roll(values[-1], -half)
    v = np.vstack([top[None, :], values, bottom[None, :]])
    return np.hstack([v[:, -1:], v, v[:, :1]])


# neighbour offsets in cyclic order around the centre
_RING = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def find_critical_points(field, threshold=0.1, tie_rtol=1e-12):
    """Maxima, minima and saddles of a density field.

    Neighbours within ``tie_rtol`` times the field maximum count as ties.  A
    node is a maximum (minimum) when no neighbour is above (below) it and at
    least one is below (above); mirror-symmetric fields then report both
    nodes of a tied pair.  It is a saddle when the differences to the ring
    of neighbours, ties skipped, change sign at least four times and the
    discrete Hessian in (theta, phi) has negative determinant; the two rows
    next to the poles, where that chart degenerates, are never saddles.
    Nodes below ``threshold`` times the field maximum are ignored.
    """
    v = np.asarray(field.values, dtype=float)
    grid = field.grid
    p = _padded(v)
    n_theta, n_phi = v.shape
    c = p[1:-1, 1:-1]
    ring = np.stack([p[1 + da : 1 + da + n_theta, 1 + db : 1 + db + n_phi] for da, db in _RING])
    diff = ring - c
    s = np.sign(diff)
    s[np.abs(diff) <= tie_rtol * np.abs(v).max()] = 0

    is_max = np.all(s <= 0, axis=0) & np.any(s < 0, axis=0)
    is_min = np.all(s >= 0, axis=0) & np.any(s > 0, axis=0)
    # carry the last non-tied sign over ties, twice round for cyclic wrap
    filled = s.copy()
    for _ in range(2):
        for k in range(len(_RING)):
            filled[k] = np.where(filled[k] == 0, filled[k - 1], filled[k])
    changes = np.sum(filled != np.roll(filled, -1, axis=0), axis=0)

    dth = math.pi / n_theta
    dph = 2 * math.pi / n_phi
    f_tt = (p[2:, 1:-1] - 2 * c + p[:-2, 1:-1]) / dth**2
    f_pp = (p[1:-1, 2:] - 2 * c + p[1:-1, :-2]) / dph**2
    f_tp = (p[2:, 2:] - p[2:, :-2] - p[:-2, 2:] + p[:-2, :-2]) / (4 * dth * dph)
    det = f_tt * f_pp - f_tp**2
    is_saddle = (changes >= 4) & (det < 0) & ~is_max & ~is_min
    # the chart folds at the poles: any smooth slope looks saddle-like there
    is_saddle[[0, -1], :] = False

    keep = v >= threshold * v.max()
    theta, phi = grid.theta, grid.phi
    points = []
    for kind, mask in (("maximum", is_max), ("minimum", is_min), ("saddle", is_saddle)):
        for a, b in zip(*np.nonzero(mask & keep)):
            points.append(CriticalPoint((int(a), int(b)), float(theta[a]), float(phi[b]), float(v[a, b]), kind))
    points.sort(key=lambda cp: cp.index)
    return points


def periodicity_check(producer, period, samples, t_start=0.0, span=None):
    """Largest sup-norm gap between ``producer(t)`` and ``producer(t + period)``.

    ``samples`` times are spread uniformly over ``[t_start, t_start + span)``,
    with ``span`` defaulting to ``period``.
    """
    if samples < 3:
        raise ValueError("need at least 3 sample times")
    span = period if span is None else span
    worst = 0.0
    for k in range(samples):
        t = t_start + span * k / samples
        a = np.asarray(producer(t), dtype=complex)
        b = np.asarray(producer(t + period), dtype=complex)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def cluster_points(points, kind=None, max_separation=2, n_phi=None):
    """Group critical points whose grid indices lie within ``max_separation``.

    Distance is the Chebyshev distance in (theta, phi) index space, periodic
    in phi when ``n_phi`` is given.  Returns a list of lists of points.
    """
    pts = [p for p in points if kind is None or p.kind == kind]
    clusters = []
    for p in pts:
        home = None
        for c in clusters:
            for q in c:
                dphi = abs(p.index[1] - q.index[1])
                if n_phi:
                    dphi = min(dphi, n_phi - dphi)
                if max(abs(p.index[0] - q.index[0]), dphi) <= max_separation:
                    home = c
                    break
            if home is not None:
                break
        if home is None:
            clusters.append([p])
        else:
            home.append(p)
    return clusters
