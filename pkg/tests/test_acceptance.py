"""
Acceptance criteria, one test each.

Every test records a line ``[PASS]`` or ``[FAIL]`` with the measured values and
the tolerance; the lines are echoed in the pytest terminal summary and when
this file is run directly (``python3 tests/test_acceptance.py``).
"""
import cmath
import math
import sys

import numpy as np
import pytest

from rotorbeats.analysis import Event, beat_envelope, classify_t_star_event, find_critical_points
from rotorbeats.cli import main as cli_main
from rotorbeats.coherent import (
    PhasePoint,
    adequate_config,
    coherent_coefficients,
    eigen_residual,
    expectation,
    norm_sq,
    overlap_series,
    z_eigen_residual,
    z_from_phase,
)
from rotorbeats.dynamics import (
    Rotation,
    SphericalGrid,
    coherent_state,
    density_free,
    density_rotation,
    evolve_series,
    free_evolve,
    rotation_evolve,
    z_of_t,
)
from rotorbeats.hilbert import RepresentationConfig, j_operator, random_state, x_operator
from rotorbeats.specfun import gegenbauer_c, legendre_p
from rotorbeats.verify import algebra_residual, construction_mismatch, overlap_mismatch

RESULTS = []
SEED = 20240601


def record(number, title, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}")
    return ok


def random_phase_points(n, l_max=12.0, seed=SEED):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        t = rng.normal(size=3)
        t -= np.dot(t, x) * x
        out.append(PhasePoint(x, rng.uniform(0.0, l_max) * t / np.linalg.norm(t)))
    return out


@pytest.fixture(scope="module")
def sample():
    return [z_from_phase(p) for p in random_phase_points(20)]


@pytest.fixture(scope="module")
def fig1():
    return z_from_phase(PhasePoint.from_j(11))


@pytest.fixture(scope="module")
def beat_series():
    t = np.linspace(0.0, 8 * math.pi, 2000)
    return {j: evolve_series(z_from_phase(PhasePoint.from_j(j)), t) for j in (10, 11, 12)}


def test_criterion_01_algebra():
    worst = algebra_residual(RepresentationConfig(20), n_states=50, seed=SEED)
    assert record(1, "algebra and Casimirs", worst < 1e-12, f"max relative residual {worst:.2e} (< 1e-12)")


def test_criterion_02_construction(sample):
    worst = max(construction_mismatch(z, adequate_config(z)) for z in sample)
    assert record(2, "closed form vs rotation oracle", worst < 1e-8, f"max relative gap {worst:.2e} (< 1e-8)")


def test_criterion_03_eigenrelation(sample):
    worst = max(z_eigen_residual(z, adequate_config(z)) for z in sample)
    assert record(3, "eigenrelation", worst < 1e-8, f"max residual {worst:.2e} (< 1e-8)")


def test_criterion_04_average_quality():
    j_err, x_err = [], []
    scale = math.exp(-0.25)
    for j in range(10, 15):
        p = PhasePoint.from_j(j)
        s = coherent_state(z_from_phase(p))
        jm = np.array([expectation(j_operator(s.config, a), s).real for a in (1, 2, 3)])
        xm = np.array([expectation(x_operator(s.config, a), s).real for a in (1, 2, 3)])
        j_err.append(np.linalg.norm(jm - p.l) / p.l_norm)
        x_err.append(np.linalg.norm(xm - scale * p.xbar) / scale)
    ok = max(j_err) <= 0.02 and max(x_err) <= 0.02
    detail = (
        "|<J>-l|/|l| = " + ", ".join(f"{e:.2%}" for e in j_err)
        + "; |<X>-e^-1/4 x|/e^-1/4 = " + ", ".join(f"{e:.2%}" for e in x_err)
        + " for j=10..14 (<= 2%)"
    )
    assert record(4, "average quality", ok, detail)


def test_criterion_05_overlaps(sample):
    # every sample point against itself, plain relative error
    diag = max(overlap_mismatch(z, z, adequate_config(z)) for z in sample)
    # neighbouring pairs: the coefficient inner product cancels down to
    # |<z|w>| << |z||w|, so its rounding is measured against |z||w|
    scaled, plain = 0.0, 0.0
    for z, w in zip(sample, sample[1:] + sample[:1]):
        cfg = RepresentationConfig(max(adequate_config(z).j_max, adequate_config(w).j_max))
        a = coherent_coefficients(z, cfg, check=False).coefficients
        b = coherent_coefficients(w, cfg, check=False).coefficients
        series = overlap_series(z, w)
        gap = abs(np.vdot(a, b) - series)
        scaled = max(scaled, gap / math.sqrt(norm_sq(z) * norm_sq(w)))
        plain = max(plain, gap / abs(series))
    direct = math.fsum(math.exp(-j * (j + 1)) * (2 * j + 1) for j in range(40))
    e3 = norm_sq([0.0, 0.0, 1.0])
    ok = diag < 1e-9 and scaled < 1e-9 and abs(e3 - direct) < 1e-8 and abs(e3 - 1.41844264) < 1e-8
    detail = (
        f"<z|z> series vs inner product {diag:.2e} (< 1e-9); pairs {scaled:.2e} of |z||w| (< 1e-9, "
        f"plain relative {plain:.1e}); <e3|e3> = {e3:.10f} vs direct {direct:.10f} (< 1e-8)"
    )
    assert record(5, "overlap consistency", ok, detail)


def test_criterion_06_periodicity(fig1):
    grid = SphericalGrid(128, 256)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for t in rng.uniform(0.0, 2 * math.pi, 5):
        a = density_free(fig1, grid, t).values
        b = density_free(fig1, grid, t + 2 * math.pi).values
        worst = max(worst, float(np.max(np.abs(a - b))))
    s = coherent_state(fig1)
    exact = np.array_equal(free_evolve(s, 2 * math.pi).coefficients, s.coefficients)
    ok = worst < 1e-10 and exact
    assert record(6, "2 pi recurrence", ok, f"density gap {worst:.2e} (< 1e-10); coefficients identical: {exact}")


def test_criterion_07_beats(beat_series):
    rep = beat_envelope(beat_series[11], center=math.pi / 2)
    m = rep.minima_times
    ok = (
        len(m) >= 2
        and abs(m[0] - math.pi) <= 0.05
        and abs(m[1] - 3 * math.pi) <= 0.1
        and abs(rep.beat_period_estimate / (2 * math.pi) - 1) <= 0.02
    )
    detail = (
        f"minima at {m[0]:.4f}, {m[1]:.4f} (pi +- 0.05, 3 pi +- 0.1); "
        f"period {rep.beat_period_estimate:.4f} (2 pi +- 2%)"
    )
    assert record(7, "beats", ok, detail)


def test_criterion_08_alternation(beat_series):
    got = {j: classify_t_star_event(ts.times, ts.phi, math.pi, 0.6) for j, ts in beat_series.items()}
    want = {10: Event.OSCILLATION, 11: Event.PULSE, 12: Event.OSCILLATION}
    ok = got == want
    detail = ", ".join(f"j={j}: {got[j].value}" for j in sorted(got))
    assert record(8, "pulse/oscillation alternation", ok, detail)


def test_criterion_09_rotation(fig1):
    t = np.linspace(0.0, 4 * math.pi, 1000)
    ts = evolve_series(fig1, t, Rotation())
    spread = float(np.ptp(ts.theta))
    slope = float(np.polyfit(t, ts.phi_unwrapped, 1)[0])
    s = coherent_state(fig1)
    om = np.array([0.0, 0.0, 1.0])
    stab = max(eigen_residual(rotation_evolve(s, om, tt), z_of_t(fig1, om, tt).z) for tt in t[::50])
    ok = spread < 1e-10 and abs(slope - 1) < 1e-10 and stab < 1e-8
    detail = f"theta spread {spread:.2e} (< 1e-10); |slope - 1| {abs(slope - 1):.2e} (< 1e-10); stability {stab:.2e} (< 1e-8)"
    assert record(9, "rotational dynamics", ok, detail)


def test_criterion_10_saddle(fig1):
    grid = SphericalGrid(128, 256)
    free = find_critical_points(density_free(fig1, grid, math.pi))
    n_saddle = sum(c.kind == "saddle" for c in free)
    rot_ok = True
    for t in (0.0, 1.0, math.pi, 5.0):
        cps = find_critical_points(density_rotation(fig1, grid, [0.0, 0.0, 1.0], t))
        rot_ok &= any(c.kind == "maximum" for c in cps) and not any(c.kind == "saddle" for c in cps)
    ok = n_saddle > 0 and rot_ok
    detail = f"{n_saddle} saddle nodes in the free density at t=pi; rotational density maximum without saddle: {rot_ok}"
    assert record(10, "saddle phenomenology", ok, detail)


def test_criterion_11_special_functions():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        w = cmath.rect(2.0 * math.sqrt(rng.uniform()), rng.uniform(-math.pi, math.pi))
        for n in range(31):
            p = legendre_p(n, w).to_complex()
            worst = max(worst, abs(p - gegenbauer_c(n, 0.5, w).to_complex()) / abs(p))
    finite = all(
        math.isfinite(gegenbauer_c(n, a, math.cosh(11.0)).log_magnitude) for n in range(61) for a in (0.5, 5.5, 11.5)
    )
    ok = worst < 1e-12 and finite
    assert record(11, "special functions", ok, f"C^1/2 vs P relative gap {worst:.2e} (< 1e-12); finite at cosh(11), n<=60: {finite}")


def test_criterion_12_determinism(tmp_path):
    outs = []
    for k, threads in enumerate((1, 1, 1, 8)):
        out = tmp_path / f"run{k}.csv"
        assert cli_main(["--mode", "evolve", "--j", "11", "--threads", str(threads), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    ok = all(o == outs[0] for o in outs)
    assert record(12, "determinism", ok, f"3 runs and --threads 8 byte-identical: {ok} ({len(outs[0])} bytes)")


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    print("\n".join(RESULTS))
    sys.exit(code)
