"""
Probability density on the sphere at t = 0 and at the first beat node.

At t = 0 the packet sits on x.  At t = pi it has split into two lobes on
opposite sides, joined through saddle points.  Under the rotational
Hamiltonian the packet moves rigidly and never develops a saddle.
"""
import math

import numpy as np

from rotorbeats.analysis import cluster_points, find_critical_points
from rotorbeats.coherent import PhasePoint, z_from_phase
from rotorbeats.dynamics import SphericalGrid, density_free, density_rotation

z = z_from_phase(PhasePoint.from_j(11))
grid = SphericalGrid(128, 256)


def describe(label, field):
    cps = find_critical_points(field)
    print(f"{label}: integral {field.integral():.12f}")
    for kind in ("maximum", "saddle", "minimum"):
        for c in cluster_points(cps, kind, n_phi=grid.n_phi):
            th = np.mean([q.theta for q in c])
            # circular mean in (-pi, pi]: clusters may straddle phi = 0
            ph = np.angle(np.mean([np.exp(1j * q.phi) for q in c]))
            print(f"    {kind:8s} theta={th:.3f} phi={ph:.3f} p={c[0].value:.3f}")


def ascii(field, rows=16, cols=64):
    shades = " .:-=+*#%@"
    v = field.values[:: grid.n_theta // rows, :: grid.n_phi // cols]
    v = v / v.max()
    for row in v:
        print("    " + "".join(shades[min(int(x * len(shades)), len(shades) - 1)] for x in row))


for t in (0.0, math.pi):
    f = density_free(z, grid, t)
    describe(f"free, t={t:.4f}", f)
    ascii(f)

describe("rotation about e3, t=1.3", density_rotation(z, grid, [0.0, 0.0, 1.0], 1.3))
