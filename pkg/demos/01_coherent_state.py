"""
Build a coherent state on the sphere and look at what it encodes.

Run with ``python3 demos/01_coherent_state.py``.
"""
import math

import numpy as np

from rotorbeats.coherent import PhasePoint, adequate_config, coherent_coefficients, expectation, z_eigen_residual, z_from_phase
from rotorbeats.dynamics import coherent_state
from rotorbeats.hilbert import j_operator, x_operator

# A particle on the equator at x = (1, 0, 0), angular momentum mostly along e3.
p = PhasePoint.from_j(11)
print("position      ", p.xbar)
print("angular mom.  ", np.round(p.l, 4), " |l| =", round(p.l_norm, 4))

# The label is a complex unit vector, z.z = 1 but |z|^2 = cosh(2|l|).
z = z_from_phase(p)
print("z             ", np.round(z.z, 3))
print("|z|^2         ", z.norm2)

# The coefficients peak around j ~ |l|; the truncation is grown until the top
# shell carries less than 1e-20 of the weight.
cfg = adequate_config(z)
s = coherent_coefficients(z, cfg, normalize=True)
weights = s.shell_weights()
print("j_max         ", cfg.j_max)
print("peak shell    ", int(np.argmax(weights)))
print("top-shell mass", weights[-1])

# It really is an eigenvector of Z = exp(-J^2/2) X exp(J^2/2).
print("eigen residual", z_eigen_residual(z, cfg))

# Averages: <J> points along l but is shorter by about 1/2, <X> is e^(-1/4) x.
jm = np.array([expectation(j_operator(cfg, a), s).real for a in (1, 2, 3)])
xm = np.array([expectation(x_operator(cfg, a), s).real for a in (1, 2, 3)])
print("<J>           ", np.round(jm, 4), " |l| - |<J>| =", round(p.l_norm - np.linalg.norm(jm), 4))
print("<X> e^(1/4)   ", np.round(xm * math.exp(0.25), 4))

print("\n |l|   |<J>-l|/|l|   1/(2|l|)")
for j in range(2, 31, 4):
    q = PhasePoint.from_j(j)
    st = coherent_state(z_from_phase(q))
    jj = np.array([expectation(j_operator(st.config, a), st).real for a in (1, 2, 3)])
    print(f"{q.l_norm:6.2f}   {np.linalg.norm(jj - q.l) / q.l_norm:9.4f}   {1 / (2 * q.l_norm):9.4f}")
