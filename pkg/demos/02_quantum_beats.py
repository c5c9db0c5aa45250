"""
Free evolution, H = J^2/2: beats in theta(t) and the slip of phi(t).

The polar angle oscillates fast (period about 2 pi/|l|) under an envelope
that closes at odd multiples of pi.  At those nodes the azimuth jumps by
roughly pi; whether it shows up as an isolated pulse or as a swing depends on
the parity of j.
"""
import math

import numpy as np

from rotorbeats.analysis import beat_envelope, classify_t_star_event
from rotorbeats.coherent import PhasePoint, z_from_phase
from rotorbeats.dynamics import evolve_series

times = np.linspace(0.0, 8 * math.pi, 2000)

z = z_from_phase(PhasePoint.from_j(11))
series = evolve_series(z, times)
report = beat_envelope(series, center=math.pi / 2)

print("envelope minima (units of pi):", np.round(report.minima_times / math.pi, 4))
print("beat period / 2pi            :", round(report.beat_period_estimate / (2 * math.pi), 5))
print("clamped samples              :", report.clamp_count)

# a crude text plot of the envelope, one row per half unit of time
print("\n t/pi   envelope of |theta - pi/2|")
for t, v in zip(report.envelope_times[::6], report.envelope_values[::6]):
    print(f"{t / math.pi:5.2f}   " + "#" * int(v * 200))

print("\n j    event at t=pi   event at t=3pi")
for j in range(8, 16):
    s = evolve_series(z_from_phase(PhasePoint.from_j(j)), times)
    e1 = classify_t_star_event(s.times, s.phi, math.pi, 0.6)
    e3 = classify_t_star_event(s.times, s.phi, 3 * math.pi, 0.6)
    print(f"{j:2d}    {e1.value:12s}    {e3.value}")
