"""
Willmore energy of off-centre spheres
=====================================

For ``S_R(tau R e3)`` the energy reduces to a one-dimensional integral.
Exact quadrature, the logarithmic closed form and its Taylor expansion differ
by remainders of known order, and the Hawking mass of spheres drifting off
like ``R**0.75`` still tends to ``m``.
"""

import math

import numpy as np

from willmore_lab import SphereSpec, offcenter_area, offcenter_willmore

m, tau = 1.0, 0.1
radii = np.array([50.0, 100.0, 200.0, 400.0])
gaps = []
for R in radii:
    s = SphereSpec(m, R, tau)
    q, c, t = (offcenter_willmore(s, mode) for mode in ("quadrature", "closed", "taylor"))
    gaps.append(abs(q - c))
    print("R = %5.0f  quad - closed %.3e   closed - taylor %.3e" % (R, q - c, c - t))
print("log-log slope of |quad - closed|: %.3f" % np.polyfit(np.log(radii), np.log(gaps), 1)[0])

# Hawking mass of S_R(R^0.75 e3)
for R in (50.0, 100.0, 200.0, 400.0):
    s = SphereSpec(m, R, R ** -0.25)
    mh = math.sqrt(offcenter_area(s)) * (16 * math.pi - offcenter_willmore(s)) / (16 * math.pi) ** 1.5
    print("R = %5.0f  tau = %.3f  m_H = %.6f" % (R, s.tau, mh))
