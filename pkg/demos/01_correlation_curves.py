# Correlation curves of the two shared-randomness models
#
# Alice and Bob share random vectors and produce +-1 outputs.  We estimate
# E(theta) = <alpha beta> as a function of the angle between their settings
# and compare it with the closed forms.

import math

import numpy as np

from srvsim import estimators

# ## Three-dimensional model with one bit of communication
#
# With two shared unit vectors and one bit from Alice, the sampled
# correlation follows -cos(theta), exactly what a singlet gives.

thetas = np.linspace(0, math.pi, 9)
rows = estimators.scan_curve("tb", thetas, 200_000, seed=1)
print("theta    empirical  -cos(theta)  stderr")
for r in rows:
    print(f"{r.theta:6.3f}  {r.empirical:+.4f}    {r.analytic:+.4f}     {r.stderr:.4f}")

# ## Planar model with a shifted second variable
#
# Here the shared variable is an angle lambda, and Bob also sees
# lambda + omega.  omega = 0 gives the classical straight line, and
# omega = pi/2 gives a curve that is steeper than the cosine everywhere.

for omega in (0.0, math.pi / 4, math.pi / 2):
    rows = estimators.scan_curve("svozil", thetas, 200_000, seed=2, omega=omega)
    worst = max(abs(r.empirical - r.analytic) for r in rows)
    print(f"\nomega = {omega:.4f}  (max |empirical - analytic| = {worst:.4f})")
    for r in rows:
        bar = "#" * int(round(20 * (1 + r.analytic)))
        print(f"  {r.theta:5.2f}  {r.analytic:+.3f}  {-math.cos(r.theta):+.3f}  {bar}")
