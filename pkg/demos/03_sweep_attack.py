# Reading Alice's setting off the communicated bits
#
# If the shared vectors are not fresh random draws but an ordered sweep,
# the bit c that Alice sends flips exactly when a shared vector crosses the
# plane orthogonal to her setting.  Two sweeps fix her axis, and one
# disclosed output fixes its sign.

import math

import numpy as np

from srvsim import attack
from srvsim.geometry import UnitVec3, angular_distance

a = UnitVec3.from_spherical(math.radians(60), math.radians(37))
print("Alice's setting:", np.round(a.array, 4))

# ## One sweep around the z axis
N = 360
sweep = attack.generate_sweep("xy", "adjacent", N)
t = attack.run_sweep(sweep, a, attack.AdaptiveRevealing(), "cbit")
minus = np.flatnonzero(t.c == -1)
print("c = -1 at entries", minus, "-> azimuths", np.degrees(minus * sweep.delta))
# Both crossings sit 90 degrees away from the setting's azimuth (37).

normal = attack.reconstruct_normal(sweep, attack.detect_flips(t.c), t.c)
print("normal of the plane holding Alice's axis:", np.round(normal.array, 4))

# ## The whole pipeline
est = attack.attack_pipeline("tb", a, N)
print("\nestimate:", np.round(est.signed_direction.array, 4))
print(f"error {math.degrees(angular_distance(a, est.signed_direction)):.3f} deg, "
      f"bound {math.degrees(est.uncertainty):.3f} deg, sweeps {est.sweeps}, "
      f"{est.cbit_count} bits sent")

# ## Planar model
est = attack.attack_pipeline("svozil", math.radians(200), N, omega=math.pi / 2)
print(f"\nplanar model: estimate {math.degrees(est.signed_direction.radians):.2f} deg (truth 200)")

# ## Accuracy over many settings
rng = np.random.default_rng(0)
errs = []
for v in rng.normal(size=(200, 3)):
    s = UnitVec3.from_array(v)
    errs.append(angular_distance(s, attack.attack_pipeline("tb", s, N).signed_direction))
errs = np.degrees(errs)
print(f"\n200 random settings: max error {errs.max():.3f} deg, mean {errs.mean():.3f} deg")
