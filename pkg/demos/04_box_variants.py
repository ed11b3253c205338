# Box variants: the same attack without any communication
#
# Replace the bit by a nonlocal box so that c only reaches Bob through his
# output.  If Bob measures along the second shared vector his output equals
# c, and the sweep attack runs unchanged with zero bits sent.

import math

import numpy as np

from srvsim import attack
from srvsim.geometry import UnitVec3, X_HAT, Y_HAT

# ## Reading c off Bob's own output
l1, l2 = X_HAT, Y_HAT
for deg in (0, 30, 60, 90, 120, 150):
    b = np.array([math.cos(math.radians(deg)), math.sin(math.radians(deg)), 0.0])
    answers = [attack.infer_c_from_beta(b, l1, l2, beta) for beta in (1, -1)]
    print(f"b at {deg:3d} deg: beta=+1 -> c={answers[0]}, beta=-1 -> c={answers[1]}")
# Within 45 degrees of +-l1 the output does not depend on c (None).

# ## Same estimate, no bits
a = UnitVec3(0.3, 0.5, 0.81)
with_bit = attack.attack_pipeline("tb", a, 360)
with_box = attack.attack_pipeline("ntb", a, 360)
print("\nidentical estimates:", with_bit == with_box)
print("bits per round:", with_bit.cbits_per_round, "vs", with_box.cbits_per_round)

# ## A quarter turn between the settings
#
# With orthogonal shared vectors and a fixed Bob setting, a pi/4 angle to
# Alice's axis shows up as a fixed output pattern in the c-revealing regions.
sweep = attack.generate_sweep("circle", "svozil", 360, omega=math.pi / 2)
for a_deg in (55.0, 10.0, 30.0):
    t = attack.run_sweep(sweep, math.radians(a_deg), attack.FixedSetting(math.radians(10.0)), "box")
    rel = attack.detect_quarter_pi(t)
    if rel is None:
        print(f"a = {a_deg:5.1f} deg, b = 10 deg: no quarter-turn pattern")
    else:
        print(f"a = {a_deg:5.1f} deg, b = 10 deg: {rel.rotation_sense}, "
              f"axis at {math.degrees(rel.direction.radians):.1f} deg (mod 180)")
