"""Shared-random-variable models of singlet correlations and sweep attacks on them."""
from .geometry import (
    DegenerateIntersection,
    PlaneAngle,
    SignBit,
    UnitVec3,
    X_HAT,
    Y_HAT,
    Z_HAT,
    intersect_planes,
    rotate_about_axis,
    sample_unit_sphere,
    sgn,
)
from .protocols import ChannelModel, box_view, svozil_E_analytic, svozil_round, tb_round
from .estimators import chsh, chsh_scan, estimate_correlation, estimate_marginals, scan_curve
from .attack import attack_pipeline, generate_sweep, run_sweep
from .streams import RandomStream

__version__ = "0.1.0"
