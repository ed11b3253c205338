"""Sweep attacks: Bob reconstructs Alice's repeated measurement direction.

The parties agree on an ordered schedule of shared random variables that
rotates by a small step ``delta = pi/N`` around a great circle.  Alice's
repeated setting ``a`` makes the bit ``c`` flip wherever a shared vector
crosses the plane orthogonal to ``a``, so the flip positions in the ``c``
sequence pin down that plane.  Two sweeps about different axes intersect in
the line through ``+-a``, and a single disclosed output of Alice fixes the
sign.  In the box variants Bob never receives ``c``; choosing his own setting
along ``lambda2`` each round makes his output equal to ``c`` and the same
reconstruction goes through with zero communication.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .geometry import (
    TWO_PI,
    AXES,
    PlaneAngle,
    SignBit,
    UnitVec3,
    X_HAT,
    Y_HAT,
    Z_HAT,
    angle_value,
    intersect_planes,
    rotation_matrix,
    sgn,
    sgn_array,
)
from .protocols import HALF_PI, ChannelModel, svozil_outputs, tb_outputs

# intersection is trusted only when the two plane normals are at least this far apart (sine)
MIN_CONDITIONING = 0.5


class NoFlip(ValueError):
    """The sequence never flips: Alice's axis is the pole of the sweep."""


class AmbiguousFlips(ValueError):
    """The flip pattern does not match any single axis."""


class IndiscriminateDisclosure(ValueError):
    """The disclosed round cannot tell the two hemispheres apart."""


class Unlocatable(RuntimeError):
    pass


class Geometry(str, Enum):
    XY = "xy"
    XZ = "xz"
    YZ = "yz"
    CIRCLE = "circle"


class Pairing(str, Enum):
    ADJACENT_OFFSET = "adjacent"
    ORTHOGONAL_PAIR = "orthogonal"
    SVOZIL_SHIFT = "svozil"


# rotation axis and starting vector of each sphere sweep
_SWEEP_FRAME = {
    Geometry.XY: ("z", X_HAT),
    Geometry.XZ: ("y", Z_HAT),
    Geometry.YZ: ("x", Y_HAT),
    Geometry.CIRCLE: ("z", X_HAT),
}


@dataclass(frozen=True, eq=False)
class SweepSchedule:
    geometry: Geometry
    pairing: Pairing
    N: int
    lambda1: np.ndarray  # (2N, 3)
    lambda2: np.ndarray  # (2N, 3); Delta for circle sweeps, embedded in the xy plane
    omega: Optional[float] = None

    @property
    def delta(self) -> float:
        return math.pi / self.N

    @property
    def count(self) -> int:
        return 2 * self.N

    @property
    def axis(self) -> str:
        return _SWEEP_FRAME[self.geometry][0]

    @property
    def pole(self) -> UnitVec3:
        return AXES[self.axis]

    @property
    def angles(self) -> np.ndarray:
        """Rotation angle of each entry (lambda_k = k * delta on the circle)."""
        return np.arange(self.count) * self.delta

    @property
    def is_circle(self) -> bool:
        return self.geometry is Geometry.CIRCLE

    def entry_vector(self, position: float) -> np.ndarray:
        """Sweep vector at fractional index ``position`` (lambda1 frame)."""
        start = _SWEEP_FRAME[self.geometry][1].array
        return rotation_matrix(self.axis, position * self.delta) @ start


def generate_sweep(geometry, pairing, N: int, omega: Optional[float] = None) -> SweepSchedule:
    """Build a full-revolution schedule of ``2N`` entries with step ``pi/N``."""
    geometry, pairing = Geometry(geometry), Pairing(pairing)
    if N < 2:
        raise ValueError("N must be at least 2")
    if geometry is Geometry.CIRCLE:
        if pairing is not Pairing.SVOZIL_SHIFT:
            raise ValueError("circle sweeps use the Svozil shift pairing")
        if omega is None or not 0.0 <= omega <= HALF_PI + 1e-12:
            raise ValueError("circle sweeps need omega in [0, pi/2]")
        omega = float(omega)
    elif pairing is Pairing.SVOZIL_SHIFT:
        raise ValueError("sphere sweeps use adjacent-offset or orthogonal pairing")
    else:
        omega = None
    return _build_sweep(geometry, pairing, int(N), omega)


@lru_cache(maxsize=64)
def _build_sweep(geometry, pairing, N, omega):
    axis, start = _SWEEP_FRAME[geometry]
    delta = math.pi / N
    if pairing is Pairing.SVOZIL_SHIFT:
        offset = omega
    elif pairing is Pairing.ADJACENT_OFFSET:
        offset = delta
    else:
        offset = HALF_PI
    # start is orthogonal to the pole, so R(t) start = cos t start + sin t (pole x start)
    e1 = start.array
    e2 = np.cross(AXES[axis].array, e1)
    t = np.arange(2 * N) * delta
    l1 = np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2
    if pairing is Pairing.ADJACENT_OFFSET:
        # reuse the next entry bit for bit, so a crossing that lands exactly on
        # a grid vector is seen with one sign by both neighbouring entries
        l2 = np.roll(l1, -1, axis=0)
    else:
        l2 = np.cos(t + offset)[:, None] * e1 + np.sin(t + offset)[:, None] * e2
    l1.setflags(write=False)
    l2.setflags(write=False)
    return SweepSchedule(geometry, pairing, N, l1, l2, omega)


# -- Bob's strategies ---------------------------------------------------------

@dataclass(frozen=True)
class FixedSetting:
    b: Union[UnitVec3, PlaneAngle, float]

    def describe(self) -> str:
        return "fixed"


@dataclass(frozen=True)
class AdaptiveRevealing:
    """Bob measures along lambda2 (or Delta) each round, which forces beta = c."""

    def describe(self) -> str:
        return "adaptive-revealing"


BobStrategy = Union[FixedSetting, AdaptiveRevealing]


@dataclass(frozen=True, eq=False)
class Transcript:
    schedule: SweepSchedule
    alice_setting: Union[UnitVec3, PlaneAngle]
    channel: ChannelModel
    bob_strategy: BobStrategy
    b: np.ndarray  # Bob's setting per entry, (2N, 3)
    alpha: np.ndarray
    beta: np.ndarray
    c: Optional[np.ndarray]  # None under the box channel

    @property
    def cbits_per_round(self) -> int:
        return self.channel.cbits_per_round

    @property
    def cbit_count(self) -> int:
        return self.cbits_per_round * self.schedule.count


def run_sweep(schedule: SweepSchedule, alice_setting, bob_strategy: BobStrategy,
              channel=ChannelModel.CLASSICAL_BIT) -> Transcript:
    channel = ChannelModel(channel)
    if schedule.is_circle:
        a = PlaneAngle(angle_value(alice_setting))
        lam = schedule.angles
        if isinstance(bob_strategy, AdaptiveRevealing):
            b_ang = lam + schedule.omega
        else:
            b_ang = np.full(schedule.count, angle_value(bob_strategy.b))
        alpha, beta, c = svozil_outputs(a.radians, b_ang, lam, schedule.omega)
        b = np.column_stack((np.cos(b_ang), np.sin(b_ang), np.zeros_like(b_ang)))
    else:
        a = alice_setting if isinstance(alice_setting, UnitVec3) else UnitVec3.from_array(alice_setting)
        if isinstance(bob_strategy, AdaptiveRevealing):
            b = schedule.lambda2.copy()
        else:
            bb = bob_strategy.b
            bb = bb.array if isinstance(bb, UnitVec3) else UnitVec3.from_array(bb).array
            b = np.tile(bb, (schedule.count, 1))
        alpha, beta, c = tb_outputs(a.array, b, schedule.lambda1, schedule.lambda2)
    return Transcript(schedule, a, channel, bob_strategy, b, alpha, beta,
                      c if channel is ChannelModel.CLASSICAL_BIT else None)


# -- reading c off a transcript ----------------------------------------------

def infer_c_from_beta(b, lambda1, lambda2, beta) -> Optional[SignBit]:
    """Recover c from Bob's own output, or ``None`` when beta does not depend on c."""
    out = infer_c_batch(_vec(b), _vec(lambda1), _vec(lambda2), int(beta))
    v = int(out)
    return None if v == 0 else SignBit(v)


def infer_c_batch(b, lambda1, lambda2, beta) -> np.ndarray:
    """Vectorized :func:`infer_c_from_beta`; 0 marks unknown entries."""
    bl1 = np.sum(np.asarray(b) * np.asarray(lambda1), axis=-1)
    bl2 = np.sum(np.asarray(b) * np.asarray(lambda2), axis=-1)
    # same expressions Bob's output uses, so the answer is exact
    s_plus = sgn_array(bl1 + 1 * bl2)
    s_minus = sgn_array(bl1 + -1 * bl2)
    beta = np.asarray(beta)
    c = np.where(beta == s_plus, 1, -1).astype(np.int8)
    return np.where(s_plus == s_minus, 0, c).astype(np.int8)


def observed_c(transcript: Transcript) -> np.ndarray:
    """The c sequence as Bob knows it: received, or inferred (0 = unknown)."""
    if transcript.c is not None:
        return transcript.c.copy()
    s = transcript.schedule
    return infer_c_batch(transcript.b, s.lambda1, s.lambda2, transcript.beta)


def detect_flips(bits: Sequence[int]) -> list[int]:
    """Indices i with bits[i] != bits[i-1], comparing cyclically."""
    arr = np.asarray([int(v) for v in bits])
    if arr.size == 0:
        raise ValueError("empty sequence")
    if np.any((arr != 1) & (arr != -1)):
        raise ValueError("flip detection needs a fully known +-1 sequence")
    return [int(i) for i in np.flatnonzero(arr != np.roll(arr, 1))]


# -- from flips to geometry ---------------------------------------------------

def _mean_mod(angles: Iterable[float], period: float) -> float:
    z = np.exp(1j * np.asarray(list(angles)) * (TWO_PI / period))
    return float(np.angle(z.mean()) * period / TWO_PI) % period


def reconstruct_normal(schedule: SweepSchedule, flips: Sequence[int], bits: Sequence[int]):
    """Turn the flip pattern of one sweep into geometry.

    * adjacent-offset sphere sweep: the unit normal of the plane holding
      Alice's axis (a ``UnitVec3``);
    * orthogonal-pair sphere sweep: the two candidate normals, a quarter turn
      apart (the flip positions alone cannot tell them apart);
    * circle sweep: Alice's axis modulo pi as a ``PlaneAngle`` in [0, pi).
    """
    bits = np.asarray([int(v) for v in bits])
    flips = list(flips)
    if not flips:
        raise NoFlip(f"no flips in the {schedule.geometry.value} sweep")
    n2 = schedule.count
    if schedule.is_circle:
        return _circle_axis(schedule, flips, bits)
    if schedule.pairing is Pairing.ORTHOGONAL_PAIR:
        if len(flips) != 4:
            raise AmbiguousFlips(f"expected 4 block boundaries, got {len(flips)}")
        psi = _mean_mod([(i - 0.5) * schedule.delta for i in flips], HALF_PI)
        first = UnitVec3.from_array(schedule.entry_vector(psi / schedule.delta))
        second = UnitVec3.from_array(schedule.entry_vector(psi / schedule.delta + schedule.N / 2))
        return first, second
    neg = np.flatnonzero(bits == -1)
    if len(neg) != 2 or len(flips) != 4:
        raise AmbiguousFlips(f"expected two isolated -1 entries, got {len(neg)}")
    k1, k2 = int(neg[0]), int(neg[1])
    if abs(((k2 - k1) % n2) - schedule.N) > 1:
        raise AmbiguousFlips("the two crossings are not antipodal")
    m1 = schedule.lambda1[k1] + schedule.lambda2[k1]
    m2 = schedule.lambda1[k2] + schedule.lambda2[k2]
    m = m1 / np.linalg.norm(m1) - m2 / np.linalg.norm(m2)
    return UnitVec3.from_array(m)


def _circle_axis(schedule: SweepSchedule, flips, bits) -> PlaneAngle:
    # c = -1 exactly while a + pi/2 lies between lambda and lambda + omega (mod pi):
    # a +1 -> -1 flip sits at lambda = a + pi/2 - omega, a -1 -> +1 flip at a + pi/2
    omega = schedule.omega
    est = []
    for i in flips:
        mid = (i - 0.5) * schedule.delta
        if bits[i] == -1:
            est.append(mid + omega - HALF_PI)
        else:
            est.append(mid - HALF_PI)
    if len(flips) % 2:
        raise AmbiguousFlips("odd number of flips on a closed circle")
    return PlaneAngle(_mean_mod(est, math.pi))


# -- grid scoring -------------------------------------------------------------

class AxisScore(NamedTuple):
    axis: UnitVec3
    underdetermined: bool
    agreement: int
    n_maximizers: int


def _predicted_flip(cands: np.ndarray, schedule: SweepSchedule) -> np.ndarray:
    """True where the candidate axis predicts c = -1."""
    return (cands @ schedule.lambda1.T >= 0.0) ^ (cands @ schedule.lambda2.T >= 0.0)


def _fibonacci_hemisphere(step: float) -> np.ndarray:
    n = max(16, int(math.ceil(2.0 * math.pi / (step * step))))
    i = np.arange(n) + 0.5
    z = i / n  # upper hemisphere; c sequences cannot tell a from -a
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    r = np.sqrt(1.0 - z * z)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi), z))


def _local_grid(center: np.ndarray, radius: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    center = center / np.linalg.norm(center)
    helper = X_HAT.array if abs(center[0]) < 0.9 else Y_HAT.array
    e1 = np.cross(center, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(center, e1)
    m = int(math.ceil(radius / step))
    t = np.arange(-m, m + 1) * step
    u, v = np.meshgrid(t, t, indexing="ij")
    u, v = u.ravel(), v.ravel()
    pts = center[None] + u[:, None] * e1[None] + v[:, None] * e2[None]
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    edge = (np.abs(u) >= m * step - 1e-15) | (np.abs(v) >= m * step - 1e-15)
    return pts, edge


def _agreement(cands: np.ndarray, transcripts: Sequence[Transcript], chunk: int = 4096):
    """Per-candidate count of known entries whose c the candidate predicts correctly."""
    score = np.zeros(len(cands), dtype=np.int64)
    informative = False
    for t in transcripts:
        obs = observed_c(t)
        known = obs != 0
        informative |= bool(np.any(obs == -1))
        obs_flip = (obs == -1)[known]
        for lo in range(0, len(cands), chunk):
            pred = _predicted_flip(cands[lo:lo + chunk], t.schedule)[:, known]
            score[lo:lo + chunk] += int(known.sum()) - np.count_nonzero(pred ^ obs_flip, axis=1)
    return score, informative


def score_axis_candidates(transcripts: Sequence[Transcript], grid_step: float,
                          center=None, radius: Optional[float] = None) -> AxisScore:
    """Pick the grid axis whose predicted c sequences agree most with the observed ones.

    Searches the whole sphere (one hemisphere, since c is blind to the sign
    of the axis) or, with ``center`` and ``radius``, a square patch around a
    prior estimate.  The returned axis is the principal direction of all
    maximizers.  It is flagged underdetermined when the data hold no flip at
    all, when the maximizers spread over a large set (one sweep only fixes a
    ring), or when they touch the edge of a local patch.
    """
    sphere = [t for t in transcripts if not t.schedule.is_circle]
    if not sphere:
        raise ValueError("need at least one sphere transcript")
    if center is None:
        cands = _fibonacci_hemisphere(grid_step)
        edge = np.zeros(len(cands), dtype=bool)
    else:
        if radius is None:
            raise ValueError("a local search needs a radius")
        cands, edge = _local_grid(_vec(center), radius, grid_step)
    score, informative = _agreement(cands, sphere)
    best = int(score.max())
    winners = cands[score == best]
    # align signs before averaging
    ref = winners[0]
    winners = winners * np.where(winners @ ref >= 0.0, 1.0, -1.0)[:, None]
    scatter = winners.T @ winners / len(winners)
    w, v = np.linalg.eigh(scatter)
    axis = UnitVec3.from_array(v[:, -1])
    spread = float(w[-2])
    underdetermined = (not informative) or spread > 1e-2 or bool(np.any(edge[score == best]))
    return AxisScore(axis, underdetermined, best, len(winners))


# -- sign resolution and the quarter-turn detector ----------------------------

def resolve_sign(axis, lambda_r, alpha_r, uncertainty: float = 0.0):
    """Orient ``axis`` using one disclosed output ``alpha_r = -sgn(a . lambda_r)``."""
    if isinstance(axis, PlaneAngle):
        flipped = resolve_sign(axis.as_vec3(), _vec(lambda_r), alpha_r, uncertainty)
        return axis if flipped.dot(axis.as_vec3()) > 0 else axis + math.pi
    ax = axis if isinstance(axis, UnitVec3) else UnitVec3.from_array(axis)
    lr = _vec(lambda_r)
    proj = float(np.dot(ax.array, lr))
    if not abs(proj) > math.sin(uncertainty):
        raise IndiscriminateDisclosure(f"|axis . lambda_r| = {abs(proj):.3g} is too small")
    return ax if -sgn(proj) == int(alpha_r) else -ax


class QuarterPiRelation(NamedTuple):
    offset: float  # +pi/4 or -pi/4 (mod pi) from Bob's setting to Alice's axis
    rotation_sense: str
    direction: Union[UnitVec3, PlaneAngle]
    discriminating: int


def detect_quarter_pi(transcript: Transcript, tol: float = 1e-9) -> Optional[QuarterPiRelation]:
    """Spot a pi/4 (or 3pi/4) angle between the settings from Bob's outputs alone.

    Needs a box-channel sweep with orthogonal shared vectors and a fixed Bob
    setting lying in the sweep plane.  On every entry where Bob's setting
    sits in a c-revealing quadrant his output must show the same c; c = -1
    throughout means Alice's axis is Bob's rotated by +pi/4 (mod pi), c = +1
    throughout by -pi/4.  The orientation labels follow the convention in
    which the shift lambda -> lambda + omega is called clockwise.  For circle
    sweeps ``direction`` is the axis itself; for sphere sweeps it is the
    in-plane direction of the axis' projection onto the sweep plane.
    """
    s = transcript.schedule
    if transcript.channel is not ChannelModel.NONLOCAL_BOX:
        raise ValueError("quarter-pi detection works on box-channel transcripts")
    if not isinstance(transcript.bob_strategy, FixedSetting):
        raise ValueError("quarter-pi detection needs a fixed Bob setting")
    if s.pairing is Pairing.ADJACENT_OFFSET or (s.is_circle and abs(s.omega - HALF_PI) > 1e-12):
        raise ValueError("quarter-pi detection needs orthogonal shared vectors")
    b = transcript.b
    p = np.sum(b * (s.lambda1 + s.lambda2), axis=1)
    m = np.sum(b * (s.lambda1 - s.lambda2), axis=1)
    region_a = (p < -tol) & (m > tol)  # between -lambda_plus and lambda_minus: beta = -c
    region_b = (p > tol) & (m < -tol)  # between lambda_plus and -lambda_minus: beta = c
    n_disc = int(np.sum(region_a | region_b))
    if n_disc == 0:
        return None
    beta = transcript.beta
    if np.all(beta[region_a] == 1) and np.all(beta[region_b] == -1):
        offset, sense = math.pi / 4, "clockwise"
    elif np.all(beta[region_a] == -1) and np.all(beta[region_b] == 1):
        offset, sense = -math.pi / 4, "counterclockwise"
    else:
        return None
    fb = transcript.bob_strategy.b
    if s.is_circle:
        direction = PlaneAngle(angle_value(fb) + offset)
    else:
        bv = fb.array if isinstance(fb, UnitVec3) else np.asarray(fb, dtype=float)
        direction = UnitVec3.from_array(rotation_matrix(s.axis, offset) @ bv)
    return QuarterPiRelation(offset, sense, direction, n_disc)


# -- the full pipeline --------------------------------------------------------

@dataclass(frozen=True)
class DirectionEstimate:
    axis: Union[UnitVec3, PlaneAngle]
    uncertainty: float
    sign_resolved: bool
    signed_direction: Optional[Union[UnitVec3, PlaneAngle]] = None
    method: str = "intersection"
    sweeps: tuple = ()
    transcripts: tuple = field(default=(), compare=False, repr=False)

    @property
    def cbits_per_round(self) -> int:
        return max((t.cbits_per_round for t in self.transcripts), default=0)

    @property
    def cbit_count(self) -> int:
        return sum(t.cbit_count for t in self.transcripts)


_CHANNEL_OF = {
    "tb": ChannelModel.CLASSICAL_BIT,
    "svozil": ChannelModel.CLASSICAL_BIT,
    "ntb": ChannelModel.NONLOCAL_BOX,
    "ns": ChannelModel.NONLOCAL_BOX,
}


def _sweep_c(geometry, N, pairing, alice, channel, omega=None):
    schedule = generate_sweep(geometry, pairing, N, omega)
    # under the cbit channel Bob's setting is irrelevant to c; using the same
    # strategy on both channels keeps the transcripts identical except for c
    t = run_sweep(schedule, alice, AdaptiveRevealing(), channel)
    return t, observed_c(t)


def attack_pipeline(protocol: str, alice_setting, N: int, disclosure=None, *,
                    omega: float = HALF_PI,
                    pairing: Union[Pairing, str] = Pairing.ADJACENT_OFFSET) -> DirectionEstimate:
    """Reconstruct Alice's signed measurement direction from sweep transcripts.

    ``disclosure`` is ``(lambda_r, alpha_r)``.  When omitted, Bob picks
    ``lambda_r`` along his estimated axis and Alice answers honestly, which
    is the discriminating choice.
    """
    p = protocol.lower()
    if p not in _CHANNEL_OF:
        raise ValueError(f"unknown protocol {protocol!r}")
    if N < 8:
        raise ValueError("N must be at least 8")
    channel = _CHANNEL_OF[p]
    delta = math.pi / N
    uncertainty = 2.0 * delta

    if p in ("svozil", "ns"):
        a = PlaneAngle(angle_value(alice_setting))
        t, bits = _sweep_c(Geometry.CIRCLE, N, Pairing.SVOZIL_SHIFT, a, channel, omega)
        flips = detect_flips(bits)
        if not flips:
            raise Unlocatable("circle sweep shows no flip (omega = 0?)")
        axis = reconstruct_normal(t.schedule, flips, bits)
        signed = _disclose_and_resolve(axis, a, disclosure, uncertainty)
        return DirectionEstimate(axis, uncertainty, True, signed, "circle-flips",
                                 ("circle",), (t,))

    a = alice_setting if isinstance(alice_setting, UnitVec3) else UnitVec3.from_array(alice_setting)
    pairing = Pairing(pairing)
    transcripts, normals, used = [], [], []

    def sweep(geometry):
        t, bits = _sweep_c(geometry, N, pairing, a, channel)
        transcripts.append(t)
        used.append(geometry.value)
        flips = detect_flips(bits)
        try:
            n = reconstruct_normal(t.schedule, flips, bits)
        except NoFlip:
            return
        normals.append(n if isinstance(n, tuple) else (n,))

    sweep(Geometry.XY)
    sweep(Geometry.XZ)
    method = "intersection"
    axis = None
    if len(normals) == 2 and all(len(n) == 1 for n in normals):
        n1, n2 = normals[0][0], normals[1][0]
        if np.linalg.norm(n1.cross(n2)) >= MIN_CONDITIONING:
            axis = intersect_planes(n1, n2)
    if axis is None:
        sweep(Geometry.YZ)
        if len(normals) < 2:
            raise Unlocatable("fewer than two sweeps produced flips")
        axis = _refine(transcripts, normals, delta)
        method = "scored"
    signed = _disclose_and_resolve(axis, a, disclosure, uncertainty)
    return DirectionEstimate(axis, uncertainty, True, signed, method, tuple(used),
                             tuple(transcripts))


def _refine(transcripts, normals, delta) -> UnitVec3:
    # each combination of candidate normals proposes the intersection of its
    # best-conditioned pair; candidates are ranked by exact agreement with the
    # observed c sequences, and the local grid is only a fallback
    sphere = [t for t in transcripts if not t.schedule.is_circle]
    total = sum(int(np.count_nonzero(observed_c(t))) for t in sphere)
    cands = []
    for combo in _combinations(normals):
        pairs = [(float(np.linalg.norm(u.cross(v))), u, v)
                 for i, u in enumerate(combo) for v in combo[i + 1:]]
        cond, u, v = max(pairs, key=lambda p: p[0])
        if cond >= 1e-6:
            cands.append(intersect_planes(u, v).array)
        stack = np.stack([n.array for n in combo])
        cands.append(np.linalg.eigh(stack.T @ stack)[1][:, 0])
    cands = np.array(cands)
    score, _ = _agreement(cands, sphere)
    k = int(np.argmax(score))
    if score[k] == total:
        return UnitVec3.from_array(cands[k])
    # seed error is a few steps at worst; the patch must contain the whole cell
    res = score_axis_candidates(transcripts, delta / 8.0, center=cands[k], radius=6.0 * delta)
    if res.underdetermined:
        res = score_axis_candidates(transcripts, delta / 4.0, center=res.axis, radius=12.0 * delta)
    return res.axis if res.agreement > score[k] else UnitVec3.from_array(cands[k])


def _combinations(normals):
    if not normals:
        yield ()
        return
    for n in normals[0]:
        for rest in _combinations(normals[1:]):
            yield (n,) + rest


def _disclose_and_resolve(axis, a, disclosure, uncertainty):
    if disclosure is None:
        lam_r = axis.as_vec3() if isinstance(axis, PlaneAngle) else axis
        alpha_r = -sgn(_vec(a) @ lam_r.array)
    else:
        lam_r, alpha_r = disclosure
    return resolve_sign(axis, lam_r, alpha_r, uncertainty)


def _vec(v) -> np.ndarray:
    if isinstance(v, UnitVec3):
        return v.array
    if isinstance(v, PlaneAngle):
        return v.as_vec3().array
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return PlaneAngle(float(arr)).as_vec3().array
    return arr


# -- transcript files ---------------------------------------------------------

TRANSCRIPT_FIELDS = ("index", "l1x", "l1y", "l1z", "l2x", "l2y", "l2z", "alpha", "beta", "c")


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def transcript_rows(transcript: Transcript) -> list[list[str]]:
    s = transcript.schedule
    rows = []
    for k in range(s.count):
        c = "" if transcript.c is None else str(int(transcript.c[k]))
        rows.append([str(k), *(fmt(x) for x in s.lambda1[k]), *(fmt(x) for x in s.lambda2[k]),
                     str(int(transcript.alpha[k])), str(int(transcript.beta[k])), c])
    return rows


def dump_transcript(transcript: Transcript) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRANSCRIPT_FIELDS)
    w.writerows(transcript_rows(transcript))
    return buf.getvalue()


class TranscriptRecord(NamedTuple):
    index: int
    lambda1: tuple
    lambda2: tuple
    alpha: int
    beta: int
    c: Optional[int]


def load_transcript(text: str) -> list[TranscriptRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != TRANSCRIPT_FIELDS:
        raise ValueError(f"unexpected transcript header {header}")
    out = []
    for row in reader:
        if not row:
            continue
        out.append(TranscriptRecord(int(row[0]), tuple(float(x) for x in row[1:4]),
                                    tuple(float(x) for x in row[4:7]), int(row[7]), int(row[8]),
                                    int(row[9]) if row[9] != "" else None))
    return out
