"""Single rounds of the Toner-Bacon and Svozil protocols and their box variants.

Every round stores the full physics (including the bit ``c``).  Who gets to
see ``c`` is decided by the channel and enforced only in :func:`box_view`.
The batch helpers ``tb_outputs`` and ``svozil_outputs`` are what the Monte
Carlo and sweep code call; the single-round functions go through them so the
two paths can never disagree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

import numpy as np

from .geometry import PlaneAngle, SignBit, UnitVec3, angle_value, sgn_array

HALF_PI = 0.5 * math.pi


class OutOfRange(ValueError):
    pass


class ChannelModel(str, Enum):
    CLASSICAL_BIT = "cbit"  # Bob receives c
    NONLOCAL_BOX = "box"  # c only acts on Bob's output

    @property
    def cbits_per_round(self) -> int:
        return 1 if self is ChannelModel.CLASSICAL_BIT else 0


def tb_outputs(a, b, lambda1, lambda2):
    """Vectorized TB outputs ``(alpha, beta, c)`` as int8 arrays.

    ``a`` and ``b`` broadcast against ``lambda1``/``lambda2`` along the last
    axis (length 3).  Bob's dot product is expanded as
    ``b.l1 + c * b.l2`` so that for ``a == b`` both terms carry the sign of
    ``a.l1`` and perfect anticorrelation holds bit-exactly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    l1 = np.asarray(lambda1, dtype=float)
    l2 = np.asarray(lambda2, dtype=float)
    s1 = sgn_array(np.sum(a * l1, axis=-1))
    s2 = sgn_array(np.sum(a * l2, axis=-1))
    c = s1 * s2
    beta = sgn_array(np.sum(b * l1, axis=-1) + c * np.sum(b * l2, axis=-1))
    return -s1, beta, c


def _unit2(angle):
    angle = np.asarray(angle, dtype=float)
    return np.stack((np.cos(angle), np.sin(angle)), axis=-1)


def svozil_outputs(a, b, lam, omega):
    """Vectorized Svozil outputs for plane angles; ``Delta = lam + omega``."""
    lam = np.asarray(lam, dtype=float)
    l1 = _unit2(lam)
    l2 = _unit2(lam + float(omega))
    a2 = _unit2(a)
    b2 = _unit2(b)
    s1 = sgn_array(np.sum(a2 * l1, axis=-1))
    s2 = sgn_array(np.sum(a2 * l2, axis=-1))
    c = s1 * s2
    beta = sgn_array(np.sum(b2 * l1, axis=-1) + c * np.sum(b2 * l2, axis=-1))
    return -s1, beta, c


@dataclass(frozen=True)
class TBRound:
    lambda1: UnitVec3
    lambda2: UnitVec3
    a: UnitVec3
    b: UnitVec3
    alpha: SignBit
    beta: SignBit
    c: SignBit
    channel: ChannelModel = ChannelModel.CLASSICAL_BIT


@dataclass(frozen=True)
class SvozilRound:
    lam: PlaneAngle
    omega: PlaneAngle
    a: PlaneAngle
    b: PlaneAngle
    alpha: SignBit
    beta: SignBit
    c: SignBit
    channel: ChannelModel = ChannelModel.CLASSICAL_BIT

    @property
    def delta(self) -> PlaneAngle:
        return self.lam + self.omega


def tb_round(a: UnitVec3, b: UnitVec3, lambda1: UnitVec3, lambda2: UnitVec3,
             channel: ChannelModel = ChannelModel.CLASSICAL_BIT) -> TBRound:
    alpha, beta, c = tb_outputs(a.array, b.array, lambda1.array, lambda2.array)
    return TBRound(lambda1, lambda2, a, b, SignBit(int(alpha)), SignBit(int(beta)),
                   SignBit(int(c)), ChannelModel(channel))


def _check_omega(omega: float) -> float:
    if not 0.0 <= omega <= HALF_PI + 1e-12:
        raise OutOfRange(f"omega must lie in [0, pi/2], got {omega}")
    return omega


def svozil_round(a, b, lam, omega,
                 channel: ChannelModel = ChannelModel.CLASSICAL_BIT) -> SvozilRound:
    a, b, lam = PlaneAngle(angle_value(a)), PlaneAngle(angle_value(b)), PlaneAngle(angle_value(lam))
    omega = _check_omega(angle_value(omega))
    alpha, beta, c = svozil_outputs(a.radians, b.radians, lam.radians, omega)
    return SvozilRound(lam, PlaneAngle(omega), a, b, SignBit(int(alpha)),
                       SignBit(int(beta)), SignBit(int(c)), ChannelModel(channel))


def svozil_E_analytic(theta, omega):
    """Svozil's piecewise-linear correlation E(theta, omega).

    ``theta`` in [0, pi] is the angle between the two settings, ``omega`` in
    [0, pi/2] the fixed shift.  Accepts scalars or arrays of ``theta``; branch
    boundaries are closed on the right, as in the original formula.
    """
    t = np.asarray(angle_value(theta) if isinstance(theta, PlaneAngle) else theta, dtype=float)
    w = angle_value(omega)
    if not 0.0 <= w <= HALF_PI:
        raise OutOfRange(f"omega must lie in [0, pi/2], got {w}")
    if np.any(t < 0.0) or np.any(t > math.pi) or not np.all(np.isfinite(t)):
        raise OutOfRange("theta must lie in [0, pi]")
    pi = math.pi
    conds = [
        t <= w / 2,
        t <= (pi - w) / 2,
        t <= (pi + w) / 2,
        t <= pi - w / 2,
    ]
    values = [
        np.full_like(t, -1.0),
        -1.0 + (2.0 / pi) * (t - w / 2),
        -2.0 * (1.0 - (2.0 / pi) * t),
        1.0 + (2.0 / pi) * (t - pi + w / 2),
    ]
    out = np.select(conds, values, default=1.0)
    return float(out) if out.ndim == 0 else out


class BoxViews(NamedTuple):
    alice: dict
    bob: dict


Round = Union[TBRound, SvozilRound]


def box_view(rnd: Round) -> BoxViews:
    """Split a round into what Alice and Bob each observe."""
    if isinstance(rnd, TBRound):
        srv = (rnd.lambda1, rnd.lambda2)
    else:
        srv = (rnd.lam, rnd.delta)
    alice = {"setting": rnd.a, "alpha": rnd.alpha, "srv": srv}
    bob = {"setting": rnd.b, "beta": rnd.beta, "srv": srv}
    if rnd.channel is ChannelModel.CLASSICAL_BIT:
        bob["c"] = rnd.c
    return BoxViews(alice, bob)
