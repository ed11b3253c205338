"""Sign convention, unit vectors, plane angles and the few rotations we need."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .streams import RandomStream

TWO_PI = 2.0 * math.pi
NORM_TOL = 1e-9
PARALLEL_TOL = 1e-6


class DegenerateIntersection(ValueError):
    """Two plane normals are (anti)parallel, so the planes share no unique axis."""


class SignBit(IntEnum):
    PLUS = 1
    MINUS = -1

    def __neg__(self):
        return SignBit(-int(self))

    def __mul__(self, other):
        if isinstance(other, SignBit):
            return SignBit(int(self) * int(other))
        return int(self) * other

    __rmul__ = __mul__


def sgn(x: float) -> SignBit:
    """+1 for x >= 0 (zero included), -1 otherwise."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"sgn of non-finite value {x!r}")
    return SignBit.PLUS if x >= 0.0 else SignBit.MINUS


def sgn_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("sgn of non-finite value")
    return np.where(x >= 0.0, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class UnitVec3:
    """A direction in R^3.  Components are normalized on construction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        v = np.array([self.x, self.y, self.z], dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite vector component")
        norm = float(np.linalg.norm(v))
        if norm < 1e-15:
            raise ValueError("cannot normalize the zero vector")
        v = v / norm
        object.__setattr__(self, "x", float(v[0]))
        object.__setattr__(self, "y", float(v[1]))
        object.__setattr__(self, "z", float(v[2]))

    @classmethod
    def from_array(cls, v) -> "UnitVec3":
        v = np.asarray(v, dtype=float).reshape(3)
        return cls(v[0], v[1], v[2])

    @classmethod
    def from_spherical(cls, polar: float, azimuth: float) -> "UnitVec3":
        s = math.sin(polar)
        return cls(s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def polar(self) -> float:
        return math.acos(max(-1.0, min(1.0, self.z)))

    @property
    def azimuth(self) -> float:
        return math.atan2(self.y, self.x) % TWO_PI

    def dot(self, other) -> float:
        return float(np.dot(self.array, _as_array(other)))

    def cross(self, other) -> np.ndarray:
        return np.cross(self.array, _as_array(other))

    def __neg__(self) -> "UnitVec3":
        return UnitVec3(-self.x, -self.y, -self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


X_HAT = UnitVec3(1.0, 0.0, 0.0)
Y_HAT = UnitVec3(0.0, 1.0, 0.0)
Z_HAT = UnitVec3(0.0, 0.0, 1.0)
AXES = {"x": X_HAT, "y": Y_HAT, "z": Z_HAT}


def _as_array(v) -> np.ndarray:
    if isinstance(v, UnitVec3):
        return v.array
    return np.asarray(v, dtype=float)


def normalize(*components) -> UnitVec3:
    if len(components) == 1:
        return UnitVec3.from_array(components[0])
    return UnitVec3(*components)


@dataclass(frozen=True)
class PlaneAngle:
    """An angle on the circle, kept in [0, 2*pi)."""

    radians: float

    def __post_init__(self):
        r = float(self.radians)
        if not math.isfinite(r):
            raise ValueError("non-finite angle")
        r = r % TWO_PI
        if r >= TWO_PI:  # -tiny % 2pi rounds up to 2pi
            r = 0.0
        object.__setattr__(self, "radians", r)

    def __float__(self) -> float:
        return self.radians

    def __add__(self, other) -> "PlaneAngle":
        return PlaneAngle(self.radians + float(other))

    def __sub__(self, other) -> "PlaneAngle":
        return PlaneAngle(self.radians - float(other))

    def __neg__(self) -> "PlaneAngle":
        return PlaneAngle(-self.radians)

    @property
    def unit(self) -> np.ndarray:
        """The 2-D unit vector (cos, sin)."""
        return np.array([math.cos(self.radians), math.sin(self.radians)])

    def as_vec3(self) -> UnitVec3:
        """Embed in the xy plane, so circle protocols can reuse sphere tools."""
        return UnitVec3(math.cos(self.radians), math.sin(self.radians), 0.0)


def angle_value(a) -> float:
    return a.radians if isinstance(a, PlaneAngle) else float(a)


def circular_distance(a, b) -> float:
    """Distance between two angles, folded into [0, pi]."""
    d = abs(angle_value(a) - angle_value(b)) % TWO_PI
    return min(d, TWO_PI - d)


def angular_distance(u, v) -> float:
    """Angle between two directions in [0, pi]."""
    u, v = _as_array(u), _as_array(v)
    # atan2 form stays accurate for nearly parallel vectors
    return float(math.atan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def axial_distance(u, v) -> float:
    """Angle between the lines through u and v, in [0, pi/2]."""
    d = angular_distance(u, v)
    return min(d, math.pi - d)


def sample_unit_sphere(stream: RandomStream) -> UnitVec3:
    return UnitVec3.from_array(sample_unit_sphere_batch(stream, 1)[0])


def sample_unit_sphere_batch(stream: RandomStream, n: int) -> np.ndarray:
    """``n`` uniform directions as an (n, 3) array: z uniform, azimuth uniform."""
    u = stream.uniform(size=(n, 2))
    z = 2.0 * u[:, 0] - 1.0
    phi = TWO_PI * u[:, 1]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack((r * np.cos(phi), r * np.sin(phi), z))


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """Right-handed rotation about a coordinate axis ('x', 'y' or 'z')."""
    c, s = math.cos(angle), math.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"axis must be 'x', 'y' or 'z', got {axis!r}")


def rotate_about_axis(v, axis: str, angle: float) -> UnitVec3:
    return UnitVec3.from_array(rotation_matrix(axis, angle) @ _as_array(v))


def intersect_planes(n1, n2) -> UnitVec3:
    """Unit axis lying in both planes with normals n1 and n2 (sign arbitrary)."""
    w = np.cross(_as_array(n1), _as_array(n2))
    norm = float(np.linalg.norm(w))
    if norm < PARALLEL_TOL:
        raise DegenerateIntersection(f"normals are parallel (|n1 x n2| = {norm:.3g})")
    return UnitVec3.from_array(w / norm)
