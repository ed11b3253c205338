"""Monte Carlo correlations, marginals, curve scans and CHSH scoring."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .geometry import UnitVec3, angle_value, circular_distance, sample_unit_sphere_batch
from .protocols import svozil_E_analytic, svozil_outputs, tb_outputs
from .streams import BLOCK_SIZE, RandomStream, block_ranges, check_seed

SPHERE_PROTOCOLS = {"tb", "ntb"}
CIRCLE_PROTOCOLS = {"svozil", "ns"}


def _family(protocol: str, omega) -> str:
    p = protocol.lower()
    if p in SPHERE_PROTOCOLS:
        return "tb"
    if p in CIRCLE_PROTOCOLS:
        if omega is None:
            raise ValueError(f"protocol {protocol!r} needs omega")
        return "svozil"
    raise ValueError(f"unknown protocol {protocol!r}")


@dataclass(frozen=True)
class CorrelationEstimate:
    mean: float
    stderr: float
    n: int
    seed: int


class Marginals(NamedTuple):
    mean_alpha: float
    mean_beta: float


def _as_vec(v) -> np.ndarray:
    return v.array if isinstance(v, UnitVec3) else UnitVec3.from_array(v).array


def _block_sums(family, a, b, omega, seed, block, count):
    stream = RandomStream(seed, block)
    if family == "tb":
        l1 = sample_unit_sphere_batch(stream, count)
        l2 = sample_unit_sphere_batch(stream, count)
        alpha, beta, _ = tb_outputs(a, b, l1, l2)
    else:
        lam = stream.uniform(0.0, 2.0 * math.pi, count)
        alpha, beta, _ = svozil_outputs(a, b, lam, omega)
    alpha = alpha.astype(np.int64)
    beta = beta.astype(np.int64)
    return int(np.sum(alpha * beta)), int(np.sum(alpha)), int(np.sum(beta))


def _run(protocol, a, b, n, seed, omega, workers, block_size=BLOCK_SIZE):
    if n < 1:
        raise ValueError("n must be at least 1")
    family = _family(protocol, omega)
    seed = check_seed(seed)
    if family == "tb":
        a, b = _as_vec(a), _as_vec(b)
    else:
        a, b, omega = angle_value(a), angle_value(b), angle_value(omega)

    def job(jc):
        return _block_sums(family, a, b, omega, seed, jc[0], jc[1])

    blocks = list(block_ranges(n, block_size))
    if workers and workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(jc) for jc in blocks]
    # integer partial sums: combination order cannot change the result
    s_ab = sum(p[0] for p in parts)
    s_a = sum(p[1] for p in parts)
    s_b = sum(p[2] for p in parts)
    return s_ab, s_a, s_b


def _stderr_pm1(total: int, n: int) -> float:
    # samples are +-1, so sum of squares is n
    if n < 2:
        return 0.0
    var = (n - total * total / n) / (n - 1)
    return math.sqrt(max(var, 0.0) / n)


def estimate_correlation(protocol: str, a, b, n: int, seed: int = 0, *,
                         omega: Optional[float] = None, workers: int = 1) -> CorrelationEstimate:
    """Sample mean of alpha*beta over ``n`` rounds with i.i.d. shared randomness.

    ``a``/``b`` are unit vectors for the TB family and plane angles for the
    Svozil family.  The result depends only on ``(seed, n)`` and the settings.
    """
    s_ab, _, _ = _run(protocol, a, b, n, seed, omega, workers)
    return CorrelationEstimate(s_ab / n, _stderr_pm1(s_ab, n), n, check_seed(seed))


def estimate_marginals(protocol: str, a, b, n: int, seed: int = 0, *,
                       omega: Optional[float] = None, workers: int = 1) -> Marginals:
    _, s_a, s_b = _run(protocol, a, b, n, seed, omega, workers)
    return Marginals(s_a / n, s_b / n)


class CurveRow(NamedTuple):
    theta: float
    empirical: float
    analytic: float
    stderr: float
    n: int
    seed: int


def setting_pair(protocol: str, theta: float):
    """Settings at relative angle ``theta``: coplanar in xz for TB, on the circle for Svozil."""
    if protocol.lower() in SPHERE_PROTOCOLS:
        return np.array([0.0, 0.0, 1.0]), np.array([math.sin(theta), 0.0, math.cos(theta)])
    return 0.0, theta


def analytic_correlation(protocol: str, theta, omega=None):
    if _family(protocol, omega) == "tb":
        return -np.cos(theta)
    return svozil_E_analytic(theta, omega)


def scan_curve(protocol: str, theta_grid: Sequence[float], n: int, seed: int = 0, *,
               omega: Optional[float] = None, workers: int = 1) -> list[CurveRow]:
    if len(theta_grid) == 0:
        raise ValueError("theta grid is empty")
    if n < 1:
        raise ValueError("n must be at least 1")
    rows = []
    for theta in theta_grid:
        theta = float(theta)
        a, b = setting_pair(protocol, theta)
        est = estimate_correlation(protocol, a, b, n, seed, omega=omega, workers=workers)
        rows.append(CurveRow(theta, est.mean, float(analytic_correlation(protocol, theta, omega)),
                             est.stderr, n, est.seed))
    return rows


@dataclass(frozen=True)
class CHSHReport:
    E: tuple  # (E_ab, E_ab', E_a'b, E_a'b')
    S_values: tuple  # minus sign on term 0, 1, 2, 3
    S_max: float
    two_term: float  # |E_ab - E_ab'| + |E_a'b - E_a'b'|
    settings: Optional[tuple] = None  # (a, a', b, b')


def chsh(E_ab: float, E_abp: float, E_apb: float, E_apbp: float, settings=None) -> CHSHReport:
    E = tuple(float(e) for e in (E_ab, E_abp, E_apb, E_apbp))
    if any(abs(e) > 1.0 + 1e-9 for e in E):
        raise ValueError(f"correlations must lie in [-1, 1], got {E}")
    total = sum(E)
    S = tuple(total - 2.0 * e for e in E)
    return CHSHReport(E, S, max(abs(s) for s in S),
                      abs(E[0] - E[1]) + abs(E[2] - E[3]), settings)


def chsh_at(protocol: str, settings, *, omega=None, n: Optional[int] = None, seed: int = 0,
            workers: int = 1) -> CHSHReport:
    """CHSH report for coplanar settings ``(a, a', b, b')`` given as angles.

    With ``n`` the four correlations are Monte Carlo estimates, otherwise the
    analytic correlation of the protocol is used.
    """
    a, ap, b, bp = (float(s) for s in settings)
    Es = []
    for x, y in ((a, b), (a, bp), (ap, b), (ap, bp)):
        theta = circular_distance(x, y)
        if n is None:
            Es.append(float(analytic_correlation(protocol, theta, omega)))
        else:
            sa, sb = setting_pair(protocol, theta)
            Es.append(estimate_correlation(protocol, sa, sb, n, seed, omega=omega,
                                           workers=workers).mean)
    return chsh(*Es, settings=(a, ap, b, bp))


def chsh_scan(protocol: str, step: float, *, omega=None, n: Optional[int] = None,
              seed: int = 0, workers: int = 1) -> CHSHReport:
    """Best CHSH report over coplanar settings on a grid of spacing ``step``.

    All four protocols are rotation invariant, so ``a`` is pinned to 0 and
    ``a'``, ``b``, ``b'`` range over the grid.  Correlations are computed once
    per distinct folded angle.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    m = int(math.floor(2.0 * math.pi / step + 1e-9))
    angles = np.arange(m) * step
    folded = np.array([circular_distance(0.0, x) for x in angles])
    keys = np.round(folded / step).astype(int)
    table = {}
    for k in np.unique(keys):
        theta = float(folded[keys == k][0])
        if n is None:
            table[k] = float(analytic_correlation(protocol, theta, omega))
        else:
            sa, sb = setting_pair(protocol, theta)
            table[k] = estimate_correlation(protocol, sa, sb, n, seed, omega=omega,
                                            workers=workers).mean
    E_of = np.array([table[k] for k in keys])

    def E(i, j):
        return E_of[(j - i) % m]

    idx = np.arange(m)
    ap, b, bp = np.meshgrid(idx, idx, idx, indexing="ij")
    e = np.stack([E(0, b), E(0, bp), E(ap, b), E(ap, bp)])
    total = e.sum(axis=0)
    smax = np.max(np.abs(total[None] - 2.0 * e), axis=0)
    best = np.unravel_index(int(np.argmax(smax)), smax.shape)
    i_ap, i_b, i_bp = (int(v) for v in best)
    return chsh(*(float(x) for x in e[:, i_ap, i_b, i_bp]),
                settings=(0.0, float(angles[i_ap]), float(angles[i_b]), float(angles[i_bp])))


__all__ = [
    "CHSHReport", "CorrelationEstimate", "CurveRow", "Marginals", "analytic_correlation",
    "chsh", "chsh_at", "chsh_scan", "estimate_correlation", "estimate_marginals",
    "scan_curve", "setting_pair",
]

