"""Infrared anchoring: the G integral, its roots, and the branch selectors.

G(v0) = int_0^v0 (coth v - 1/v)/v dv + int_v0^inf (coth v - 1/v - 1)/v dv
is monotonically increasing; the thresholds v_volume (root of G = 0) and
v_edge (root of G = -1) make the entropy vanish at zero temperature.  The
step selectors K_V(v) = Theta(v - v_volume), K_E(v) = Theta(v - v_edge) are
closed on the right so branch assignments are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .core import CutoffConstants, DomainError, QuadratureFailure, RootFailure
from .specfun import cothm1, g

_TAIL_SPLIT = 40.0  # beyond this coth(v)-1 < 4e-35; the 1/v^2 piece is exact


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def G_detailed(v0: float, abs_tol: float = 1e-11) -> QuadratureResult:
    """Two-piece adaptive quadrature of G(v0) with an error estimate."""
    if not (v0 > 0) or not math.isfinite(v0):
        raise DomainError(f"v0 must be positive and finite, got {v0}")

    def low(v):
        # (coth v - 1/v)/v; series-backed g handles v -> 0
        return g(v) / v if v > 0 else 1.0 / 3.0

    def high(v):
        return cothm1(v) / v - 1.0 / (v * v)

    neval = 0
    if v0 <= _TAIL_SPLIT:
        i1, e1, info1 = integrate.quad(low, 0.0, v0, epsabs=abs_tol / 4,
                                       epsrel=1e-13, limit=300, full_output=True)[:3]
        i2, e2, info2 = integrate.quad(high, v0, _TAIL_SPLIT, epsabs=abs_tol / 4,
                                       epsrel=1e-13, limit=300, full_output=True)[:3]
        neval = info1["neval"] + info2["neval"]
        # exact integral of the -1/v^2 remainder on [split, inf); the dropped
        # (coth-1)/v piece there is below 2e-36 and enters the error estimate
        tail = -1.0 / _TAIL_SPLIT
        bound = 2.0 * math.exp(-2.0 * _TAIL_SPLIT)
        value = i1 + i2 + tail
        err = e1 + e2 + bound
    else:
        i1, e1, info1 = integrate.quad(low, 0.0, v0, epsabs=abs_tol / 2,
                                       epsrel=1e-13, limit=300, full_output=True)[:3]
        neval = info1["neval"]
        tail = -1.0 / v0
        bound = 2.0 * math.exp(-2.0 * v0)
        value = i1 + tail
        err = e1 + bound
    if err > abs_tol:
        raise QuadratureFailure(
            f"G({v0}) quadrature error {err:.2e} exceeds tolerance {abs_tol:.2e}"
        )
    return QuadratureResult(value, err, neval)


def G(v0: float) -> float:
    """The infrared anchoring integral (absolute accuracy 1e-11)."""
    return G_detailed(v0).value


@lru_cache(maxsize=8)
def solve_cutoffs(tolerance: float = 1e-9) -> CutoffConstants:
    """Roots v_volume of G = 0 and v_edge of G = -1, bracketed then refined."""
    if not (0 < tolerance <= 1e-6):
        raise DomainError(f"tolerance must be in (0, 1e-6], got {tolerance}")
    try:
        v_volume = optimize.brentq(G, 1.2, 2.4, xtol=tolerance * 1e-3, rtol=8.9e-16)
        v_edge = optimize.brentq(
            lambda v: G(v) + 1.0, 0.35, 1.0, xtol=tolerance * 1e-3, rtol=8.9e-16
        )
    except ValueError as exc:  # pragma: no cover - monotonicity precludes it
        raise RootFailure(f"bracketing failed: {exc}") from exc
    if abs(G(v_volume)) > tolerance or abs(G(v_edge) + 1.0) > tolerance:
        raise RootFailure("root residual exceeds the requested tolerance")
    return CutoffConstants(v_volume=v_volume, v_edge=v_edge)


def K_V(v, cutoffs: CutoffConstants):
    """Volume branch selector Theta(v - v_volume), closed on the right."""
    v = np.asarray(v, dtype=float)
    out = (v >= cutoffs.v_volume).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def K_E(v, cutoffs: CutoffConstants):
    """Edge branch selector Theta(v - v_edge), closed on the right."""
    v = np.asarray(v, dtype=float)
    out = (v >= cutoffs.v_edge).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def zero_temperature_entropy(cutoffs: CutoffConstants) -> float:
    """Continuum zero-temperature entropy -G(v_volume)/4 - 3(1 + G(v_edge))/4.

    Vanishes by construction of the cutoffs; exposed so the anchoring can be
    asserted directly.
    """
    return -G(cutoffs.v_volume) / 4.0 - 3.0 * (1.0 + G(cutoffs.v_edge)) / 4.0
