"""Shared domain types, the reduced-unit convention, and validation.

All internal computation uses absolute lengths and temperature in natural
units (hbar = c = k_B = 1).  Dimensionless outputs follow the reporting
conventions xi = pi*T*a1, f = pi*a1*F, s = S, e = pi*a1*E, p_i = pi*a1^4*P_i
and are produced only at the reporting boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class CavityThermError(Exception):
    """Base class for all package errors."""


class InvalidGeometry(CavityThermError):
    pass


class ExcludedMode(CavityThermError):
    """The (0,0,0) index triple is never a cavity mode."""


class DomainError(CavityThermError):
    pass


class ConvergenceFailure(CavityThermError):
    """A lattice sum did not meet its tolerance.  Carries the partial result."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class QuadratureFailure(CavityThermError):
    pass


class RootFailure(CavityThermError):
    pass


class BranchBoundary(CavityThermError):
    """Evaluation requested too close to a temperature where the active set changes."""

    def __init__(self, message, xi_crossing=None):
        super().__init__(message)
        self.xi_crossing = xi_crossing


class NumericalFailure(CavityThermError):
    pass


class TailBoundTooLarge(CavityThermError):
    pass


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CavityGeometry:
    """Rectangular box with perfectly conducting walls; edge lengths a1, a2, a3 > 0."""

    a1: float
    a2: float
    a3: float

    @property
    def volume(self) -> float:
        return self.a1 * self.a2 * self.a3

    @property
    def edge_sum(self) -> float:
        return self.a1 + self.a2 + self.a3

    @property
    def edges(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    @property
    def aspect(self) -> tuple[float, float]:
        """Aspect ratios (a2/a1, a3/a1)."""
        return (self.a2 / self.a1, self.a3 / self.a1)


def validate_geometry(a1: float, a2: float, a3: float) -> CavityGeometry:
    for name, a in (("a1", a1), ("a2", a2), ("a3", a3)):
        if not isinstance(a, (int, float)) or isinstance(a, bool):
            raise InvalidGeometry(f"{name} must be a real number, got {a!r}")
        if not math.isfinite(a) or a <= 0:
            raise InvalidGeometry(f"{name} must be positive and finite, got {a!r}")
    return CavityGeometry(float(a1), float(a2), float(a3))


# ---------------------------------------------------------------------------
# modes and image vectors
# ---------------------------------------------------------------------------

def mode_weight(n1: int, n2: int, n3: int) -> int:
    """Polarization weight of the cavity mode (n1, n2, n3).

    Two transverse polarizations exist when all indices are nonzero; exactly
    one survives when a single index vanishes; modes with two or more zero
    indices cancel between the TE and TM families.
    """
    ns = (n1, n2, n3)
    if any(n < 0 or n != int(n) for n in ns):
        raise DomainError(f"mode indices must be non-negative integers, got {ns}")
    zeros = sum(1 for n in ns if n == 0)
    if zeros == 3:
        raise ExcludedMode("(0,0,0) is not a cavity mode")
    if zeros == 0:
        return 2
    if zeros == 1:
        return 1
    return 0


@dataclass(frozen=True)
class ModeTriple:
    n1: int
    n2: int
    n3: int
    weight: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "weight", mode_weight(self.n1, self.n2, self.n3))

    def omega(self, geometry: CavityGeometry) -> float:
        return math.pi * math.sqrt(
            (self.n1 / geometry.a1) ** 2
            + (self.n2 / geometry.a2) ** 2
            + (self.n3 / geometry.a3) ** 2
        )


@dataclass(frozen=True)
class ImageVector:
    """Full-lattice image index (n1, n2, n3) != 0 with separation u = 2|n.a|."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        if self.n1 == self.n2 == self.n3 == 0:
            raise ExcludedMode("the origin is excluded from image sums")

    def u(self, geometry: CavityGeometry) -> float:
        return 2.0 * math.sqrt(
            (self.n1 * geometry.a1) ** 2
            + (self.n2 * geometry.a2) ** 2
            + (self.n3 * geometry.a3) ** 2
        )

    def v(self, temperature: float, geometry: CavityGeometry) -> float:
        """Dimensionless v = pi*T*u."""
        return math.pi * temperature * self.u(geometry)


@dataclass(frozen=True)
class ThermoPoint:
    """Temperature plus its dimensionless form xi = pi*T*a1."""

    T: float
    xi: float

    @classmethod
    def from_temperature(cls, T: float, geometry: CavityGeometry) -> "ThermoPoint":
        if T < 0 or not math.isfinite(T):
            raise DomainError(f"temperature must be >= 0 and finite, got {T}")
        return cls(T=float(T), xi=math.pi * T * geometry.a1)

    @classmethod
    def from_xi(cls, xi: float, geometry: CavityGeometry) -> "ThermoPoint":
        if xi < 0 or not math.isfinite(xi):
            raise DomainError(f"xi must be >= 0 and finite, got {xi}")
        return cls(T=xi / (math.pi * geometry.a1), xi=float(xi))


# ---------------------------------------------------------------------------
# summation policy and cutoffs
# ---------------------------------------------------------------------------

class TailMethod(Enum):
    NONE = "none"
    CONTINUUM_INTEGRAL = "continuum_integral"
    EXTRAPOLATION = "extrapolation"


@dataclass(frozen=True)
class SumPolicy:
    """Truncation and tolerance control for every lattice sum.

    max_shell_radius is the image-lattice ball radius in units of a1 (shells
    are ordered by the metric q = sqrt(sum n_i^2 a_i^2), i.e. q <= R*a1).
    Results whose estimated truncation error exceeds rel_tol times the
    partial-sum magnitude are rejected with ConvergenceFailure.
    """

    max_shell_radius: int = 400
    rel_tol: float = 1e-6
    tail_method: TailMethod = TailMethod.CONTINUUM_INTEGRAL

    def __post_init__(self):
        if self.max_shell_radius < 1:
            raise DomainError("max_shell_radius must be >= 1")
        if not (self.rel_tol > 0):
            raise DomainError("rel_tol must be positive")
        if not isinstance(self.tail_method, TailMethod):
            object.__setattr__(self, "tail_method", TailMethod(self.tail_method))


@dataclass(frozen=True)
class CutoffConstants:
    """Infrared thresholds fixed by the vanishing of the entropy at T = 0.

    v_volume is the root of G(v) = 0 and v_edge the root of G(v) = -1;
    v_edge < v_volume.
    """

    v_volume: float
    v_edge: float

    def __post_init__(self):
        if not (0 < self.v_edge < self.v_volume):
            raise DomainError(
                f"cutoffs must satisfy 0 < v_edge < v_volume, got {self}"
            )


# ---------------------------------------------------------------------------
# report container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantityParts:
    total: float
    blackbody: float
    delta: float


@dataclass(frozen=True)
class BranchSignature:
    """Which image vectors count as infrared at this temperature.

    Volume images with v_n > v_volume and edge images with v_n > v_edge are
    'active'.  Activation is equivalent to q > q_threshold, so the signature
    is summarized by the thresholds and the active counts within the
    truncation radius; it grows monotonically with temperature.
    """

    volume_threshold_q: float
    edge_threshold_q: tuple[float, float, float]
    volume_active_count: int
    edge_active_count: tuple[int, int, int]
    truncation_q: float

    def contains(self, other: "BranchSignature") -> bool:
        """True if this signature includes every active image of `other`."""
        return (
            self.volume_threshold_q <= other.volume_threshold_q
            and all(
                s <= o
                for s, o in zip(self.edge_threshold_q, other.edge_threshold_q)
            )
        )


@dataclass(frozen=True)
class ThermoReport:
    """Dimensionless thermodynamic state at one (geometry, temperature) point.

    Conventions: xi = pi*T*a1, f = pi*a1*F, s = S, e = pi*a1*E,
    c_v = C_V, p_i = pi*a1^4*P_i.  Each quantity carries its blackbody and
    difference parts with total = blackbody + delta exactly by construction.
    """

    xi: float
    f: QuantityParts
    s: QuantityParts
    e: QuantityParts
    c_v: QuantityParts
    p1: QuantityParts
    p2: QuantityParts
    p3: QuantityParts
    branch_signature: BranchSignature
    branch_id: int
