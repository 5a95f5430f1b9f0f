"""Imaginary-frequency (Matsubara) form of the difference free energy, its
divergence diagnostics, and the massive-photon regularization.

With the branch selectors forced to zero the thermal sums can be rewritten
as double sums over image vectors and Matsubara indices:

    dF_M = -(2V/pi^2) sum'_n sum_k [ (k/T)^2 + u_n^2 ]^-2
           + sum_axes (a/pi) sum_{n,k>=1} [ (k/T)^2 + u_{n00}^2 ]^-1

(coefficients follow from the partial-fraction expansion of coth; the inner
k-sums have closed forms).  The edge double sums grow logarithmically with
the Matsubara cutoff, the volume double sum grows logarithmically with the
image-lattice cutoff: the form is a diagnostic, not a computational route.
The branch-selected free energy differs from dF_M by the correction sums

    (V/(2 pi)) T sum_{v_n > v_V} u_n^-3  -  (T/4) sum_axes sum_{v > v_E} 1/n,

which diverge with the same lattice cutoff; relation_check evaluates both
sides on one shared image set ("matched truncation") so the residual is a
pure tail and shrinks as the set grows.

Giving the photon a mass makes everything absolutely convergent; at low
temperature the volumetric sum collapses to a single effective mode of
energy m/2 carrying one quarter weight:

    dF_M(m) -> (T/4) ln(1 - exp(-m/(2T)))
    dS_M(m) -> (1/4) [ -ln(1 - e^-x) + x/(e^x - 1) ],  x = m/(2T).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    CavityGeometry,
    ConvergenceFailure,
    CutoffConstants,
    DomainError,
    SumPolicy,
)
from .lattice import _octant_arrays, budget_radius
from .specfun import bessel_k2, g, h
from .thermo import casimir_energy, delta_free_energy


@dataclass(frozen=True)
class DivergenceDiagnostic:
    """Partial sums at increasing truncation plus a c0 + c1*ln(k) fit."""

    partial_values: tuple[tuple[int, float], ...]
    log_fit: tuple[float, float]
    fit_residual: float
    components: dict = field(default_factory=dict)

    @property
    def diverges(self) -> bool:
        spread = abs(self.partial_values[-1][1] - self.partial_values[0][1])
        return abs(self.log_fit[1]) * math.log(2.0) > 4.0 * self.fit_residual and spread > 0


def _log_fit(ks, vals):
    A = np.vstack([np.ones(len(ks)), np.log(ks)]).T
    coef = np.linalg.lstsq(A, np.asarray(vals, dtype=float), rcond=None)[0]
    pred = A @ coef
    resid = float(np.max(np.abs(pred - np.asarray(vals))))
    return (float(coef[0]), float(coef[1])), resid


def _image_set(geometry: CavityGeometry, policy: SumPolicy, radius_scale: float = 1.0):
    q_ref = min(
        policy.max_shell_radius * geometry.a1 * radius_scale,
        budget_radius(geometry),
    )
    q, mult, _, _ = _octant_arrays(*geometry.edges, q_ref)
    return q, mult, q_ref


def _edge_inner_closed(c: float, a: float) -> float:
    """sum_{n>=1} [ c^2 + (2 n a)^2 ]^-1 in closed form (c = k/T)."""
    x = math.pi * c / (2.0 * a)
    e = math.exp(-2.0 * x)
    cothx = (1.0 + e) / (1.0 - e)
    return math.pi / (4.0 * a * c) * cothx - 1.0 / (2.0 * c * c)


def delta_f_matsubara(T: float, geometry: CavityGeometry, k_max: int,
                      policy: SumPolicy) -> DivergenceDiagnostic:
    """Partial sums of dF_M at k in {k_max/4, k_max/2, k_max}.

    Edge parts use the exact inner lattice sums (complete in n) at each k and
    exhibit the logarithmic growth captured by log_fit.  The volume part is
    evaluated on the policy image set, over which its k-sum converges
    absolutely; it is reported separately as a converged value.
    """
    if not (T > 0):
        raise DomainError("delta_f_matsubara requires T > 0")
    if k_max < 8:
        raise DomainError("k_max must be >= 8")
    q, mult, q_ref = _image_set(geometry, policy)
    if q.size == 0:
        raise ConvergenceFailure("empty image set", partial=None)
    u2 = (2.0 * q) ** 2
    V = geometry.volume
    marks = sorted({max(k_max // 4, 1), max(k_max // 2, 1), k_max})

    vol_partials = {}
    edge_partials = {}
    vol = 0.0
    edge = 0.0
    for k in range(1, k_max + 1):
        c2 = (k / T) ** 2
        vol += -(2.0 * V / math.pi**2) * float(np.sum(mult / (c2 + u2) ** 2))
        edge += sum(
            (a / math.pi) * _edge_inner_closed(k / T, a) for a in geometry.edges
        )
        if k in marks:
            vol_partials[k] = vol
            edge_partials[k] = edge

    fit, resid = _log_fit(marks, [edge_partials[k] for k in marks])
    # volume part with the k-sum completed in closed form on the same set
    v = 2.0 * math.pi * T * q
    vol_converged = (math.pi**2 / 2.0) * V * T**4 * float(np.sum(mult * h(v)))
    k_tail = (2.0 * V / math.pi**2) * float(np.sum(mult)) * T**4 / (3.0 * k_max**3)
    return DivergenceDiagnostic(
        partial_values=tuple((k, vol_partials[k] + edge_partials[k]) for k in marks),
        log_fit=fit,
        fit_residual=resid,
        components={
            "edge_partials": tuple((k, edge_partials[k]) for k in marks),
            "volume_partials": tuple((k, vol_partials[k]) for k in marks),
            "volume_converged": vol_converged,
            "volume_k_tail_estimate": k_tail,
            "image_radius": q_ref,
        },
    )


def _correction_sums(T, geometry, cutoffs, q, mult):
    """K-dependent correction sums on a given image set."""
    c0 = 2.0 * math.pi * T
    v = c0 * q
    act = v >= cutoffs.v_volume
    u = 2.0 * q
    vol = (geometry.volume / (2.0 * math.pi)) * T * float(np.sum(mult[act] / u[act] ** 3))
    edge = 0.0
    for a in geometry.edges:
        n_max = int((q[-1] if q.size else 0.0) / a)
        n = np.arange(1, n_max + 1, dtype=np.float64)
        sel = c0 * a * n >= cutoffs.v_edge
        edge += -(T / 4.0) * float(np.sum(1.0 / n[sel]))
    return vol, edge


def relation_check(T: float, geometry: CavityGeometry, cutoffs: CutoffConstants,
                   policy: SumPolicy, k_max: int) -> dict:
    """Residual of dF = dE0 + dF_M + corrections under matched truncations.

    Pairing rule: one image set (radius from the policy) is used for the
    dF_M lattice sums and for the correction sums; the inner Matsubara sums
    are completed in closed form, with the explicit k <= k_max remainder
    reported.  The identity holds in the joint limit only, so residuals are
    reported at the base truncation and with the radius doubled twice.
    """
    if T == 0:
        lhs = delta_free_energy(0.0, geometry, cutoffs, policy)
        return {
            "residuals": [abs(lhs - casimir_energy(geometry))],
            "radii": [0.0],
            "trend": "exact",
        }
    lhs = delta_free_energy(T, geometry, cutoffs, policy)
    dE0 = casimir_energy(geometry)
    residuals = []
    radii = []
    V = geometry.volume
    for scale in (0.25, 0.5, 1.0):
        q, mult, q_ref = _image_set(geometry, policy, radius_scale=scale)
        v = 2.0 * math.pi * T * q
        # k-completed Matsubara values on the set
        vol_M = (math.pi**2 / 2.0) * V * T**4 * float(np.sum(mult * h(v)))
        edge_M = 0.0
        for a in geometry.edges:
            n_max = int(q_ref / a)
            n = np.arange(1, n_max + 1, dtype=np.float64)
            ve = 2.0 * math.pi * T * a * n
            edge_M += (math.pi / 2.0) * T**2 * a * float(np.sum(g(ve) / ve))
        cv, ce = _correction_sums(T, geometry, cutoffs, q, mult)
        rhs = dE0 + vol_M + edge_M + cv + ce
        residuals.append(abs(lhs - rhs))
        radii.append(q_ref)
    # explicit k-truncation remainder of the edge part at the base radius
    k_rem = sum(
        (a / math.pi)
        * sum(_edge_inner_closed(k / T, a) for k in range(1, min(k_max, 64) + 1))
        for a in geometry.edges
    )
    shrinks = residuals[-1] <= residuals[0] * 1.05
    return {
        "residuals": residuals,
        "radii": radii,
        "lhs": lhs,
        "trend": "shrinking" if shrinks else "growing",
        "edge_matsubara_explicit_k": k_rem,
    }


def scale_factor_mu(T: float, geometry: CavityGeometry, cutoffs: CutoffConstants,
                    truncation: int) -> DivergenceDiagnostic:
    """Truncated values of ln(mu / (sqrt(2 pi) T)); a formally divergent
    diagnostic, never consumed by the thermodynamic assembly.

    The exponent is corrections/T: (V/(2 pi)) sum_{v>v_V} u^-3 minus
    (1/4) sum_axes sum_{v>v_E} 1/n.  The volume component alone grows like
    +(1/4) ln R; the edge components together like -(3/4) ln R for a cube,
    so the total fit slope is negative there (both are reported).
    """
    if not (T > 0):
        raise DomainError("scale_factor_mu requires T > 0")
    vals, vols, edges_c, radii = [], [], [], []
    for scale in (1.0, 2.0, 4.0):
        q_ref = min(truncation * geometry.a1 * scale, budget_radius(geometry))
        q, mult, _, _ = _octant_arrays(*geometry.edges, q_ref)
        cv, ce = _correction_sums(T, geometry, cutoffs, q, mult)
        vals.append((cv + ce) / T)
        vols.append(cv / T)
        edges_c.append(ce / T)
        radii.append(int(round(q_ref / geometry.a1)))
    fit, resid = _log_fit(radii, vals)
    fit_vol, _ = _log_fit(radii, vols)
    fit_edge, _ = _log_fit(radii, edges_c)
    return DivergenceDiagnostic(
        partial_values=tuple(zip(radii, vals)),
        log_fit=fit,
        fit_residual=resid,
        components={
            "volume_log_fit": fit_vol,
            "edge_log_fit": fit_edge,
            "volume_partials": tuple(zip(radii, vols)),
            "edge_partials": tuple(zip(radii, edges_c)),
        },
    )


# ---------------------------------------------------------------------------
# massive photon
# ---------------------------------------------------------------------------

def delta_f_massive(T: float, geometry: CavityGeometry, m_gamma: float,
                    k_max: int, policy: SumPolicy) -> float:
    """Volumetric massive-photon free energy (absolutely convergent).

    -(V m^2 / 4 pi^2) sum'_n sum_k K_2((m/2) s_{nk}) / s_{nk}^2 with
    s_{nk}^2 = (k/T)^2 + u_n^2.  The k-sum runs outermost: the Bessel
    argument grows with k, giving a clean termination criterion.
    """
    if not (m_gamma > 0) or not (T > 0):
        raise DomainError("delta_f_massive requires m_gamma > 0 and T > 0")
    # images needed out to (m/2) u ~ 45 + lattice gap
    u_need = (45.0 + m_gamma * min(geometry.edges)) / (m_gamma / 2.0)
    q_ref = min(
        u_need / 2.0,
        policy.max_shell_radius * geometry.a1,
        budget_radius(geometry),
    )
    q, mult, _, _ = _octant_arrays(*geometry.edges, q_ref)
    if q.size == 0:
        raise ConvergenceFailure("empty image set", partial=None)
    u2 = (2.0 * q) ** 2
    V = geometry.volume
    pref = -(V * m_gamma**2 / (4.0 * math.pi**2))
    total = 0.0
    for k in range(1, k_max + 1):
        s2 = (k / T) ** 2 + u2
        arg = (m_gamma / 2.0) * np.sqrt(s2)
        keep = arg < 700.0
        if not keep.any():
            break
        term = pref * float(np.sum(mult[keep] * bessel_k2(arg[keep]) / s2[keep]))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and k >= 4:
            break
    else:
        if (m_gamma / 2.0) * (k_max / T) < 40.0:
            raise ConvergenceFailure(
                "k_max too small for the requested mass/temperature", partial=total
            )
    return total


def low_t_massive_free_energy(T: float, m_gamma: float) -> float:
    """Low-temperature closed form (T/4) ln(1 - exp(-m/(2T)))."""
    if not (m_gamma > 0) or not (T > 0):
        raise DomainError("requires m_gamma > 0 and T > 0")
    return (T / 4.0) * math.log1p(-math.exp(-m_gamma / (2.0 * T)))


def delta_s_massive_closed_form(T: float, m_gamma: float) -> float:
    """Massive-photon entropy in the low-temperature regime.

    One quarter of the single-oscillator entropy at energy m/2:
    (1/4)[-ln(1 - e^-x) + x/(e^x - 1)], x = m/(2T).  Non-negative and
    vanishing for T -> 0; stable for large x (both terms underflow to 0).
    """
    if not (m_gamma > 0) or not (T > 0):
        raise DomainError("requires m_gamma > 0 and T > 0")
    x = m_gamma / (2.0 * T)
    e = math.exp(-x)
    return 0.25 * (-math.log1p(-e) + x * e / (1.0 - e))
