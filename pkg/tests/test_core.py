import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavitytherm import (
    CutoffConstants,
    DomainError,
    ExcludedMode,
    ImageVector,
    InvalidGeometry,
    ModeTriple,
    SumPolicy,
    ThermoPoint,
    mode_weight,
    validate_geometry,
)


class TestValidateGeometry:
    def test_cube(self):
        g = validate_geometry(1, 1, 1)
        assert g.volume == 1.0
        assert g.edge_sum == 3.0

    def test_pizza_box(self):
        g = validate_geometry(1, 100, 100)
        assert g.volume == 10000.0
        assert g.aspect == (100.0, 100.0)

    @pytest.mark.parametrize("bad", [(1, 0, 1), (1, -2, 1), (1, float("nan"), 1),
                                     (1, float("inf"), 1)])
    def test_degenerate(self, bad):
        with pytest.raises(InvalidGeometry):
            validate_geometry(*bad)


class TestModeWeight:
    def test_interior(self):
        assert mode_weight(1, 2, 3) == 2

    def test_face(self):
        assert mode_weight(0, 2, 3) == 1

    def test_axis_cancels(self):
        # TE/TM cancellation removes modes with two zero indices
        assert mode_weight(1, 0, 0) == 0

    def test_origin_excluded(self):
        with pytest.raises(ExcludedMode):
            mode_weight(0, 0, 0)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            mode_weight(-1, 2, 3)

    def test_mode_triple_weight(self):
        assert ModeTriple(0, 1, 1).weight == 1
        assert ModeTriple(2, 1, 1).omega(validate_geometry(1, 1, 1)) == pytest.approx(
            math.pi * math.sqrt(6)
        )


def _full_lattice_weighted(phi, radius):
    """(1/4) sum over the full lattice with the delta-product corrections."""
    total = 0.0
    rng = range(-radius, radius + 1)
    for n1, n2, n3 in itertools.product(rng, rng, rng):
        if n1 == n2 == n3 == 0:
            continue
        corr = 1.0
        if n1 == 0 and n2 == 0:
            corr -= 1.0
        if n2 == 0 and n3 == 0:
            corr -= 1.0
        if n3 == 0 and n1 == 0:
            corr -= 1.0
        total += 0.25 * corr * phi(abs(n1), abs(n2), abs(n3))
    return total


def _octant_weighted(phi, radius):
    total = 0.0
    rng = range(0, radius + 1)
    for n1, n2, n3 in itertools.product(rng, rng, rng):
        if n1 == n2 == n3 == 0:
            continue
        total += mode_weight(n1, n2, n3) * phi(n1, n2, n3)
    return total


@given(st.floats(0.05, 2.0), st.floats(0.1, 3.0))
def test_folding_identity(alpha, beta):
    """Folding the corrected full-lattice sum onto weighted octant triples."""

    def phi(n1, n2, n3):
        r2 = n1 * n1 + beta * n2 * n2 + n3 * n3
        return math.exp(-alpha * r2) + 1.0 / (1.0 + r2)

    assert _full_lattice_weighted(phi, 6) == pytest.approx(
        _octant_weighted(phi, 6), rel=1e-12
    )


@given(
    st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5)).filter(
        lambda t: any(t)
    ),
    st.permutations([0, 1, 2]),
    st.tuples(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.3, 3.0)),
)
def test_omega_permutation_invariance(triple, perm, edges):
    g = validate_geometry(*edges)
    gp = validate_geometry(*(edges[p] for p in perm))
    try:
        m = ModeTriple(*triple)
        mp = ModeTriple(*(triple[p] for p in perm))
    except ExcludedMode:  # pragma: no cover - filtered above
        return
    assert m.omega(g) == pytest.approx(mp.omega(gp), rel=1e-14)


class TestImageVector:
    @given(
        st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)).filter(
            lambda t: any(t)
        ),
        st.tuples(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.2, 5.0)),
    )
    def test_sign_flip_invariance(self, triple, edges):
        g = validate_geometry(*edges)
        u0 = ImageVector(*triple).u(g)
        for signs in itertools.product((-1, 1), repeat=3):
            flipped = ImageVector(*(s * n for s, n in zip(signs, triple)))
            assert flipped.u(g) == u0
        assert u0 > 0

    def test_u_definition(self):
        g = validate_geometry(1.0, 2.0, 3.0)
        assert ImageVector(1, 1, 1).u(g) == pytest.approx(2.0 * math.sqrt(14.0))

    def test_origin_rejected(self):
        with pytest.raises(ExcludedMode):
            ImageVector(0, 0, 0)

    def test_v_scaling(self, cube):
        iv = ImageVector(1, 0, 0)
        assert iv.v(0.5, cube) == pytest.approx(math.pi)


class TestThermoPoint:
    def test_xi_definition(self, cube):
        p = ThermoPoint.from_temperature(1.0 / math.pi, cube)
        assert p.xi == pytest.approx(1.0)

    def test_roundtrip(self):
        g = validate_geometry(2.0, 1.0, 1.0)
        p = ThermoPoint.from_xi(0.7, g)
        assert math.pi * p.T * g.a1 == pytest.approx(0.7, rel=1e-15)

    def test_negative_rejected(self, cube):
        with pytest.raises(DomainError):
            ThermoPoint.from_temperature(-1.0, cube)


class TestPolicyAndCutoffs:
    def test_policy_validation(self):
        with pytest.raises(DomainError):
            SumPolicy(max_shell_radius=0)
        with pytest.raises(DomainError):
            SumPolicy(rel_tol=-1.0)

    def test_policy_tail_coercion(self):
        assert SumPolicy(tail_method="none").tail_method.value == "none"

    def test_cutoff_ordering(self):
        with pytest.raises(DomainError):
            CutoffConstants(v_volume=0.5, v_edge=1.5)
