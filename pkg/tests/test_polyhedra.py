"""Exact cone engine: double description, Fourier-Motzkin, conversions."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from entrocone.causal import build_line_structure, observed_independence_constraints
from entrocone.entropy_space import (CoordinateIndex, _clear_denominators,
                                     elemental_shannon_system, system_rows)
from entrocone.errors import InvalidParameter
from entrocone.polyhedra import (HRep, VRep, cones_equal, dd_project, enumerate_rays,
                                 extremalize, facets_from_rays, fm_eliminate,
                                 membership, primitive, remove_redundancies,
                                 rep_from_json, rep_to_json, rep_to_text)

from conftest import random_cone_hrep
from reference_tables import LINE4_RAYS


def line4_outer_hrep() -> HRep:
    structure = build_line_structure(4)
    observed = structure.observed_ids()
    index = CoordinateIndex(observed)
    _, ineqs = system_rows(elemental_shannon_system(observed))
    eqs = tuple(_clear_denominators(f.row(index))
                for f in observed_independence_constraints(structure))
    return HRep(len(index), eqs, tuple(ineqs), labels=index.labels)


class TestNormalization:
    def test_primitive_scales_and_keeps_direction(self):
        assert primitive((2, -4, 6)) == (1, -2, 3)
        assert primitive((0, -2)) == (0, -1)
        assert primitive((Fraction(1, 2), Fraction(3, 2))) == (1, 3)

    def test_primitive_idempotent(self):
        for vec in [(3, 6, -9), (0, 0, 5), (7,)]:
            assert primitive(primitive(vec)) == primitive(vec)


class TestDoubleDescription:
    def test_positive_orthant(self):
        v = enumerate_rays(HRep(2, inequalities=((1, 0), (0, 1))))
        assert v.rays == ((0, 1), (1, 0))
        assert v.lineality == ()

    def test_halfspace_reports_lineality(self):
        v = enumerate_rays(HRep(2, inequalities=((1, 0),)))
        assert v.rays == ((1, 0),)
        assert v.lineality == ((0, 1),)

    def test_whole_space(self):
        v = enumerate_rays(HRep(3))
        assert v.rays == ()
        assert len(v.lineality) == 3

    def test_point_cone(self):
        v = enumerate_rays(HRep(2, equalities=((1, 0), (0, 1))))
        assert v.rays == () and v.lineality == ()

    def test_simplicial_3d(self):
        h = HRep(3, inequalities=((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        assert enumerate_rays(h).rays == ((0, 0, 1), (0, 1, 0), (1, 0, 0))

    def test_line4_outer_cone_rays(self):
        v = enumerate_rays(line4_outer_hrep())
        assert set(v.rays) == set(LINE4_RAYS.values())
        assert len(v.rays) == 10

    def test_deterministic_output(self):
        h = line4_outer_hrep()
        assert rep_to_text(enumerate_rays(h)) == rep_to_text(enumerate_rays(h))


class TestConversions:
    def test_facets_of_orthant_rays(self):
        h = facets_from_rays(VRep(2, rays=((1, 0), (0, 1))))
        assert set(h.inequalities) == {(1, 0), (0, 1)}
        assert h.equalities == ()

    def test_round_trip_line4(self):
        v = enumerate_rays(line4_outer_hrep())
        again = enumerate_rays(facets_from_rays(v))
        assert again.rays == v.rays

    def test_low_dimensional_cone_gets_equalities(self):
        # a single ray in 3-space: two independent equalities in the H-rep
        h = facets_from_rays(VRep(3, rays=((1, 1, 0),)))
        assert len(h.equalities) == 2
        assert membership(h, (2, 2, 0))
        assert not membership(h, (1, 0, 0))

    def test_round_trip_random(self, rng):
        for _ in range(30):
            h = random_cone_hrep(rng, int(rng.integers(2, 5)), int(rng.integers(1, 7)))
            v = enumerate_rays(h)
            assert cones_equal(h, facets_from_rays(v))


class TestRedundancyRemoval:
    def test_scalar_multiple_dropped(self):
        out = remove_redundancies(HRep(1, inequalities=((1,), (2,))))
        assert out.inequalities == ((1,),)

    def test_sum_dropped(self):
        out = remove_redundancies(HRep(2, inequalities=((1, 0), (0, 1), (1, 1))))
        assert set(out.inequalities) == {(1, 0), (0, 1)}

    def test_line4_redundancy_preserves_cone(self):
        h = line4_outer_hrep()
        out = remove_redundancies(h)
        assert cones_equal(h, out)
        assert len(out.inequalities) == 10

    def test_certificates_are_valid_combinations(self):
        h = HRep(2, inequalities=((1, 0), (0, 1), (1, 1), (2, 0)))
        minimal, certs = remove_redundancies(h, certificates=True)
        assert set(minimal.inequalities) == {(1, 0), (0, 1)}
        for row, cert in zip(h.inequalities, certs):
            assert cert is not None
            lambdas, mus = cert
            assert all(l >= 0 for l in lambdas)
            recon = [0] * 2
            for l, kept in zip(lambdas, minimal.inequalities):
                for i, v in enumerate(kept):
                    recon[i] += l * v
            assert tuple(recon) == tuple(map(Fraction, row))


class TestMembership:
    def test_ray_ii_in_line4_cone(self):
        h = line4_outer_hrep()
        assert membership(h, LINE4_RAYS["ii"])

    def test_negative_entropy_outside(self):
        h = line4_outer_hrep()
        assert not membership(h, (-1,) + (0,) * 14)

    def test_vrep_membership(self):
        v = VRep(2, rays=((1, 0), (1, 1)))
        assert membership(v, (3, 2))
        assert membership(v, (1, 1))
        assert not membership(v, (0, 1))
        assert not membership(v, (-1, 0))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidParameter):
            membership(HRep(2, inequalities=((1, 0),)), (1, 2, 3))
        with pytest.raises(InvalidParameter):
            cones_equal(HRep(2), HRep(3))

    def test_interior_rational_point(self):
        h = line4_outer_hrep()
        point = [Fraction(1, 3) * sum(r[i] for r in LINE4_RAYS.values())
                 for i in range(15)]
        assert membership(h, point)


class TestFourierMotzkin:
    def test_transitivity(self):
        h = HRep(3, inequalities=((-1, 1, 0), (0, -1, 1)))
        out = fm_eliminate(h, [1])
        assert out.inequalities == ((-1, 1),)

    def test_rejects_eliminating_everything(self):
        with pytest.raises(InvalidParameter):
            fm_eliminate(HRep(2, inequalities=((1, 0),)), [0, 1])
        with pytest.raises(InvalidParameter):
            fm_eliminate(HRep(2, inequalities=((1, 0),)), [0, 5])

    def test_equality_substitution_path(self):
        # x = y and x >= 0 projected to y gives y >= 0
        h = HRep(2, equalities=((1, -1),), inequalities=((1, 0),))
        out = fm_eliminate(h, [0])
        assert out.inequalities == ((1,),)
        assert out.equalities == ()

    def test_unbounded_coordinate_drops_rows(self):
        # eliminating x from {x >= y} leaves no constraint on y
        h = HRep(2, inequalities=((1, -1),))
        out = fm_eliminate(h, [0])
        assert out.inequalities == ()
        v = enumerate_rays(out)
        assert len(v.lineality) == 1

    def test_matches_dd_on_random_cones(self, rng):
        for _ in range(60):
            dim = int(rng.integers(3, 7))
            h = random_cone_hrep(rng, dim, int(rng.integers(2, 11)))
            n_drop = int(rng.integers(1, dim - 1))
            coords = sorted(rng.choice(dim, size=n_drop, replace=False).tolist())
            fm = fm_eliminate(h, coords)
            dd = dd_project(h, coords)
            assert cones_equal(fm, dd)

    def test_projection_soundness_sample_points(self, rng):
        # points of the projection lift to points of the original cone:
        # every projected ray must be the shadow of some original ray
        for _ in range(20):
            dim = int(rng.integers(3, 6))
            h = random_cone_hrep(rng, dim, int(rng.integers(2, 8)))
            coords = [int(rng.integers(0, dim))]
            keep = [i for i in range(dim) if i not in coords]
            fm = fm_eliminate(h, coords)
            original = enumerate_rays(h)
            shadows = {primitive(tuple(r[i] for i in keep))
                       for r in original.rays if any(r[i] for i in keep)}
            for line in original.lineality:
                shadow = tuple(line[i] for i in keep)
                if any(shadow):
                    shadows.add(primitive(shadow))
                    shadows.add(primitive(tuple(-v for v in shadow)))
            for ray in enumerate_rays(fm).rays:
                assert membership(VRep(len(keep), tuple(sorted(shadows)),
                                       enumerate_rays(fm).lineality), ray)


class TestExtremalize:
    def test_drops_interior_generators(self):
        v = VRep(2, rays=((1, 0), (0, 1), (1, 1)))
        out = extremalize(v)
        assert set(out.rays) == {(1, 0), (0, 1)}


class TestSerialization:
    def test_json_round_trip_hrep(self):
        h = line4_outer_hrep()
        again = rep_from_json(rep_to_json(h))
        assert isinstance(again, HRep)
        assert again.equalities == h.equalities
        assert again.inequalities == h.inequalities
        assert again.labels == h.labels

    def test_json_round_trip_vrep(self):
        v = enumerate_rays(line4_outer_hrep())
        again = rep_from_json(rep_to_json(v))
        assert isinstance(again, VRep)
        assert again.rays == v.rays

    def test_bad_files_name_the_field(self):
        with pytest.raises(InvalidParameter, match="type"):
            rep_from_json("{}")
        with pytest.raises(InvalidParameter, match="dimension"):
            rep_from_json('{"type": "hrep"}')
        with pytest.raises(InvalidParameter, match=r"rays\[0\]"):
            rep_from_json('{"type": "vrep", "dimension": 2, "rays": [[1]]}')

    def test_text_sections(self):
        text = rep_to_text(line4_outer_hrep())
        assert text.startswith("DIM = 15")
        assert "INEQUALITIES_SECTION" in text
        text_v = rep_to_text(enumerate_rays(line4_outer_hrep()))
        assert "CONE_SECTION" in text_v


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-20, max_value=20), min_size=1, max_size=6))
def test_primitive_idempotent_property(vector):
    assert primitive(primitive(vector)) == primitive(vector)
