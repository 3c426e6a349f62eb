"""Tests for diagram types, region counts, bottleneck distance and compactness diagnostics."""

import math

import numpy as np
import pytest

from persistence_templates.core.diagrams import (
    bottleneck_distance,
    compactness_diagnostics,
    from_birth_lifetime,
    multiplicity_in_region,
    to_birth_lifetime,
)
from persistence_templates.exceptions import InvalidDiagramError
from persistence_templates.models.diagram import DiagramPoint, PersistenceDiagram, WedgeRegion

from .oracles import brute_force_bottleneck


def random_diagram(rng: np.random.Generator, size: int) -> PersistenceDiagram:
    births = rng.uniform(0.0, 2.0, size=size)
    lifetimes = rng.uniform(0.05, 2.0, size=size)
    return PersistenceDiagram.from_pairs(np.column_stack([births, births + lifetimes]))


class TestDiagramModel:
    """Construction rules of points and diagrams."""

    @pytest.mark.smoke
    @pytest.mark.unit
    def test_point_must_lie_above_diagonal(self):
        with pytest.raises(InvalidDiagramError):
            DiagramPoint(1.0, 1.0)
        with pytest.raises(InvalidDiagramError):
            DiagramPoint(2.0, 1.0)

    @pytest.mark.unit
    def test_point_rejects_bad_values(self):
        with pytest.raises(InvalidDiagramError):
            DiagramPoint(-0.1, 1.0)
        with pytest.raises(InvalidDiagramError):
            DiagramPoint(0.0, math.inf)
        with pytest.raises(InvalidDiagramError):
            DiagramPoint(0.0, 1.0, 0)
        with pytest.raises(InvalidDiagramError):
            DiagramPoint(0.0, 1.0, 1.5)

    @pytest.mark.unit
    def test_repeated_points_aggregate(self):
        diagram = PersistenceDiagram.from_pairs([(1.0, 2.0), (0.0, 1.0), (0.0, 1.0)])
        assert len(diagram) == 2
        assert diagram.total_multiplicity == 3
        assert diagram.points[0] == DiagramPoint(0.0, 1.0, 2)

    @pytest.mark.unit
    def test_equality_ignores_input_order(self):
        first = PersistenceDiagram.from_pairs([(0.0, 1.0), (1.0, 3.0)])
        second = PersistenceDiagram.from_pairs([(1.0, 3.0), (0.0, 1.0)])
        assert first == second
        assert hash(first) == hash(second)

    @pytest.mark.unit
    def test_multiplicity_count_must_match(self):
        with pytest.raises(InvalidDiagramError):
            PersistenceDiagram.from_pairs([(0.0, 1.0)], [1, 2])

    @pytest.mark.unit
    def test_empty_diagram(self):
        diagram = PersistenceDiagram.empty(1)
        assert diagram.is_empty
        assert diagram.max_persistence == 0.0
        assert diagram.expanded().shape == (0, 2)
        assert diagram.homology_dimension == 1

    @pytest.mark.unit
    def test_union_adds_multiplicities(self, small_diagram):
        doubled = small_diagram.union(small_diagram)
        assert doubled.total_multiplicity == 2 * small_diagram.total_multiplicity
        assert len(doubled) == len(small_diagram)

    @pytest.mark.unit
    def test_expanded_repeats_points(self, small_diagram):
        expanded = small_diagram.expanded()
        assert expanded.shape == (4, 2)
        assert sum(1 for row in expanded if tuple(row) == (1.0, 3.0)) == 2


class TestCoordinates:
    """Birth-lifetime coordinates and region counts."""

    @pytest.mark.unit
    def test_birth_lifetime_coordinates(self, small_diagram):
        assert to_birth_lifetime(small_diagram) == [
            (0.0, 1.0, 1),
            (0.5, 1.0, 1),
            (1.0, 2.0, 2),
        ]

    @pytest.mark.unit
    def test_birth_lifetime_inverse(self, small_diagram):
        assert from_birth_lifetime(to_birth_lifetime(small_diagram)) == small_diagram

    @pytest.mark.unit
    def test_from_birth_lifetime_rejects_zero_lifetime(self):
        with pytest.raises(InvalidDiagramError):
            from_birth_lifetime([(1.0, 0.0)])

    @pytest.mark.unit
    def test_multiplicity_in_region(self, small_diagram):
        assert multiplicity_in_region(small_diagram, WedgeRegion.whole_wedge()) == 4
        assert multiplicity_in_region(small_diagram, WedgeRegion.closed_above(1.5)) == 2
        # Exclusive bound drops the points born exactly at 0
        region = WedgeRegion(birth_min=0.0, birth_min_inclusive=False)
        assert multiplicity_in_region(small_diagram, region) == 3
        assert multiplicity_in_region(PersistenceDiagram.empty(), region) == 0

    @pytest.mark.unit
    def test_region_bounds_are_checked(self):
        with pytest.raises(InvalidDiagramError):
            WedgeRegion(birth_min=2.0, birth_max=1.0)
        with pytest.raises(InvalidDiagramError):
            WedgeRegion(lifetime_min=-1.0)

    @pytest.mark.unit
    def test_region_counts_add_over_disjoint_pieces(self, rng):
        for _ in range(20):
            diagram = random_diagram(rng, 12)
            diagram = PersistenceDiagram.from_pairs(
                [(p.birth, p.death) for p in diagram.points], rng.integers(1, 5, size=len(diagram))
            )
            total = multiplicity_in_region(diagram, WedgeRegion.whole_wedge())
            cut_l, cut_b = rng.uniform(0.05, 2.0), rng.uniform(0.0, 2.0)
            lower = {
                "lifetime_max": cut_l,
                "lifetime_min_inclusive": False,
                "lifetime_max_inclusive": False,
            }
            upper = {"lifetime_min": cut_l}
            left = {"birth_max": cut_b, "birth_max_inclusive": False}
            right = {"birth_min": cut_b}
            pieces = [
                WedgeRegion(**side, **band) for side in (left, right) for band in (lower, upper)
            ]
            assert sum(multiplicity_in_region(diagram, piece) for piece in pieces) == total

    @pytest.mark.unit
    def test_region_counts_grow_with_the_region(self, rng):
        diagram = random_diagram(rng, 40)
        previous = 0
        for size in np.linspace(0.1, 4.0, 20):
            region = WedgeRegion(birth_max=size, lifetime_max=size)
            count = multiplicity_in_region(diagram, region)
            assert count >= previous
            previous = count
        assert previous == 40
        counts = [
            multiplicity_in_region(diagram, WedgeRegion.closed_above(eps))
            for eps in np.linspace(0.0, 2.5, 26)
        ]
        assert counts[0] == 40 and counts[-1] == 0
        assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))


class TestBottleneck:
    """Exact bottleneck distance."""

    @pytest.mark.smoke
    @pytest.mark.unit
    def test_empty_diagrams(self):
        empty = PersistenceDiagram.empty()
        assert bottleneck_distance(empty, empty) == 0.0

    @pytest.mark.unit
    def test_single_point_against_empty(self):
        diagram = PersistenceDiagram.from_pairs([(0.0, 2.0)])
        assert bottleneck_distance(diagram, PersistenceDiagram.empty()) == pytest.approx(1.0)
        assert bottleneck_distance(PersistenceDiagram.empty(), diagram) == pytest.approx(1.0)

    @pytest.mark.unit
    def test_nearby_points_match_each_other(self):
        first = PersistenceDiagram.from_pairs([(0.0, 2.0)])
        second = PersistenceDiagram.from_pairs([(0.0, 3.0)])
        assert bottleneck_distance(first, second) == pytest.approx(1.0)

    @pytest.mark.unit
    def test_extra_copy_goes_to_diagonal(self):
        first = PersistenceDiagram.from_pairs([(0.0, 2.0)], [2])
        second = PersistenceDiagram.from_pairs([(0.0, 2.0)])
        assert bottleneck_distance(first, second) == pytest.approx(1.0)

    @pytest.mark.unit
    def test_identical_diagrams(self, small_diagram):
        assert bottleneck_distance(small_diagram, small_diagram) == 0.0

    @pytest.mark.unit
    def test_agrees_with_brute_force(self, rng):
        for _ in range(15):
            first = random_diagram(rng, int(rng.integers(0, 4)))
            second = random_diagram(rng, int(rng.integers(0, 4)))
            expected = brute_force_bottleneck(first, second)
            assert bottleneck_distance(first, second) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.unit
    def test_metric_properties(self, rng):
        diagrams = [random_diagram(rng, 3) for _ in range(4)]
        for a in diagrams:
            for b in diagrams:
                d_ab = bottleneck_distance(a, b)
                assert d_ab == pytest.approx(bottleneck_distance(b, a))
                for c in diagrams:
                    through = bottleneck_distance(a, c) + bottleneck_distance(c, b)
                    assert d_ab <= through + 1e-12


class TestCompactness:
    """Boundedness constants of diagram collections."""

    @pytest.fixture
    def collection(self):
        return [
            PersistenceDiagram.from_pairs([(0.0, 1.0), (1.0, 3.0)]),
            PersistenceDiagram.from_pairs([(0.5, 1.5)], [3]),
            PersistenceDiagram.empty(),
        ]

    @pytest.mark.unit
    def test_constants(self, collection):
        report = compactness_diagnostics(collection, [0.5, 1.5])
        assert report.bound_C == pytest.approx(1.0)
        assert report.birth_bounds_C_eps == (1.0, 1.0)
        assert report.mult_bounds_M_eps == (3, 1)
        assert report.min_positive_lifetime == pytest.approx(1.0)
        assert report.n_diagrams == 3

    @pytest.mark.unit
    def test_bounds_do_not_grow_with_epsilon(self, rng):
        collection = [random_diagram(rng, int(rng.integers(0, 15))) for _ in range(30)]
        report = compactness_diagnostics(collection, np.linspace(0.05, 2.5, 25))
        for bounds in (report.birth_bounds_C_eps, report.mult_bounds_M_eps):
            assert all(later <= earlier for earlier, later in zip(bounds, bounds[1:]))
        assert report.mult_bounds_M_eps[-1] == 0
        assert report.mult_bounds_M_eps[0] == max(len(D) for D in collection)

    @pytest.mark.unit
    def test_bounding_box(self, collection):
        box = compactness_diagnostics(collection, [0.5]).bounding_box
        assert (box.birth_min, box.birth_max) == (0.0, 1.0)
        assert (box.lifetime_min, box.lifetime_max) == (1.0, 2.0)

    @pytest.mark.unit
    def test_all_empty_collection(self):
        report = compactness_diagnostics([PersistenceDiagram.empty()], [1.0])
        assert report.bound_C == 0.0
        assert report.mult_bounds_M_eps == (0,)
        assert math.isinf(report.min_positive_lifetime)

    @pytest.mark.unit
    def test_invalid_inputs(self, collection):
        with pytest.raises(InvalidDiagramError):
            compactness_diagnostics([], [1.0])
        with pytest.raises(InvalidDiagramError):
            compactness_diagnostics(collection, [1.0, 0.5])
        with pytest.raises(InvalidDiagramError):
            compactness_diagnostics(collection, [0.0])
