"""World model: parsing, validation, taxonomy, surface points, rasterization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rosme.errors import ParseError, UnknownClass, ValidationError
from rosme.worldmodel import (
    ObjectInstance,
    Predicate,
    SemanticMap,
    Taxonomy,
    WorldSpec,
    groundtruth_map,
    parse_world,
    predicates_for,
    serialize_world,
    world_to_cell,
)

TAX = Taxonomy(
    parent={
        "chair": "furniture",
        "table": "furniture",
        "furniture": "object",
        "laptop": "accessories",
        "accessories": "object",
    }
)


def make_world(objects=(), width=100, height=100, walls=None, taxonomy=TAX):
    if walls is None:
        walls = np.zeros((height, width), dtype=bool)
    spec = WorldSpec(
        name="test",
        resolution=0.05,
        width=width,
        height=height,
        walls=walls,
        objects=tuple(objects),
        taxonomy=taxonomy,
    )
    spec.validate()
    return spec


def world_text(body: str) -> str:
    return "rosme-world v1\n" + body


MINIMAL = world_text(
    """
[grid]
width = 10
height = 10
resolution = 0.05

[walls]
"""
    + "10.\n" * 10
    + "\n[taxonomy]\n"
)


class TestParse:
    def test_minimal_world(self):
        spec = parse_world(MINIMAL)
        assert (spec.width, spec.height) == (10, 10)
        assert spec.resolution == 0.05
        assert not spec.walls.any()
        assert spec.objects == ()

    def test_missing_header(self):
        with pytest.raises(ParseError):
            parse_world("[grid]\nwidth = 1\n")

    def test_wrong_version(self):
        with pytest.raises(ParseError):
            parse_world("rosme-world v2\n[grid]\n")

    def test_unknown_section(self):
        with pytest.raises(ValidationError, match="unknown section"):
            parse_world(MINIMAL + "\n[physics]\ngravity = 9.8\n")

    def test_unknown_grid_key(self):
        bad = MINIMAL.replace("resolution = 0.05", "resolution = 0.05\nodor = bad")
        with pytest.raises(ValidationError, match="odor"):
            parse_world(bad)

    def test_unknown_object_key(self):
        bad = MINIMAL + (
            "\n[object]\nid = 1\nclass = object\nx = 0.2\ny = 0.2\n"
            "theta = 0\nw = 0.1\nh = 0.1\ncolor = red\n"
        )
        with pytest.raises(ValidationError, match="color"):
            parse_world(bad)

    def test_missing_object_key(self):
        bad = MINIMAL + "\n[object]\nid = 1\nclass = object\n"
        with pytest.raises(ParseError, match="missing"):
            parse_world(bad)

    def test_walls_row_count_mismatch(self):
        bad = MINIMAL.replace("10.\n" * 10, "10.\n" * 9)
        with pytest.raises(ParseError, match="rows"):
            parse_world(bad)

    def test_walls_row_width_mismatch(self):
        bad = MINIMAL.replace("10.\n" * 10, "10.\n" * 9 + "9.\n")
        with pytest.raises(ParseError):
            parse_world(bad)

    def test_walls_bad_char(self):
        bad = MINIMAL.replace("10.\n" * 10, "10.\n" * 9 + "5.x4.\n")
        with pytest.raises(ParseError):
            parse_world(bad)

    def test_rle_mixed_runs(self):
        txt = world_text(
            "\n[grid]\nwidth = 8\nheight = 2\nresolution = 0.1\n"
            "\n[walls]\n#6.#\n2#.4#.\n\n[taxonomy]\n"
        )
        spec = parse_world(txt)
        np.testing.assert_array_equal(
            spec.walls,
            [
                [1, 0, 0, 0, 0, 0, 0, 1],
                [1, 1, 0, 1, 1, 1, 1, 0],
            ],
        )

    def test_unknown_class_rejected(self):
        bad = MINIMAL + (
            "\n[object]\nid = 1\nclass = hoverboard\nx = 0.25\ny = 0.25\n"
            "theta = 0\nw = 0.1\nh = 0.1\n"
        )
        with pytest.raises(UnknownClass, match="hoverboard"):
            parse_world(bad)

    def test_content_before_section(self):
        with pytest.raises(ParseError):
            parse_world("rosme-world v1\nwidth = 3\n")

    def test_taxonomy_line_without_arrow(self):
        bad = MINIMAL + "\n[taxonomy]\nchair furniture\n"
        with pytest.raises(ParseError):
            parse_world(bad)

    def test_two_parents_rejected(self):
        bad = MINIMAL + "\n[taxonomy]\nchair < furniture\nchair < object\n"
        with pytest.raises(ValidationError, match="two parents"):
            parse_world(bad)


class TestRoundTrip:
    def test_minimal_roundtrip(self):
        spec = parse_world(MINIMAL, name="w")
        again = parse_world(serialize_world(spec), name="w")
        assert again == spec

    def test_roundtrip_with_objects_and_walls(self):
        walls = np.zeros((40, 60), dtype=bool)
        walls[0, :] = walls[-1, :] = walls[:, 0] = walls[:, -1] = True
        walls[20, 10:30] = True
        spec = make_world(
            objects=[
                ObjectInstance(1, "chair", 1.0, 0.5, 0.0, 0.4, 0.4),
                ObjectInstance(2, "laptop", 2.0, 1.5, math.pi / 2, 0.3, 0.2),
            ],
            width=60,
            height=40,
            walls=walls,
        )
        again = parse_world(serialize_world(spec), name="test")
        assert again == spec
        np.testing.assert_array_equal(again.occ_id, spec.occ_id)

    @given(
        w=st.integers(4, 30),
        h=st.integers(4, 30),
        seed=st.integers(0, 2**31),
    )
    @settings(max_examples=40, deadline=None)
    def test_roundtrip_random_walls(self, w, h, seed):
        rng = np.random.default_rng(seed)
        walls = rng.random((h, w)) < 0.3
        spec = make_world(width=w, height=h, walls=walls)
        assert parse_world(serialize_world(spec), name="test") == spec


class TestValidation:
    def test_duplicate_ids(self):
        with pytest.raises(ValidationError, match="duplicate"):
            make_world(
                [
                    ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.3, 0.3),
                    ObjectInstance(1, "table", 3.0, 3.0, 0.0, 0.3, 0.3),
                ]
            )

    def test_out_of_bounds(self):
        with pytest.raises(ValidationError, match="outside"):
            make_world([ObjectInstance(1, "chair", 0.05, 0.05, 0.0, 0.5, 0.5)])

    def test_object_on_wall(self):
        walls = np.zeros((100, 100), dtype=bool)
        walls[20, :] = True
        with pytest.raises(ValidationError, match="wall"):
            make_world(
                [ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5)], walls=walls
            )

    def test_objects_overlap(self):
        with pytest.raises(ValidationError, match="overlaps object"):
            make_world(
                [
                    ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5),
                    ObjectInstance(2, "table", 1.2, 1.2, 0.0, 0.5, 0.5),
                ]
            )

    def test_adjacent_objects_ok(self):
        # Sharing a boundary is not overlap: footprints are half-open.
        make_world(
            [
                ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5),
                ObjectInstance(2, "table", 1.5, 1.0, 0.0, 0.5, 0.5),
            ]
        )

    def test_non_axis_aligned_theta(self):
        with pytest.raises(ValidationError, match="pi/2"):
            ObjectInstance(1, "chair", 1.0, 1.0, math.pi / 4, 0.5, 0.5)

    def test_nonpositive_footprint(self):
        with pytest.raises(ValidationError):
            ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.0, 0.5)

    def test_taxonomy_cycle(self):
        tax = Taxonomy(parent={"a": "b", "b": "a"})
        with pytest.raises(ValidationError, match="cycle"):
            tax.validate()

    def test_taxonomy_dangling_parent(self):
        tax = Taxonomy(parent={"a": "ghost"})
        with pytest.raises(ValidationError):
            tax.validate()


class TestTaxonomy:
    def test_chair_chain(self):
        assert TAX.chain("chair") == ["chair", "furniture", "object"]

    def test_root_chain(self):
        assert TAX.chain("object") == ["object"]

    def test_unknown_class(self):
        with pytest.raises(UnknownClass):
            TAX.chain("hoverboard")

    def test_leaf_classes(self):
        assert TAX.leaf_classes() == ["chair", "laptop", "table"]

    def test_contains(self):
        assert "chair" in TAX
        assert "object" in TAX
        assert "hoverboard" not in TAX


class TestPredicates:
    def test_chair_predicate_set(self):
        preds = predicates_for(7, "chair", TAX)
        assert preds == {
            Predicate("instance-of", "7", "chair"),
            Predicate("is-a", "chair", "furniture"),
            Predicate("is-a", "furniture", "object"),
        }

    def test_laptop_chain_count(self):
        # P_G(n) = 1 + chain length above the class itself
        preds = predicates_for(3, "laptop", TAX)
        assert len(preds) == 3
        assert Predicate("is-a", "laptop", "accessories") in preds
        assert Predicate("is-a", "accessories", "object") in preds

    def test_root_labeled_object(self):
        preds = predicates_for(9, "object", TAX)
        assert preds == {Predicate("instance-of", "9", "object")}

    def test_bad_predicate_kind(self):
        with pytest.raises(ValidationError):
            Predicate("near", "a", "b")


class TestSurfacePoints:
    def test_count_matches_density(self):
        obj = ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5)
        assert obj.num_surface_points == 100  # perimeter 2.0 m at 50 pts/m
        assert len(obj.surface_points) == 100

    @given(
        w=st.floats(0.01, 3.0),
        h=st.floats(0.01, 3.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_at_least_four_points(self, w, h):
        obj = ObjectInstance(1, "chair", 5.0, 5.0, 0.0, w, h)
        assert obj.num_surface_points >= 4

    def test_points_deterministic(self):
        a = ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.3)
        b = ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.3)
        np.testing.assert_array_equal(a.surface_points, b.surface_points)

    @given(
        w=st.floats(0.05, 2.0),
        h=st.floats(0.05, 2.0),
        k=st.integers(0, 3),
    )
    @settings(max_examples=100, deadline=None)
    def test_points_lie_on_perimeter(self, w, h, k):
        obj = ObjectInstance(1, "chair", 4.0, 4.0, k * math.pi / 2, w, h)
        ew, eh = obj.extent()
        dx = np.abs(obj.surface_points[:, 0] - 4.0)
        dy = np.abs(obj.surface_points[:, 1] - 4.0)
        on_x_face = np.isclose(dx, ew / 2) & (dy <= eh / 2 + 1e-12)
        on_y_face = np.isclose(dy, eh / 2) & (dx <= ew / 2 + 1e-12)
        assert np.all(on_x_face | on_y_face)

    def test_uniform_spacing(self):
        obj = ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5)
        pts = obj.surface_points
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        # interior steps all equal the arc spacing except at corners where
        # the chord is shorter than the arc; none exceed it
        assert gaps.max() <= obj.perimeter / obj.num_surface_points + 1e-12

    def test_rotation_quarter_turn_swaps_extent(self):
        obj = ObjectInstance(1, "chair", 1.0, 1.0, math.pi / 2, 0.6, 0.2)
        assert obj.extent() == (0.2, 0.6)
        x_lo, y_lo, x_hi, y_hi = obj.bounds()
        assert (x_hi - x_lo, y_hi - y_lo) == pytest.approx((0.2, 0.6))

    def test_full_turn_is_identity(self):
        a = ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.3)
        b = ObjectInstance(1, "chair", 1.0, 1.0, 2 * math.pi, 0.5, 0.3)
        np.testing.assert_allclose(a.surface_points, b.surface_points, atol=1e-12)


class TestRaster:
    def test_cell_snap_boundary(self):
        # coordinates exactly on a cell boundary snap into the upper cell
        assert world_to_cell(0.05, 0.05) == 1
        assert world_to_cell(0.1, 0.05) == 2
        assert world_to_cell(0.3, 0.05) == 6
        assert world_to_cell(0.049, 0.05) == 0

    def test_aligned_rect_exact_cells(self):
        # 0.5 m square centered at (1.0, 1.0): covers cells 15..24 both axes
        obj = ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5)
        assert obj.cell_span(0.05) == (15, 15, 24, 24)

    def test_occ_codes(self):
        walls = np.zeros((100, 100), dtype=bool)
        walls[0, :] = True
        spec = make_world(
            [
                ObjectInstance(5, "chair", 1.0, 1.0, 0.0, 0.5, 0.5),
                ObjectInstance(9, "table", 3.0, 3.0, 0.0, 0.5, 0.5),
            ],
            walls=walls,
        )
        occ = spec.occ_id
        assert occ[0, 0] == 1  # wall
        assert occ[20, 20] == 2  # first object slot
        assert occ[60, 60] == 3  # second object slot
        assert occ[50, 10] == 0  # free
        assert spec.object_slots == {5: 0, 9: 1}

    @given(
        cx=st.floats(1.0, 4.0),
        cy=st.floats(1.0, 4.0),
        w=st.floats(0.1, 1.0),
        h=st.floats(0.1, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_raster_matches_center_inclusion(self, cx, cy, w, h):
        res = 0.05
        obj = ObjectInstance(1, "chair", cx, cy, 0.0, w, h)
        cx_lo, cy_lo, cx_hi, cy_hi = obj.cell_span(res)
        x_lo, y_lo, x_hi, y_hi = obj.bounds()
        for col in range(cx_lo - 1, cx_hi + 2):
            center = (col + 0.5) * res
            inside = x_lo - 1e-9 <= center < x_hi - 1e-9
            assert (cx_lo <= col <= cx_hi) == inside
        for row in range(cy_lo - 1, cy_hi + 2):
            center = (row + 0.5) * res
            inside = y_lo - 1e-9 <= center < y_hi - 1e-9
            assert (cy_lo <= row <= cy_hi) == inside


class TestGroundtruth:
    def test_groundtruth_map_contents(self):
        spec = make_world(
            [
                ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5),
                ObjectInstance(2, "laptop", 3.0, 3.0, 0.0, 0.3, 0.2),
            ]
        )
        gt = groundtruth_map(spec)
        assert gt.frame == spec.frame
        assert set(gt.geometry) == {1, 2}
        assert gt.geometry[1] == frozenset(range(100))
        assert gt.geometry[2] == frozenset(range(50))
        assert len(gt.predicates) == 6  # two disjoint 3-predicate chains

    def test_shared_chain_predicates_coalesce(self):
        spec = make_world(
            [
                ObjectInstance(1, "chair", 1.0, 1.0, 0.0, 0.5, 0.5),
                ObjectInstance(2, "chair", 3.0, 3.0, 0.0, 0.5, 0.5),
            ]
        )
        gt = groundtruth_map(spec)
        # is-a facts shared between the two chairs appear once
        assert len(gt.predicates) == 4

    def test_semantic_map_equality(self):
        a = SemanticMap("world", {1: frozenset({0, 1})}, frozenset())
        b = SemanticMap("world", {1: frozenset({0, 1})}, frozenset())
        assert a == b
