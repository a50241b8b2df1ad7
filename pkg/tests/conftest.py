import numpy as np
import pytest

from rosme.worldmodel import ObjectInstance, Taxonomy, WorldSpec, load_world


@pytest.fixture(scope="session")
def kitchen():
    return load_world("kitchen")


@pytest.fixture(scope="session")
def small_office():
    return load_world("small_office")


@pytest.fixture(scope="session")
def tiny_world():
    """A 4x3 m room with two objects; fast enough for heavy property tests."""
    walls = np.zeros((60, 80), dtype=bool)
    walls[0, :] = walls[-1, :] = True
    walls[:, 0] = walls[:, -1] = True
    walls[30, 40:60] = True  # a wall stub jutting from mid-room
    tax = Taxonomy(
        parent={
            "chair": "furniture",
            "table": "furniture",
            "furniture": "object",
            "plant": "object",
        }
    )
    spec = WorldSpec(
        name="tiny",
        resolution=0.05,
        width=80,
        height=60,
        walls=walls,
        objects=(
            ObjectInstance(1, "table", 1.0, 0.8, 0.0, 0.6, 0.4),
            ObjectInstance(2, "chair", 2.8, 2.2, 0.0, 0.4, 0.4),
        ),
        taxonomy=tax,
    )
    spec.validate()
    return spec
