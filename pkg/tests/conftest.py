import pytest

from coverplan import ArmModel, RegionSpec, Rect, Scenario


def cell_rect(i, j):
    """A rectangle obstacle occupying exactly grid cell (i, j)."""
    return Rect((float(i), float(j), float(i + 1), float(j + 1)))


def grid(size, obstacles=(), home=(0, 0), regions=None):
    if regions is None:
        regions = (RegionSpec("goal", (size - 2.0, size - 2.0, float(size), float(size))),)
    return Scenario(
        kind="grid",
        grid_dims=(size, size),
        s_home=home,
        regions=tuple(regions),
        obstacles=tuple(obstacles),
    )


@pytest.fixture
def empty8():
    return grid(8)


@pytest.fixture
def two_region_grid12():
    return grid(
        12,
        home=(0, 6),
        regions=(
            RegionSpec("pick", (9.0, 0.0, 12.0, 3.0)),
            RegionSpec("place", (9.0, 9.0, 12.0, 12.0)),
        ),
    )


@pytest.fixture
def unit_arm():
    return Scenario(
        kind="arm",
        arm=ArmModel(link_lengths=(1.0, 1.0), joints_per_rev=16),
        s_home=(0, 0),
        regions=(RegionSpec("reach", (1.9, -0.1, 2.1, 0.1)),),
    )
