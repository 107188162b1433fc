import math

import numpy as np
import pytest

import oracles
from amalgam import (
    ConfigurationError,
    DiscreteFunction,
    EmptyRegionWarning,
    ExpressionError,
    Grid,
    Region,
    RegionFamily,
    covering_region,
    integrate,
    make_grid,
    read_function_csv,
    region_family,
    sample,
    write_function_csv,
)


def test_grid_basic_geometry():
    g = make_grid(dim=1, half_width=4.0, points_per_axis=4096)
    assert g.spacing == 8.0 / 4096
    assert g.cell_volume == g.spacing
    assert g.n_nodes == 4096
    assert g.axis[0] == -4.0
    assert g.axis[-1] == pytest.approx(4.0 - g.spacing)
    assert g.coords.shape == (4096, 1)


def test_grid_2d_geometry():
    g = make_grid(dim=2, half_width=2.0, points_per_axis=16)
    assert g.n_nodes == 256
    assert g.cell_volume == pytest.approx(g.spacing**2)
    # x index major: the first 16 rows share x = -2
    assert np.all(g.coords[:16, 0] == -2.0)
    assert np.allclose(g.coords[:16, 1], g.axis)


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid(3, 4.0, 256)
    with pytest.raises(ConfigurationError):
        Grid(1, 4.0, 300)  # not a power of two
    with pytest.raises(ConfigurationError):
        Grid(1, 4.0, 4)  # too coarse
    with pytest.raises(ConfigurationError):
        Grid(1, -1.0, 256)


def test_refine_coarsen_roundtrip():
    g = make_grid(dim=1, points_per_axis=512)
    assert g.refined().points_per_axis == 1024
    assert g.refined().coarsened() == g
    assert g.refined().spacing == g.spacing / 2


def test_node_index_roundtrip(small_grid):
    rng = np.random.default_rng(7)
    for _ in range(50):
        i = int(rng.integers(0, small_grid.n_nodes))
        point = small_grid.coords[i]
        assert small_grid.node_index(point) == i


def test_node_index_2d(tiny_grid_2d):
    g = tiny_grid_2d
    for i in (0, 17, 255):
        assert g.node_index(g.coords[i]) == i


def test_region_membership_is_strict(small_grid):
    g = small_grid
    # pick a radius that lands exactly on a node: the boundary node is out
    r = 16 * g.spacing
    reg = Region("ball", (0.0,), r)
    idx = reg.node_indices(g)
    dist = np.abs(g.axis[idx])
    assert np.all(dist < r)
    assert not np.any(np.isclose(dist, r))
    assert reg.node_count(g) == 31  # 15 per side plus the center


def test_region_matches_direct_scan(small_grid, tiny_grid_2d):
    for g in (small_grid, tiny_grid_2d):
        rng = np.random.default_rng(3)
        for _ in range(20):
            center = tuple(rng.uniform(-1.5, 1.5, size=g.dim))
            size = float(rng.uniform(0.2, 1.0))
            for shape in ("ball", "cube"):
                reg = Region(shape, center, size)
                got = reg.node_indices(g)
                want = oracles.region_nodes(g, center, size, shape)
                assert np.array_equal(got, want)


def test_region_dilate_and_fits():
    g = make_grid(dim=1, points_per_axis=256)
    reg = Region("ball", (1.0,), 1.0)
    assert reg.dilate(2.0).size == 2.0
    assert reg.fits_box(g)
    assert reg.dilate(3.0).fits_box(g)  # |1| + 3 = 4, touching allowed
    assert not reg.dilate(3.1).fits_box(g)


def test_region_validation():
    with pytest.raises(ConfigurationError):
        Region("disk", (0.0,), 1.0)
    with pytest.raises(ConfigurationError):
        Region("ball", (0.0,), 0.0)
    with pytest.raises(ConfigurationError):
        Region("ball", (0.0, 0.0, 0.0), 1.0)


def test_family_iteration_order(small_grid):
    fam = region_family(small_grid, sizes=(0.5, 1.0), center_stride=64)
    regions = list(fam)
    assert len(regions) == len(fam) == 2 * len(fam.centers)
    # size-major ordering
    assert all(r.size == 0.5 for r in regions[: len(fam.centers)])
    assert all(r.size == 1.0 for r in regions[len(fam.centers):])
    sized = list(fam.at_size(1.0))
    assert all(r.size == 1.0 for r in sized)
    assert [r.center for r in sized] == list(fam.centers)


def test_family_explicit_centers(small_grid):
    fam = region_family(small_grid, sizes=(1.0,), centers=[(0.0,), (1.0,)])
    assert fam.centers == ((0.0,), (1.0,))
    with pytest.raises(ConfigurationError):
        RegionFamily("ball", (), (1.0,))


def test_covering_region_covers_everything(small_grid, tiny_grid_2d):
    for g in (small_grid, tiny_grid_2d):
        cover = covering_region(g)
        assert cover.node_count(g) == g.n_nodes


def test_discrete_function_immutable(small_grid):
    f = sample("x", small_grid)
    with pytest.raises(ValueError):
        f.values[0] = 99.0
    with pytest.raises(ConfigurationError):
        DiscreteFunction(small_grid, np.full(small_grid.n_nodes, np.nan))
    with pytest.raises(ConfigurationError):
        DiscreteFunction(small_grid, np.zeros(7))


def test_discrete_function_arithmetic(small_grid):
    f = sample("x", small_grid)
    g = sample("1.0", small_grid)
    assert np.array_equal((f + g).values, f.values + 1.0)
    assert np.array_equal((f - g).values, f.values - 1.0)
    assert np.array_equal((2.0 * f).values, 2.0 * f.values)
    assert np.array_equal((f * g).values, f.values)
    assert np.array_equal((-f).values, -f.values)
    assert np.array_equal(abs(f).values, np.abs(f.values))


def test_integrate_matches_fsum(small_grid, rng):
    f = DiscreteFunction(small_grid, rng.normal(size=small_grid.n_nodes))
    want = oracles.fsum_integral(f.values, small_grid.cell_volume)
    assert integrate(f) == pytest.approx(want, rel=1e-14)

    reg = Region("ball", (0.5,), 1.25)
    idx = reg.node_indices(small_grid)
    want = oracles.fsum_integral(f.values[idx], small_grid.cell_volume)
    assert integrate(f, reg) == pytest.approx(want, rel=1e-13)


def test_integrate_indicator_exact(desk_grid):
    f = sample("ind(-1.0, 1.0)", desk_grid)
    # half open pieces tile the box, so the count is exactly 2 / h
    assert integrate(f) == pytest.approx(2.0, abs=1e-14)


def test_integrate_empty_region_warns(small_grid):
    f = sample("1.0", small_grid)
    tiny = Region("ball", (0.5 * small_grid.spacing,), 1e-9)
    with pytest.warns(EmptyRegionWarning):
        assert integrate(f, tiny) == 0.0


def test_sample_rejects_bad_expressions(small_grid):
    for expr in ("import os", "__class__", "x +", "nope(3)", "1/0"):
        with pytest.raises(ExpressionError):
            sample(expr, small_grid)


def test_csv_roundtrip_is_exact(small_grid, rng, tmp_path):
    f = DiscreteFunction(small_grid, rng.normal(size=small_grid.n_nodes))
    path = tmp_path / "f.csv"
    write_function_csv(f, str(path))
    g = read_function_csv(str(path))
    assert g.grid == small_grid
    assert np.array_equal(g.values, f.values)
    # byte determinism
    write_function_csv(f, str(tmp_path / "f2.csv"))
    assert (tmp_path / "f.csv").read_bytes() == (tmp_path / "f2.csv").read_bytes()
