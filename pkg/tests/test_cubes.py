"""
Spatio-temporal cube extraction.
"""
import numpy as np
import pytest
import allure

from utils.errors import ConfigurationError, DataError
from video.cubes import CubeSpec, extract_cubes, grid_dims
from video.frame_io import FrameSequence


def _sequence(width, height, frames, rng):
    return FrameSequence(rng.random((frames, height, width)))


def _brute_force_origins(width, height, frames, spec):
    """Every (x, y, t) whose block fits, enumerated pixel by pixel."""
    origins = []
    for x in range(width):
        if x % spec.spatial_stride or x + spec.p > width:
            continue
        for y in range(height):
            if y % spec.spatial_stride or y + spec.p > height:
                continue
            for t in range(frames):
                if t % spec.temporal_stride or t + spec.q > frames:
                    continue
                origins.append((x, y, t))
    return origins


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Cube Extraction")
class TestExtractCubes:
    """Lattice counts, contents and ordering."""

    @allure.story("Counts")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("8x8x10 with p=4, q=5 tiles into 2x2x2")
    @pytest.mark.smoke
    def test_even_tiling(self, rng):
        grid = extract_cubes(_sequence(8, 8, 10, rng), CubeSpec(p=4, q=5))

        assert grid.grid_dims == (2, 2, 2)
        assert len(grid) == 8

    @allure.story("Counts")
    @allure.title("A single cube spanning the whole volume")
    @pytest.mark.smoke
    def test_identity_tiling(self, rng):
        seq = _sequence(4, 4, 5, rng)

        grid = extract_cubes(seq, CubeSpec(p=4, q=5))

        assert grid.grid_dims == (1, 1, 1)
        assert np.array_equal(grid.cubes[0].data, seq.frames)

    @allure.story("Counts")
    @allure.title("Partial border blocks are dropped")
    @pytest.mark.regression
    def test_remainder_dropped(self, rng):
        spec = CubeSpec(p=4, q=5, spatial_stride=4, temporal_stride=5)

        grid = extract_cubes(_sequence(9, 9, 11, rng), spec)

        assert grid.grid_dims == (2, 2, 2)
        assert sorted(c.origin for c in grid.cubes) == sorted(_brute_force_origins(9, 9, 11, spec))

    @allure.story("Brute force")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Counts and contents agree with brute-force enumeration on 50 instances")
    @pytest.mark.regression
    def test_matches_brute_force(self, rng, soft_assert):
        for _ in range(50):
            p = int(rng.integers(2, 6))
            q = int(rng.integers(2, 6))
            spec = CubeSpec(p=p, q=q,
                            spatial_stride=int(rng.integers(1, p + 2)),
                            temporal_stride=int(rng.integers(1, q + 2)))
            width = int(rng.integers(p, 14))
            height = int(rng.integers(p, 14))
            frames = int(rng.integers(q, 14))
            seq = _sequence(width, height, frames, rng)

            grid = extract_cubes(seq, spec)
            expected = _brute_force_origins(width, height, frames, spec)

            nx, ny, nt = grid.grid_dims
            soft_assert.assert_equal(len(grid), len(expected), f"cube count for {spec} on {width}x{height}x{frames}")
            soft_assert.assert_equal(nx * ny * nt, len(grid), "grid_dims product")
            soft_assert.assert_equal(sorted(c.origin for c in grid.cubes), sorted(expected), "origins")
            for cube in grid.cubes:
                x, y, t = cube.origin
                direct = seq.frames[t:t + q, y:y + p, x:x + p]
                soft_assert.assert_true(np.array_equal(cube.data, direct), f"contents at {cube.origin}")

        soft_assert.assert_all()

    @allure.story("Ordering")
    @allure.title("Cubes are ordered x-major, then y, then t")
    @pytest.mark.regression
    def test_ordering_and_index(self, rng):
        grid = extract_cubes(_sequence(12, 8, 10, rng), CubeSpec(p=4, q=5))
        nx, ny, nt = grid.grid_dims

        origins = [c.origin for c in grid.cubes]

        assert origins == sorted(origins)
        for ix in range(nx):
            for iy in range(ny):
                for it in range(nt):
                    assert grid.at(ix, iy, it).origin == (4 * ix, 4 * iy, 5 * it)

    @allure.story("Ownership")
    @allure.title("Cube data is copied, not aliased")
    @pytest.mark.regression
    def test_data_copied(self, rng):
        seq = _sequence(4, 4, 5, rng)
        grid = extract_cubes(seq, CubeSpec(p=4, q=5))

        grid.cubes[0].data[0, 0, 0] = -1.0

        assert seq.frames[0, 0, 0] >= 0.0

    @allure.story("Disjointness")
    @allure.title("Non-overlapping cubes cover a cropped prefix exactly once")
    @pytest.mark.regression
    def test_disjoint_cover(self, rng):
        seq = _sequence(10, 9, 13, rng)
        spec = CubeSpec(p=3, q=4)
        grid = extract_cubes(seq, spec)
        coverage = np.zeros(seq.frames.shape, dtype=int)

        for cube in grid.cubes:
            x, y, t = cube.origin
            coverage[t:t + spec.q, y:y + spec.p, x:x + spec.p] += 1

        nx, ny, nt = grid.grid_dims
        assert coverage.max() == 1
        assert coverage.sum() == len(grid) * spec.p * spec.p * spec.q
        assert np.all(coverage[:nt * spec.q, :ny * spec.p, :nx * spec.p] == 1)

    @allure.story("Frame span")
    @allure.title("A cube reports the half-open frame range it covers")
    @pytest.mark.regression
    def test_cube_frames(self, rng):
        grid = extract_cubes(_sequence(4, 4, 10, rng), CubeSpec(p=4, q=5))

        assert [c.frames for c in grid.cubes] == [(0, 5), (5, 10)]


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Cube Extraction")
class TestCubeSpec:
    """Geometry validation."""

    @allure.story("Defaults")
    @allure.title("Strides default to the cube extent")
    @pytest.mark.smoke
    def test_default_strides(self):
        spec = CubeSpec(p=6, q=3)

        assert (spec.spatial_stride, spec.temporal_stride) == (6, 3)
        assert spec.d == 36

    @allure.story("Validation")
    @allure.title("p, q below 2 or strides below 1 are rejected")
    @pytest.mark.regression
    @pytest.mark.parametrize("kwargs", [
        {"p": 1, "q": 5},
        {"p": 4, "q": 1},
        {"p": 4, "q": 5, "spatial_stride": 0},
        {"p": 4, "q": 5, "temporal_stride": 0},
    ])
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ConfigurationError):
            CubeSpec(**kwargs)

    @allure.story("Validation")
    @allure.title("Cubes larger than the sequence are a data error")
    @pytest.mark.regression
    def test_cube_exceeds_sequence(self):
        with pytest.raises(DataError, match="p=8"):
            grid_dims(6, 10, 20, CubeSpec(p=8, q=5))
        with pytest.raises(DataError, match="q=5"):
            grid_dims(10, 10, 4, CubeSpec(p=8, q=5))
