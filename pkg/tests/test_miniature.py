import numpy as np
import pytest

from mcbir.ingest.dct import CoefficientGrid, pixel_coefficient_grids
from mcbir.ingest.pixels import PixelImage, load_pixel_image
from mcbir.miniature import (
    area_resample,
    build_miniature,
    dc_image_from_grid,
    dc_reduce,
    dump_dc_image,
    reduction_chain,
)


def pooling_oracle(img):
    """8x8 average pooling of the edge-padded image."""
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    padded = np.pad(img, ((0, (-h) % 8), (0, (-w) % 8)), mode="edge")
    ph, pw = padded.shape
    return padded.reshape(ph // 8, 8, pw // 8, 8).mean(axis=(1, 3))


def gray_image(values):
    return PixelImage(np.asarray(values, np.uint8)[:, :, None], "gray")


def grid_with_dc(dc_values):
    """Coefficient grid whose blocks carry only the given C(0,0) values."""
    dc_values = np.asarray(dc_values, dtype=float)
    blocks = np.zeros(dc_values.shape + (8, 8))
    blocks[:, :, 0, 0] = dc_values
    return CoefficientGrid(
        blocks=blocks,
        component_id=0,
        sampling=(1, 1),
        samples_wide=dc_values.shape[1] * 8,
        samples_high=dc_values.shape[0] * 8,
    )


def test_dc_image_512_source_is_64x64(rng):
    image = gray_image(rng.integers(0, 256, (512, 512)))
    dc = dc_image_from_grid(pixel_coefficient_grids(image)[0])
    assert dc.shape == (64, 64)


def test_dc_image_constant_grid():
    grid = grid_with_dc(np.full((4, 6), 8 * 17.0))
    assert np.all(dc_image_from_grid(grid) == 17.0)


def test_dc_image_matches_average_pooling(rng):
    for h, w in [(64, 64), (72, 40), (510, 500), (100, 97)]:
        image = gray_image(rng.integers(0, 256, (h, w)))
        dc = dc_image_from_grid(pixel_coefficient_grids(image)[0])
        oracle = pooling_oracle(image.samples[:, :, 0].astype(float) - 128.0)
        assert dc.shape == oracle.shape
        assert np.abs(dc - oracle).max() < 1e-9


def test_dc_image_drops_mcu_padding_blocks():
    # grid padded to 4x4 blocks but the component extent only covers 3x3
    blocks = np.zeros((4, 4, 8, 8))
    blocks[:, :, 0, 0] = 8.0
    grid = CoefficientGrid(
        blocks=blocks, component_id=0, sampling=(2, 2), samples_wide=20, samples_high=17
    )
    dc = dc_image_from_grid(grid)
    assert dc.shape == (3, 3)


def test_dc_image_empty_grid_rejected():
    grid = CoefficientGrid(
        blocks=np.zeros((0, 0, 8, 8)), component_id=0, sampling=(1, 1),
        samples_wide=0, samples_high=0,
    )
    with pytest.raises(ValueError, match="empty"):
        dc_image_from_grid(grid)


def test_dc_reduce_64_to_8(rng):
    img = rng.uniform(-128, 127, (64, 64))
    out = dc_reduce(img)
    assert out.shape == (8, 8)
    assert np.abs(out - pooling_oracle(img)).max() < 1e-9


def test_dc_reduce_80_to_10_via_640_source(rng):
    image = gray_image(rng.integers(0, 256, (640, 640)))
    dc80 = dc_image_from_grid(pixel_coefficient_grids(image)[0])
    assert dc80.shape == (80, 80)
    dc10 = dc_reduce(dc80)
    assert dc10.shape == (10, 10)
    assert np.abs(dc10 - pooling_oracle(dc80)).max() < 1e-9


def test_dc_reduce_constant_any_size():
    for shape in [(8, 8), (12, 30), (65, 9)]:
        assert np.all(dc_reduce(np.full(shape, -3.25)) == -3.25)


def test_dc_reduce_mean_preservation(rng):
    img = rng.uniform(-128, 127, (56, 104))  # divisible by 8
    out = dc_reduce(img)
    assert abs(out.mean() - img.mean()) < 1e-9
    ragged = rng.uniform(-128, 127, (61, 99))
    padded = np.pad(ragged, ((0, 3), (0, 5)), mode="edge")
    assert abs(dc_reduce(ragged).mean() - padded.mean()) < 1e-9


def test_dc_reduce_rejects_small_input():
    with pytest.raises(ValueError):
        dc_reduce(np.zeros((7, 20)))


def test_area_resample_identity_and_pooling(rng):
    img8 = rng.uniform(-10, 10, (8, 8))
    assert np.array_equal(area_resample(img8), img8)
    img16 = rng.uniform(-10, 10, (16, 16))
    pooled = img16.reshape(8, 2, 8, 2).mean(axis=(1, 3))
    assert np.abs(area_resample(img16) - pooled).max() < 1e-12
    assert np.all(np.abs(area_resample(np.full((10, 10), 4.5)) - 4.5) < 1e-12)


def test_area_resample_preserves_mean(rng):
    for shape in [(10, 10), (13, 29), (63, 8), (100, 11)]:
        img = rng.uniform(-128, 127, shape)
        out = area_resample(img)
        assert out.shape == (8, 8)
        assert abs(out.mean() - img.mean()) < 1e-9
    with pytest.raises(ValueError):
        area_resample(np.zeros((7, 12)))


def test_build_miniature_size_law(rng):
    # 512x512 source: 64x64 DC image, one reduction, no resample
    dc64 = rng.uniform(-128, 127, (64, 64))
    assert np.array_equal(build_miniature(dc64), dc_reduce(dc64))
    assert len(reduction_chain(dc64)) == 2  # input + one reduction

    # 640x640 source: 80x80 DC image, one reduction then one resample
    dc80 = rng.uniform(-128, 127, (80, 80))
    expected = area_resample(dc_reduce(dc80))
    assert np.array_equal(build_miniature(dc80), expected)
    assert len(reduction_chain(dc80)) == 3

    # already 8x8: unchanged
    dc8 = rng.uniform(-128, 127, (8, 8))
    assert np.array_equal(build_miniature(dc8), dc8)

    # residue below 64 goes straight to resampling
    dc38 = rng.uniform(-128, 127, (38, 38))
    assert np.array_equal(build_miniature(dc38), area_resample(dc38))


def test_build_miniature_deterministic(rng):
    img = rng.uniform(-128, 127, (300, 220))
    a = build_miniature(img)
    b = build_miniature(img.copy())
    assert a.tobytes() == b.tobytes()


def test_dump_dc_image_writes_pgm(tmp_path, rng):
    img = rng.uniform(-128, 127, (10, 12))
    path = tmp_path / "dc.pgm"
    dump_dc_image(img, path)
    back = load_pixel_image(path.read_bytes())
    assert (back.height, back.width) == (10, 12)
    expected = np.clip(np.rint(img + 128), 0, 255)
    assert np.array_equal(back.samples[:, :, 0].astype(float), expected)
