import io

import numpy as np
import pytest
from PIL import Image
from scipy.fft import idctn

from jpegenc import encode_baseline, reencode_coefficients

from mcbir.ingest.jpeg import (
    JpegDecodeError,
    UnsupportedJpegError,
    decode_jpeg_coefficients,
    is_jpeg,
)


def pil_jpeg(array, mode="L", **options):
    buf = io.BytesIO()
    Image.fromarray(array, mode).save(buf, "JPEG", **options)
    return buf.getvalue()


def grids_equal(a, b):
    return all(np.array_equal(x.blocks, y.blocks) for x, y in zip(a.components, b.components))


def test_constant_gray_128_all_ones_tables():
    data = pil_jpeg(np.full((64, 64), 128, np.uint8), qtables=[[1] * 64])
    decoded = decode_jpeg_coefficients(data)
    assert decoded.component_count == 1
    grid = decoded.components[0]
    # level-shifted mean is 0; allow the stated encoder rounding bound on DC
    assert np.abs(grid.blocks[:, :, 0, 0]).max() <= 8
    ac = grid.blocks.reshape(-1, 64)[:, 1:]
    assert np.all(ac == 0)


def test_512x512_gray_gives_64x64_grid(rng):
    pixels = rng.integers(0, 256, (512, 512), dtype=np.uint8)
    decoded = decode_jpeg_coefficients(pil_jpeg(pixels, quality=75))
    assert (decoded.width, decoded.height) == (512, 512)
    grid = decoded.components[0]
    assert (grid.blocks_wide, grid.blocks_high) == (64, 64)
    assert (grid.samples_wide, grid.samples_high) == (512, 512)


@pytest.mark.parametrize(
    "shape,mode,options",
    [
        ((96, 80), "L", dict(quality=85)),
        ((52, 100), "L", dict(qtables=[[1] * 64])),
        ((64, 64), "L", dict(quality=80, restart_marker_blocks=3)),
        ((80, 72, 3), "RGB", dict(quality=90, subsampling=0)),
        ((80, 72, 3), "RGB", dict(quality=90, subsampling=1)),
        ((80, 72, 3), "RGB", dict(quality=90, subsampling=2)),
    ],
)
def test_reencode_round_trip(rng, shape, mode, options):
    # Re-encoding the decoded quantized coefficients with the same tables
    # must decode to identical coefficient grids.
    pixels = rng.integers(0, 256, shape, dtype=np.uint8)
    first = decode_jpeg_coefficients(pil_jpeg(pixels, mode, **options))
    second = decode_jpeg_coefficients(reencode_coefficients(first))
    assert grids_equal(first, second)


def test_subsampled_component_geometry(rng):
    pixels = rng.integers(0, 256, (80, 72, 3), dtype=np.uint8)
    decoded = decode_jpeg_coefficients(pil_jpeg(pixels, "RGB", subsampling=2))
    luma, cb, cr = decoded.components
    assert luma.sampling == (2, 2)
    assert (luma.samples_wide, luma.samples_high) == (72, 80)
    # MCU padding retained: 72 px -> 9 blocks of data but 10 blocks stored
    assert (luma.blocks_wide, luma.blocks_high) == (10, 10)
    for chroma in (cb, cr):
        assert chroma.sampling == (1, 1)
        assert (chroma.samples_wide, chroma.samples_high) == (36, 40)
        assert (chroma.blocks_wide, chroma.blocks_high) == (5, 5)


def test_restart_markers_do_not_change_coefficients(rng):
    pixels = rng.integers(0, 256, (128, 96), dtype=np.uint8)
    plain = decode_jpeg_coefficients(pil_jpeg(pixels, quality=80))
    restarted = decode_jpeg_coefficients(pil_jpeg(pixels, quality=80, restart_marker_blocks=5))
    assert grids_equal(plain, restarted)


def test_dc_prediction_resets_at_restart():
    # Hand-built file: four blocks with known DC values, restart every 2 MCUs.
    blocks = np.zeros((1, 4, 8, 8), dtype=np.int64)
    blocks[0, :, 0, 0] = [50, 60, -30, -20]
    blocks[0, 1, 0, 1] = 7
    qt = np.full(64, 2, dtype=np.int64)
    data = encode_baseline(
        32, 8,
        [{"id": 1, "h": 1, "v": 1, "tq": 0, "blocks": blocks}],
        {0: qt},
        restart_interval=2,
    )
    decoded = decode_jpeg_coefficients(data)
    grid = decoded.components[0]
    assert np.array_equal(grid.blocks[0, :, 0, 0], [100, 120, -60, -40])
    assert grid.blocks[0, 1, 0, 1] == 14
    assert grid.quant_table[0, 0] == 2


def test_known_coefficients_exact(rng):
    # Arbitrary in-range quantized values must dequantize exactly.
    blocks = rng.integers(-200, 200, (2, 3, 8, 8)).astype(np.int64)
    qt = rng.integers(1, 64, 64).astype(np.int64)
    data = encode_baseline(
        24, 16, [{"id": 1, "h": 1, "v": 1, "tq": 0, "blocks": blocks}], {0: qt}
    )
    grid = decode_jpeg_coefficients(data).components[0]
    assert np.array_equal(grid.blocks, blocks * qt.reshape(8, 8))


def test_pixels_match_reference_decoder(rng):
    # IDCT of our coefficients should reproduce PIL's decoded pixels.
    pixels = rng.integers(0, 256, (40, 48), dtype=np.uint8)
    data = pil_jpeg(pixels, quality=95)
    grid = decode_jpeg_coefficients(data).components[0]
    spatial = idctn(grid.blocks, axes=(2, 3), norm="ortho")
    rows = [np.hstack(list(spatial[r])) for r in range(grid.blocks_high)]
    ours = np.clip(np.rint(np.vstack(rows) + 128), 0, 255)
    reference = np.asarray(Image.open(io.BytesIO(data)), dtype=float)
    assert np.abs(ours[:40, :48] - reference).max() <= 2


def test_rejects_progressive(rng):
    pixels = rng.integers(0, 256, (64, 64), dtype=np.uint8)
    data = pil_jpeg(pixels, progressive=True, quality=80)
    with pytest.raises(UnsupportedJpegError, match="progressive"):
        decode_jpeg_coefficients(data)


def _segment(code, payload):
    return bytes([0xFF, code]) + (len(payload) + 2).to_bytes(2, "big") + payload


def test_rejects_arithmetic_sof():
    sof9 = bytes([8, 0, 64, 0, 64, 1, 1, 0x11, 0])
    data = b"\xFF\xD8" + _segment(0xC9, sof9) + b"\xFF\xD9"
    with pytest.raises(UnsupportedJpegError, match="arithmetic"):
        decode_jpeg_coefficients(data)


def test_rejects_arithmetic_conditioning_marker():
    data = b"\xFF\xD8" + _segment(0xCC, bytes([0x00, 0x01])) + b"\xFF\xD9"
    with pytest.raises(UnsupportedJpegError, match="arithmetic"):
        decode_jpeg_coefficients(data)


def test_rejects_12_bit_precision():
    sof = bytes([12, 0, 64, 0, 64, 1, 1, 0x11, 0])
    data = b"\xFF\xD8" + _segment(0xC0, sof) + b"\xFF\xD9"
    with pytest.raises(UnsupportedJpegError, match="12-bit"):
        decode_jpeg_coefficients(data)


def test_rejects_cmyk_component_count():
    sof = bytes([8, 0, 64, 0, 64, 4]) + bytes([1, 0x11, 0, 2, 0x11, 0, 3, 0x11, 0, 4, 0x11, 0])
    data = b"\xFF\xD8" + _segment(0xC0, sof) + b"\xFF\xD9"
    with pytest.raises(UnsupportedJpegError, match="4-component"):
        decode_jpeg_coefficients(data)


def test_truncated_scan_reports_byte_offset(rng):
    pixels = rng.integers(0, 256, (64, 64), dtype=np.uint8)
    data = pil_jpeg(pixels, quality=80)
    truncated = data[: len(data) // 2]
    with pytest.raises(JpegDecodeError) as excinfo:
        decode_jpeg_coefficients(truncated)
    assert excinfo.value.byte_offset <= len(truncated)
    assert "byte offset" in str(excinfo.value)


def test_not_a_jpeg():
    with pytest.raises(JpegDecodeError, match="SOI"):
        decode_jpeg_coefficients(b"P5 8 8 255 " + bytes(64))
    assert not is_jpeg(b"P5 8 8")
    assert is_jpeg(b"\xFF\xD8\xFF\xE0")


def test_every_block_fully_populated(rng):
    # Decoder totality: no block left at its zero initialization by accident;
    # encode blocks that are all nonzero in DC and verify.
    blocks = rng.integers(1, 100, (3, 3, 8, 8)).astype(np.int64)
    qt = np.ones(64, dtype=np.int64)
    data = encode_baseline(
        24, 24, [{"id": 1, "h": 1, "v": 1, "tq": 0, "blocks": blocks}], {0: qt}
    )
    grid = decode_jpeg_coefficients(data).components[0]
    assert np.all(grid.blocks[:, :, 0, 0] != 0)
    assert np.array_equal(grid.blocks, blocks.astype(float))
