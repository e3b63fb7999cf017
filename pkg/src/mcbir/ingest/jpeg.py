"""Baseline sequential JPEG entropy decoder.

Decodes Huffman-coded scan data to per-component grids of dequantized DCT
coefficients. No inverse transform and no chroma upsampling is performed;
each component keeps its native subsampled resolution, with MCU padding
blocks retained in the grid.

Supported subset of ITU-T T.81: SOF0, 8-bit precision, 1 or 3 components,
Huffman coding, optional restart markers, interleaved or single-component
scans. Progressive (SOF2) and arithmetic-coded files are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .dct import BLOCK, CoefficientGrid

# Marker code points (second byte of X'FFxx')
SOI = 0xD8
EOI = 0xD9
SOS = 0xDA
DQT = 0xDB
DNL = 0xDC
DRI = 0xDD
DHT = 0xC4
DAC = 0xCC
COM = 0xFE
SOF0 = 0xC0
RST0 = 0xD0
APP0 = 0xE0

_SOF_MARKERS = set(range(0xC0, 0xD0)) - {DHT, 0xC8, DAC}
_ARITHMETIC_SOF = {0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF}

# Zigzag scan position -> natural (row-major) coefficient index
ZIGZAG_TO_NATURAL = [
    0, 1, 8, 16, 9, 2, 3, 10,
    17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
]


class JpegError(ValueError):
    """Base class for JPEG decoding failures."""


class UnsupportedJpegError(JpegError):
    """Well-formed JPEG using a coding mode outside the baseline subset."""


class JpegDecodeError(JpegError):
    """Malformed JPEG data; byte_offset locates the failure."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


@dataclass
class _Component:
    component_id: int
    h: int
    v: int
    quant_id: int
    # filled in during scan setup
    grid: np.ndarray | None = None
    pred: int = 0


@dataclass
class JpegCoefficients:
    """Decoder output: image dimensions plus one coefficient grid per component."""

    width: int
    height: int
    components: list[CoefficientGrid]

    @property
    def component_count(self) -> int:
        return len(self.components)


class _HuffmanTable:
    """Canonical Huffman decoder built from a DHT (counts, symbols) pair."""

    def __init__(self, counts, symbols):
        self.symbols = symbols
        self.mincode = [0] * 17
        self.maxcode = [-1] * 17
        self.valptr = [0] * 17
        code = 0
        k = 0
        for length in range(1, 17):
            n = counts[length - 1]
            if n:
                self.valptr[length] = k
                self.mincode[length] = code
                code += n
                k += n
                self.maxcode[length] = code - 1
            code <<= 1

    def decode(self, reader: "_BitReader") -> int:
        code = reader.read_bit()
        length = 1
        while code > self.maxcode[length]:
            length += 1
            if length > 16:
                raise JpegDecodeError("invalid Huffman code", reader.byte_offset)
            code = (code << 1) | reader.read_bit()
        return self.symbols[self.valptr[length] + code - self.mincode[length]]


class _BitReader:
    """Bit-level reader over entropy-coded data with 0xFF00 unstuffing."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos
        self.buf = 0
        self.nbits = 0

    @property
    def byte_offset(self) -> int:
        return self.pos

    def read_bit(self) -> int:
        if self.nbits == 0:
            self._fill()
        self.nbits -= 1
        return (self.buf >> self.nbits) & 1

    def read_bits(self, n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | self.read_bit()
        return value

    def _fill(self) -> None:
        if self.pos >= len(self.data):
            raise JpegDecodeError("entropy-coded data ended unexpectedly", self.pos)
        byte = self.data[self.pos]
        if byte == 0xFF:
            if self.pos + 1 >= len(self.data):
                raise JpegDecodeError("entropy-coded data ended unexpectedly", self.pos)
            nxt = self.data[self.pos + 1]
            if nxt == 0x00:
                self.pos += 2
            else:
                raise JpegDecodeError(
                    f"marker 0xFF{nxt:02X} inside entropy-coded segment", self.pos
                )
        else:
            self.pos += 1
        self.buf = byte
        self.nbits = 8

    def align_and_expect_restart(self, index: int) -> None:
        """Discard padding bits and consume the expected RSTn marker."""
        self.nbits = 0
        if self.pos + 1 >= len(self.data):
            raise JpegDecodeError("missing restart marker", self.pos)
        if self.data[self.pos] != 0xFF or self.data[self.pos + 1] != RST0 + index:
            raise JpegDecodeError(
                f"expected restart marker RST{index}", self.pos
            )
        self.pos += 2


def _receive_extend(reader: _BitReader, size: int) -> int:
    value = reader.read_bits(size)
    if value < (1 << (size - 1)):
        value -= (1 << size) - 1
    return value


def _u16(data: bytes, pos: int) -> int:
    return (data[pos] << 8) | data[pos + 1]


class _Decoder:
    def __init__(self, data: bytes):
        self.data = data
        self.quant_tables: dict[int, np.ndarray] = {}
        self.dc_tables: dict[int, _HuffmanTable] = {}
        self.ac_tables: dict[int, _HuffmanTable] = {}
        self.restart_interval = 0
        self.width = 0
        self.height = 0
        self.components: list[_Component] = []
        self.hmax = 1
        self.vmax = 1
        self.frame_seen = False

    def run(self) -> JpegCoefficients:
        data = self.data
        if len(data) < 2 or data[0] != 0xFF or data[1] != SOI:
            raise JpegDecodeError("missing SOI marker", 0)
        pos = 2
        decoded_scans = 0
        while True:
            pos = self._skip_fill(pos)
            if pos + 1 >= len(data):
                raise JpegDecodeError("missing EOI marker", pos)
            if data[pos] != 0xFF:
                raise JpegDecodeError(f"expected marker, found 0x{data[pos]:02X}", pos)
            marker = data[pos + 1]
            pos += 2
            if marker == EOI:
                break
            if marker == SOI or RST0 <= marker <= RST0 + 7 or marker == 0x01:
                raise JpegDecodeError(f"unexpected marker 0xFF{marker:02X}", pos - 2)
            if pos + 1 >= len(data):
                raise JpegDecodeError("truncated marker segment", pos)
            length = _u16(data, pos)
            if length < 2 or pos + length > len(data):
                raise JpegDecodeError("marker segment overruns file", pos)
            body = data[pos + 2 : pos + length]
            body_offset = pos + 2
            pos += length
            if marker == DQT:
                self._parse_dqt(body, body_offset)
            elif marker == DHT:
                self._parse_dht(body, body_offset)
            elif marker == DRI:
                if len(body) < 2:
                    raise JpegDecodeError("short DRI segment", body_offset)
                self.restart_interval = _u16(body, 0)
            elif marker == DAC:
                raise UnsupportedJpegError("arithmetic-coded JPEG is not supported")
            elif marker in _SOF_MARKERS:
                self._parse_sof(marker, body, body_offset)
            elif marker == SOS:
                pos = self._decode_scan(body, body_offset, pos)
                decoded_scans += 1
            else:
                # APPn / COM / anything else: skip the segment payload
                continue
        if not self.frame_seen or decoded_scans == 0:
            raise JpegDecodeError("no image data before EOI", pos)
        return self._finish()

    def _skip_fill(self, pos: int) -> int:
        # Arbitrary 0xFF fill bytes may precede a marker
        data = self.data
        while pos + 1 < len(data) and data[pos] == 0xFF and data[pos + 1] == 0xFF:
            pos += 1
        return pos

    def _parse_dqt(self, body: bytes, offset: int) -> None:
        pos = 0
        while pos < len(body):
            pq = body[pos] >> 4
            tq = body[pos] & 0x0F
            pos += 1
            n = 64 if pq == 0 else 128
            if pq > 1 or pos + n > len(body):
                raise JpegDecodeError("bad quantization table segment", offset + pos)
            if pq == 0:
                values = list(body[pos : pos + 64])
            else:
                values = [_u16(body, pos + 2 * i) for i in range(64)]
            pos += n
            table = np.zeros(64, dtype=np.int32)
            for k, value in enumerate(values):
                table[ZIGZAG_TO_NATURAL[k]] = value
            self.quant_tables[tq] = table.reshape(BLOCK, BLOCK)

    def _parse_dht(self, body: bytes, offset: int) -> None:
        pos = 0
        while pos < len(body):
            if pos + 17 > len(body):
                raise JpegDecodeError("bad Huffman table segment", offset + pos)
            tc = body[pos] >> 4
            th = body[pos] & 0x0F
            counts = list(body[pos + 1 : pos + 17])
            pos += 17
            total = sum(counts)
            if tc > 1 or pos + total > len(body):
                raise JpegDecodeError("bad Huffman table segment", offset + pos)
            symbols = list(body[pos : pos + total])
            pos += total
            table = _HuffmanTable(counts, symbols)
            (self.dc_tables if tc == 0 else self.ac_tables)[th] = table

    def _parse_sof(self, marker: int, body: bytes, offset: int) -> None:
        if marker == 0xC2:
            raise UnsupportedJpegError("progressive JPEG (SOF2) is not supported")
        if marker in _ARITHMETIC_SOF:
            raise UnsupportedJpegError("arithmetic-coded JPEG is not supported")
        if marker != SOF0:
            raise UnsupportedJpegError(
                f"only baseline sequential JPEG (SOF0) is supported, got SOF marker 0xFF{marker:02X}"
            )
        if self.frame_seen:
            raise JpegDecodeError("multiple SOF segments", offset)
        if len(body) < 6:
            raise JpegDecodeError("short SOF segment", offset)
        precision = body[0]
        if precision != 8:
            raise UnsupportedJpegError(f"{precision}-bit precision is not supported")
        self.height = _u16(body, 1)
        self.width = _u16(body, 3)
        if self.width == 0 or self.height == 0:
            raise UnsupportedJpegError("images with deferred dimensions (DNL) are not supported")
        ncomp = body[5]
        if ncomp not in (1, 3):
            raise UnsupportedJpegError(f"{ncomp}-component images are not supported")
        if len(body) < 6 + 3 * ncomp:
            raise JpegDecodeError("short SOF segment", offset)
        for i in range(ncomp):
            cid = body[6 + 3 * i]
            hv = body[7 + 3 * i]
            h, v = hv >> 4, hv & 0x0F
            if not (1 <= h <= 4 and 1 <= v <= 4):
                raise JpegDecodeError(f"invalid sampling factors {h}x{v}", offset)
            self.components.append(_Component(cid, h, v, body[8 + 3 * i]))
        self.hmax = max(c.h for c in self.components)
        self.vmax = max(c.v for c in self.components)
        self.frame_seen = True

    def _component_dims(self, comp: _Component) -> tuple[int, int]:
        w = ceil(self.width * comp.h / self.hmax)
        h = ceil(self.height * comp.v / self.vmax)
        return w, h

    def _decode_scan(self, header: bytes, header_offset: int, pos: int) -> int:
        if not self.frame_seen:
            raise JpegDecodeError("SOS before SOF", header_offset)
        if len(header) < 1:
            raise JpegDecodeError("short SOS segment", header_offset)
        ns = header[0]
        if len(header) < 1 + 2 * ns + 3:
            raise JpegDecodeError("short SOS segment", header_offset)
        by_id = {c.component_id: c for c in self.components}
        scan_comps: list[tuple[_Component, _HuffmanTable, _HuffmanTable]] = []
        for i in range(ns):
            cs = header[1 + 2 * i]
            td = header[2 + 2 * i] >> 4
            ta = header[2 + 2 * i] & 0x0F
            comp = by_id.get(cs)
            if comp is None:
                raise JpegDecodeError(f"scan references unknown component {cs}", header_offset)
            if td not in self.dc_tables or ta not in self.ac_tables:
                raise JpegDecodeError("scan references undefined Huffman table", header_offset)
            if comp.quant_id not in self.quant_tables:
                raise JpegDecodeError("scan references undefined quantization table", header_offset)
            scan_comps.append((comp, self.dc_tables[td], self.ac_tables[ta]))
        ss, se = header[1 + 2 * ns], header[2 + 2 * ns]
        if (ss, se) != (0, 63):
            raise UnsupportedJpegError("spectral selection is not supported in baseline JPEG")

        interleaved = ns > 1
        if interleaved:
            mcus_x = ceil(self.width / (BLOCK * self.hmax))
            mcus_y = ceil(self.height / (BLOCK * self.vmax))
            for comp, _, _ in scan_comps:
                if comp.grid is None:
                    comp.grid = np.zeros(
                        (mcus_y * comp.v, mcus_x * comp.h, 64), dtype=np.int32
                    )
        else:
            comp = scan_comps[0][0]
            w, h = self._component_dims(comp)
            mcus_x = ceil(w / BLOCK)
            mcus_y = ceil(h / BLOCK)
            if comp.grid is None:
                comp.grid = np.zeros((mcus_y, mcus_x, 64), dtype=np.int32)

        for comp, _, _ in scan_comps:
            comp.pred = 0
        reader = _BitReader(self.data, pos)
        restart = self.restart_interval
        rst_index = 0
        mcu_count = mcus_x * mcus_y
        for mcu in range(mcu_count):
            if restart and mcu and mcu % restart == 0:
                reader.align_and_expect_restart(rst_index)
                rst_index = (rst_index + 1) % 8
                for comp, _, _ in scan_comps:
                    comp.pred = 0
            mcu_y, mcu_x = divmod(mcu, mcus_x)
            for comp, dc_table, ac_table in scan_comps:
                if interleaved:
                    for by in range(comp.v):
                        for bx in range(comp.h):
                            block = self._decode_block(reader, comp, dc_table, ac_table)
                            comp.grid[mcu_y * comp.v + by, mcu_x * comp.h + bx] = block
                else:
                    block = self._decode_block(reader, comp, dc_table, ac_table)
                    comp.grid[mcu_y, mcu_x] = block

        # Skip any padding bits, then hand back control at the next marker
        end = reader.pos
        data = self.data
        while end < len(data):
            if data[end] == 0xFF and end + 1 < len(data) and data[end + 1] != 0x00:
                break
            end += 1
        return end

    def _decode_block(
        self,
        reader: _BitReader,
        comp: _Component,
        dc_table: _HuffmanTable,
        ac_table: _HuffmanTable,
    ) -> list[int]:
        block = [0] * 64
        size = dc_table.decode(reader)
        if size > 15:
            raise JpegDecodeError("invalid DC magnitude category", reader.byte_offset)
        diff = _receive_extend(reader, size) if size else 0
        comp.pred += diff
        block[0] = comp.pred
        k = 1
        while k < 64:
            rs = ac_table.decode(reader)
            run, size = rs >> 4, rs & 0x0F
            if size == 0:
                if run == 0:  # EOB
                    break
                if run == 15:  # ZRL
                    k += 16
                    continue
                raise JpegDecodeError("invalid AC run/size symbol", reader.byte_offset)
            k += run
            if k > 63:
                raise JpegDecodeError("AC coefficient index out of range", reader.byte_offset)
            block[ZIGZAG_TO_NATURAL[k]] = _receive_extend(reader, size)
            k += 1
        return block

    def _finish(self) -> JpegCoefficients:
        grids = []
        for comp in self.components:
            if comp.grid is None:
                raise JpegDecodeError("component was never scanned", len(self.data))
            qt = self.quant_tables[comp.quant_id]
            blocks = comp.grid.reshape(*comp.grid.shape[:2], BLOCK, BLOCK).astype(np.float64)
            blocks *= qt
            w, h = self._component_dims(comp)
            grids.append(
                CoefficientGrid(
                    blocks=blocks,
                    component_id=comp.component_id,
                    sampling=(comp.h, comp.v),
                    samples_wide=w,
                    samples_high=h,
                    quant_table=qt.copy(),
                )
            )
        return JpegCoefficients(width=self.width, height=self.height, components=grids)


def decode_jpeg_coefficients(data: bytes) -> JpegCoefficients:
    """Entropy-decode a baseline JPEG to dequantized DCT coefficient grids.

    DC differential prediction is resolved and coefficients are multiplied by
    their quantization table, but no inverse DCT is applied.
    """
    return _Decoder(bytes(data)).run()


def is_jpeg(data: bytes) -> bool:
    return len(data) >= 2 and data[0] == 0xFF and data[1] == SOI
