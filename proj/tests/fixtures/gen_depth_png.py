#!/usr/bin/env python3
# Writes depth16_4x3.png: 16-bit grayscale, big-endian samples, value = 1000*row + 250*col
# (row 0 column 0 is 0, i.e. invalid).
import struct
import zlib
from pathlib import Path

W, H = 4, 3


def chunk(tag, data):
    return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)


rows = b"".join(b"\x00" + b"".join(struct.pack(">H", 1000 * y + 250 * x) for x in range(W)) for y in range(H))
png = (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", struct.pack(">IIBBBBB", W, H, 16, 0, 0, 0, 0)) +
       chunk(b"IDAT", zlib.compress(rows)) + chunk(b"IEND", b""))
Path(__file__).with_name("depth16_4x3.png").write_bytes(png)
