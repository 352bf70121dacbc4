"""Independent feature-hash encoder used to freeze the golden matrix in test_encoding.cpp."""
import math
import re
import struct

MASK = (1 << 64) - 1


def fnv1a(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for c in data:
        h ^= c
        h = (h * 0x100000001B3) & MASK
    return h


def tokenize(text: str):
    return [t.lower() for t in re.findall(rb"[0-9A-Za-z\x80-\xff]+", text.encode())]


def encode(text, d_m, d_e):
    toks = tokenize(text)
    base, extra = divmod(len(toks), d_m)
    rows, pos = [], 0
    for r in range(d_m):
        n = base + (1 if r < extra else 0)
        row = [0.0] * d_e
        chunk = toks[pos:pos + n]
        feats = list(chunk) + [chunk[i] + b"\x1f" + chunk[i + 1] for i in range(len(chunk) - 1)]
        for f in feats:
            h = fnv1a(f)
            row[h % d_e] += -1.0 if h >> 63 else 1.0
        scale = 1.0 / math.sqrt(max(1, n))
        # round through float32 like the C++ storage
        rows.append([struct.unpack("f", struct.pack("f", v * scale))[0] for v in row])
        pos += n
    return rows


if __name__ == "__main__":
    text = "The quick brown fox jumps over the lazy dog near the river bank"
    for row in encode(text, 4, 8):
        print(", ".join(f"{v!r}f" for v in row))
