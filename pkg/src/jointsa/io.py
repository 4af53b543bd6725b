"""File formats: QPI quad-pol images, float32 rasters with JSON sidecars,
binary PGM/PPM, JSON reports, CSV tables and SCR region files.

Every writer goes through a temporary file in the target directory and an
atomic rename, so an interrupted run never leaves a half-written artifact.
"""
import csv
import io
import json
import os
import tempfile

import numpy as np

from .errors import InvalidArgumentError
from .polarimetry import PolImage

QPI_MAGIC = "QPI1"
QPI_CHANNELS = ["HH", "HV", "VV"]


def _atomic_write(path, data):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path):
    with open(path, "rb") as f:
        return f.read()


# QPI

def encode_qpi(img):
    header = {"magic": QPI_MAGIC, "width": img.width, "height": img.height,
              "channels": QPI_CHANNELS}
    head = json.dumps(header).encode("utf-8") + b"\n"
    planes = np.stack([img.hh, img.hv, img.vv]).astype("<c8")
    return head + planes.tobytes()


def decode_qpi(data):
    nl = data.find(b"\n")
    if nl < 0:
        raise InvalidArgumentError("QPI header is not newline-terminated")
    try:
        header = json.loads(data[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InvalidArgumentError(f"QPI header is not JSON: {e}") from e
    if not isinstance(header, dict) or header.get("magic") != QPI_MAGIC:
        raise InvalidArgumentError("not a QPI1 file")
    if header.get("channels") != QPI_CHANNELS:
        raise InvalidArgumentError(f"QPI channels must be {QPI_CHANNELS}")
    try:
        w, h = int(header["width"]), int(header["height"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidArgumentError("QPI header lacks width/height") from e
    if w < 1 or h < 1:
        raise InvalidArgumentError("QPI width and height must be >= 1")
    payload = data[nl + 1:]
    if len(payload) != 3 * w * h * 8:
        raise InvalidArgumentError(
            f"QPI payload has {len(payload)} bytes, expected {3 * w * h * 8}")
    planes = np.frombuffer(payload, dtype="<c8").reshape(3, h, w)
    return PolImage(planes[0], planes[1], planes[2])


def write_qpi(path, img):
    _atomic_write(path, encode_qpi(img))


def read_qpi(path):
    return decode_qpi(_read(path))


# rasters

def sidecar_path(path):
    return os.fspath(path) + ".json"


def encode_raster(bands, meta=None):
    """``bands`` maps name -> (H, W) array; returns ``(payload, sidecar_text)``."""
    if not bands:
        raise InvalidArgumentError("raster needs at least one band")
    arrays = [np.asarray(a, dtype=np.float64) for a in bands.values()]
    shape = arrays[0].shape
    if len(shape) != 2 or any(a.shape != shape for a in arrays):
        raise InvalidArgumentError("raster bands must be 2-D arrays of equal shape")
    payload = np.stack(arrays).astype("<f4").tobytes()
    side = {"width": shape[1], "height": shape[0], "dtype": "float32-le",
            "layout": "band-planar row-major", "bands": list(bands)}
    if meta:
        side["meta"] = meta
    return payload, json.dumps(side, indent=2, sort_keys=True) + "\n"


def write_raster(path, bands, meta=None):
    payload, side = encode_raster(bands, meta)
    _atomic_write(path, payload)
    _atomic_write(sidecar_path(path), side.encode("utf-8"))


def read_raster(path):
    """Returns ``(bands, sidecar)`` with ``bands`` an ordered name -> float32 array dict."""
    try:
        side = json.loads(_read(sidecar_path(path)).decode("utf-8"))
        w, h, names = int(side["width"]), int(side["height"]), list(side["bands"])
    except FileNotFoundError:
        raise
    except (KeyError, TypeError, ValueError, UnicodeDecodeError) as e:
        raise InvalidArgumentError(f"malformed raster sidecar: {e}") from e
    data = _read(path)
    if w < 1 or h < 1 or not names or len(data) != 4 * w * h * len(names):
        raise InvalidArgumentError("raster size does not match its sidecar")
    arr = np.frombuffer(data, dtype="<f4").reshape(len(names), h, w)
    return {n: arr[i] for i, n in enumerate(names)}, side


def read_single_band(path):
    bands, side = read_raster(path)
    if len(bands) != 1:
        raise InvalidArgumentError(f"expected a single-band raster, found {len(bands)} bands")
    name, values = next(iter(bands.items()))
    return np.asarray(values, dtype=np.float64), name, side


# PGM / PPM

def encode_pnm(pixels):
    a = np.asarray(pixels)
    if a.dtype != np.uint8:
        raise InvalidArgumentError("PNM pixels must be uint8")
    if a.ndim == 2:
        magic = b"P5"
    elif a.ndim == 3 and a.shape[2] == 3:
        magic = b"P6"
    else:
        raise InvalidArgumentError("PNM pixels must be (H, W) or (H, W, 3)")
    h, w = a.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(a).tobytes()


def _pnm_tokens(data, count, pos):
    toks = []
    n = len(data)
    while len(toks) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise InvalidArgumentError("truncated PNM header")
        toks.append(data[start:pos])
    return toks, pos + 1


def decode_pnm(data):
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise InvalidArgumentError("only binary PGM (P5) and PPM (P6) are supported")
    toks, pos = _pnm_tokens(data, 3, 2)
    try:
        w, h, maxval = (int(t) for t in toks)
    except ValueError as e:
        raise InvalidArgumentError("non-numeric PNM header") from e
    if maxval != 255 or w < 1 or h < 1:
        raise InvalidArgumentError("PNM must be 8-bit (maxval 255) and nonempty")
    depth = 1 if magic == b"P5" else 3
    body = data[pos:]
    if len(body) != w * h * depth:
        raise InvalidArgumentError("PNM payload size does not match its header")
    a = np.frombuffer(body, dtype=np.uint8)
    return a.reshape(h, w) if depth == 1 else a.reshape(h, w, 3)


def write_pnm(path, pixels):
    _atomic_write(path, encode_pnm(pixels))


def read_pnm(path):
    return decode_pnm(_read(path))


def mask_to_pixels(mask):
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def read_mask(path):
    a = read_pnm(path)
    if a.ndim != 2:
        raise InvalidArgumentError("a mask must be a PGM")
    return a > 0


def map_to_pixels(values, percentile=99.0):
    """Grayscale rendering clipped at ``percentile``; all-zero maps are black."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or not np.all(np.isfinite(v)):
        raise InvalidArgumentError("map must be a finite 2-D array")
    top = np.percentile(v, percentile)
    if not top > 0:
        top = v.max()
    if not top > 0:
        return np.zeros(v.shape, dtype=np.uint8)
    return np.round(255.0 * np.clip(v / top, 0.0, 1.0)).astype(np.uint8)


# JSON / CSV

def encode_json(obj):
    return (json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n").encode("utf-8")


def write_json(path, obj):
    _atomic_write(path, encode_json(obj))


def read_json(path):
    try:
        return json.loads(_read(path).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InvalidArgumentError(f"{path}: not valid JSON: {e}") from e


def encode_csv(header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue().encode("utf-8")


def write_csv(path, header, rows):
    _atomic_write(path, encode_csv(header, rows))


# SCR regions

def _parse_box(text, lineno):
    parts = text.split(",")
    if len(parts) != 4:
        raise InvalidArgumentError(f"line {lineno}: box must be x,y,w,h, got {text!r}")
    try:
        box = tuple(int(p) for p in parts)
    except ValueError:
        raise InvalidArgumentError(f"line {lineno}: box must be integers, got {text!r}") from None
    if box[2] < 1 or box[3] < 1 or box[0] < 0 or box[1] < 0:
        raise InvalidArgumentError(f"line {lineno}: box {text!r} is empty or negative")
    return box


def parse_regions(text):
    """Parse ``name target_box clutter_box`` lines, boxes written ``x,y,w,h``.

    Blank lines and ``#`` comments are ignored.  Returns a list of
    ``(name, target, clutter)`` tuples.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidArgumentError(
                f"line {lineno}: expected 'name x,y,w,h x,y,w,h', got {line!r}")
        out.append((parts[0], _parse_box(parts[1], lineno), _parse_box(parts[2], lineno)))
    return out


def format_regions(regions):
    lines = ["# name target(x,y,w,h) clutter(x,y,w,h)"]
    for name, t, c in regions:
        lines.append(f"{name} {','.join(map(str, t))} {','.join(map(str, c))}")
    return "\n".join(lines) + "\n"


def read_regions(path):
    try:
        text = _read(path).decode("utf-8")
    except UnicodeDecodeError as e:
        raise InvalidArgumentError(f"{path}: not UTF-8 text") from e
    return parse_regions(text)


def write_regions(path, regions):
    _atomic_write(path, format_regions(regions).encode("utf-8"))
