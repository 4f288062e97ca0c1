"""PGM images, dataset directories, descriptor files and synthetic palms."""

from __future__ import annotations

import logging
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .descriptor import METHOD_IDS, METHODS, Descriptor
from .errors import FormatError, InputError, ParameterError
from .response_field import GrayImage

log = logging.getLogger(__name__)

DESCRIPTOR_MAGIC = b"PDSC"
DESCRIPTOR_VERSION = 1


# --------------------------------------------------------------------------
# PGM

_WS = b" \t\r\n\v\f"


class _HeaderReader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def token(self, what: str) -> bytes:
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos:self.pos + 1]
            if c == b"#":
                while self.pos < n and data[self.pos:self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            elif c in _WS:
                self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < n and data[self.pos:self.pos + 1] not in _WS + b"#":
            self.pos += 1
        if start == self.pos:
            raise FormatError(f"unexpected end of file while reading {what}", start, self.path)
        return data[start:self.pos]

    def integer(self, what: str, lo: int, hi: int) -> int:
        start = self.pos
        tok = self.token(what)
        if not tok.isdigit():
            raise FormatError(f"{what} is not a decimal integer: {tok[:20]!r}", start, self.path)
        value = int(tok)
        if not lo <= value <= hi:
            raise FormatError(f"{what} {value} outside {lo}..{hi}", start, self.path)
        return value


def parse_pgm(data: bytes, path=None) -> GrayImage:
    """Decode P2 (ASCII) or P5 (binary) PGM bytes.

    Samples are rescaled to [0, 255] (``v * 255 / maxval``); 8-bit files
    come back unchanged.
    """
    reader = _HeaderReader(data, path)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported magic {magic!r}; expected P2 or P5", 0, path)
    reader.pos = 2
    width = reader.integer("width", 1, 1 << 24)
    height = reader.integer("height", 1, 1 << 24)
    maxval = reader.integer("maxval", 1, 65535)
    count = width * height

    if magic == b"P5":
        if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in _WS:
            raise FormatError("missing whitespace after maxval", reader.pos, path)
        start = reader.pos + 1
        itemsize = 1 if maxval < 256 else 2
        need = count * itemsize
        have = len(data) - start
        if have < need:
            raise FormatError(
                f"truncated pixel data: expected {need} bytes, found {have} "
                f"({need - have} short)", start + have, path,
            )
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        values = np.frombuffer(data, dtype=dtype, count=count, offset=start)
    else:
        values = np.empty(count, dtype=np.int64)
        for i in range(count):
            try:
                values[i] = reader.integer("pixel", 0, maxval)
            except FormatError as exc:
                if reader.pos >= len(data):
                    raise FormatError(
                        f"truncated pixel data: expected {count} samples, found {i} "
                        f"({count - i} short)", reader.pos, path,
                    ) from exc
                raise
    if values.size and values.max() > maxval:
        raise FormatError(f"sample exceeds maxval {maxval}", None, path)
    pixels = values.astype(np.float64).reshape(height, width)
    if maxval != 255:
        pixels = pixels * (255.0 / maxval)
    return GrayImage(pixels)


def load_pgm(path) -> GrayImage:
    path = Path(path)
    return parse_pgm(path.read_bytes(), path)


def encode_pgm(image) -> bytes:
    """8-bit P5 bytes; pixel values are rounded and clipped to 0..255."""
    img = image if isinstance(image, GrayImage) else GrayImage(image)
    px = np.clip(np.rint(img.pixels), 0, 255).astype(np.uint8)
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + px.tobytes()


def atomic_write(path, payload: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path, image):
    atomic_write(path, encode_pgm(image))


# --------------------------------------------------------------------------
# Datasets

@dataclass(frozen=True)
class DatasetEntry:
    palm_id: str
    sample_id: str
    image: GrayImage = field(repr=False, compare=False)
    path: Path | None = field(default=None, compare=False)

    @property
    def name(self) -> str:
        return f"{self.palm_id}_{self.sample_id}"


@dataclass
class Dataset:
    entries: list
    skipped: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def identities(self) -> dict:
        out = {}
        for e in self.entries:
            out[e.palm_id] = out.get(e.palm_id, 0) + 1
        return out


def split_name(stem: str) -> tuple:
    """``"<palm>_<sample>"`` split at the final underscore."""
    palm, sep, sample = stem.rpartition("_")
    if not sep or not palm or not sample:
        raise InputError(f"cannot parse identity from {stem!r}; expected <palm_id>_<sample_id>")
    return palm, sample


def scan_dataset(directory) -> tuple:
    """Sorted ``(palm_id, sample_id, path)`` triples plus skipped file names."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory} is not a directory")
    found, skipped, seen = [], [], {}
    for p in sorted(directory.iterdir()):
        if not p.is_file() or p.suffix.lower() != ".pgm":
            continue
        try:
            palm, sample = split_name(p.stem)
        except InputError:
            skipped.append(p.name)
            continue
        key = (palm, sample)
        if key in seen:
            raise InputError(f"duplicate sample {palm}/{sample}: {seen[key]} and {p.name}")
        seen[key] = p.name
        found.append((palm, sample, p))
    found.sort(key=lambda t: (t[0], t[1]))
    return found, skipped


def load_dataset(directory) -> Dataset:
    """Load ``<palm_id>_<sample_id>.pgm`` files sorted by (palm, sample)."""
    found, skipped = scan_dataset(directory)
    for name in skipped:
        log.warning("skipping %s: no <palm_id>_<sample_id> name", name)
    if not found:
        log.warning("no PGM samples found in %s", directory)
    entries = [DatasetEntry(palm, sample, load_pgm(p), p) for palm, sample, p in found]
    return Dataset(entries, skipped)


# --------------------------------------------------------------------------
# Descriptor files
#
# "PDSC" | u32 record count | u16 version, then per record:
# u8 method | u16 block size | u32 bins/block | u32 n_blocks |
# u16 identity length | identity (utf-8) | n_blocks*bins u32 counts
# All little-endian.

_FILE_HEAD = struct.Struct("<4sIH")
_REC_HEAD = struct.Struct("<BHIIH")


def encode_descriptors(descriptors: Sequence[Descriptor]) -> bytes:
    parts = [_FILE_HEAD.pack(DESCRIPTOR_MAGIC, len(descriptors), DESCRIPTOR_VERSION)]
    for d in descriptors:
        ident = d.identity.encode("utf-8")
        if len(ident) > 0xFFFF:
            raise InputError(f"identity too long ({len(ident)} bytes)")
        parts.append(_REC_HEAD.pack(METHOD_IDS[d.method], d.block_size,
                                    d.bins_per_block, d.n_blocks, len(ident)))
        parts.append(ident)
        parts.append(np.asarray(d.counts, dtype="<u4").tobytes())
    return b"".join(parts)


def decode_descriptors(data: bytes, path=None) -> list:
    if len(data) < _FILE_HEAD.size:
        raise FormatError("file shorter than descriptor header", len(data), path)
    magic, count, version = _FILE_HEAD.unpack_from(data, 0)
    if magic != DESCRIPTOR_MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0, path)
    if version != DESCRIPTOR_VERSION:
        raise FormatError(f"unsupported version {version}", 8, path)
    pos = _FILE_HEAD.size
    out = []
    for _ in range(count):
        if len(data) - pos < _REC_HEAD.size:
            raise FormatError("truncated record header", pos, path)
        method_id, block, bins, n_blocks, id_len = _REC_HEAD.unpack_from(data, pos)
        if method_id >= len(METHODS):
            raise FormatError(f"unknown method id {method_id}", pos, path)
        pos += _REC_HEAD.size
        if len(data) - pos < id_len:
            raise FormatError("truncated identity", pos, path)
        ident = data[pos:pos + id_len].decode("utf-8")
        pos += id_len
        n = n_blocks * bins
        if len(data) - pos < 4 * n:
            raise FormatError(f"truncated counts: need {4 * n} bytes", pos, path)
        counts = np.frombuffer(data, dtype="<u4", count=n, offset=pos).astype(np.uint32)
        pos += 4 * n
        out.append(Descriptor(METHODS[method_id], block, n_blocks, bins, counts, ident))
    if pos != len(data):
        raise FormatError(f"{len(data) - pos} trailing bytes", pos, path)
    return out


def write_descriptors(path, descriptors: Sequence[Descriptor]):
    atomic_write(path, encode_descriptors(list(descriptors)))


def read_descriptors(path) -> list:
    path = Path(path)
    return decode_descriptors(path.read_bytes(), path)


# --------------------------------------------------------------------------
# Synthetic line images

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class SynthSpec:
    """Dark straight lines through the image centre.

    Each angle is the direction of the line's *normal*, the same
    convention as the filter bank, so a line at ``theta_j`` lies along
    the central ridge of filter ``j``. ``width`` is the full width at half
    depth of the Gaussian cross-section. ``shift`` moves the crossing
    point by ``(dx, dy)`` pixels.
    """

    size: int = 128
    angles: tuple = ()
    width: float = 3.0
    depth: float = 60.0
    background: float = 180.0
    noise: float = 0.0
    shift: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if int(self.size) != self.size or self.size < 32:
            raise ParameterError(f"size must be an integer >= 32, got {self.size!r}")
        if len(self.angles) > 4:
            raise ParameterError(f"at most 4 lines, got {len(self.angles)}")
        for a in self.angles:
            if not 0.0 <= a < math.pi:
                raise ParameterError(f"line angle {a} outside [0, pi)")
        if not self.width >= 1:
            raise ParameterError(f"width must be >= 1, got {self.width}")
        if self.noise < 0 or self.depth < 0:
            raise ParameterError("noise and depth must be non-negative")


def line_distance(spec: SynthSpec, theta: float) -> np.ndarray:
    """Signed distance of every pixel centre from the line at ``theta``."""
    c = (spec.size - 1) / 2.0
    t = np.arange(spec.size, dtype=np.float64) - c
    y, x = np.meshgrid(t - spec.shift[1], t - spec.shift[0], indexing="ij")
    return x * math.cos(theta) + y * math.sin(theta)


def render_synthetic(spec: SynthSpec, seed: int = 0) -> tuple:
    """Render ``spec``; returns ``(GrayImage, angles)``.

    Overlapping lines darken to the deepest profile, not the sum.
    """
    sigma = spec.width / FWHM_PER_SIGMA
    darkness = np.zeros((spec.size, spec.size))
    for theta in spec.angles:
        d = line_distance(spec, theta)
        darkness = np.maximum(darkness, np.exp(-d * d / (2.0 * sigma * sigma)))
    pixels = spec.background - spec.depth * darkness
    if spec.noise > 0:
        rng = np.random.default_rng(seed)
        pixels = pixels + rng.normal(0.0, spec.noise, pixels.shape)
    return GrayImage(np.clip(pixels, 0.0, 255.0)), list(spec.angles)


def identity_angles(n_identities: int, seed: int = 0, min_separation=math.pi / 6) -> list:
    """Distinct random line-angle pairs, one pair per identity."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < n_identities:
        a, b = sorted(rng.uniform(0.0, math.pi, 2))
        gap = min(b - a, math.pi - (b - a))
        if gap < min_separation:
            continue
        if any(abs(a - p) + abs(b - q) < min_separation for p, q in pairs):
            continue
        pairs.append((float(a), float(b)))
    return pairs


def synthetic_dataset(n_identities: int = 8, n_samples: int = 6, seed: int = 0,
                      size: int = 128, noise: float = 2.0, max_shift: float = 2.0,
                      angle_jitter: float = math.radians(2.0),
                      width: float = 3.0) -> list:
    """Noisy, slightly shifted and rotated samples of random line pairs.

    Returns a list of ``(DatasetEntry, angles)`` sorted by identity then
    sample. Deterministic in ``seed``.
    """
    if n_identities < 1 or n_samples < 1:
        raise ParameterError("need at least one identity and one sample")
    pairs = identity_angles(n_identities, seed)
    rng = np.random.default_rng(seed + 1)
    out = []
    for i, pair in enumerate(pairs):
        for s in range(n_samples):
            angles = tuple((a + rng.uniform(-angle_jitter, angle_jitter)) % math.pi for a in pair)
            shift = tuple(rng.uniform(-max_shift, max_shift, 2))
            spec = SynthSpec(size=size, angles=angles, width=width, noise=noise, shift=shift)
            image, _ = render_synthetic(spec, seed=int(rng.integers(1 << 31)))
            entry = DatasetEntry(f"id{i:03d}", f"{s:02d}", image)
            out.append((entry, angles))
    return out


def format_ground_truth(spec: SynthSpec, seed: int, n_orientations: int = 12) -> str:
    lines = [f"seed={seed}", f"size={spec.size}", f"width={spec.width!r}",
             f"depth={spec.depth!r}", f"background={spec.background!r}",
             f"noise={spec.noise!r}", f"shift={spec.shift[0]!r},{spec.shift[1]!r}"]
    for k, a in enumerate(spec.angles):
        nearest = int(round(a * n_orientations / math.pi)) % n_orientations + 1
        lines.append(f"angle{k}={a!r} degrees={math.degrees(a):.4f} nearest_index={nearest}")
    return "\n".join(lines) + "\n"
