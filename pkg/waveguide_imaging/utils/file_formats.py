"""Binary and text file formats.

All binary files are little-endian and start with a 4-byte magic followed by
a u32 format version:

    WGID  data:           receivers, components (u32), component ids u32[C],
                          noise flag, seed (u32), SNR in dB f64 (version 2),
                          receiver coordinates f64[N, 2], complex f64[N * C]
    WGIM  sensing matrix: rows, cols (u32), sha256 scenario digest (32 bytes),
                          voxel volume f64, mode budget u32, parameterization u32,
                          complex f64[rows * cols] row-major
    WGIV  image volume:   nx, ny, nz, channels (u32), origin f64[3], pitch f64[3],
                          sha256 scenario digest, complex f64 (C order, channel last)
"""

import hashlib
import os
import pathlib
import shutil
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import CorruptedDataError, FileOperationError, ValidationError
from .logger import get_logger, log_error

logger = get_logger("file_formats")

FORMAT_VERSION = 1
DATA_FORMAT_VERSION = 2
DATA_MAGIC = b"WGID"
MATRIX_MAGIC = b"WGIM"
VOLUME_MAGIC = b"WGIV"

U32 = np.dtype("<u4")
F64 = np.dtype("<f8")
C128 = np.dtype("<c16")

PARAMETERIZATION_CODES = {"isotropic": 0, "diagonal": 1, "full": 2}
CHANNEL_PARAMETERIZATION = {1: "isotropic", 3: "diagonal", 9: "full"}

PathLike = Union[str, pathlib.Path]


def write_bytes_atomic(path: PathLike, payload: bytes) -> None:
    """Write through a ``.tmp`` file moved into place."""
    path = str(path)
    temp_file = f"{path}.tmp"
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(temp_file, "wb") as f:
            f.write(payload)
        shutil.move(temp_file, path)
    except (OSError, IOError) as e:
        log_error("file_formats", e, "write_bytes_atomic", {"file": path})
        if os.path.exists(temp_file):
            try:
                os.remove(temp_file)
            except OSError:
                pass
        raise FileOperationError(f"Failed to write file: {str(e)}", {"file": path})


def read_bytes(path: PathLike) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except (OSError, IOError) as e:
        raise FileOperationError(f"Failed to read file: {str(e)}", {"file": str(path)})


def git_blob_sha1(payload: bytes) -> str:
    """Content hash in the form git uses for blobs."""
    header = f"blob {len(payload)}\0".encode("ascii")
    return hashlib.sha1(header + payload).hexdigest()


def file_hash(path: PathLike) -> str:
    return git_blob_sha1(read_bytes(path))


def _digest_bytes(scenario_hash: str) -> bytes:
    if not scenario_hash:
        return bytes(32)
    return bytes.fromhex(scenario_hash)


def _digest_hex(raw: bytes) -> str:
    return "" if raw == bytes(32) else raw.hex()


class _Reader:
    """Sequential reader over a payload that raises on truncation."""

    def __init__(self, payload: bytes, magic: bytes, source: str,
                 versions: Tuple[int, ...] = (FORMAT_VERSION,)):
        self.payload = payload
        self.source = source
        self.offset = 0
        if payload[:4] != magic:
            raise CorruptedDataError("Bad file magic",
                                     {"file": source, "expected": magic.decode(),
                                      "found": payload[:4].decode("latin-1")})
        self.offset = 4
        self.version = int(self.array(U32, 1)[0])
        if self.version not in versions:
            raise CorruptedDataError("Unsupported format version",
                                     {"file": source, "version": self.version})

    def array(self, dtype: np.dtype, count: int) -> np.ndarray:
        size = dtype.itemsize * count
        if self.offset + size > len(self.payload):
            raise CorruptedDataError("File is truncated",
                                     {"file": self.source, "needed": self.offset + size,
                                      "size": len(self.payload)})
        out = np.frombuffer(self.payload, dtype=dtype, count=count, offset=self.offset)
        self.offset += size
        return out

    def raw(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CorruptedDataError("File is truncated", {"file": self.source})
        out = self.payload[self.offset:self.offset + size]
        self.offset += size
        return out

    def finish(self) -> None:
        if self.offset != len(self.payload):
            raise CorruptedDataError("Unexpected trailing bytes",
                                     {"file": self.source, "extra": len(self.payload) - self.offset})


def _u32(*values: int) -> bytes:
    return np.asarray(values, dtype=U32).tobytes()


NoiseHeader = Optional[Tuple[float, int]]


def encode_data(values: np.ndarray, receivers: np.ndarray, components: Sequence[int],
                noise: NoiseHeader = None) -> bytes:
    """Data file; ``noise`` is ``(snr_db, seed)`` for noisy data."""
    receivers = np.asarray(receivers, dtype=F64).reshape(-1, 2)
    values = np.asarray(values, dtype=C128).reshape(receivers.shape[0], len(components))
    snr_db, seed = noise if noise is not None else (0.0, 0)
    if not 0 <= seed <= np.iinfo(U32).max:
        raise ValidationError("Noise seed must fit an unsigned 32-bit integer", {"seed": seed})
    return b"".join([
        DATA_MAGIC,
        _u32(DATA_FORMAT_VERSION, receivers.shape[0], len(components)),
        _u32(*components),
        _u32(int(noise is not None), seed),
        np.asarray([snr_db], dtype=F64).tobytes(),
        receivers.tobytes(),
        values.tobytes(),
    ])


def decode_data(payload: bytes, source: str = "<bytes>"
                ) -> Tuple[np.ndarray, np.ndarray, Tuple[int, ...], NoiseHeader]:
    """(values (N, C), receivers (N, 2), components, noise); version 1 files carry no noise."""
    reader = _Reader(payload, DATA_MAGIC, source, (FORMAT_VERSION, DATA_FORMAT_VERSION))
    n, c = (int(v) for v in reader.array(U32, 2))
    components = tuple(int(q) for q in reader.array(U32, c))
    noise: NoiseHeader = None
    if reader.version >= 2:
        flag, seed = (int(v) for v in reader.array(U32, 2))
        snr_db = float(reader.array(F64, 1)[0])
        if flag not in (0, 1):
            raise CorruptedDataError("Bad noise flag", {"file": source, "flag": flag})
        if flag:
            noise = (snr_db, seed)
    receivers = reader.array(F64, 2 * n).reshape(n, 2).copy()
    values = reader.array(C128, n * c).reshape(n, c).copy()
    reader.finish()
    return values, receivers, components, noise


@dataclass(frozen=True)
class MatrixHeader:
    rows: int
    cols: int
    scenario_hash: str
    voxel_volume: float
    mode_budget: int
    parameterization: str


def encode_matrix(matrix: np.ndarray, header: MatrixHeader) -> bytes:
    matrix = np.ascontiguousarray(matrix, dtype=C128)
    return b"".join([
        MATRIX_MAGIC,
        _u32(FORMAT_VERSION, matrix.shape[0], matrix.shape[1]),
        _digest_bytes(header.scenario_hash),
        np.asarray([header.voxel_volume], dtype=F64).tobytes(),
        _u32(header.mode_budget, PARAMETERIZATION_CODES[header.parameterization]),
        matrix.tobytes(),
    ])


def decode_matrix(payload: bytes, source: str = "<bytes>") -> Tuple[np.ndarray, MatrixHeader]:
    reader = _Reader(payload, MATRIX_MAGIC, source)
    rows, cols = (int(v) for v in reader.array(U32, 2))
    digest = _digest_hex(reader.raw(32))
    volume = float(reader.array(F64, 1)[0])
    budget, code = (int(v) for v in reader.array(U32, 2))
    names = {v: k for k, v in PARAMETERIZATION_CODES.items()}
    if code not in names:
        raise CorruptedDataError("Unknown parameterization code", {"file": source, "code": code})
    matrix = reader.array(C128, rows * cols).reshape(rows, cols).copy()
    reader.finish()
    return matrix, MatrixHeader(rows, cols, digest, volume, budget, names[code])


@dataclass(frozen=True)
class VolumeHeader:
    shape: Tuple[int, int, int]
    channels: int
    origin: Tuple[float, float, float]
    pitch: Tuple[float, float, float]
    scenario_hash: str

    @property
    def parameterization(self) -> str:
        return CHANNEL_PARAMETERIZATION[self.channels]


def encode_volume(values: np.ndarray, header: VolumeHeader) -> bytes:
    values = np.ascontiguousarray(values, dtype=C128)
    return b"".join([
        VOLUME_MAGIC,
        _u32(FORMAT_VERSION, *header.shape, header.channels),
        np.asarray(header.origin, dtype=F64).tobytes(),
        np.asarray(header.pitch, dtype=F64).tobytes(),
        _digest_bytes(header.scenario_hash),
        values.tobytes(),
    ])


def decode_volume(payload: bytes, source: str = "<bytes>") -> Tuple[np.ndarray, VolumeHeader]:
    reader = _Reader(payload, VOLUME_MAGIC, source)
    nx, ny, nz, channels = (int(v) for v in reader.array(U32, 4))
    if channels not in CHANNEL_PARAMETERIZATION:
        raise CorruptedDataError("Unsupported channel count", {"file": source, "channels": channels})
    origin = tuple(float(v) for v in reader.array(F64, 3))
    pitch = tuple(float(v) for v in reader.array(F64, 3))
    digest = _digest_hex(reader.raw(32))
    values = reader.array(C128, nx * ny * nz * channels).reshape(nx, ny, nz, channels).copy()
    reader.finish()
    header = VolumeHeader((nx, ny, nz), channels, origin, pitch, digest)  # type: ignore[arg-type]
    return values, header


def write_csv(path: PathLike, table: np.ndarray, columns: Sequence[str]) -> None:
    """Comma-separated table with a header line, written atomically."""
    path = str(path)
    temp_file = f"{path}.tmp"
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        np.savetxt(temp_file, np.asarray(table, dtype=float), delimiter=",",
                   header=",".join(columns), comments="", fmt="%.17g")
        shutil.move(temp_file, path)
    except (OSError, IOError) as e:
        log_error("file_formats", e, "write_csv", {"file": path})
        raise FileOperationError(f"Failed to write CSV file: {str(e)}", {"file": path})


def data_csv_table(values: np.ndarray, receivers: np.ndarray,
                   components: Sequence[int]) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Rows ``x1, x2, re_q, im_q, ...`` mirroring the data file."""
    columns = ["x1", "x2"]
    parts = [np.asarray(receivers, dtype=float)]
    for i, q in enumerate(components):
        columns += [f"re_{q}", f"im_{q}"]
        parts.append(np.stack([values[:, i].real, values[:, i].imag], axis=1))
    return np.concatenate(parts, axis=1), tuple(columns)


MODE_COLUMNS = ("n1", "n2", "lambda", "beta", "multiplicity")


def modes_csv_table(entries: Sequence[Any]) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Rows ``n1, n2, lambda, beta, multiplicity`` of a mode list."""
    table = np.array([[e.n1, e.n2, e.eigenvalue, e.beta.real, e.multiplicity] for e in entries],
                     dtype=float).reshape(-1, len(MODE_COLUMNS))
    return table, MODE_COLUMNS


def encode_pgm(sheet: np.ndarray) -> bytes:
    """8-bit binary PGM, linear scale to the sheet maximum; rows are the first axis."""
    magnitude = np.abs(np.asarray(sheet, dtype=complex))
    peak = float(magnitude.max()) if magnitude.size else 0.0
    if peak > 0:
        pixels = np.round(255.0 * magnitude / peak).astype(np.uint8)
    else:
        pixels = np.zeros(magnitude.shape, dtype=np.uint8)
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()
