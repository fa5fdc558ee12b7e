"""Binary containers for range-bin data (KPHD) and Kronecker models (KCOV).

Both formats are little-endian with no padding.

KPHD::

    magic  b"KPHD"    4 bytes
    version u16       2 bytes
    p, q, n u32       12 bytes
    n * p * q complex samples, antenna-major, (real, imag) float64 pairs

KCOV::

    magic  b"KCOV"    4 bytes
    version u16       2 bytes
    p, q, r_a, r_b u32  16 bytes
    A (p x p) then B (q x q), column-major, (real, imag) float64 pairs

Headers are read and validated before any payload is touched.
"""
import struct
from dataclasses import dataclass

import numpy as np

from .covariance import KronCovModel, SampleSet
from .errors import FormatError

VERSION = 1
PHD_MAGIC = b"KPHD"
COV_MAGIC = b"KCOV"
_PHD_HEADER = struct.Struct("<4sHIII")
_COV_HEADER = struct.Struct("<4sHIIII")
_COMPLEX = np.dtype("<c16")

PHD_HEADER_SIZE = _PHD_HEADER.size
COV_HEADER_SIZE = _COV_HEADER.size


@dataclass(frozen=True)
class PhaseHistoryHeader:
    version: int
    p: int
    q: int
    n: int

    @property
    def payload_size(self):
        return self.n * self.p * self.q * _COMPLEX.itemsize


@dataclass(frozen=True)
class ModelHeader:
    version: int
    p: int
    q: int
    r_a: int
    r_b: int

    @property
    def payload_size(self):
        return (self.p * self.p + self.q * self.q) * _COMPLEX.itemsize


def _read_exact(fh, size, what, path):
    data = fh.read(size)
    if len(data) != size:
        raise FormatError(f"{path}: truncated {what} ({len(data)} of {size} bytes)")
    return data


def _check_magic_version(magic, version, expected, path):
    if magic != expected:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {expected!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}, expected {VERSION}")


def write_phase_history(path, data):
    """Write a :class:`SampleSet` as KPHD."""
    header = _PHD_HEADER.pack(PHD_MAGIC, VERSION, data.p, data.q, data.n)
    payload = np.ascontiguousarray(data.samples, dtype=_COMPLEX).tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_phase_history_header(fh, path="<stream>"):
    magic, version, p, q, n = _PHD_HEADER.unpack(
        _read_exact(fh, _PHD_HEADER.size, "header", path))
    _check_magic_version(magic, version, PHD_MAGIC, path)
    if p == 0:
        raise FormatError(f"{path}: header field p is zero")
    if q == 0:
        raise FormatError(f"{path}: header field q is zero")
    return PhaseHistoryHeader(version, p, q, n)


def read_phase_history(path, expect=None):
    """Read a KPHD file into a :class:`SampleSet`.

    ``expect`` is an optional callable run on the header before the payload
    is read, so dimension checks can reject a file cheaply.
    """
    with open(path, "rb") as fh:
        header = read_phase_history_header(fh, path)
        if expect is not None:
            expect(header)
        payload = fh.read()
    if len(payload) != header.payload_size:
        raise FormatError(f"{path}: header field n={header.n} implies "
                          f"{header.payload_size} payload bytes, found {len(payload)}")
    samples = np.frombuffer(payload, dtype=_COMPLEX).astype(np.complex128)
    return SampleSet(header.p, header.q, samples.reshape(header.n, header.p * header.q))


def write_model(path, model):
    """Write a :class:`KronCovModel` as KCOV."""
    header = _COV_HEADER.pack(COV_MAGIC, VERSION, model.p, model.q, model.r_a, model.r_b)
    a = np.asarray(model.a_factor, dtype=_COMPLEX).tobytes(order="F")
    b = np.asarray(model.b_factor, dtype=_COMPLEX).tobytes(order="F")
    try:
        with open(path, "wb") as fh:
            fh.write(header + a + b)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_model_header(fh, path="<stream>"):
    magic, version, p, q, r_a, r_b = _COV_HEADER.unpack(
        _read_exact(fh, _COV_HEADER.size, "header", path))
    _check_magic_version(magic, version, COV_MAGIC, path)
    for name, value, top in (("p", p, None), ("q", q, None), ("r_a", r_a, p), ("r_b", r_b, q)):
        if value == 0 or (top is not None and value > top):
            raise FormatError(f"{path}: header field {name}={value} out of range")
    return ModelHeader(version, p, q, r_a, r_b)


def read_model(path):
    """Read a KCOV file. Diagnostics other than the ranks are not stored."""
    with open(path, "rb") as fh:
        header = read_model_header(fh, path)
        payload = fh.read()
    if len(payload) != header.payload_size:
        raise FormatError(f"{path}: factor payload is {len(payload)} bytes, "
                          f"expected {header.payload_size}")
    values = np.frombuffer(payload, dtype=_COMPLEX).astype(np.complex128)
    cut = header.p * header.p
    a = values[:cut].reshape(header.p, header.p, order="F")
    b = values[cut:].reshape(header.q, header.q, order="F")
    return KronCovModel(np.ascontiguousarray(a), np.ascontiguousarray(b), header.r_a, header.r_b)
