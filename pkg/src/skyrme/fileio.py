"""Binary field formats.

SKYF (group fields): 8-byte magic ``SKYF0001``; little-endian u32 group
id, rep_dim N, N1, N2, N3; three binary64 periods; then site-major data
(x^3 fastest) of row-major N x N matrices as (re, im) binary64 pairs.
SKYA (algebra-valued 1-forms): magic ``SKYA0001``, same header, then the
three component blocks in axis order, each laid out like a field block.

C-ordered complex128 is exactly the (re, im) pair layout, so blocks are
written and read with tobytes/frombuffer plus an explicit little-endian
dtype.
"""

from __future__ import annotations

import struct

import numpy as np

from .algebra import LieAlgebra, parse_algebra
from .errors import FileFormatError
from .lattice import AlgebraOneForm, GroupField, TorusLattice

__all__ = ["write_field", "read_field", "write_one_form", "read_one_form",
           "GROUP_IDS", "group_id", "group_from_id"]

_MAGIC_FIELD = b"SKYF0001"
_MAGIC_FORM = b"SKYA0001"
_HEADER = struct.Struct("<IIIIIddd")
_CPLX = np.dtype("<c16")

GROUP_IDS = {}
for _n in range(2, 6):
    GROUP_IDS[f"su{_n}"] = 0x0100 + _n
for _m in range(3, 10):
    GROUP_IDS[f"spin{_m}"] = 0x0200 + _m
for _n in range(1, 4):
    GROUP_IDS[f"sp{_n}"] = 0x0300 + _n
GROUP_IDS["g2"] = 0x0400
GROUP_IDS["f4"] = 0x0500
GROUP_IDS["u1"] = 0x0600
GROUP_IDS["so3"] = 0x0700
_ID_TO_NAME = {v: k for k, v in GROUP_IDS.items()}


def group_id(alg: LieAlgebra) -> int:
    if alg.name not in GROUP_IDS:
        raise FileFormatError(f"group {alg.name!r} has no file id (atomic groups only)")
    return GROUP_IDS[alg.name]


def group_from_id(gid: int) -> LieAlgebra:
    if gid not in _ID_TO_NAME:
        raise FileFormatError(f"unknown group id 0x{gid:04x}")
    return parse_algebra(_ID_TO_NAME[gid])


def _write_header(fh, magic: bytes, alg: LieAlgebra, lattice: TorusLattice) -> None:
    fh.write(magic)
    fh.write(_HEADER.pack(group_id(alg), alg.rep_dim, *lattice.dims, *lattice.lengths))


def _read_header(fh, magic: bytes):
    got = fh.read(8)
    if got != magic:
        raise FileFormatError(f"bad magic {got!r}, expected {magic!r}")
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise FileFormatError("truncated header")
    gid, rep, n1, n2, n3, l1, l2, l3 = _HEADER.unpack(raw)
    alg = group_from_id(gid)
    if alg.rep_dim != rep:
        raise FileFormatError(f"rep_dim {rep} does not match group {alg.name}")
    return alg, TorusLattice((n1, n2, n3), (l1, l2, l3))


def _read_block(fh, lattice: TorusLattice, rep: int) -> np.ndarray:
    count = lattice.dims[0] * lattice.dims[1] * lattice.dims[2] * rep * rep
    raw = fh.read(count * 16)
    if len(raw) != count * 16:
        raise FileFormatError("truncated data block")
    arr = np.frombuffer(raw, dtype=_CPLX).astype(complex)
    return arr.reshape(lattice.dims + (rep, rep))


def write_field(path, u: GroupField) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, _MAGIC_FIELD, u.algebra, u.lattice)
        fh.write(np.ascontiguousarray(u.values, dtype=_CPLX).tobytes())


def read_field(path, validate: bool = True) -> GroupField:
    with open(path, "rb") as fh:
        alg, lattice = _read_header(fh, _MAGIC_FIELD)
        values = _read_block(fh, lattice, alg.rep_dim)
        if fh.read(1):
            raise FileFormatError("trailing bytes after field data")
    u = GroupField(lattice, alg, values)
    if validate:
        u.validate()
    return u


def write_one_form(path, a: AlgebraOneForm) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, _MAGIC_FORM, a.algebra, a.lattice)
        for i in range(3):
            M = a.algebra.to_matrix(a.coeffs[i])
            fh.write(np.ascontiguousarray(M, dtype=_CPLX).tobytes())


def read_one_form(path, sampling: str = "link", span_tol: float = 1e-9) -> AlgebraOneForm:
    with open(path, "rb") as fh:
        alg, lattice = _read_header(fh, _MAGIC_FORM)
        comps = []
        for _ in range(3):
            M = _read_block(fh, lattice, alg.rep_dim)
            coords, res = alg.to_coords(M)
            if res > span_tol:
                raise FileFormatError(f"component outside algebra span (residual {res:.2e})")
            comps.append(coords)
        if fh.read(1):
            raise FileFormatError("trailing bytes after form data")
    return AlgebraOneForm(lattice, alg, np.stack(comps), sampling=sampling)
