"""Byte formats for keys, ciphertexts and parameter files.

Key file layout (all integers little-endian)::

    "QCMCE1"  version:u8  kind:u8  n0:u32  p:u32  k0:u32
    meta_len:u32  meta: UTF-8 "key=value" lines
    payload

Bit packing is little-endian within bytes (bit i of a stream is bit i % 8 of
byte i // 8) and row-major across blocks.  The public payload is the k0
public circulant first rows as one continuous (n0-1) p bit stream, zero
padded to a byte.  The private payload follows the public one:

* H: n0 blocks, each ``weight:u32`` then ``weight`` support indices (u32)
* Q: n0 x n0 blocks, same sparse encoding, row-major
* S: k0 x k0 dense blocks, each ``weight:u32`` then ceil(p/8) packed bytes

Ciphertext layout: the same 17-byte header with kind 2, ``bits:u64`` (message
length) and then ceil(bits / k) codewords as one continuous bit stream.  An
empty message encrypts to an empty file.
"""

from __future__ import annotations

import io
import struct
from fractions import Fraction
from typing import Iterable

import numpy as np

from .codes import DegreeProfile
from .crypto import PrivateKey, PublicKey, SystemParams
from .errors import ValidationError
from .gf2 import Circulant, QcMatrix, circ_from_support

MAGIC = b"QCMCE1"
VERSION = 1
KIND_PUBLIC, KIND_PRIVATE, KIND_CIPHERTEXT = 0, 1, 2
_HEADER = struct.Struct("<6sBBIII")


# -- parameter files -------------------------------------------------------


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.replace(" ", "").split(",") if x)


def params_from_kv(kv: dict[str, str]) -> SystemParams:
    known = {"p", "profile", "m", "t_prime", "decoder", "bf_thresholds", "max_iters", "safety_margin", "validate", "t_th", "n0"}
    unknown = set(kv) - known
    if unknown:
        raise ValidationError(f"unknown parameter keys {sorted(unknown)}")
    try:
        profile = DegreeProfile(_ints(kv["profile"]), int(kv["p"]))
        if "n0" in kv and int(kv["n0"]) != profile.n0:
            raise ValidationError(f"n0={kv['n0']} but profile has {profile.n0} blocks")
        return SystemParams(
            profile=profile,
            m=Fraction(kv.get("m", "1")),
            t_prime=int(kv["t_prime"]),
            decoder=kv.get("decoder", "bf"),
            bf_thresholds=_ints(kv.get("bf_thresholds", "")),
            max_iters=int(kv.get("max_iters", 0)),
            safety_margin=float(kv.get("safety_margin", 0.05)),
            validate=kv.get("validate", "true").lower() in ("1", "true", "yes"),
            t_th=int(kv.get("t_th", -1)),
        )
    except KeyError as exc:
        raise ValidationError(f"missing parameter {exc.args[0]!r}") from None
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad parameter value: {exc}") from None


def params_to_kv(params: SystemParams) -> dict[str, str]:
    return {
        "n0": str(params.n0),
        "p": str(params.p),
        "profile": ",".join(map(str, params.profile.dv_per_block)),
        "m": str(params.m),
        "t_prime": str(params.t_prime),
        "decoder": params.decoder,
        "bf_thresholds": ",".join(map(str, params.bf_thresholds)),
        "max_iters": str(params.max_iters),
        "safety_margin": repr(params.safety_margin),
        "validate": "true" if params.validate else "false",
        "t_th": str(params.t_th),
    }


def format_kv(kv: dict[str, str]) -> str:
    return "".join(f"{k}={v}\n" for k, v in kv.items())


def load_params(path) -> SystemParams:
    with open(path, encoding="utf-8") as fh:
        return params_from_kv(parse_kv(fh.read()))


# -- bit packing -----------------------------------------------------------


def pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def unpack_bits(data: bytes, nbits: int) -> np.ndarray:
    if len(data) != (nbits + 7) // 8:
        raise ValidationError(f"expected {(nbits + 7) // 8} bytes for {nbits} bits, got {len(data)}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    if bits[nbits:].any():
        raise ValidationError("nonzero padding bits")
    return bits[:nbits]


def _row_bits(circs: Iterable[Circulant]) -> np.ndarray:
    rows = [c.first_row() for c in circs]
    return np.concatenate(rows) if rows else np.zeros(0, dtype=np.uint8)


# -- key files -------------------------------------------------------------


class _Reader:
    def __init__(self, data: bytes):
        self.buf = io.BytesIO(data)
        self.size = len(data)

    def take(self, n: int) -> bytes:
        chunk = self.buf.read(n)
        if len(chunk) != n:
            raise ValidationError("truncated file")
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def done(self) -> None:
        if self.buf.tell() != self.size:
            raise ValidationError(f"{self.size - self.buf.tell()} trailing bytes")


def _header(kind: int, params: SystemParams) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, kind, params.n0, params.p, params.k0)


def _read_header(r: _Reader, kinds: tuple[int, ...]) -> tuple[int, int, int, int]:
    magic, version, kind, n0, p, k0 = _HEADER.unpack(r.take(_HEADER.size))
    if magic != MAGIC:
        raise ValidationError("not a QCMCE file (bad magic)")
    if version != VERSION:
        raise ValidationError(f"unsupported version {version}")
    if kind not in kinds:
        raise ValidationError(f"unexpected file kind {kind}")
    if k0 != n0 - 1 or p == 0:
        raise ValidationError(f"inconsistent header n0={n0} p={p} k0={k0}")
    return kind, n0, p, k0


def _write_sparse(out: io.BytesIO, c: Circulant) -> None:
    sup = c.support
    out.write(struct.pack(f"<I{len(sup)}I", len(sup), *sup))


def _read_sparse(r: _Reader, p: int) -> Circulant:
    w = r.u32()
    if w > p:
        raise ValidationError(f"block weight {w} exceeds p={p}")
    sup = struct.unpack(f"<{w}I", r.take(4 * w))
    if len(set(sup)) != w or any(s >= p for s in sup):
        raise ValidationError("bad support list")
    return circ_from_support(p, sup)


def serialize_public(pk: PublicKey) -> bytes:
    meta = format_kv(params_to_kv(pk.params)).encode()
    return (
        _header(KIND_PUBLIC, pk.params)
        + struct.pack("<I", len(meta))
        + meta
        + pack_bits(_row_bits(pk.gpub_right_column))
    )


def serialize_private(sk: PrivateKey) -> bytes:
    prm = sk.params
    out = io.BytesIO()
    meta = format_kv(params_to_kv(prm)).encode()
    out.write(_header(KIND_PRIVATE, prm) + struct.pack("<I", len(meta)) + meta)
    out.write(pack_bits(_row_bits(sk.public.gpub_right_column)))
    for c in sk.h.blocks[0]:
        _write_sparse(out, c)
    for row in sk.q.blocks:
        for c in row:
            _write_sparse(out, c)
    for row in sk.s.blocks:
        for c in row:
            out.write(struct.pack("<I", c.weight))
            out.write(pack_bits(c.first_row()))
    return out.getvalue()


def _read_common(r: _Reader, kind: int):
    _, n0, p, k0 = _read_header(r, (kind,))
    meta = r.take(r.u32()).decode("utf-8")
    params = params_from_kv(parse_kv(meta))
    if (params.n0, params.p) != (n0, p):
        raise ValidationError("header and metadata disagree")
    bits = unpack_bits(r.take((k0 * p + 7) // 8), k0 * p)
    column = tuple(Circulant.from_first_row(bits[i * p : (i + 1) * p]) for i in range(k0))
    return params, PublicKey(params, column)


def parse_public(data: bytes) -> PublicKey:
    r = _Reader(data)
    _, pk = _read_common(r, KIND_PUBLIC)
    r.done()
    return pk


def parse_private(data: bytes) -> PrivateKey:
    r = _Reader(data)
    params, pk = _read_common(r, KIND_PRIVATE)
    n0, p, k0 = params.n0, params.p, params.k0
    h = QcMatrix.from_blocks([[_read_sparse(r, p) for _ in range(n0)]])
    q = QcMatrix.from_blocks([[_read_sparse(r, p) for _ in range(n0)] for _ in range(n0)])
    s_rows = []
    for _ in range(k0):
        row = []
        for _ in range(k0):
            w = r.u32()
            c = Circulant.from_first_row(unpack_bits(r.take((p + 7) // 8), p))
            if c.weight != w:
                raise ValidationError("S block weight header mismatch")
            row.append(c)
        s_rows.append(row)
    r.done()
    if tuple(h.column_weights()) != params.profile.dv_per_block:
        raise ValidationError("H column weights disagree with the declared profile")
    return PrivateKey(params, h, q, QcMatrix.from_blocks(s_rows), pk)


# -- ciphertexts -----------------------------------------------------------


def message_blocks(message: bytes, k: int) -> list[np.ndarray]:
    bits = np.unpackbits(np.frombuffer(message, dtype=np.uint8), bitorder="little")
    nblocks = -(-bits.size // k)
    padded = np.zeros(nblocks * k, dtype=np.uint8)
    padded[: bits.size] = bits
    return [padded[i * k : (i + 1) * k] for i in range(nblocks)]


def serialize_ciphertext(params: SystemParams, nbits: int, codewords: list[np.ndarray]) -> bytes:
    if nbits == 0:
        return b""
    stream = np.concatenate(codewords) if codewords else np.zeros(0, dtype=np.uint8)
    return _header(KIND_CIPHERTEXT, params) + struct.pack("<Q", nbits) + pack_bits(stream)


def parse_ciphertext(data: bytes, params: SystemParams) -> tuple[int, list[np.ndarray]]:
    if not data:
        return 0, []
    r = _Reader(data)
    _, n0, p, _ = _read_header(r, (KIND_CIPHERTEXT,))
    if (n0, p) != (params.n0, params.p):
        raise ValidationError(f"ciphertext made for n0={n0}, p={p}")
    nbits = r.u64()
    count = -(-nbits // params.k)
    total = count * params.n
    stream = unpack_bits(r.take((total + 7) // 8), total)
    r.done()
    return nbits, [stream[i * params.n : (i + 1) * params.n] for i in range(count)]


def join_message(blocks: list[np.ndarray], nbits: int) -> bytes:
    if nbits == 0:
        return b""
    bits = np.concatenate(blocks)[:nbits]
    return pack_bits(bits)
