import struct
from fractions import Fraction

import numpy as np
import pytest

from qcmce import keyfile
from qcmce.codes import DegreeProfile
from qcmce.crypto import SystemParams, decrypt_batch, encrypt, keygen
from qcmce.errors import ValidationError

PARAMS = SystemParams(DegreeProfile((3, 3, 5, 5), 128), Fraction(5, 4), 2)


@pytest.fixture(scope="module")
def keys():
    return keygen(PARAMS, np.random.default_rng(3))


def test_kv_round_trip():
    kv = keyfile.params_to_kv(PARAMS)
    back = keyfile.params_from_kv(keyfile.parse_kv(keyfile.format_kv(kv)))
    assert back == PARAMS


def test_kv_comments_and_errors():
    kv = keyfile.parse_kv("# header\np = 64  # trailing\n\nprofile=3,3,5,5\n")
    assert kv == {"p": "64", "profile": "3,3,5,5"}
    with pytest.raises(ValidationError):
        keyfile.parse_kv("p 64")
    with pytest.raises(ValidationError):
        keyfile.params_from_kv({"p": "64", "profile": "3,3", "t_prime": "1", "colour": "red"})
    with pytest.raises(ValidationError):
        keyfile.params_from_kv({"p": "64", "profile": "3,3"})
    with pytest.raises(ValidationError):
        keyfile.params_from_kv({"p": "x", "profile": "3,3", "t_prime": "1"})
    with pytest.raises(ValidationError):
        keyfile.params_from_kv({"p": "64", "profile": "3,3", "t_prime": "1", "n0": "4", "validate": "false"})


def test_public_round_trip(keys):
    pk, _ = keys
    data = keyfile.serialize_public(pk)
    back = keyfile.parse_public(data)
    assert back.gpub_right_column == pk.gpub_right_column
    assert back.params == pk.params


def test_public_payload_is_k0_p_bits(keys):
    pk, _ = keys
    data = keyfile.serialize_public(pk)
    meta_len = struct.unpack_from("<I", data, 20)[0]
    assert len(data) - 20 - 4 - meta_len == 3 * 128 // 8


def test_private_round_trip(keys):
    pk, sk = keys
    back = keyfile.parse_private(keyfile.serialize_private(sk))
    assert (back.h, back.q, back.s) == (sk.h, sk.q, sk.s)
    assert back.public.gpub_right_column == pk.gpub_right_column


def test_bad_magic_and_kind(keys):
    pk, sk = keys
    data = keyfile.serialize_public(pk)
    with pytest.raises(ValidationError):
        keyfile.parse_public(b"XXXXXX" + data[6:])
    with pytest.raises(ValidationError):
        keyfile.parse_private(data)
    with pytest.raises(ValidationError):
        keyfile.parse_public(keyfile.serialize_private(sk))


def test_truncated_and_trailing(keys):
    pk, sk = keys
    for data, parse in ((keyfile.serialize_public(pk), keyfile.parse_public), (keyfile.serialize_private(sk), keyfile.parse_private)):
        for cut in (3, 20, len(data) // 2, len(data) - 1):
            with pytest.raises(ValidationError):
                parse(data[:cut])
        with pytest.raises(ValidationError):
            parse(data + b"\0")


def test_padding_bits_rejected():
    assert keyfile.unpack_bits(b"\x05", 3).tolist() == [1, 0, 1]
    with pytest.raises(ValidationError):
        keyfile.unpack_bits(b"\x0d", 3)
    with pytest.raises(ValidationError):
        keyfile.unpack_bits(b"\x05\x00", 3)


def test_ciphertext_round_trip(keys):
    pk, sk = keys
    k = PARAMS.k
    msg = bytes(range(256))[: (2 * k + 40) // 8]
    blocks = keyfile.message_blocks(msg, k)
    assert len(blocks) == 3
    rng = np.random.default_rng(0)
    data = keyfile.serialize_ciphertext(PARAMS, 8 * len(msg), [encrypt(pk, u, rng) for u in blocks])
    assert len(data) == 20 + 8 + (3 * PARAMS.n + 7) // 8
    nbits, words = keyfile.parse_ciphertext(data, PARAMS)
    plain, ok = decrypt_batch(sk, np.stack(words))
    assert ok.all()
    assert keyfile.join_message(list(plain), nbits) == msg


def test_empty_message():
    assert keyfile.message_blocks(b"", PARAMS.k) == []
    assert keyfile.serialize_ciphertext(PARAMS, 0, []) == b""
    assert keyfile.parse_ciphertext(b"", PARAMS) == (0, [])
    assert keyfile.join_message([], 0) == b""


def test_ciphertext_for_other_params_rejected(keys):
    pk, _ = keys
    data = keyfile.serialize_ciphertext(PARAMS, 8, [encrypt(pk, np.zeros(PARAMS.k, np.uint8), np.random.default_rng(1))])
    other = SystemParams(DegreeProfile((3, 3, 5, 5), 67), 1, 2, validate=False)
    with pytest.raises(ValidationError):
        keyfile.parse_ciphertext(data, other)
    with pytest.raises(ValidationError):
        keyfile.parse_ciphertext(data[:-1], PARAMS)
