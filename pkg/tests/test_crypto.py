import os

import pytest
from hypothesis import given, settings, strategies as st

from citizennet import crypto
from citizennet.errors import BadSeedLength, UnsupportedValue
from conftest import SAMPLE

# reference digests computed with `openssl dgst -sha256`
EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
ABC_SHA256 = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_hash_reference_vectors():
    assert crypto.hash(b"").hex() == EMPTY_SHA256
    assert crypto.hash(b"abc").hex() == ABC_SHA256
    assert len(crypto.hash(b"x" * 1000)) == 32


def test_hash_is_pure_and_bit_sensitive():
    x = b"citizen record payload"
    assert crypto.hash(x) == crypto.hash(x)
    flipped = bytes([x[0] ^ 0x01]) + x[1:]
    assert crypto.hash(flipped) != crypto.hash(x)


def test_collision_smoke():
    inputs = {os.urandom(16) + i.to_bytes(4, "big") for i in range(10_000)}
    digests = {crypto.hash(x) for x in inputs}
    assert len(digests) == len(inputs)


def test_canonical_encode_sorts_keys():
    a = {"b": 1, "a": 2}
    b = {}
    b["a"] = 2
    b["b"] = 1
    assert crypto.canonical_encode(a) == crypto.canonical_encode(b) == b'{"a":2,"b":1}'


def test_sample_record_encodes_identically_on_two_peers():
    peer1 = dict(SAMPLE)
    peer2 = {k: SAMPLE[k] for k in reversed(list(SAMPLE))}
    peer2["accounts"] = dict(SAMPLE["accounts"])
    assert crypto.canonical_encode(peer1) == crypto.canonical_encode(peer2)
    assert crypto.hash(crypto.canonical_encode(peer1)) == crypto.hash(crypto.canonical_encode(peer2))


@pytest.mark.parametrize("bad", [1.5, None, b"raw", {1: "x"}, {"k": {3.0}}, [object()]])
def test_canonical_encode_rejects_unsupported(bad):
    with pytest.raises(UnsupportedValue):
        crypto.canonical_encode(bad)


values = st.recursive(
    st.one_of(st.text(), st.integers(), st.booleans()),
    lambda inner: st.one_of(st.lists(inner, max_size=4),
                            st.dictionaries(st.text(max_size=6), inner, max_size=4)),
    max_leaves=20,
)


@given(values)
def test_canonical_round_trip_is_fixpoint(v):
    once = crypto.canonical_encode(v)
    assert crypto.canonical_encode(crypto.canonical_decode(once)) == once


def _typed(v):
    # logical value with bool kept distinct from int
    if isinstance(v, bool):
        return ("bool", v)
    if isinstance(v, (list, tuple)):
        return ("list", tuple(_typed(x) for x in v))
    if isinstance(v, dict):
        return ("map", tuple(sorted((k, _typed(x)) for k, x in v.items())))
    return (type(v).__name__, v)


@given(values, values)
def test_canonical_encode_injective(a, b):
    same_bytes = crypto.canonical_encode(a) == crypto.canonical_encode(b)
    assert same_bytes == (_typed(a) == _typed(b))


def test_generate_identity_deterministic_and_distinct():
    seed = bytes(range(32))
    assert crypto.generate_identity(seed).identity_id == crypto.generate_identity(seed).identity_id
    other = crypto.generate_identity(bytes(31) + b"\x01")
    assert other.identity_id != crypto.generate_identity(seed).identity_id


def test_generate_identity_rejects_short_seed():
    with pytest.raises(BadSeedLength):
        crypto.generate_identity(b"short")


@settings(max_examples=1000, deadline=None)
@given(st.binary(min_size=32, max_size=32), st.binary(max_size=64), st.binary(max_size=64),
       st.binary(min_size=32, max_size=32))
def test_signature_properties(seed, message, other_message, other_seed):
    keys = crypto.generate_identity(seed)
    sig = crypto.sign(keys.signing_key, message)
    assert crypto.verify(keys.verify_key, message, sig)
    if other_message != message:
        assert not crypto.verify(keys.verify_key, other_message, sig)
    if other_seed != seed:
        other = crypto.generate_identity(other_seed)
        assert not crypto.verify(other.verify_key, message, sig)


def test_verify_returns_false_on_garbage():
    keys = crypto.generate_identity(bytes(32))
    assert crypto.verify(keys.verify_key, b"m", b"not a signature") is False
    assert crypto.verify(b"short key", b"m", bytes(64)) is False
