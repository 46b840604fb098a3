"""Hashing, canonical encoding and identity keys.

Every peer must hash identical bytes for the same logical value, so all
structured data goes through :func:`canonical_encode` before it is hashed
or signed.
"""

import hashlib
import json
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import BadSeedLength, UnsupportedValue

DIGEST_SIZE = 32
ZERO_DIGEST = bytes(DIGEST_SIZE)


def hash(data: bytes) -> bytes:  # noqa: A001 - mirrors the ledger vocabulary
    """SHA-256 of ``data``; always 32 bytes."""
    return hashlib.sha256(data).digest()


def hexdigest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _check(value, path="$"):
    # bool is a subclass of int, both are allowed
    if isinstance(value, (str, int)):
        return
    if isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            _check(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise UnsupportedValue(f"{path}: map key {key!r} is not a string")
            _check(item, f"{path}.{key}")
        return
    raise UnsupportedValue(f"{path}: cannot encode {type(value).__name__}")


def canonical_encode(value) -> bytes:
    """Deterministic UTF-8 JSON: sorted keys, no whitespace.

    Only strings, integers, booleans, lists and string-keyed maps are
    accepted. Floats, bytes and None raise :class:`UnsupportedValue`.
    """
    _check(value)
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def canonical_decode(data: bytes):
    return json.loads(data.decode("utf-8"))


@dataclass(frozen=True)
class IdentityKeys:
    signing_key: bytes
    verify_key: bytes
    identity_id: str


def identity_id_for(verify_key: bytes) -> str:
    return "id-" + hexdigest(verify_key)[:32]


def generate_identity(seed: bytes) -> IdentityKeys:
    """Derive an Ed25519 key pair from a 32-byte seed."""
    if len(seed) != 32:
        raise BadSeedLength(f"seed must be 32 bytes, got {len(seed)}")
    private = Ed25519PrivateKey.from_private_bytes(seed)
    verify_key = private.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return IdentityKeys(bytes(seed), verify_key, identity_id_for(verify_key))


def derive_seed(*parts: str) -> bytes:
    """32-byte seed from labelled parts, for reproducible simulations."""
    return hash(canonical_encode(["citizennet-seed", *parts]))


def sign(signing_key: bytes, message: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(signing_key).sign(message)


def verify(verify_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(verify_key).verify(signature, message)
    except (InvalidSignature, ValueError):
        return False
    return True
