"""Block and transaction model, hash-chained block store, world state and
per-key history.

A peer keeps one :class:`Ledger` per joined channel. Committed blocks are
held as their canonical byte encoding; that byte string is what gets
exported, diffed between peers and re-hashed by :func:`verify_chain`.
"""

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import NamedTuple

from . import crypto
from .errors import (
    ChainLinkageError,
    IllegalCharacter,
    MalformedBlock,
    UnvalidatedBlock,
)

log = logging.getLogger(__name__)

SEPARATOR = "\u0000"
CONFIG_CHAINCODE = "_config"


def create_composite_key(namespace: str, attributes) -> str:
    parts = [namespace, *attributes]
    for part in parts:
        if SEPARATOR in part:
            raise IllegalCharacter(f"U+0000 not allowed in composite key part {part!r}")
    return "".join(p + SEPARATOR for p in parts)


def split_composite_key(key: str) -> tuple[str, list[str]]:
    parts = key.split(SEPARATOR)[:-1]
    return parts[0], parts[1:]


class Version(NamedTuple):
    block_num: int
    tx_num: int


class ValidationCode(str, enum.Enum):
    VALID = "VALID"
    MVCC_CONFLICT = "MVCC_CONFLICT"
    ENDORSEMENT_POLICY_FAILURE = "ENDORSEMENT_POLICY_FAILURE"
    BAD_SIGNATURE = "BAD_SIGNATURE"
    DUPLICATE_TXID = "DUPLICATE_TXID"
    CHAINCODE_NOT_INSTALLED = "CHAINCODE_NOT_INSTALLED"


def _version_record(version):
    return [] if version is None else [version.block_num, version.tx_num]


def _version_from(rec):
    if rec == []:
        return None
    block_num, tx_num = rec
    return Version(int(block_num), int(tx_num))


@dataclass(frozen=True)
class KVRead:
    key: str
    version: Version | None  # None: key was absent when read


@dataclass(frozen=True)
class KVWrite:
    key: str
    value: bytes | None  # None: delete marker

    @property
    def is_delete(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class ReadWriteSet:
    reads: tuple[KVRead, ...] = ()
    writes: tuple[KVWrite, ...] = ()

    def to_record(self):
        return {
            "reads": [{"key": r.key, "version": _version_record(r.version)} for r in self.reads],
            "writes": [
                {"key": w.key, "delete": w.is_delete, "value": (w.value or b"").hex()}
                for w in self.writes
            ],
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            tuple(KVRead(r["key"], _version_from(r["version"])) for r in rec["reads"]),
            tuple(
                KVWrite(w["key"], None if w["delete"] else bytes.fromhex(w["value"]))
                for w in rec["writes"]
            ),
        )


@dataclass(frozen=True)
class TransactionProposal:
    tx_id: str
    channel_id: str
    chaincode_name: str
    function: str
    args: tuple[str, ...]
    creator: str
    nonce: int
    client_signature: bytes
    timestamp: int

    def payload(self):
        return {
            "channel_id": self.channel_id,
            "chaincode": self.chaincode_name,
            "function": self.function,
            "args": list(self.args),
            "timestamp": self.timestamp,
        }

    def signed_bytes(self) -> bytes:
        """Bytes covered by the client signature."""
        return crypto.canonical_encode(
            {"tx_id": self.tx_id, "creator": self.creator, "nonce": self.nonce,
             "payload": self.payload()}
        )

    def expected_tx_id(self) -> str:
        return compute_tx_id(self.creator, self.nonce, self.payload())

    def to_record(self):
        return {
            "tx_id": self.tx_id,
            "creator": self.creator,
            "nonce": self.nonce,
            "payload": self.payload(),
            "signature": self.client_signature.hex(),
        }

    @classmethod
    def from_record(cls, rec):
        p = rec["payload"]
        return cls(
            tx_id=rec["tx_id"],
            channel_id=p["channel_id"],
            chaincode_name=p["chaincode"],
            function=p["function"],
            args=tuple(p["args"]),
            creator=rec["creator"],
            nonce=int(rec["nonce"]),
            client_signature=bytes.fromhex(rec["signature"]),
            timestamp=int(p["timestamp"]),
        )


def compute_tx_id(creator: str, nonce: int, payload) -> str:
    return crypto.hexdigest(
        crypto.canonical_encode({"creator": creator, "nonce": nonce, "payload": payload})
    )


def make_proposal(keys: crypto.IdentityKeys, channel_id, chaincode_name, function,
                  args=(), nonce=0, timestamp=0) -> TransactionProposal:
    """Build and sign a proposal on behalf of the holder of ``keys``."""
    args = tuple(str(a) for a in args)
    unsigned = TransactionProposal("", channel_id, chaincode_name, function, args,
                                   keys.identity_id, nonce, b"", timestamp)
    tx_id = unsigned.expected_tx_id()
    unsigned = TransactionProposal(tx_id, channel_id, chaincode_name, function, args,
                                   keys.identity_id, nonce, b"", timestamp)
    sig = crypto.sign(keys.signing_key, unsigned.signed_bytes())
    return TransactionProposal(tx_id, channel_id, chaincode_name, function, args,
                               keys.identity_id, nonce, sig, timestamp)


@dataclass(frozen=True)
class Endorsement:
    endorser_id: str
    org_id: str
    signature: bytes


def endorsement_payload(proposal: TransactionProposal, rwset: ReadWriteSet,
                        response: bytes) -> bytes:
    return crypto.canonical_encode(
        {"proposal": proposal.to_record(), "rwset": rwset.to_record(),
         "response": response.hex()}
    )


@dataclass(frozen=True)
class EndorsedTransaction:
    proposal: TransactionProposal
    rwset: ReadWriteSet
    response: bytes
    endorsements: tuple[Endorsement, ...] = ()

    @property
    def tx_id(self) -> str:
        return self.proposal.tx_id

    def payload_bytes(self) -> bytes:
        return endorsement_payload(self.proposal, self.rwset, self.response)

    def to_record(self):
        return {
            "proposal": self.proposal.to_record(),
            "rwset": self.rwset.to_record(),
            "response": self.response.hex(),
            "endorsements": [
                {"endorser_id": e.endorser_id, "org_id": e.org_id,
                 "signature": e.signature.hex()}
                for e in self.endorsements
            ],
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            TransactionProposal.from_record(rec["proposal"]),
            ReadWriteSet.from_record(rec["rwset"]),
            bytes.fromhex(rec["response"]),
            tuple(
                Endorsement(e["endorser_id"], e["org_id"], bytes.fromhex(e["signature"]))
                for e in rec["endorsements"]
            ),
        )


@dataclass(frozen=True)
class BlockHeader:
    number: int
    prev_hash: bytes
    data_hash: bytes

    def to_record(self):
        return {"number": self.number, "prev_hash": self.prev_hash.hex(),
                "data_hash": self.data_hash.hex()}

    def hash(self) -> bytes:
        return crypto.hash(crypto.canonical_encode(self.to_record()))


def compute_data_hash(transactions) -> bytes:
    return crypto.hash(crypto.canonical_encode([t.to_record() for t in transactions]))


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[EndorsedTransaction, ...]
    validity_flags: tuple[ValidationCode, ...] | None = None

    @property
    def number(self) -> int:
        return self.header.number

    def with_flags(self, flags) -> "Block":
        return Block(self.header, self.transactions, tuple(ValidationCode(f) for f in flags))

    def to_record(self):
        return {
            "header": self.header.to_record(),
            "transactions": [t.to_record() for t in self.transactions],
            "validity_flags": None if self.validity_flags is None
            else [f.value for f in self.validity_flags],
        }

    def encode(self) -> bytes:
        rec = self.to_record()
        if rec["validity_flags"] is None:
            rec["validity_flags"] = []
            rec["validated"] = False
        else:
            rec["validated"] = True
        return crypto.canonical_encode(rec)

    @classmethod
    def decode(cls, blob: bytes) -> "Block":
        """Parse a stored block; raises MalformedBlock on anything but the
        exact canonical encoding of a well-formed block."""
        try:
            rec = crypto.canonical_decode(blob)
            h = rec["header"]
            header = BlockHeader(h["number"], bytes.fromhex(h["prev_hash"]),
                                 bytes.fromhex(h["data_hash"]))
            txs = tuple(EndorsedTransaction.from_record(t) for t in rec["transactions"])
            flags = (tuple(ValidationCode(f) for f in rec["validity_flags"])
                     if rec["validated"] else None)
            block = cls(header, txs, flags)
            reencoded = block.encode()
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise MalformedBlock(str(exc)) from exc
        if not isinstance(header.number, int) or isinstance(header.number, bool):
            raise MalformedBlock("block number is not an integer")
        if len(header.prev_hash) != crypto.DIGEST_SIZE or len(header.data_hash) != crypto.DIGEST_SIZE:
            raise MalformedBlock("digest has wrong length")
        if flags is not None and len(flags) != len(txs):
            raise MalformedBlock("validity flag count differs from transaction count")
        if reencoded != blob:
            raise MalformedBlock("stored bytes are not the canonical encoding")
        return block


def build_block(number: int, prev_hash: bytes, transactions) -> Block:
    transactions = tuple(transactions)
    return Block(BlockHeader(number, prev_hash, compute_data_hash(transactions)), transactions)


def make_genesis_block(channel_config) -> Block:
    """Genesis carries a single configuration transaction and is always VALID."""
    config_bytes = crypto.canonical_encode(channel_config)
    proposal = TransactionProposal(
        tx_id=crypto.hexdigest(config_bytes),
        channel_id=channel_config["channel_id"],
        chaincode_name=CONFIG_CHAINCODE,
        function="configure",
        args=(config_bytes.decode("utf-8"),),
        creator="orderer",
        nonce=0,
        client_signature=b"",
        timestamp=0,
    )
    tx = EndorsedTransaction(proposal, ReadWriteSet(), config_bytes)
    return build_block(0, crypto.ZERO_DIGEST, [tx]).with_flags([ValidationCode.VALID])


@dataclass(frozen=True)
class StateEntry:
    key: str
    value: bytes
    version: Version


@dataclass(frozen=True)
class HistoryEntry:
    key: str
    value: bytes | None  # None: delete marker
    version: Version
    tx_id: str

    @property
    def is_delete(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class CommitReport:
    applied: int
    skipped: int


class BlockStore:
    """Append-only sequence of canonical block encodings."""

    def __init__(self):
        self._blobs: list[bytes] = []
        self._cache: dict[int, Block] = {}

    def __len__(self):
        return len(self._blobs)

    @property
    def height(self) -> int:
        return len(self._blobs)

    def append(self, block: Block) -> None:
        self._blobs.append(block.encode())
        self._cache[block.number] = block

    def raw(self, number: int) -> bytes:
        return self._blobs[number]

    def blobs(self) -> tuple[bytes, ...]:
        return tuple(self._blobs)

    def get(self, number: int) -> Block:
        if number not in self._cache:
            self._cache[number] = Block.decode(self._blobs[number])
        return self._cache[number]

    def __iter__(self):
        return (self.get(n) for n in range(len(self._blobs)))

    def _overwrite_raw(self, number: int, blob: bytes) -> None:
        # Simulator-only tamper hook; never called on an honest commit path.
        self._blobs[number] = blob
        self._cache.pop(number, None)

    @classmethod
    def from_blobs(cls, blobs) -> "BlockStore":
        store = cls()
        store._blobs = [bytes(b) for b in blobs]
        return store


def verify_chain(store) -> int | None:
    """Recompute every data hash and prev-hash link from genesis.

    Returns None when the chain is intact, else the lowest block number whose
    stored bytes disagree with recomputation.
    """
    blobs = store.blobs() if isinstance(store, BlockStore) else tuple(store)
    prev_header_hash = crypto.ZERO_DIGEST
    for number, blob in enumerate(blobs):
        try:
            block = Block.decode(blob)
        except MalformedBlock:
            return number
        if block.number != number or block.validity_flags is None:
            return number
        if block.header.prev_hash != prev_header_hash:
            return number
        if block.header.data_hash != compute_data_hash(block.transactions):
            return number
        prev_header_hash = block.header.hash()
    return None


class WorldState:
    """Current committed value and version per key."""

    def __init__(self):
        self._entries: dict[str, StateEntry] = {}

    def get(self, key: str) -> StateEntry | None:
        return self._entries.get(key)

    def version_of(self, key: str) -> Version | None:
        entry = self._entries.get(key)
        return entry.version if entry else None

    def keys(self):
        return sorted(self._entries)

    def items(self):
        return [(k, self._entries[k]) for k in sorted(self._entries)]

    def view(self):
        return MappingProxyType(self._entries)

    def __len__(self):
        return len(self._entries)

    def _apply(self, write: KVWrite, version: Version) -> None:
        if write.is_delete:
            self._entries.pop(write.key, None)
        else:
            self._entries[write.key] = StateEntry(write.key, write.value, version)

    def state_hash(self) -> str:
        return crypto.hexdigest(crypto.canonical_encode(
            [[k, e.value.hex(), [e.version.block_num, e.version.tx_num]]
             for k, e in self.items()]
        ))


@dataclass
class Ledger:
    """One peer's replica of one channel."""

    channel_id: str
    store: BlockStore = field(default_factory=BlockStore)
    state: WorldState = field(default_factory=WorldState)
    _history: dict[str, list[HistoryEntry]] = field(default_factory=dict)
    _tx_ids: set[str] = field(default_factory=set)
    # header hash of the last block this peer committed; held in memory so a
    # corrupted stored copy does not stop the commit path
    _tip: bytes = crypto.ZERO_DIGEST

    @property
    def height(self) -> int:
        return self.store.height

    def tip_hash(self) -> bytes:
        return self._tip

    def has_tx_id(self, tx_id: str) -> bool:
        return tx_id in self._tx_ids

    def get(self, key: str) -> StateEntry | None:
        return self.state.get(key)

    def get_history_for_key(self, key: str) -> list[HistoryEntry]:
        return list(self._history.get(key, ()))

    def history_keys(self):
        return sorted(self._history)

    def commit_block(self, block: Block) -> CommitReport:
        if block.validity_flags is None or len(block.validity_flags) != len(block.transactions):
            raise UnvalidatedBlock(f"block {block.number} has no complete validity flags")
        if block.number != self.store.height:
            raise ChainLinkageError(
                f"expected block {self.store.height}, got {block.number}")
        if block.header.prev_hash != self.tip_hash():
            raise ChainLinkageError(f"block {block.number} prev_hash does not match tip")
        self.store.append(block)
        self._tip = block.header.hash()
        return self._apply_block(block)

    def _apply_block(self, block: Block) -> CommitReport:
        applied = skipped = 0
        for tx_num, (tx, flag) in enumerate(zip(block.transactions, block.validity_flags)):
            self._tx_ids.add(tx.tx_id)
            if flag != ValidationCode.VALID:
                skipped += 1
                continue
            applied += 1
            version = Version(block.number, tx_num)
            for write in tx.rwset.writes:
                self.state._apply(write, version)
                self._history.setdefault(write.key, []).append(
                    HistoryEntry(write.key, write.value, version, tx.tx_id))
        if block.number:
            log.debug("channel %s: committed block %d (%d applied, %d skipped)",
                      self.channel_id, block.number, applied, skipped)
        return CommitReport(applied, skipped)

    def verify(self) -> int | None:
        return verify_chain(self.store)

    # export / import

    def export(self, directory) -> None:
        """Write one canonical JSON document per block."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for old in directory.glob("block_*.json"):
            old.unlink()
        for number, blob in enumerate(self.store.blobs()):
            (directory / f"block_{number:06d}.json").write_bytes(blob)

    @classmethod
    def load(cls, channel_id: str, directory) -> "Ledger":
        """Rebuild a ledger from exported block files.

        The raw bytes are kept as-is so that :func:`verify_chain` sees any
        on-disk tampering. World state is replayed up to the first block that
        fails to parse.
        """
        blobs = [p.read_bytes() for p in sorted(Path(directory).glob("block_*.json"))]
        ledger = cls(channel_id, BlockStore.from_blobs(blobs))
        for number in range(len(blobs)):
            try:
                block = ledger.store.get(number)
            except MalformedBlock:
                break
            if block.validity_flags is None:
                break
            ledger._apply_block(block)
            ledger._tip = block.header.hash()
        return ledger
