"""Execute-order-validate: endorsement, ordering and block validation.

The three stages only exchange immutable values (proposals, endorsed
transactions, blocks). Each stage owns its own mutable state.
"""

import logging
from collections import deque
from dataclasses import dataclass

from . import crypto
from .errors import (
    BadClientSignature,
    EndorsementMismatch,
    NotAnEndorser,
    NotInChannel,
    UnknownChannel,
)
from .ledger import (
    Block,
    EndorsedTransaction,
    Endorsement,
    TransactionProposal,
    ValidationCode,
    Version,
    build_block,
)
from .runtime import ContractContext, invoke_contract

log = logging.getLogger(__name__)


def verify_client_signature(network, proposal: TransactionProposal) -> bool:
    client = network.client(proposal.creator)
    if client is None or client.keys is None:
        return False
    if proposal.tx_id != proposal.expected_tx_id():
        return False
    return crypto.verify(client.keys.verify_key, proposal.signed_bytes(),
                         proposal.client_signature)


def simulate_and_endorse(network, peer_id: str, proposal: TransactionProposal) -> EndorsedTransaction:
    """Simulate ``proposal`` on one peer and sign the resulting read/write set.

    The peer's committed state is never modified here.
    """
    peer = network.peer(peer_id)
    if proposal.channel_id not in peer.ledgers:
        raise NotInChannel(f"{peer_id} has not joined {proposal.channel_id}")
    if proposal.chaincode_name not in peer.installed_chaincodes:
        raise NotAnEndorser(f"{peer_id} does not have {proposal.chaincode_name} installed")
    if not verify_client_signature(network, proposal):
        raise BadClientSignature(proposal.tx_id)
    ctx = ContractContext(
        peer.ledger(proposal.channel_id),
        network.client(proposal.creator),
        proposal.timestamp,
        proposal.channel_id,
        tx_id=proposal.tx_id,
        epoch_date=network.epoch_date,
    )
    response, rwset = invoke_contract(network.catalog, ctx, proposal.chaincode_name,
                                      proposal.function, proposal.args)
    tx = EndorsedTransaction(proposal, rwset, response)
    sig = crypto.sign(peer.keys.signing_key, tx.payload_bytes())
    return EndorsedTransaction(proposal, rwset, response,
                               (Endorsement(peer.keys.identity_id, peer.org_id, sig),))


def collect_endorsements(network, proposal: TransactionProposal, endorser_ids) -> EndorsedTransaction:
    """Client-side assembly: every endorser must return the same result."""
    endorser_ids = list(endorser_ids)
    if not endorser_ids:
        raise EndorsementMismatch("no endorsers given; no policy can be satisfied")
    results = [simulate_and_endorse(network, pid, proposal) for pid in endorser_ids]
    first = results[0]
    for pid, other in zip(endorser_ids[1:], results[1:]):
        if (other.rwset, other.response) != (first.rwset, first.response):
            raise EndorsementMismatch(
                f"{pid} disagrees with {endorser_ids[0]} on tx {proposal.tx_id[:12]}")
    endorsements = tuple(e for r in results for e in r.endorsements)
    return EndorsedTransaction(proposal, first.rwset, first.response, endorsements)


@dataclass(frozen=True)
class OrdererConfig:
    max_block_txs: int = 10
    batch_timeout_ticks: int = 2

    def __post_init__(self):
        if self.max_block_txs < 1 or self.batch_timeout_ticks < 1:
            raise ValueError("orderer limits must be positive")


class Orderer:
    """Single trusted ordering node: FIFO per channel, cuts blocks on size
    or timeout."""

    def __init__(self, config: OrdererConfig | None = None):
        self.config = config or OrdererConfig()
        self.clock = 0
        self._pending: dict[str, deque] = {}
        self._blocks: dict[str, list[Block]] = {}

    def add_channel(self, channel_id: str, genesis: Block) -> None:
        self._pending.setdefault(channel_id, deque())
        self._blocks.setdefault(channel_id, [genesis])

    def submit(self, tx: EndorsedTransaction, now: int | None = None) -> bool:
        channel_id = tx.proposal.channel_id
        if channel_id not in self._pending:
            raise UnknownChannel(channel_id)
        arrival = self.clock if now is None else now
        self._pending[channel_id].append((arrival, tx))
        return True

    def pending(self, channel_id: str) -> int:
        return len(self._pending[channel_id])

    def has_pending(self) -> bool:
        return any(self._pending.values())

    def blocks(self, channel_id: str) -> list[Block]:
        """Every block cut on ``channel_id`` so far, genesis first."""
        return list(self._blocks[channel_id])

    def _cut(self, channel_id: str, count: int) -> Block:
        queue = self._pending[channel_id]
        txs = [queue.popleft()[1] for _ in range(count)]
        prev = self._blocks[channel_id][-1]
        block = build_block(prev.number + 1, prev.header.hash(), txs)
        self._blocks[channel_id].append(block)
        return block

    def tick(self, now: int) -> list[Block]:
        self.clock = now
        cut = []
        max_txs = self.config.max_block_txs
        for channel_id in sorted(self._pending):
            queue = self._pending[channel_id]
            while len(queue) >= max_txs:
                cut.append(self._cut(channel_id, max_txs))
            if queue and now - queue[0][0] >= self.config.batch_timeout_ticks:
                cut.append(self._cut(channel_id, len(queue)))
        return cut


def orderer_submit(orderer: Orderer, endorsed_tx: EndorsedTransaction, now: int | None = None) -> bool:
    return orderer.submit(endorsed_tx, now)


def orderer_tick(orderer: Orderer, now: int) -> list[Block]:
    return orderer.tick(now)


def mvcc_validate(rwset, state) -> bool:
    """True iff every recorded read version still matches ``state``."""
    return all(state.version_of(r.key) == r.version for r in rwset.reads)


class _BlockOverlay:
    """Committed versions overlaid with writes of earlier VALID txs in the
    block being validated."""

    _DELETED = object()

    def __init__(self, state):
        self._state = state
        self._written = {}

    def version_of(self, key):
        if key in self._written:
            v = self._written[key]
            return None if v is self._DELETED else v
        return self._state.version_of(key)

    def apply(self, writes, version):
        for w in writes:
            self._written[w.key] = self._DELETED if w.is_delete else version


def _signatures_ok(network, tx: EndorsedTransaction) -> bool:
    if not verify_client_signature(network, tx.proposal):
        return False
    payload = tx.payload_bytes()
    for e in tx.endorsements:
        peer = network.peer_by_identity(e.endorser_id)
        if peer is None or peer.org_id != e.org_id:
            return False
        if not crypto.verify(peer.keys.verify_key, payload, e.signature):
            return False
    return True


def classify_transaction(network, ledger, block_seen: set, tx: EndorsedTransaction):
    """Flag one transaction, ignoring MVCC (needs block context)."""
    if not _signatures_ok(network, tx):
        return ValidationCode.BAD_SIGNATURE
    if tx.tx_id in block_seen or ledger.has_tx_id(tx.tx_id):
        return ValidationCode.DUPLICATE_TXID
    cc = network.catalog.get(tx.proposal.chaincode_name)
    mutating = cc.is_mutating(tx.proposal.function) if cc is not None else None
    if mutating is None:
        return ValidationCode.CHAINCODE_NOT_INSTALLED
    # a read-only function that carries writes is judged as a mutation
    policy = network.policy_for(tx.proposal.channel_id, tx.proposal.chaincode_name,
                                mutating or bool(tx.rwset.writes))
    if policy is None or not policy.satisfied_by(e.org_id for e in tx.endorsements):
        return ValidationCode.ENDORSEMENT_POLICY_FAILURE
    return None


def validate_block(network, ledger, block: Block) -> Block:
    """Return ``block`` with one validity flag per transaction.

    Depends only on the block, the channel configuration and the ledger's
    committed state, so every honest peer computes identical flags.
    """
    if block.number == 0:
        return block.with_flags([ValidationCode.VALID] * len(block.transactions))
    overlay = _BlockOverlay(ledger.state)
    seen: set[str] = set()
    flags = []
    for tx_num, tx in enumerate(block.transactions):
        code = classify_transaction(network, ledger, seen, tx)
        if code is None:
            if mvcc_validate(tx.rwset, overlay):
                code = ValidationCode.VALID
                overlay.apply(tx.rwset.writes, Version(block.number, tx_num))
            else:
                code = ValidationCode.MVCC_CONFLICT
        seen.add(tx.tx_id)
        flags.append(code)
    return block.with_flags(flags)


def deliver_block(network, peer_id: str, channel_id: str, block: Block):
    """Committer path: validate on this peer, then append to its ledger."""
    ledger = network.peer(peer_id).ledger(channel_id)
    validated = validate_block(network, ledger, block)
    return validated, ledger.commit_block(validated)
