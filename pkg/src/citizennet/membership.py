"""Organizations, peers, client identities and channels."""

import enum
from dataclasses import dataclass, field

from . import crypto
from .errors import (
    DuplicateChannel,
    MissingAadhaarBinding,
    NoSuchPeer,
    NotAMemberOrg,
    RoleOrgMismatch,
    UnknownChaincode,
    UnknownChannel,
    UnknownOrg,
)
from .ledger import Block, Ledger, make_genesis_block


class OrgKind(str, enum.Enum):
    GOVERNMENT_BODY = "government_body"
    PRIVATE_ORG = "private_org"
    CITIZEN_REGISTRY = "citizen_registry"


class Role(str, enum.Enum):
    CITIZEN = "citizen"
    UIDAI_ADMIN = "uidai_admin"
    THIRD_PARTY = "third_party"


MUTATING = "mutating"
READ_ONLY = "read_only"


@dataclass(frozen=True)
class EndorsementPolicy:
    """At least ``k`` endorsements, each from a distinct org in ``orgs``."""

    k: int
    orgs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "orgs", frozenset(self.orgs))
        if self.k < 1 or not self.orgs or self.k > len(self.orgs):
            raise ValueError(f"invalid policy: {self.k} of {sorted(self.orgs)}")

    def satisfied_by(self, org_ids) -> bool:
        return len(set(org_ids) & self.orgs) >= self.k

    def to_record(self):
        return {"k": self.k, "orgs": sorted(self.orgs)}

    @classmethod
    def from_record(cls, rec):
        return cls(int(rec["k"]), frozenset(rec["orgs"]))

    def __str__(self):
        return f"{self.k} of {{{', '.join(sorted(self.orgs))}}}"


@dataclass(frozen=True)
class Organization:
    org_id: str
    kind: OrgKind
    root_identity: crypto.IdentityKeys = field(repr=False)


@dataclass(frozen=True)
class ClientIdentity:
    identity_id: str
    org_id: str
    role: Role
    bound_aadhaar: str | None = None
    name: str = ""
    keys: crypto.IdentityKeys | None = field(default=None, repr=False, compare=False)


@dataclass
class Channel:
    channel_id: str
    member_orgs: frozenset
    policies: dict  # "<chaincode>/<class>" -> EndorsementPolicy
    genesis: Block

    def config_record(self):
        return {
            "channel_id": self.channel_id,
            "member_orgs": sorted(self.member_orgs),
            "policies": {k: p.to_record() for k, p in sorted(self.policies.items())},
        }


@dataclass
class PeerNode:
    peer_id: str
    org_id: str
    keys: crypto.IdentityKeys = field(repr=False)
    ledgers: dict = field(default_factory=dict)  # channel_id -> Ledger
    installed_chaincodes: set = field(default_factory=set)

    @property
    def joined_channels(self) -> set:
        return set(self.ledgers)

    def is_endorser(self, chaincode: str, channel_id: str) -> bool:
        return chaincode in self.installed_chaincodes and channel_id in self.ledgers

    def ledger(self, channel_id: str) -> Ledger:
        return self.ledgers[channel_id]


class Network:
    """Membership registry plus the channel/peer topology.

    The registry is the only authority consulted when checking client and
    endorser signatures.
    """

    def __init__(self, catalog, seed: str = "0", registry_authority: str = "UIDAI",
                 epoch_date=None):
        self.catalog = catalog
        self.seed = str(seed)
        self.registry_authority = registry_authority
        self.epoch_date = epoch_date
        self.orgs: dict[str, Organization] = {}
        self.peers: dict[str, PeerNode] = {}
        self.channels: dict[str, Channel] = {}
        self.clients: dict[str, ClientIdentity] = {}
        self._peer_ids: dict[str, PeerNode] = {}  # identity_id -> peer
        self._client_counter = 0
        self.orderer = None

    def _keys(self, *label) -> crypto.IdentityKeys:
        return crypto.generate_identity(crypto.derive_seed(self.seed, *label))

    def add_org(self, org_id: str, kind) -> Organization:
        if org_id in self.orgs:
            raise ValueError(f"organization {org_id!r} already registered")
        org = Organization(org_id, OrgKind(kind), self._keys("org", org_id))
        self.orgs[org_id] = org
        return org

    def add_peer(self, peer_id: str, org_id: str) -> PeerNode:
        if org_id not in self.orgs:
            raise UnknownOrg(org_id)
        if peer_id in self.peers:
            raise ValueError(f"peer {peer_id!r} already exists")
        peer = PeerNode(peer_id, org_id, self._keys("peer", peer_id))
        self.peers[peer_id] = peer
        self._peer_ids[peer.keys.identity_id] = peer
        return peer

    def default_policies(self, member_orgs) -> dict:
        policies = {}
        for name in sorted(self.catalog):
            policies[f"{name}/{MUTATING}"] = EndorsementPolicy(1, {self.registry_authority})
            policies[f"{name}/{READ_ONLY}"] = EndorsementPolicy(1, set(member_orgs))
        return policies

    def create_channel(self, channel_id: str, member_orgs, policies=None) -> Channel:
        if channel_id in self.channels:
            raise DuplicateChannel(channel_id)
        member_orgs = frozenset(member_orgs)
        for org_id in sorted(member_orgs):
            if org_id not in self.orgs:
                raise UnknownOrg(org_id)
        merged = self.default_policies(member_orgs)
        for key, policy in (policies or {}).items():
            if not isinstance(policy, EndorsementPolicy):
                policy = EndorsementPolicy.from_record(policy)
            merged[key] = policy
        channel = Channel(channel_id, member_orgs, merged, None)
        channel.genesis = make_genesis_block(channel.config_record())
        self.channels[channel_id] = channel
        if self.orderer is not None:
            self.orderer.add_channel(channel_id, channel.genesis)
        return channel

    def join_channel(self, peer_id: str, channel_id: str) -> PeerNode:
        peer = self.peer(peer_id)
        channel = self.channel(channel_id)
        if peer.org_id not in channel.member_orgs:
            raise NotAMemberOrg(f"{peer.org_id} is not a member of {channel_id}")
        if channel_id not in peer.ledgers:
            ledger = Ledger(channel_id)
            ledger.commit_block(channel.genesis)
            peer.ledgers[channel_id] = ledger
        return peer

    def install_chaincode(self, peer_id: str, chaincode_name: str) -> PeerNode:
        if chaincode_name not in self.catalog:
            raise UnknownChaincode(chaincode_name)
        peer = self.peer(peer_id)
        peer.installed_chaincodes.add(chaincode_name)
        return peer

    def register_client(self, org_id: str, role, bound_aadhaar: str | None = None,
                        name: str | None = None) -> ClientIdentity:
        if org_id not in self.orgs:
            raise UnknownOrg(org_id)
        role = Role(role)
        kind = self.orgs[org_id].kind
        if role is Role.CITIZEN and not bound_aadhaar:
            raise MissingAadhaarBinding("citizen clients must be bound to an Aadhaar number")
        if role is not Role.CITIZEN and bound_aadhaar:
            raise RoleOrgMismatch("only citizen clients carry an Aadhaar binding")
        if role is Role.UIDAI_ADMIN and kind is not OrgKind.GOVERNMENT_BODY:
            raise RoleOrgMismatch(f"uidai_admin requires a government_body org, {org_id} is {kind.value}")
        if name is None:
            self._client_counter += 1
            name = f"client-{self._client_counter}"
        keys = self._keys("client", org_id, name)
        client = ClientIdentity(keys.identity_id, org_id, role, bound_aadhaar, name, keys)
        self.clients[client.identity_id] = client
        return client

    def remove_identity(self, identity_id: str) -> None:
        self.clients.pop(identity_id, None)

    # lookups

    def peer(self, peer_id: str) -> PeerNode:
        try:
            return self.peers[peer_id]
        except KeyError:
            raise NoSuchPeer(peer_id) from None

    def channel(self, channel_id: str) -> Channel:
        try:
            return self.channels[channel_id]
        except KeyError:
            raise UnknownChannel(channel_id) from None

    def client(self, identity_id: str) -> ClientIdentity | None:
        return self.clients.get(identity_id)

    def peer_by_identity(self, identity_id: str) -> PeerNode | None:
        return self._peer_ids.get(identity_id)

    def policy_for(self, channel_id: str, chaincode: str, mutating: bool) -> EndorsementPolicy | None:
        cls = MUTATING if mutating else READ_ONLY
        return self.channel(channel_id).policies.get(f"{chaincode}/{cls}")

    def channel_peers(self, channel_id: str) -> list[PeerNode]:
        return [p for _, p in sorted(self.peers.items()) if channel_id in p.ledgers]
