"""Deterministic discrete-event simulation of a citizen-identity network.

Time is a logical tick. Within one tick the simulator

1. delivers blocks cut on the previous tick to every joined, running peer
   (each peer validates and commits on its own),
2. executes the scenario steps scheduled for the tick,
3. lets the orderer cut blocks, which are delivered on the next tick.

Given the same config and scenario every run produces the same report bytes.
"""

import datetime as dt
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from . import crypto
from .citizen import (
    CATALOG,
    CHANGEREQ_NS,
    CITIZEN_NS,
    CONSENT_NS,
    DISPLAY_NAMES,
    citizen_key,
    to_display,
)
from .errors import (
    AssertionFailed,
    CitizenNetError,
    ConfigError,
    ContractError,
    NoSuchBlock,
    NotFound,
    NotJoined,
    ScenarioParseError,
)
from .ledger import (
    create_composite_key,
    make_proposal,
    split_composite_key,
    verify_chain,
)
from .membership import Network, Role
from .pipeline import Orderer, OrdererConfig, collect_endorsements, deliver_block

log = logging.getLogger(__name__)

READ_FUNCTIONS_AUDITED = ("view_aadhar", "view_history", "kyc_share")


# configuration


@dataclass
class SimConfig:
    seed: int
    epoch_date: dt.date
    orgs: list
    peers: list
    channels: list
    clients: list
    orderer: OrdererConfig = field(default_factory=OrdererConfig)
    registry_authority: str = "UIDAI"

    @classmethod
    def from_dict(cls, data) -> "SimConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        try:
            epoch = dt.date.fromisoformat(data.get("epoch_date", "2000-01-01"))
            orderer = OrdererConfig(**data.get("orderer", {}))
            config = cls(
                seed=int(data.get("seed", 0)),
                epoch_date=epoch,
                orgs=list(data["orgs"]),
                peers=list(data["peers"]),
                channels=list(data["channels"]),
                clients=list(data.get("clients", [])),
                orderer=orderer,
                registry_authority=data.get("registry_authority", "UIDAI"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc!r}") from exc
        config.check()
        return config

    @classmethod
    def load(cls, path) -> "SimConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "seed": self.seed,
            "epoch_date": self.epoch_date.isoformat(),
            "registry_authority": self.registry_authority,
            "orgs": self.orgs,
            "peers": self.peers,
            "channels": self.channels,
            "clients": self.clients,
            "orderer": {"max_block_txs": self.orderer.max_block_txs,
                        "batch_timeout_ticks": self.orderer.batch_timeout_ticks},
        }

    def check(self):
        org_ids = [o.get("org_id") for o in self.orgs]
        if len(set(org_ids)) != len(org_ids):
            raise ConfigError("duplicate org ids")
        channel_ids = {c.get("channel_id") for c in self.channels}
        for peer in self.peers:
            if peer.get("org_id") not in org_ids:
                raise ConfigError(f"peer {peer.get('peer_id')} names unknown org {peer.get('org_id')}")
            for ch in peer.get("channels", []):
                if ch not in channel_ids:
                    raise ConfigError(f"peer {peer['peer_id']} joins unknown channel {ch}")
            for cc in peer.get("chaincodes", []):
                if cc not in CATALOG:
                    raise ConfigError(f"peer {peer['peer_id']} installs unknown chaincode {cc}")
        for ch in self.channels:
            for org in ch.get("member_orgs", []):
                if org not in org_ids:
                    raise ConfigError(f"channel {ch.get('channel_id')} names unknown org {org}")
        for client in self.clients:
            if client.get("org_id") not in org_ids:
                raise ConfigError(f"client {client.get('client_id')} names unknown org")


# scenarios


ACTIONS = {
    "propose": ("actor", "fn"),
    "advance_ticks": ("ticks",),
    "tamper": ("peer", "channel", "block", "offset"),
    "expect": ("check",),
    "stall": ("peer",),
    "resume": ("peer",),
    "join": ("peer", "channel"),
    "remove_identity": ("actor",),
}


@dataclass(frozen=True)
class ScenarioStep:
    index: int
    at_tick: int | None
    action: str
    params: dict

    @property
    def actor(self):
        return self.params.get("actor")


def parse_scenario(data) -> list[ScenarioStep]:
    if isinstance(data, dict):
        data = data.get("steps", [])
    if not isinstance(data, list):
        raise ScenarioParseError("scenario must be a list of steps or {\"steps\": [...]}")
    steps = []
    last_tick = 0
    for i, raw in enumerate(data):
        if not isinstance(raw, dict):
            raise ScenarioParseError(f"step {i} is not an object")
        action = raw.get("action")
        if action not in ACTIONS:
            raise ScenarioParseError(f"step {i}: unknown action {action!r}")
        missing = [k for k in ACTIONS[action] if k not in raw]
        if missing:
            raise ScenarioParseError(f"step {i}: {action} needs {missing}")
        at_tick = raw.get("at_tick")
        if at_tick is not None:
            if not isinstance(at_tick, int) or at_tick < last_tick:
                raise ScenarioParseError(f"step {i}: at_tick must be a non-decreasing integer")
            last_tick = at_tick
        params = {k: v for k, v in raw.items() if k not in ("action", "at_tick")}
        steps.append(ScenarioStep(i, at_tick, action, params))
    return steps


def load_scenario(path) -> list[ScenarioStep]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ScenarioParseError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(data)


def _arg_text(arg) -> str:
    if isinstance(arg, str):
        return arg
    return crypto.canonical_encode(arg).decode("utf-8")


def resolve_key(key: str) -> str:
    """Map an operator-supplied key to a ledger key.

    Digits name a citizen asset; ``consent:<aadhaar>:<org>`` and
    ``changereq:<id>`` name the other record kinds; anything else is used
    verbatim.
    """
    if key.isdigit():
        return citizen_key(key)
    kind, _, rest = key.partition(":")
    if kind == "consent" and rest:
        return create_composite_key(CONSENT_NS, rest.split(":"))
    if kind == "changereq" and rest:
        return create_composite_key(CHANGEREQ_NS, [rest])
    return key


def printable_key(key: str) -> str:
    if "\u0000" not in key:
        return key
    ns, attrs = split_composite_key(key)
    return ":".join([ns, *attrs])


@dataclass
class SimReport:
    data: dict

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @property
    def failed_assertions(self) -> list:
        return [a for a in self.data["assertions"] if not a["passed"]]

    @property
    def ok(self) -> bool:
        return not self.failed_assertions

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())


class Simulation:
    def __init__(self, config: SimConfig | dict):
        if isinstance(config, dict):
            config = SimConfig.from_dict(config)
        self.config = config
        self.network = Network(CATALOG, seed=str(config.seed),
                               registry_authority=config.registry_authority,
                               epoch_date=config.epoch_date)
        self.orderer = Orderer(config.orderer)
        self.network.orderer = self.orderer
        self.clock = 0
        self.clients = {}  # client_id -> ClientIdentity
        self._nonces = Counter()
        self._scheduled = defaultdict(list)  # tick -> [(channel_id, block)]
        self._delivered = {}  # channel_id -> highest block number delivered
        self.stalled: set[str] = set()
        self.tampered: list[dict] = []
        self.outcomes: list[dict] = []
        self.reads: list[dict] = []
        self.assertions: list[dict] = []
        self.tx_labels: dict[str, str] = {}
        self.tx_codes: dict[str, dict] = defaultdict(dict)  # tx_id -> peer -> code
        self.tx_position: dict[str, tuple] = {}
        self.responses: dict[str, object] = {}
        self._build()

    def _build(self):
        net, cfg = self.network, self.config
        try:
            for org in cfg.orgs:
                net.add_org(org["org_id"], org.get("kind", "private_org"))
            for ch in cfg.channels:
                net.create_channel(ch["channel_id"], ch["member_orgs"], ch.get("policies"))
                self._delivered[ch["channel_id"]] = 0
            for p in cfg.peers:
                net.add_peer(p["peer_id"], p["org_id"])
                for cc in p.get("chaincodes", []):
                    net.install_chaincode(p["peer_id"], cc)
                for ch in p.get("channels", []):
                    net.join_channel(p["peer_id"], ch)
            for c in cfg.clients:
                self.clients[c["client_id"]] = net.register_client(
                    c["org_id"], c["role"], c.get("aadhaar"), name=c["client_id"])
        except (CitizenNetError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot build network: {exc!r}") from exc

    # time

    def advance_to(self, tick: int) -> None:
        while self.clock < tick:
            for block in self.orderer.tick(self.clock):
                channel_id = self._channel_of_block(block)
                self._scheduled[self.clock + 1].append((channel_id, block))
            self.clock += 1
            for channel_id, block in self._scheduled.pop(self.clock, []):
                self._delivered[channel_id] = block.number
                self._sync_channel(channel_id)

    def _channel_of_block(self, block):
        return block.transactions[0].proposal.channel_id

    def drain(self) -> None:
        """Run until nothing is pending, then bring every running peer up to date."""
        while self.orderer.has_pending() or self._scheduled:
            self.advance_to(self.clock + 1)
        for channel_id in sorted(self.network.channels):
            self._sync_channel(channel_id)

    def _sync_channel(self, channel_id: str) -> None:
        archive = self.orderer.blocks(channel_id)
        target = self._delivered[channel_id]
        for peer in self.network.channel_peers(channel_id):
            if peer.peer_id in self.stalled:
                continue
            ledger = peer.ledger(channel_id)
            while ledger.height <= target:
                validated, _ = deliver_block(self.network, peer.peer_id, channel_id,
                                             archive[ledger.height])
                for tx_num, (tx, code) in enumerate(zip(validated.transactions,
                                                        validated.validity_flags)):
                    self.tx_codes[tx.tx_id][peer.peer_id] = code.value
                    self.tx_position.setdefault(tx.tx_id, (channel_id, validated.number, tx_num))

    # client side

    def propose(self, actor: str, fn: str, args=(), channel: str | None = None,
                endorsers=None, chaincode: str = "citizennet", submit=None,
                label: str | None = None, step: int | None = None) -> dict:
        client = self.clients.get(actor)
        if client is None:
            raise ScenarioParseError(f"unknown actor {actor!r}")
        channel = channel or sorted(self.network.channels)[0]
        if endorsers is None:
            endorsers = self.default_endorsers(channel, chaincode)
        self._nonces[actor] += 1
        proposal = make_proposal(client.keys, channel, chaincode, fn,
                                 [_arg_text(a) for a in args],
                                 nonce=self._nonces[actor], timestamp=self.clock)
        outcome = {"step": step, "label": label or proposal.tx_id[:16], "tick": self.clock,
                   "actor": actor, "fn": fn, "channel": channel, "tx_id": proposal.tx_id}
        try:
            tx = collect_endorsements(self.network, proposal, endorsers)
        except (ContractError, CitizenNetError) as exc:
            outcome.update(status=type(exc).__name__, message=str(exc))
            self.outcomes.append(outcome)
            return outcome
        response = crypto.canonical_decode(tx.response)
        outcome.update(status="ok", response=response)
        self.responses[outcome["label"]] = response
        if client.role is Role.THIRD_PARTY and fn in READ_FUNCTIONS_AUDITED:
            self.reads.append(self._read_log(client, args, response))
        mutating = self.network.catalog[chaincode].is_mutating(fn)
        if submit if submit is not None else mutating:
            self.orderer.submit(tx, now=self.clock)
            self.tx_labels[tx.tx_id] = outcome["label"]
            outcome["submitted"] = True
        self.outcomes.append(outcome)
        return outcome

    def _read_log(self, client, args, response):
        records = response if isinstance(response, list) else [response]
        fields = sorted({f for r in records if isinstance(r, dict) for f in r})
        return {"tick": self.clock, "org": client.org_id, "client": client.name,
                "aadhaar": str(args[0]) if args else "", "fields": fields}

    def default_endorsers(self, channel: str, chaincode: str) -> list[str]:
        """One endorsing peer from the registry authority, else any endorser."""
        candidates = [p for p in self.network.channel_peers(channel)
                      if p.is_endorser(chaincode, channel)]
        preferred = [p for p in candidates if p.org_id == self.network.registry_authority]
        pick = (preferred or candidates)[:1]
        return [p.peer_id for p in pick]

    # operator actions

    def tamper(self, peer_id: str, channel_id: str, block_num: int, offset: int,
               mask: int = 0x01) -> None:
        """Flip bits of one byte in one peer's stored copy of a block."""
        peer = self.network.peer(peer_id)
        if channel_id not in peer.ledgers:
            raise NotJoined(f"{peer_id} has not joined {channel_id}")
        store = peer.ledger(channel_id).store
        if not 0 <= block_num < store.height:
            raise NoSuchBlock(f"{peer_id}/{channel_id} has no block {block_num}")
        blob = bytearray(store.raw(block_num))
        if not 0 <= offset < len(blob):
            raise NoSuchBlock(f"offset {offset} outside block {block_num} ({len(blob)} bytes)")
        if not 0 < mask < 256:
            raise ValueError("mask must flip at least one bit of a byte")
        blob[offset] ^= mask
        store._overwrite_raw(block_num, bytes(blob))
        self.tampered.append({"peer": peer_id, "channel": channel_id,
                              "block": block_num, "offset": offset})

    def replace_block(self, peer_id: str, channel_id: str, block) -> None:
        """Swap in a whole forged block (header included) on one peer."""
        store = self.network.peer(peer_id).ledger(channel_id).store
        if not 0 <= block.number < store.height:
            raise NoSuchBlock(block.number)
        store._overwrite_raw(block.number, block.encode())
        self.tampered.append({"peer": peer_id, "channel": channel_id,
                              "block": block.number, "offset": None})

    def diff_peers(self, channel_id: str) -> dict:
        peers = self.network.channel_peers(channel_id)
        return diff_ledgers(channel_id, {p.peer_id: p.ledger(channel_id) for p in peers})

    def query(self, peer_id: str, channel_id: str, kind: str, key_or_height):
        peer = self.network.peer(peer_id)
        if channel_id not in peer.ledgers:
            raise NotJoined(f"{peer_id} has not joined {channel_id}")
        return query_ledger(peer.ledger(channel_id), kind, key_or_height)

    # scenario execution

    def run(self, scenario, strict: bool = False) -> SimReport:
        steps = scenario if (isinstance(scenario, list) and all(
            isinstance(s, ScenarioStep) for s in scenario)) else parse_scenario(scenario)
        for step in steps:
            if step.at_tick is not None:
                self.advance_to(step.at_tick)
            self._execute(step)
        self.drain()
        report = self.report()
        if strict and report.failed_assertions:
            first = report.failed_assertions[0]
            raise AssertionFailed(first["step"], first["detail"], report)
        return report

    def _execute(self, step: ScenarioStep) -> None:
        p = step.params
        if step.action == "propose":
            self.propose(p["actor"], p["fn"], p.get("args", []), p.get("channel"),
                         p.get("endorsers"), p.get("chaincode", "citizennet"),
                         p.get("submit"), p.get("label"), step.index)
        elif step.action == "advance_ticks":
            self.advance_to(self.clock + int(p["ticks"]))
        elif step.action == "tamper":
            self.tamper(p["peer"], p["channel"], int(p["block"]), int(p["offset"]),
                        int(p.get("mask", 1)))
        elif step.action == "stall":
            self.network.peer(p["peer"])
            self.stalled.add(p["peer"])
        elif step.action == "resume":
            self.stalled.discard(p["peer"])
        elif step.action == "join":
            self.network.join_channel(p["peer"], p["channel"])
        elif step.action == "remove_identity":
            client = self.clients.get(p["actor"])
            if client is None:
                raise ScenarioParseError(f"unknown actor {p['actor']!r}")
            self.network.remove_identity(client.identity_id)
        elif step.action == "expect":
            self._expect(step)

    def _expect(self, step: ScenarioStep) -> None:
        p = step.params
        check = p["check"]
        try:
            actual = self._observe(p)
            if "equals" in p:
                passed = actual == p["equals"]
                wanted = f"== {p['equals']!r}"
            elif "contains" in p:
                passed = p["contains"] in actual
                wanted = f"contains {p['contains']!r}"
            else:
                passed = bool(actual)
                wanted = "truthy"
        except (CitizenNetError, KeyError, IndexError, ValueError) as exc:
            actual, passed, wanted = f"error: {type(exc).__name__}: {exc}", False, "no error"
        detail = f"{check}: got {actual!r}, wanted {wanted}"
        self.assertions.append({"step": step.index, "tick": self.clock, "check": check,
                                "passed": bool(passed), "detail": detail})

    def _observe(self, p):
        check = p["check"]
        if check == "outcome":
            return self._outcome(p["label"])["status"]
        if check == "response":
            return self._outcome(p["label"]).get("response")
        if check == "response_keys":
            response = self._outcome(p["label"]).get("response")
            return sorted(response) if isinstance(response, dict) else None
        if check == "tx_code":
            tx_id = self._outcome(p["label"])["tx_id"]
            codes = set(self.tx_codes.get(tx_id, {}).values())
            return codes.pop() if len(codes) == 1 else sorted(codes)
        channel = p.get("channel") or sorted(self.network.channels)[0]
        peer_id = p.get("peer") or self.network.channel_peers(channel)[0].peer_id
        if check == "state_field":
            rec = self.query(peer_id, channel, "state", p["aadhaar"])
            return rec["value"].get(DISPLAY_NAMES.get(p["field"], p["field"]))
        if check == "history_length":
            return len(self.query(peer_id, channel, "history", p["aadhaar"])["entries"])
        if check == "height":
            return self.network.peer(peer_id).ledger(channel).height
        if check == "chain_ok":
            return verify_chain(self.network.peer(peer_id).ledger(channel).store) is None
        if check == "first_bad_height":
            return verify_chain(self.network.peer(peer_id).ledger(channel).store)
        if check == "converged":
            return self.diff_peers(channel)["consistent"]
        if check == "divergent_peers":
            return sorted(self.diff_peers(channel)["divergent"])
        raise ScenarioParseError(f"unknown check {check!r}")

    def _outcome(self, label):
        for outcome in reversed(self.outcomes):
            if outcome["label"] == label:
                return outcome
        raise KeyError(f"no proposal labelled {label!r}")

    # reporting

    def transactions(self) -> list[dict]:
        rows = []
        for tx_id, (channel_id, number, tx_num) in sorted(
                self.tx_position.items(), key=lambda kv: (kv[1], kv[0])):
            if number == 0:
                continue
            codes = self.tx_codes[tx_id]
            distinct = sorted(set(codes.values()))
            rows.append({
                "tx_id": tx_id,
                "label": self.tx_labels.get(tx_id, ""),
                "channel": channel_id,
                "block": number,
                "index": tx_num,
                "code": distinct[0] if len(distinct) == 1 else codes,
            })
        return rows

    def report(self) -> SimReport:
        channels = {}
        for channel_id in sorted(self.network.channels):
            peers = {}
            for peer in self.network.channel_peers(channel_id):
                ledger = peer.ledger(channel_id)
                bad = verify_chain(ledger.store)
                peers[peer.peer_id] = {
                    "height": ledger.height,
                    "tip_hash": ledger.tip_hash().hex(),
                    "state_hash": ledger.state.state_hash(),
                    "first_bad_height": bad,
                    "dishonest": any(t["peer"] == peer.peer_id and t["channel"] == channel_id
                                     for t in self.tampered),
                    "stalled": peer.peer_id in self.stalled,
                }
            channels[channel_id] = {
                "height": len(self.orderer.blocks(channel_id)),
                "peers": peers,
                "divergence": self.diff_peers(channel_id),
            }
        return SimReport({
            "seed": self.config.seed,
            "final_tick": self.clock,
            "channels": channels,
            "transactions": self.transactions(),
            "outcomes": self.outcomes,
            "third_party_reads": self.reads,
            "tampered": self.tampered,
            "assertions": self.assertions,
        })

    def export(self, directory) -> None:
        """Write every peer's block files under ``directory/<peer>/<channel>/``."""
        root = Path(directory)
        for peer_id, peer in sorted(self.network.peers.items()):
            for channel_id, ledger in sorted(peer.ledgers.items()):
                ledger.export(root / peer_id / channel_id)


def run_scenario(config, scenario, strict: bool = False) -> SimReport:
    return Simulation(config).run(scenario, strict=strict)


def diff_ledgers(channel_id: str, ledgers: dict) -> dict:
    """Compare peer replicas of one channel.

    A peer whose block at some height differs from the majority copy is
    divergent at the lowest such height. A peer whose chain is a strict
    prefix of the longest one is only behind.
    """
    peer_ids = sorted(ledgers)
    blob_hashes = {pid: [crypto.hexdigest(b) for b in ledgers[pid].store.blobs()]
                   for pid in peer_ids}
    chain_ok = {pid: verify_chain(ledgers[pid].store) is None for pid in peer_ids}
    max_height = max((len(h) for h in blob_hashes.values()), default=0)

    divergent = {}
    for height in range(max_height):
        groups = defaultdict(list)
        for pid in peer_ids:
            if pid not in divergent and height < len(blob_hashes[pid]):
                groups[blob_hashes[pid][height]].append(pid)
        if len(groups) <= 1:
            continue
        # largest group wins; ties go to the group whose chains verify, then lowest id
        majority = min(groups.values(),
                       key=lambda g: (-len(g), not all(chain_ok[p] for p in g), g[0]))
        for members in groups.values():
            if members is not majority:
                for pid in members:
                    divergent[pid] = height

    consistent_heights = [len(blob_hashes[p]) for p in peer_ids if p not in divergent]
    tip = max(consistent_heights, default=0)
    behind = {pid: len(blob_hashes[pid]) for pid in peer_ids
              if pid not in divergent and len(blob_hashes[pid]) < tip}

    state_groups = defaultdict(list)
    for pid in peer_ids:
        if pid not in divergent and pid not in behind:
            state_groups[ledgers[pid].state.state_hash()].append(pid)
    state_divergent = []
    if len(state_groups) > 1:
        majority = min(state_groups.values(), key=lambda g: (-len(g), g[0]))
        state_divergent = sorted(p for g in state_groups.values() if g is not majority for p in g)

    pairs = []
    for i, a in enumerate(peer_ids):
        for b in peer_ids[i + 1:]:
            ha, hb = blob_hashes[a], blob_hashes[b]
            first = next((h for h in range(min(len(ha), len(hb))) if ha[h] != hb[h]), None)
            if first is not None:
                pairs.append({"a": a, "b": b, "status": "divergent", "height": first})
            elif len(ha) != len(hb):
                pairs.append({"a": a, "b": b, "status": "behind", "height": min(len(ha), len(hb))})
    return {
        "channel": channel_id,
        "divergent": divergent,
        "behind": behind,
        "state_divergent": state_divergent,
        "pairs": pairs,
        "consistent": not divergent and not behind and not state_divergent,
    }


def query_ledger(ledger, kind: str, key_or_height):
    """Render one record of a ledger for operators."""
    if kind == "block":
        height = int(key_or_height)
        if not 0 <= height < ledger.height:
            raise NotFound(f"no block {height}")
        block = ledger.store.get(height)
        return {
            "number": block.number,
            "prev_hash": block.header.prev_hash.hex(),
            "data_hash": block.header.data_hash.hex(),
            "transactions": [
                {"tx_id": tx.tx_id, "function": tx.proposal.function,
                 "creator": tx.proposal.creator,
                 "endorsers": [e.org_id for e in tx.endorsements],
                 "code": flag.value}
                for tx, flag in zip(block.transactions, block.validity_flags or
                                    [None] * len(block.transactions))
            ],
        }
    key = resolve_key(str(key_or_height))
    if kind == "state":
        entry = ledger.get(key)
        if entry is None:
            raise NotFound(f"no state for {printable_key(key)}")
        return {"key": printable_key(key), "version": list(entry.version),
                "value": _render_value(key, entry.value)}
    if kind == "history":
        history = ledger.get_history_for_key(key)
        if not history:
            raise NotFound(f"no history for {printable_key(key)}")
        return {
            "key": printable_key(key),
            "entries": [
                {"version": i, "commit": list(h.version), "tx_id": h.tx_id,
                 "deleted": h.is_delete,
                 "value": None if h.is_delete else _render_value(key, h.value)}
                for i, h in enumerate(history)
            ],
        }
    raise ValueError(f"unknown query kind {kind!r}")


def _render_value(key, raw):
    value = crypto.canonical_decode(raw)
    if key.startswith(CITIZEN_NS + "\u0000") and isinstance(value, dict):
        return to_display(value)
    return value
