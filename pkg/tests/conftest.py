import datetime as dt
import json

import pytest

from citizennet import fixtures
from citizennet.citizen import CATALOG
from citizennet.ledger import make_proposal
from citizennet.membership import Network
from citizennet.pipeline import Orderer, OrdererConfig, collect_endorsements, deliver_block

SAMPLE = fixtures.SAMPLE_CITIZEN
AADHAAR = fixtures.SAMPLE_AADHAAR
MAIN = "identity-main"


class Harness:
    """Small hand-wired network for driving the pipeline without the simulator."""

    def __init__(self, max_block_txs=10, timeout=1, epoch=dt.date(2021, 1, 17)):
        net = Network(CATALOG, seed="test", epoch_date=epoch)
        net.orderer = Orderer(OrdererConfig(max_block_txs, timeout))
        for org, kind in [("UIDAI", "government_body"), ("BankOrg", "private_org"),
                          ("CitizenRegistry", "citizen_registry"), ("HospitalOrg", "private_org")]:
            net.add_org(org, kind)
        net.create_channel(MAIN, ["UIDAI", "BankOrg", "CitizenRegistry"])
        net.create_channel("health", ["UIDAI", "HospitalOrg"])
        for peer, org, channels in [("uidai-p0", "UIDAI", [MAIN, "health"]),
                                    ("uidai-p1", "UIDAI", [MAIN]),
                                    ("bank-p0", "BankOrg", [MAIN]),
                                    ("citizen-p0", "CitizenRegistry", [MAIN]),
                                    ("hospital-p0", "HospitalOrg", ["health"])]:
            net.add_peer(peer, org)
            net.install_chaincode(peer, "citizennet")
            for ch in channels:
                net.join_channel(peer, ch)
        self.net = net
        self.admin = net.register_client("UIDAI", "uidai_admin", name="admin")
        self.citizen = net.register_client("CitizenRegistry", "citizen", AADHAAR, name="abc")
        self.bank = net.register_client("BankOrg", "third_party", name="bank")
        self.tick = 0
        self._nonce = 0

    def proposal(self, client, fn, *args, channel=MAIN, timestamp=None):
        self._nonce += 1
        args = [a if isinstance(a, str) else json.dumps(a, sort_keys=True) for a in args]
        return make_proposal(client.keys, channel, "citizennet", fn, args, self._nonce,
                             self.tick if timestamp is None else timestamp)

    def endorse(self, client, fn, *args, endorsers=("uidai-p0",), **kw):
        return collect_endorsements(self.net, self.proposal(client, fn, *args, **kw), endorsers)

    def submit(self, tx):
        self.net.orderer.submit(tx, now=self.tick)

    def cut(self, force=True):
        """Tick the orderer until it cuts; deliver blocks to every joined peer."""
        blocks = []
        while True:
            self.tick += 1
            blocks = self.net.orderer.tick(self.tick)
            if blocks or not force or not self.net.orderer.has_pending():
                break
        validated = []
        for block in blocks:
            channel = block.transactions[0].proposal.channel_id
            for peer in self.net.channel_peers(channel):
                v, _ = deliver_block(self.net, peer.peer_id, channel, block)
            validated.append(v)
        return validated

    def run(self, client, fn, *args, **kw):
        tx = self.endorse(client, fn, *args, **kw)
        self.submit(tx)
        return tx, self.cut()

    def ledger(self, peer="uidai-p0", channel=MAIN):
        return self.net.peer(peer).ledger(channel)


@pytest.fixture
def harness():
    return Harness()


@pytest.fixture
def registered(harness):
    harness.run(harness.admin, "register_citizen", SAMPLE)
    return harness
