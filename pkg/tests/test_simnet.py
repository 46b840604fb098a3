import json

import pytest

from citizennet import fixtures
from citizennet.errors import (
    AssertionFailed,
    ConfigError,
    NoSuchBlock,
    NotFound,
    NotJoined,
    ScenarioParseError,
)
from citizennet.simnet import SimConfig, Simulation, parse_scenario, resolve_key, run_scenario
from oracles import ledger_as_dict, replay_world_state

MAIN = "identity-main"
AADHAAR = fixtures.SAMPLE_AADHAAR


def _config(**kw):
    return fixtures.identity_network(**kw)


def _register(sim):
    sim.propose("uidai-admin", "register_citizen", [fixtures.SAMPLE_CITIZEN], MAIN,
                ["uidai-p0"], label="reg")
    sim.drain()


def test_empty_scenario_keeps_genesis():
    report = run_scenario(_config(), {"steps": []})
    for channel, info in report.data["channels"].items():
        assert info["height"] == 1 and info["divergence"]["consistent"]
        assert {p["height"] for p in info["peers"].values()} == {1}
    assert report.data["transactions"] == [] and report.ok


def test_walkthrough_assertions_pass():
    config, scenario = fixtures.voter_walkthrough()
    report = run_scenario(config, scenario, strict=True)
    assert report.ok and len(report.data["assertions"]) == 8
    voter = Simulation(config)
    voter.run(scenario)
    state = voter.query("eci-p0", MAIN, "state", AADHAAR)
    assert state["value"]["VoterID"] == "V-522309-129c7e02"


def test_runs_are_byte_identical():
    config, scenario = fixtures.busy_network(n_tx=60, seed=3)
    assert run_scenario(config, scenario).to_json() == run_scenario(config, scenario).to_json()


def test_seed_changes_keys():
    a = Simulation(_config(seed=1)).network.peer("uidai-p0").keys.identity_id
    b = Simulation(_config(seed=2)).network.peer("uidai-p0").keys.identity_id
    assert a != b


def test_blocks_reach_peers_one_tick_after_cut():
    sim = Simulation(_config(batch_timeout_ticks=2))
    sim.propose("uidai-admin", "register_citizen", [fixtures.SAMPLE_CITIZEN], MAIN, ["uidai-p0"])
    heights = []
    for t in range(1, 5):
        sim.advance_to(t)
        heights.append(sim.network.peer("eci-p0").ledger(MAIN).height)
    # cut at tick 2 (age 2), delivered at tick 3
    assert heights == [1, 1, 2, 2]


def test_tamper_and_diff():
    sim = Simulation(_config())
    _register(sim)
    sim.tamper("bank-p0", MAIN, 1, 40)
    diff = sim.diff_peers(MAIN)
    assert diff["divergent"] == {"bank-p0": 1} and not diff["consistent"]
    report = sim.report().data["channels"][MAIN]["peers"]
    assert report["bank-p0"]["first_bad_height"] == 1 and report["bank-p0"]["dishonest"]
    assert report["eci-p0"]["first_bad_height"] is None
    with pytest.raises(NoSuchBlock):
        sim.tamper("bank-p0", MAIN, 9, 0)
    with pytest.raises(NoSuchBlock):
        sim.tamper("bank-p0", MAIN, 1, 10 ** 6)
    with pytest.raises(NotJoined):
        sim.tamper("hospital-p0", MAIN, 0, 0)


def test_tampered_peer_keeps_committing():
    sim = Simulation(_config())
    _register(sim)
    sim.tamper("bank-p0", MAIN, 1, 40)
    sim.propose("citizen-abc", "grant_consent", ["BankOrg", ["pan"]], MAIN, ["uidai-p0"])
    sim.drain()
    heights = {p.peer_id: p.ledger(MAIN).height for p in sim.network.channel_peers(MAIN)}
    assert set(heights.values()) == {3}
    assert sim.diff_peers(MAIN)["divergent"] == {"bank-p0": 1}


def test_stalled_peer_is_behind_not_divergent():
    sim = Simulation(_config())
    sim.stalled.add("eci-p0")
    _register(sim)
    diff = sim.diff_peers(MAIN)
    assert diff["behind"] == {"eci-p0": 1} and diff["divergent"] == {}
    sim.stalled.discard("eci-p0")
    sim.drain()
    assert sim.diff_peers(MAIN)["consistent"]


def test_late_join_catches_up():
    config = _config()
    steps = [
        {"action": "propose", "actor": "uidai-admin", "fn": "register_citizen",
         "args": [fixtures.SAMPLE_CITIZEN], "channel": "health", "label": "r"},
        {"action": "advance_ticks", "ticks": 5},
        {"action": "expect", "check": "height", "channel": "health", "peer": "hospital-p0", "equals": 2},
    ]
    config["peers"].append({"peer_id": "hospital-p1", "org_id": "HospitalOrg",
                            "channels": [], "chaincodes": ["citizennet"]})
    sim = Simulation(config)
    report = sim.run(steps + [{"action": "join", "peer": "hospital-p1", "channel": "health"}])
    assert report.ok
    assert sim.network.peer("hospital-p1").ledger("health").height == 2
    assert sim.diff_peers("health")["consistent"]


def test_query():
    sim = Simulation(_config())
    _register(sim)
    state = sim.query("eci-p0", MAIN, "state", AADHAAR)
    assert state["version"] == [1, 0] and state["value"]["AADHAR Number"] == AADHAAR
    history = sim.query("eci-p0", MAIN, "history", AADHAAR)
    assert [e["version"] for e in history["entries"]] == [0]
    block = sim.query("eci-p0", MAIN, "block", 1)
    assert block["transactions"][0]["code"] == "VALID"
    with pytest.raises(NotFound):
        sim.query("eci-p0", MAIN, "state", "1")
    with pytest.raises(NotJoined):
        sim.query("eci-p0", "health", "state", AADHAAR)


def test_resolve_key():
    assert resolve_key("123").endswith("\u0000123\u0000")
    assert resolve_key("consent:123:BankOrg").endswith("\u0000123\u0000BankOrg\u0000")
    assert "changereq" in resolve_key("changereq:abc")


@pytest.mark.parametrize("bad", [
    {"steps": [{"action": "fly"}]},
    {"steps": [{"action": "propose", "actor": "x"}]},
    {"steps": [{"action": "advance_ticks", "ticks": 1, "at_tick": 5},
               {"action": "advance_ticks", "ticks": 1, "at_tick": 3}]},
    {"steps": ["propose"]},
    "nonsense",
])
def test_scenario_parse_errors(bad):
    with pytest.raises(ScenarioParseError):
        parse_scenario(bad)


def test_unknown_actor():
    with pytest.raises(ScenarioParseError):
        run_scenario(_config(), {"steps": [{"action": "propose", "actor": "ghost", "fn": "view_aadhar"}]})


@pytest.mark.parametrize("mutate", [
    lambda c: c["peers"].append({"peer_id": "x", "org_id": "Nobody"}),
    lambda c: c["peers"][0]["channels"].append("nope"),
    lambda c: c["peers"][0]["chaincodes"].append("doom"),
    lambda c: c["channels"][0]["member_orgs"].append("Nobody"),
    lambda c: c["orgs"].append(dict(c["orgs"][0])),
    lambda c: c["clients"].append({"client_id": "b", "org_id": "BankOrg", "role": "uidai_admin"}),
    lambda c: c.update(orderer={"max_block_txs": 0, "batch_timeout_ticks": 1}),
])
def test_config_errors(mutate):
    config = _config()
    mutate(config)
    with pytest.raises(ConfigError):
        Simulation(config)


def test_config_round_trip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(_config()))
    cfg = SimConfig.load(path)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        SimConfig.load(tmp_path / "missing.json")


def test_strict_mode_raises_on_failed_expect():
    steps = {"steps": [{"action": "expect", "check": "height", "channel": MAIN, "equals": 7}]}
    with pytest.raises(AssertionFailed) as info:
        run_scenario(_config(), steps, strict=True)
    assert info.value.step_index == 0
    report = run_scenario(_config(), steps)
    assert not report.ok and len(report.failed_assertions) == 1


def test_contract_rejection_is_recorded_not_submitted():
    sim = Simulation(_config())
    out = sim.propose("bank-officer", "register_citizen", [fixtures.SAMPLE_CITIZEN], MAIN)
    assert out["status"] == "Unauthorized" and "submitted" not in out
    assert not sim.orderer.has_pending()


def test_third_party_reads_are_logged():
    sim = Simulation(_config())
    _register(sim)
    sim.propose("citizen-abc", "grant_consent", ["BankOrg", ["pan", "phone"]], MAIN)
    sim.drain()
    sim.propose("bank-officer", "kyc_share", [AADHAAR, ["pan"]], MAIN, ["bank-p0"])
    assert sim.reads == [{"tick": sim.clock, "org": "BankOrg", "client": "bank-officer",
                          "aadhaar": AADHAAR, "fields": ["pan"]}]


def test_removed_identity_scenario():
    steps = {"steps": [
        {"action": "remove_identity", "actor": "uidai-admin"},
        {"action": "propose", "actor": "uidai-admin", "fn": "register_citizen",
         "args": [fixtures.SAMPLE_CITIZEN], "channel": MAIN, "label": "r"},
        {"action": "expect", "check": "outcome", "label": "r", "equals": "BadClientSignature"},
    ]}
    assert run_scenario(_config(), steps).ok


def test_every_peer_matches_replay_oracle():
    config, scenario = fixtures.busy_network(n_tx=80, seed=5)
    sim = Simulation(config)
    sim.run(scenario)
    for peer in sim.network.peers.values():
        for ledger in peer.ledgers.values():
            blocks = [ledger.store.get(i) for i in range(ledger.height)]
            assert ledger_as_dict(ledger) == replay_world_state(blocks)


def test_export_reload(tmp_path):
    from citizennet.ledger import Ledger, verify_chain
    sim = Simulation(_config())
    _register(sim)
    sim.export(tmp_path)
    loaded = Ledger.load(MAIN, tmp_path / "eci-p0" / MAIN)
    assert verify_chain(loaded.store) is None
    assert ledger_as_dict(loaded) == ledger_as_dict(sim.network.peer("eci-p0").ledger(MAIN))
