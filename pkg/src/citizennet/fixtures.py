"""Ready-made network topologies and scenarios."""

import datetime as dt
import json
import random

SAMPLE_AADHAAR = "12345678911"
SAMPLE_CITIZEN = {
    "aadhaar": SAMPLE_AADHAAR,
    "name": "ABC XYZ",
    "dob": "15/08/2003",
    "father_name": "XYZ ABC",
    "vote": "Not Eligible",
    "pan": "ABC1234P",
    "accounts": {"SBI00082": "12345678901"},
    "phone": "91XXXXXXXX",
    "current_state": "Andhra Pradesh",
    "pincode": "522309",
    "address": "DEF street, Door No: 1-1-1, KLM Apartment",
}
WALKTHROUGH_EPOCH = dt.date(2021, 1, 17)


def identity_network(seed=7, max_block_txs=10, batch_timeout_ticks=2,
                     epoch_date=WALKTHROUGH_EPOCH):
    """Four peers on ``identity-main`` plus a UIDAI/hospital ``health`` channel."""
    return {
        "seed": seed,
        "epoch_date": epoch_date.isoformat(),
        "registry_authority": "UIDAI",
        "orgs": [
            {"org_id": "UIDAI", "kind": "government_body"},
            {"org_id": "ECI", "kind": "government_body"},
            {"org_id": "BankOrg", "kind": "private_org"},
            {"org_id": "CitizenRegistry", "kind": "citizen_registry"},
            {"org_id": "HospitalOrg", "kind": "private_org"},
        ],
        "peers": [
            {"peer_id": "uidai-p0", "org_id": "UIDAI",
             "channels": ["identity-main", "health"], "chaincodes": ["citizennet"]},
            {"peer_id": "eci-p0", "org_id": "ECI",
             "channels": ["identity-main"], "chaincodes": ["citizennet"]},
            {"peer_id": "bank-p0", "org_id": "BankOrg",
             "channels": ["identity-main"], "chaincodes": ["citizennet"]},
            {"peer_id": "citizen-p0", "org_id": "CitizenRegistry",
             "channels": ["identity-main"], "chaincodes": ["citizennet"]},
            {"peer_id": "hospital-p0", "org_id": "HospitalOrg",
             "channels": ["health"], "chaincodes": ["citizennet"]},
        ],
        "channels": [
            {"channel_id": "identity-main",
             "member_orgs": ["UIDAI", "ECI", "BankOrg", "CitizenRegistry"]},
            {"channel_id": "health", "member_orgs": ["UIDAI", "HospitalOrg"]},
        ],
        "clients": [
            {"client_id": "uidai-admin", "org_id": "UIDAI", "role": "uidai_admin"},
            {"client_id": "citizen-abc", "org_id": "CitizenRegistry", "role": "citizen",
             "aadhaar": SAMPLE_AADHAAR},
            {"client_id": "bank-officer", "org_id": "BankOrg", "role": "third_party"},
            {"client_id": "hospital-officer", "org_id": "HospitalOrg", "role": "third_party"},
        ],
        "orderer": {"max_block_txs": max_block_txs, "batch_timeout_ticks": batch_timeout_ticks},
    }


def voter_walkthrough():
    """Register the example citizen, let them turn 18, evaluate the vote."""
    dob = dt.date(2003, 8, 15)
    turns_18 = (dt.date(dob.year + 18, dob.month, dob.day) - WALKTHROUGH_EPOCH).days
    main = "identity-main"
    steps = [
        {"at_tick": 0, "action": "propose", "actor": "uidai-admin", "fn": "register_citizen",
         "args": [SAMPLE_CITIZEN], "channel": main, "endorsers": ["uidai-p0"],
         "label": "register"},
        {"action": "advance_ticks", "ticks": 4},
        {"action": "expect", "check": "tx_code", "label": "register", "equals": "VALID"},
        {"action": "expect", "check": "state_field", "channel": main,
         "aadhaar": SAMPLE_AADHAAR, "field": "vote", "equals": "Not Eligible"},
        {"action": "propose", "actor": "citizen-abc", "fn": "update_vote_eligibility",
         "args": [SAMPLE_AADHAAR], "channel": main, "endorsers": ["uidai-p0"],
         "label": "too-young"},
        {"action": "expect", "check": "response", "label": "too-young",
         "equals": "not eligible yet"},
        {"at_tick": turns_18, "action": "propose", "actor": "citizen-abc",
         "fn": "update_vote_eligibility", "args": [SAMPLE_AADHAAR], "channel": main,
         "endorsers": ["uidai-p0"], "label": "vote"},
        {"action": "advance_ticks", "ticks": 4},
        {"action": "expect", "check": "tx_code", "label": "vote", "equals": "VALID"},
        {"action": "expect", "check": "state_field", "channel": main,
         "aadhaar": SAMPLE_AADHAAR, "field": "vote", "equals": "Eligible"},
        {"action": "expect", "check": "state_field", "channel": main,
         "aadhaar": SAMPLE_AADHAAR, "field": "voter_id", "contains": "522309"},
        {"action": "propose", "actor": "citizen-abc", "fn": "view_history",
         "args": [SAMPLE_AADHAAR], "channel": main, "endorsers": ["citizen-p0"],
         "label": "history"},
        {"action": "expect", "check": "history_length", "channel": main,
         "aadhaar": SAMPLE_AADHAAR, "equals": 2},
        {"action": "expect", "check": "converged", "channel": main},
    ]
    return identity_network(), {"steps": steps}


def busy_network(n_tx=220, seed=11, max_block_txs=8):
    """Three channels, six peers, ``n_tx`` write proposals.

    Some proposals are rejected by the contract at endorsement, so fewer
    than ``n_tx`` transactions reach the orderer.

    Proposals are drawn from a seeded RNG; several land in the same tick on
    the same key so the run contains MVCC conflicts as well as valid writes.
    """
    channels = {
        "identity-main": ["UIDAI", "ECI", "BankOrg", "CitizenRegistry"],
        "health": ["UIDAI", "HospitalOrg", "CitizenRegistry"],
        "finance": ["UIDAI", "BankOrg", "CitizenRegistry"],
    }
    peers = [
        ("uidai-p0", "UIDAI", list(channels)),
        ("uidai-p1", "UIDAI", list(channels)),
        ("eci-p0", "ECI", ["identity-main"]),
        ("bank-p0", "BankOrg", ["identity-main", "finance"]),
        ("hospital-p0", "HospitalOrg", ["health"]),
        ("citizen-p0", "CitizenRegistry", list(channels)),
    ]
    n_citizens = 12
    citizens = [(f"citizen-{i:02d}", f"{900000000000 + i * 7919}") for i in range(n_citizens)]
    third_parties = {"identity-main": "bank-officer", "finance": "bank-officer",
                     "health": "hospital-officer"}
    config = {
        "seed": seed,
        "epoch_date": "2020-01-01",
        "orgs": [
            {"org_id": "UIDAI", "kind": "government_body"},
            {"org_id": "ECI", "kind": "government_body"},
            {"org_id": "BankOrg", "kind": "private_org"},
            {"org_id": "HospitalOrg", "kind": "private_org"},
            {"org_id": "CitizenRegistry", "kind": "citizen_registry"},
        ],
        "peers": [{"peer_id": p, "org_id": o, "channels": chs, "chaincodes": ["citizennet"]}
                  for p, o, chs in peers],
        "channels": [{"channel_id": c, "member_orgs": m} for c, m in channels.items()],
        "clients": (
            [{"client_id": "uidai-admin", "org_id": "UIDAI", "role": "uidai_admin"},
             {"client_id": "bank-officer", "org_id": "BankOrg", "role": "third_party"},
             {"client_id": "hospital-officer", "org_id": "HospitalOrg", "role": "third_party"}]
            + [{"client_id": cid, "org_id": "CitizenRegistry", "role": "citizen",
                "aadhaar": aad} for cid, aad in citizens]
        ),
        "orderer": {"max_block_txs": max_block_txs, "batch_timeout_ticks": 2},
    }

    rng = random.Random(seed)
    uidai = {"identity-main": ["uidai-p0", "uidai-p1"], "health": ["uidai-p0"],
             "finance": ["uidai-p1"]}
    registered = {c: [] for c in channels}
    granted = {c: set() for c in channels}
    steps = []
    tick = 0
    submitted = 0
    while submitted < n_tx:
        tick += rng.choice((0, 1, 1, 2))
        channel = rng.choice(sorted(channels))
        third = third_parties[channel]
        org = "BankOrg" if third == "bank-officer" else "HospitalOrg"
        unregistered = [c for c in citizens if c not in registered[channel]]
        kind = rng.choice(["register", "register", "vote", "consent", "change", "revoke", "read"])
        if not registered[channel] or (kind == "register" and unregistered):
            cid, aad = rng.choice(unregistered) if unregistered else rng.choice(citizens)
            born = dt.date(1990, 1, 1) + dt.timedelta(days=rng.randrange(0, 365 * 22))
            asset = {"aadhaar": aad, "name": f"Citizen {cid}", "dob": born.strftime("%d/%m/%Y"),
                     "father_name": "Parent", "pan": f"PAN{aad[-5:]}X",
                     "accounts": {"SBI00082": aad[::-1]}, "phone": f"91{aad[-8:]}",
                     "current_state": "Andhra Pradesh", "pincode": str(500000 + rng.randrange(99999)),
                     "address": f"{rng.randrange(1, 99)} Main Road"}
            if (cid, aad) not in registered[channel]:
                registered[channel].append((cid, aad))
            step = {"actor": "uidai-admin", "fn": "register_citizen", "args": [asset]}
        else:
            cid, aad = rng.choice(registered[channel])
            if kind == "vote":
                step = {"actor": cid, "fn": "update_vote_eligibility", "args": [aad]}
            elif kind == "consent":
                scope = sorted(rng.sample(["pan", "phone", "accounts", "address", "name"], 2))
                granted[channel].add(aad)
                step = {"actor": cid, "fn": "grant_consent", "args": [org, scope]}
            elif kind == "revoke" and aad in granted[channel]:
                granted[channel].discard(aad)
                step = {"actor": cid, "fn": "revoke_consent", "args": [org]}
            elif kind == "read":
                steps.append({"at_tick": tick, "action": "propose", "actor": third,
                              "fn": "view_aadhar", "args": [aad], "channel": channel,
                              "endorsers": ["citizen-p0"], "label": f"read-{len(steps)}"})
                continue
            else:
                step = {"actor": cid, "fn": "request_change",
                        "args": [aad, {"address": f"{rng.randrange(100, 999)} New Street"}]}
        submitted += 1
        steps.append({"at_tick": tick, "action": "propose", "channel": channel,
                      "endorsers": uidai[channel], "label": f"tx-{submitted:03d}", **step})
    steps.append({"action": "advance_ticks", "ticks": 5})
    for channel in sorted(channels):
        steps.append({"action": "expect", "check": "converged", "channel": channel})
    return config, {"steps": steps}


def dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
