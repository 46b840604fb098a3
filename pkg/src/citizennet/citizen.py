"""The ``citizennet`` chaincode: citizen identity records.

Only UIDAI administrators write citizen assets. Citizens may file change
requests, grant or revoke field-scoped read consent to third-party orgs, and
ask for their vote eligibility to be evaluated. Third parties read through
consent only.
"""

import datetime as dt
import json
import re

from . import crypto
from .errors import ContractError, NotFound
from .ledger import create_composite_key
from .membership import Role
from .runtime import Chaincode

CHAINCODE_NAME = "citizennet"
CITIZEN_NS = "org.citizen-network.citizennet.citizen"
CHANGEREQ_NS = "org.citizen-network.citizennet.changereq"
CONSENT_NS = "org.citizen-network.citizennet.consent"

NOT_ELIGIBLE = "Not Eligible"
ELIGIBLE = "Eligible"
VOTING_AGE = 18

FIELDS = (
    "aadhaar", "name", "dob", "father_name", "vote", "pan", "accounts",
    "phone", "current_state", "pincode", "address", "voter_id",
)
REQUIRED_FIELDS = ("aadhaar", "name", "dob")
WRITABLE_FIELDS = frozenset({"phone", "current_state", "pincode", "address", "accounts"})

# field names as printed for operators
DISPLAY_NAMES = {
    "aadhaar": "AADHAR Number",
    "name": "Name",
    "dob": "DOB",
    "father_name": "Father Name",
    "vote": "Vote",
    "pan": "PAN",
    "accounts": "Accounts",
    "phone": "Phone",
    "current_state": "Current State",
    "pincode": "pincode",
    "address": "Address",
    "voter_id": "VoterID",
}

_DOB_RE = re.compile(r"^(\d{2})/(\d{2})/(\d{4})$")


class Unauthorized(ContractError):
    pass


class AlreadyRegistered(ContractError):
    pass


class InvalidField(ContractError):
    pass


class AccessDenied(ContractError):
    pass


class ImmutableField(ContractError):
    pass


class NotPending(ContractError):
    pass


class InvalidScope(ContractError):
    pass


class NoActiveConsent(ContractError):
    pass


class AlreadyEligible(ContractError):
    pass


class EmptyIntersection(ContractError):
    pass


def parse_dob(text: str) -> dt.date:
    m = _DOB_RE.match(text or "")
    if not m:
        raise InvalidField(f"dob {text!r} is not DD/MM/YYYY")
    day, month, year = (int(g) for g in m.groups())
    try:
        return dt.date(year, month, day)
    except ValueError as exc:
        raise InvalidField(f"dob {text!r}: {exc}") from None


def _is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def age_on(dob: dt.date, today: dt.date) -> int:
    """Whole years from ``dob`` to ``today``.

    Someone born on 29 February has their birthday on 1 March in common years.
    """
    birthday = (dob.month, dob.day)
    if birthday == (2, 29) and not _is_leap(today.year):
        birthday = (3, 1)
    return today.year - dob.year - ((today.month, today.day) < birthday)


def voter_id_for(aadhaar: str, pincode: str) -> str:
    return f"V-{pincode}-{crypto.hexdigest(aadhaar.encode('utf-8'))[:8]}"


def citizen_key(aadhaar: str) -> str:
    return create_composite_key(CITIZEN_NS, [aadhaar])


def consent_key(aadhaar: str, org_id: str) -> str:
    return create_composite_key(CONSENT_NS, [aadhaar, org_id])


def changereq_key(request_id: str) -> str:
    return create_composite_key(CHANGEREQ_NS, [request_id])


def encode(record) -> bytes:
    return crypto.canonical_encode(record)


def decode(raw: bytes):
    return crypto.canonical_decode(raw)


def validate_asset(asset: dict) -> dict:
    unknown = set(asset) - set(FIELDS)
    if unknown:
        raise InvalidField(f"unknown fields {sorted(unknown)}")
    for name in REQUIRED_FIELDS:
        if not asset.get(name):
            raise InvalidField(f"{name} is required")
    if not isinstance(asset["aadhaar"], str) or not asset["aadhaar"].isdigit() \
            or not asset["aadhaar"].isascii():
        raise InvalidField("aadhaar must be a non-empty string of digits")
    parse_dob(asset["dob"])
    accounts = asset.get("accounts", {})
    if not isinstance(accounts, dict) or not all(isinstance(v, str) for v in accounts.values()):
        raise InvalidField("accounts must map bank codes to account-number strings")
    for name in FIELDS:
        if name != "accounts" and name in asset and not isinstance(asset[name], str):
            raise InvalidField(f"{name} must be a string")
    if asset.get("vote") not in (NOT_ELIGIBLE, ELIGIBLE):
        raise InvalidField(f"vote must be {NOT_ELIGIBLE!r} or {ELIGIBLE!r}")
    if (asset["vote"] == ELIGIBLE) != bool(asset.get("voter_id")):
        raise InvalidField("vote is Eligible exactly when a voter_id is present")
    return asset


def _parse_json_arg(text, what):
    try:
        return json.loads(text)
    except (TypeError, ValueError):
        raise InvalidField(f"{what} is not valid JSON") from None


def _load_asset(ctx, aadhaar):
    raw = ctx.get_state(citizen_key(aadhaar))
    if raw is None:
        raise NotFound(f"no citizen with aadhaar {aadhaar}")
    return decode(raw)


def _is_admin(ctx):
    return ctx.invoker is not None and ctx.invoker.role is Role.UIDAI_ADMIN


def _is_owner(ctx, aadhaar):
    return (ctx.invoker is not None and ctx.invoker.role is Role.CITIZEN
            and ctx.invoker.bound_aadhaar == aadhaar)


def _active_consent(ctx, aadhaar):
    """Consent record held by the invoker's org, or None."""
    if ctx.invoker is None or ctx.invoker.role is not Role.THIRD_PARTY:
        return None
    raw = ctx.get_state(consent_key(aadhaar, ctx.invoker.org_id))
    if raw is None:
        return None
    record = decode(raw)
    return record if record["status"] == "active" else None


def project(asset: dict, fields) -> dict:
    return {f: asset[f] for f in sorted(fields) if f in asset}


citizennet = Chaincode(CHAINCODE_NAME)


@citizennet.transaction
def register_citizen(ctx, asset_json):
    if not _is_admin(ctx):
        raise Unauthorized("only UIDAI may register citizens")
    asset = _parse_json_arg(asset_json, "asset")
    if not isinstance(asset, dict):
        raise InvalidField("asset must be a JSON object")
    asset = dict(asset)
    asset["vote"] = NOT_ELIGIBLE
    asset.pop("voter_id", None)
    asset.setdefault("accounts", {})
    validate_asset(asset)
    key = citizen_key(asset["aadhaar"])
    if ctx.get_state(key) is not None:
        raise AlreadyRegistered(asset["aadhaar"])
    ctx.put_state(key, encode(asset))
    return asset


@citizennet.query
def view_aadhar(ctx, aadhaar):
    if _is_owner(ctx, aadhaar) or _is_admin(ctx):
        return _load_asset(ctx, aadhaar)
    consent = _active_consent(ctx, aadhaar)
    if consent is None:
        raise AccessDenied(f"no active consent for {aadhaar}")
    return project(_load_asset(ctx, aadhaar), consent["scope"])


@citizennet.query
def view_history(ctx, aadhaar):
    key = citizen_key(aadhaar)
    history = ctx.get_history(key)
    if not history:
        raise NotFound(f"no citizen with aadhaar {aadhaar}")
    if _is_owner(ctx, aadhaar) or _is_admin(ctx):
        scope = None
    else:
        consent = _active_consent(ctx, aadhaar)
        if consent is None:
            raise AccessDenied(f"no active consent for {aadhaar}")
        scope = consent["scope"]
    versions = []
    for entry in history:
        if entry.is_delete:
            continue
        value = decode(entry.value)
        versions.append(value if scope is None else project(value, scope))
    return versions


@citizennet.transaction
def request_change(ctx, aadhaar, changes_json):
    if not _is_owner(ctx, aadhaar):
        raise Unauthorized("only the citizen may request changes to their record")
    changes = _parse_json_arg(changes_json, "changes")
    if not isinstance(changes, dict) or not changes:
        raise InvalidField("changes must be a non-empty JSON object")
    locked = sorted(set(changes) - WRITABLE_FIELDS)
    if locked:
        raise ImmutableField(f"fields not changeable by request: {locked}")
    candidate = dict(_load_asset(ctx, aadhaar), **changes)
    validate_asset(candidate)
    request_id = crypto.hexdigest(ctx.tx_id.encode("utf-8"))
    request = {
        "request_id": request_id,
        "aadhaar": aadhaar,
        "changes": changes,
        "status": "pending",
        "requested_by": ctx.invoker.identity_id,
    }
    ctx.put_state(changereq_key(request_id), encode(request))
    return request


@citizennet.transaction
def decide_change(ctx, request_id, approve):
    if not _is_admin(ctx):
        raise Unauthorized("only UIDAI may decide change requests")
    key = changereq_key(request_id)
    raw = ctx.get_state(key)
    if raw is None:
        raise NotFound(f"no change request {request_id}")
    request = decode(raw)
    if request["status"] != "pending":
        raise NotPending(f"request {request_id} is {request['status']}")
    approved = str(approve).lower() in ("true", "1", "yes", "approve")
    request["status"] = "approved" if approved else "rejected"
    if approved:
        asset = dict(_load_asset(ctx, request["aadhaar"]), **request["changes"])
        validate_asset(asset)
        ctx.put_state(citizen_key(request["aadhaar"]), encode(asset))
    ctx.put_state(key, encode(request))
    return request


def _own_aadhaar(ctx):
    if ctx.invoker is None or ctx.invoker.role is not Role.CITIZEN:
        raise Unauthorized("only citizens manage consent for their record")
    return ctx.invoker.bound_aadhaar


@citizennet.transaction
def grant_consent(ctx, grantee_org, scope_json):
    aadhaar = _own_aadhaar(ctx)
    scope = _parse_json_arg(scope_json, "scope")
    if not isinstance(scope, list) or not scope or not all(isinstance(f, str) for f in scope):
        raise InvalidScope("scope must be a non-empty list of field names")
    unknown = sorted(set(scope) - set(FIELDS))
    if unknown:
        raise InvalidScope(f"unknown fields {unknown}")
    _load_asset(ctx, aadhaar)
    record = {
        "aadhaar": aadhaar,
        "grantee_org": grantee_org,
        "scope": sorted(set(scope)),
        "status": "active",
        "granted_at": ctx.tx_timestamp,
    }
    ctx.put_state(consent_key(aadhaar, grantee_org), encode(record))
    return record


@citizennet.transaction
def revoke_consent(ctx, grantee_org):
    aadhaar = _own_aadhaar(ctx)
    key = consent_key(aadhaar, grantee_org)
    raw = ctx.get_state(key)
    record = decode(raw) if raw is not None else None
    if record is None or record["status"] != "active":
        raise NoActiveConsent(f"{grantee_org} holds no active consent")
    record["status"] = "revoked"
    record["revoked_at"] = ctx.tx_timestamp
    ctx.put_state(key, encode(record))
    return record


@citizennet.transaction
def update_vote_eligibility(ctx, aadhaar):
    if not (_is_owner(ctx, aadhaar) or _is_admin(ctx)):
        raise Unauthorized("only the citizen or UIDAI may request a vote eligibility check")
    asset = _load_asset(ctx, aadhaar)
    if asset["vote"] == ELIGIBLE:
        raise AlreadyEligible(aadhaar)
    if age_on(parse_dob(asset["dob"]), ctx.tx_date) < VOTING_AGE:
        return "not eligible yet"
    asset = dict(asset, vote=ELIGIBLE,
                 voter_id=voter_id_for(aadhaar, asset.get("pincode", "")))
    ctx.put_state(citizen_key(aadhaar), encode(asset))
    return asset


@citizennet.query
def kyc_share(ctx, aadhaar, requested_json):
    if ctx.invoker is None or ctx.invoker.role is not Role.THIRD_PARTY:
        raise Unauthorized("kyc_share is for third-party organisations")
    requested = _parse_json_arg(requested_json, "requested fields")
    if not isinstance(requested, list):
        raise InvalidField("requested fields must be a JSON list")
    consent = _active_consent(ctx, aadhaar)
    if consent is None:
        raise AccessDenied(f"no active consent for {aadhaar}")
    fields = set(requested) & set(consent["scope"])
    if not fields:
        raise EmptyIntersection("none of the requested fields are within the consent scope")
    return project(_load_asset(ctx, aadhaar), fields)


def to_display(record: dict) -> dict:
    """Rename asset fields to the names shown to operators."""
    return {DISPLAY_NAMES.get(k, k): v for k, v in record.items()}


CATALOG = {CHAINCODE_NAME: citizennet}
