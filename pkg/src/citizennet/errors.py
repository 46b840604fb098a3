"""Exception hierarchy shared across the ledger engine."""


class CitizenNetError(Exception):
    """Base class for every error raised by this package."""


# crypto
class UnsupportedValue(CitizenNetError, TypeError):
    pass


class BadSeedLength(CitizenNetError, ValueError):
    pass


# ledger
class IllegalCharacter(CitizenNetError, ValueError):
    pass


class ChainLinkageError(CitizenNetError):
    pass


class UnvalidatedBlock(CitizenNetError):
    pass


class MalformedBlock(CitizenNetError, ValueError):
    pass


# consensus
class NotAnEndorser(CitizenNetError):
    pass


class NotInChannel(CitizenNetError):
    pass


class BadClientSignature(CitizenNetError):
    pass


class EndorsementMismatch(CitizenNetError):
    pass


class UnknownChannel(CitizenNetError, KeyError):
    pass


# membership
class DuplicateChannel(CitizenNetError):
    pass


class UnknownOrg(CitizenNetError, KeyError):
    pass


class NotAMemberOrg(CitizenNetError):
    pass


class UnknownChaincode(CitizenNetError, KeyError):
    pass


class RoleOrgMismatch(CitizenNetError, ValueError):
    pass


class MissingAadhaarBinding(CitizenNetError, ValueError):
    pass


# contract runtime
class ContractError(CitizenNetError):
    """A chaincode function rejected its inputs; no endorsement is produced."""

    @property
    def reason(self) -> str:
        return type(self).__name__


class UnknownFunction(ContractError):
    pass


class BadArguments(ContractError):
    pass


class ReadOnlyViolation(ContractError):
    pass


# simnet
class ConfigError(CitizenNetError, ValueError):
    pass


class ScenarioParseError(CitizenNetError, ValueError):
    pass


class AssertionFailed(CitizenNetError):
    def __init__(self, step_index: int, message: str, report=None):
        super().__init__(f"step {step_index}: {message}")
        self.step_index = step_index
        self.report = report


class NoSuchBlock(CitizenNetError, LookupError):
    pass


class NoSuchPeer(CitizenNetError, LookupError):
    pass


class NotJoined(CitizenNetError):
    pass


class NotFound(ContractError, LookupError):
    pass
