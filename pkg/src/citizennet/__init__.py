"""Permissioned-ledger citizen identity network.

An execute/order/validate ledger engine (channels, world state, per-key
history) hosting the ``citizennet`` chaincode, plus a deterministic
multi-peer simulator and operator CLI.
"""

from .citizen import CATALOG
from .ledger import Ledger, ValidationCode, Version, create_composite_key, verify_chain
from .membership import EndorsementPolicy, Network
from .pipeline import Orderer, OrdererConfig, collect_endorsements, validate_block
from .simnet import SimConfig, Simulation, run_scenario

__version__ = "0.1.0"

__all__ = [
    "CATALOG", "Ledger", "ValidationCode", "Version", "create_composite_key",
    "verify_chain", "EndorsementPolicy", "Network", "Orderer", "OrdererConfig",
    "collect_endorsements", "validate_block", "SimConfig", "Simulation", "run_scenario",
]
