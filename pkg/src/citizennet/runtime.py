"""Deterministic chaincode execution with read/write-set capture.

A chaincode is a named bundle of functions, each classified as read-only or
mutating. Functions run against a :class:`ContractContext` whose stub-style
methods record every first read (with the committed version observed) and
buffer writes; nothing touches the committed ledger until block commit.
"""

import datetime as dt
import inspect
from dataclasses import dataclass

from . import crypto
from .errors import BadArguments, ReadOnlyViolation, UnknownFunction
from .ledger import KVRead, KVWrite, ReadWriteSet, create_composite_key

@dataclass(frozen=True)
class ContractFunction:
    name: str
    fn: object
    mutating: bool


class Chaincode:
    """Registry of contract functions for one chaincode name.

    >>> cc = Chaincode("demo")
    >>> @cc.query
    ... def ping(ctx):
    ...     return "pong"
    >>> cc.functions["ping"].mutating
    False
    """

    def __init__(self, name: str):
        self.name = name
        self.functions: dict[str, ContractFunction] = {}

    def _register(self, fn, mutating, name=None):
        name = name or fn.__name__
        if name in self.functions:
            raise ValueError(f"{self.name}: function {name!r} registered twice")
        self.functions[name] = ContractFunction(name, fn, mutating)
        return fn

    def transaction(self, fn=None, *, name=None):
        if fn is None:
            return lambda f: self._register(f, True, name)
        return self._register(fn, True, name)

    def query(self, fn=None, *, name=None):
        if fn is None:
            return lambda f: self._register(f, False, name)
        return self._register(fn, False, name)

    def is_mutating(self, function: str) -> bool | None:
        entry = self.functions.get(function)
        return None if entry is None else entry.mutating


class ContractContext:
    """Per-invocation view over one channel's committed state.

    ``ledger`` is anything offering ``get(key) -> StateEntry | None`` and
    ``get_history_for_key(key)``; the context never writes to it.
    """

    def __init__(self, ledger, invoker, tx_timestamp: int, channel_id: str,
                 tx_id: str = "", epoch_date: dt.date | None = None,
                 mutating: bool = True):
        self._ledger = ledger
        self.invoker = invoker
        self.tx_timestamp = tx_timestamp
        self.channel_id = channel_id
        self.tx_id = tx_id
        self.epoch_date = epoch_date or dt.date(1970, 1, 1)
        self.mutating = mutating
        self._reads: dict[str, KVRead] = {}
        self._writes: dict[str, KVWrite] = {}

    @property
    def tx_date(self) -> dt.date:
        """Calendar date of the transaction: one logical tick per day."""
        return self.epoch_date + dt.timedelta(days=self.tx_timestamp)

    create_composite_key = staticmethod(create_composite_key)

    def get_state(self, key: str) -> bytes | None:
        if key not in self._reads:
            entry = self._ledger.get(key)
            self._reads[key] = KVRead(key, entry.version if entry else None)
        if key in self._writes:
            return self._writes[key].value
        entry = self._ledger.get(key)
        return entry.value if entry else None

    def put_state(self, key: str, value: bytes) -> None:
        if not self.mutating:
            raise ReadOnlyViolation(f"put_state({key!r}) from a read-only function")
        # last write per key wins; re-insert so write order follows last touch
        self._writes.pop(key, None)
        self._writes[key] = KVWrite(key, bytes(value))

    def del_state(self, key: str) -> None:
        if not self.mutating:
            raise ReadOnlyViolation(f"del_state({key!r}) from a read-only function")
        self._writes.pop(key, None)
        self._writes[key] = KVWrite(key, None)

    def get_history(self, key: str):
        # committed history only, never MVCC-protected
        return self._ledger.get_history_for_key(key)

    def rwset(self) -> ReadWriteSet:
        return ReadWriteSet(tuple(self._reads.values()), tuple(self._writes.values()))


def invoke_contract(catalog, ctx: ContractContext, chaincode: str, function: str,
                    args) -> tuple[bytes, ReadWriteSet]:
    """Run ``chaincode.function(ctx, *args)``.

    Returns the canonical encoding of the function's result together with the
    captured read/write set. Contract rejections propagate as ContractError.
    """
    cc = catalog.get(chaincode)
    entry = cc.functions.get(function) if cc is not None else None
    if entry is None:
        raise UnknownFunction(f"{chaincode}.{function}")
    try:
        inspect.signature(entry.fn).bind(ctx, *args)
    except TypeError:
        raise BadArguments(f"{chaincode}.{function} called with {len(args)} arguments") from None
    ctx.mutating = entry.mutating
    result = entry.fn(ctx, *args)
    return crypto.canonical_encode(result), ctx.rwset()
