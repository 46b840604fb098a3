import datetime as dt

import pytest
from hypothesis import given, settings, strategies as st

from citizennet.errors import ReadOnlyViolation, UnknownFunction
from citizennet.ledger import HistoryEntry, KVRead, KVWrite, StateEntry, Version
from citizennet.runtime import Chaincode, ContractContext, invoke_contract


class FakeLedger:
    def __init__(self, values=None):
        self.entries = {k: StateEntry(k, v, Version(1, i))
                        for i, (k, v) in enumerate(sorted((values or {}).items()))}
        self.lookups = 0

    def get(self, key):
        self.lookups += 1
        return self.entries.get(key)

    def get_history_for_key(self, key):
        e = self.entries.get(key)
        return [HistoryEntry(key, e.value, e.version, "tx-0")] if e else []


cc = Chaincode("kv")


@cc.transaction
def put(ctx, key, value):
    ctx.put_state(key, value.encode())
    return value


@cc.transaction
def copy(ctx, src, dst):
    value = ctx.get_state(src)
    ctx.put_state(dst, value or b"")
    return (value or b"").decode()


@cc.transaction
def put_then_get(ctx, key):
    before = ctx.get_state(key)
    ctx.put_state(key, b"new")
    after = ctx.get_state(key)
    return [before is None, after.decode()]


@cc.transaction
def put_then_delete(ctx, key):
    ctx.put_state(key, b"x")
    ctx.put_state("other", b"y")
    ctx.del_state(key)
    return "ok"


@cc.query
def read_twice(ctx, key):
    ctx.get_state(key)
    ctx.get_state(key)
    return "ok"


@cc.query
def sneaky(ctx, key):
    ctx.put_state(key, b"x")


@cc.query
def history(ctx, key):
    return len(ctx.get_history(key))


CATALOG = {"kv": cc}


def _ctx(ledger, **kw):
    return ContractContext(ledger, None, kw.pop("ts", 0), "ch", **kw)


def test_first_read_recorded_once():
    ledger = FakeLedger({"a": b"1"})
    _, rw = invoke_contract(CATALOG, _ctx(ledger), "kv", "read_twice", ["a"])
    assert rw.reads == (KVRead("a", Version(1, 0)),) and rw.writes == ()


def test_read_your_writes_keeps_committed_read_version():
    ledger = FakeLedger()
    resp, rw = invoke_contract(CATALOG, _ctx(ledger), "kv", "put_then_get", ["k"])
    assert resp == b'[true,"new"]'
    assert rw.reads == (KVRead("k", None),)
    assert rw.writes == (KVWrite("k", b"new"),)


def test_last_write_wins_delete():
    _, rw = invoke_contract(CATALOG, _ctx(FakeLedger()), "kv", "put_then_delete", ["k"])
    assert rw.writes == (KVWrite("other", b"y"), KVWrite("k", None))
    assert rw.writes[1].is_delete


def test_read_only_functions_cannot_write():
    with pytest.raises(ReadOnlyViolation):
        invoke_contract(CATALOG, _ctx(FakeLedger()), "kv", "sneaky", ["k"])


def test_unknown_function_and_chaincode():
    with pytest.raises(UnknownFunction):
        invoke_contract(CATALOG, _ctx(FakeLedger()), "kv", "nope", [])
    with pytest.raises(UnknownFunction):
        invoke_contract(CATALOG, _ctx(FakeLedger()), "missing", "put", ["a", "b"])


def test_context_never_writes_committed_state():
    ledger = FakeLedger({"a": b"1"})
    invoke_contract(CATALOG, _ctx(ledger), "kv", "copy", ["a", "b"])
    assert set(ledger.entries) == {"a"}


def test_history_sees_committed_only():
    ledger = FakeLedger()
    ctx = _ctx(ledger)
    ctx.put_state("k", b"pending")
    assert ctx.get_history("k") == []
    resp, _ = invoke_contract(CATALOG, _ctx(FakeLedger({"k": b"v"})), "kv", "history", ["k"])
    assert resp == b"1"


def test_tx_date_is_one_day_per_tick():
    ctx = _ctx(FakeLedger(), ts=366, epoch_date=dt.date(2020, 1, 1))
    assert ctx.tx_date == dt.date(2021, 1, 1)


def test_classification():
    assert cc.is_mutating("put") is True
    assert cc.is_mutating("read_twice") is False
    assert cc.is_mutating("absent") is None
    with pytest.raises(ValueError):
        cc.transaction(put)


def test_repeated_execution_is_identical():
    ledger = FakeLedger({"a": b"1", "b": b"2"})
    results = {invoke_contract(CATALOG, _ctx(ledger, ts=5), "kv", "copy", ["a", "c"])
               for _ in range(100)}
    assert len(results) == 1


keys = st.sampled_from(["k0", "k1", "k2", "k3"])
ops = st.lists(st.tuples(st.sampled_from(["get", "put", "del"]), keys, st.binary(max_size=4)),
               max_size=20)


@settings(max_examples=300, deadline=None)
@given(ops, st.dictionaries(keys, st.binary(max_size=4)))
def test_rwset_matches_operation_log(log, committed):
    ledger = FakeLedger(committed)
    ctx = _ctx(ledger)
    expected_reads, expected_writes = {}, {}
    for op, key, value in log:
        if op == "get":
            got = ctx.get_state(key)
            expected_reads.setdefault(key, ledger.entries[key].version if key in ledger.entries else None)
            want = expected_writes[key] if key in expected_writes else committed.get(key)
            assert got == want
        elif op == "put":
            ctx.put_state(key, value)
            expected_writes.pop(key, None)
            expected_writes[key] = value
        else:
            ctx.del_state(key)
            expected_writes.pop(key, None)
            expected_writes[key] = None
    rw = ctx.rwset()
    assert rw.reads == tuple(KVRead(k, v) for k, v in expected_reads.items())
    assert rw.writes == tuple(KVWrite(k, v) for k, v in expected_writes.items())


def test_wrong_argument_count_is_a_contract_error():
    from citizennet.errors import BadArguments, ContractError
    with pytest.raises(BadArguments) as info:
        invoke_contract(CATALOG, _ctx(FakeLedger()), "kv", "put", ["only-key"])
    assert isinstance(info.value, ContractError)
