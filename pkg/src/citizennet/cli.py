"""Operator command line.

``run`` executes a scenario and exports every peer's block files into the
work directory; ``query``, ``verify``, ``diff`` and ``tamper`` then operate on
those files. Exit codes: 0 success, 1 failed assertion or detected
corruption/divergence, 2 usage or configuration error.
"""

import argparse
import json
import os
import shutil
import sys
from pathlib import Path

from .errors import CitizenNetError, NoSuchBlock, NoSuchPeer, NotJoined
from .ledger import Ledger, verify_chain
from .simnet import (
    SimConfig,
    Simulation,
    diff_ledgers,
    load_scenario,
    query_ledger,
)

DEFAULT_WORKDIR = "citizennet-work"


def _workdir(args) -> Path:
    return Path(args.workdir or os.environ.get("CITIZENNET_WORKDIR") or DEFAULT_WORKDIR)


def _ledger_dir(args, peer, channel) -> Path:
    peer_dir = _workdir(args) / "ledgers" / peer
    if not peer_dir.is_dir():
        raise NoSuchPeer(f"no exported ledgers for peer {peer} under {_workdir(args)}")
    channel_dir = peer_dir / channel
    if not channel_dir.is_dir():
        raise NotJoined(f"{peer} has not joined {channel}")
    return channel_dir


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))


def _export(sim: Simulation, workdir: Path) -> None:
    ledgers = workdir / "ledgers"
    if ledgers.exists():
        shutil.rmtree(ledgers)
    sim.export(ledgers)
    (workdir / "config.json").write_text(
        json.dumps(sim.config.to_dict(), indent=2, sort_keys=True) + "\n")


def cmd_init(args) -> int:
    config = SimConfig.load(args.config)
    sim = Simulation(config)
    workdir = _workdir(args)
    workdir.mkdir(parents=True, exist_ok=True)
    _export(sim, workdir)
    for channel_id in sorted(sim.network.channels):
        members = [p.peer_id for p in sim.network.channel_peers(channel_id)]
        print(f"channel {channel_id}: genesis on {', '.join(members)}")
    print(f"initialised {workdir}")
    return 0


def cmd_run(args) -> int:
    config = SimConfig.load(args.config)
    steps = load_scenario(args.scenario)
    sim = Simulation(config)
    report = sim.run(steps)
    workdir = _workdir(args)
    workdir.mkdir(parents=True, exist_ok=True)
    _export(sim, workdir)
    report_path = Path(args.report) if args.report else workdir / "report.json"
    report.write(report_path)
    for channel_id, info in report.data["channels"].items():
        div = info["divergence"]
        status = "consistent" if div["consistent"] else "DIVERGENT"
        print(f"channel {channel_id}: height {info['height']}, {status}")
    for a in report.data["assertions"]:
        print(f"[{'PASS' if a['passed'] else 'FAIL'}] step {a['step']}: {a['detail']}")
    print(f"report written to {report_path}")
    return 0 if report.ok else 1


def cmd_query(args) -> int:
    ledger = Ledger.load(args.channel, _ledger_dir(args, args.peer, args.channel))
    _emit(query_ledger(ledger, args.kind, args.key))
    return 0


def cmd_verify(args) -> int:
    ledger = Ledger.load(args.channel, _ledger_dir(args, args.peer, args.channel))
    bad = verify_chain(ledger.store)
    if bad is None:
        print(f"OK: {args.peer}/{args.channel} verified {ledger.height} blocks")
        return 0
    print(f"CORRUPT: {args.peer}/{args.channel} first bad height {bad}")
    return 1


def cmd_diff(args) -> int:
    root = _workdir(args) / "ledgers"
    ledgers = {}
    for peer_dir in sorted(p for p in root.glob("*") if p.is_dir()):
        if (peer_dir / args.channel).is_dir():
            ledgers[peer_dir.name] = Ledger.load(args.channel, peer_dir / args.channel)
    if not ledgers:
        raise NotJoined(f"no peer has exported channel {args.channel}")
    result = diff_ledgers(args.channel, ledgers)
    if result["consistent"]:
        print(f"no divergence on {args.channel} across {len(ledgers)} peers")
        return 0
    _emit(result)
    return 1


def cmd_tamper(args) -> int:
    path = _ledger_dir(args, args.peer, args.channel) / f"block_{args.height:06d}.json"
    if not path.is_file():
        raise NoSuchBlock(f"{args.peer}/{args.channel} has no block {args.height}")
    blob = bytearray(path.read_bytes())
    if not 0 <= args.offset < len(blob):
        raise NoSuchBlock(f"offset {args.offset} outside block {args.height} ({len(blob)} bytes)")
    blob[args.offset] ^= args.mask
    path.write_bytes(bytes(blob))
    print(f"flipped byte {args.offset} of block {args.height} on {args.peer}/{args.channel}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citizennet", description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", help=f"state directory (default ./{DEFAULT_WORKDIR})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="validate a config and write genesis ledgers")
    p.add_argument("config")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("run", help="run a scenario against a network config")
    p.add_argument("config")
    p.add_argument("scenario")
    p.add_argument("--report", help="report path (default <workdir>/report.json)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("query", help="show state, history or a block from one peer")
    p.add_argument("peer")
    p.add_argument("channel")
    p.add_argument("kind", choices=["state", "history", "block"])
    p.add_argument("key", help="aadhaar number, consent:<aadhaar>:<org>, changereq:<id>, or height")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("verify", help="recompute one peer's hash chain")
    p.add_argument("peer")
    p.add_argument("channel")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diff", help="compare all peers' copies of a channel")
    p.add_argument("channel")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("tamper", help="flip one byte in a peer's stored block")
    p.add_argument("peer")
    p.add_argument("channel")
    p.add_argument("height", type=int)
    p.add_argument("offset", type=int)
    p.add_argument("--mask", type=lambda s: int(s, 0), default=0x01)
    p.set_defaults(func=cmd_tamper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.DEBUG, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CitizenNetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
