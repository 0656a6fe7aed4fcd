"""Bit-exact CSV/JSON export and lossless JSON round-trips.

Trace CSV carries exactly the columns
``height,base_fee,block_size,burn_total,tip_revenue,user_utility_total,mempool_depth``
in that order.  JSON exports mirror the in-memory structures: money values
are written as strings of decimal digits (no 53-bit truncation in consumers),
rationals as {"num", "den"}.  Verdict exports embed the instance, so a
violation witness can be re-checked by anyone holding only the file.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .audit import (
    VIOLATED,
    AuditVerdict,
    DsicWitness,
    MmicWitness,
    OcaWitness,
    recertify,
)
from .mechanisms import Mechanism
from .model import ChainState, Money, Transaction, chain_at
from .scenario import parse_mechanism, parse_money, parse_transactions
from .sim import Trace, TraceRow

TRACE_COLUMNS = (
    "height",
    "base_fee",
    "block_size",
    "burn_total",
    "tip_revenue",
    "user_utility_total",
    "mempool_depth",
)


def _money(v: Money) -> str:
    return str(int(v))


def _fraction(f: Fraction) -> dict:
    return {"num": f.numerator, "den": f.denominator}


def write_trace_csv(trace: Trace, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in trace.rows:
            w.writerow(
                [
                    r.height,
                    r.base_fee,
                    r.block_size,
                    r.burn_total,
                    r.tip_revenue,
                    r.user_utility_total,
                    r.mempool_depth,
                ]
            )


def read_trace_csv(path: str | Path) -> list[dict[str, int]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: int(row[k]) for k in TRACE_COLUMNS} for row in rows]


def trace_to_jsonable(trace: Trace) -> dict:
    return {
        "rows": [
            {
                "height": r.height,
                "base_fee": _money(r.base_fee),
                "block_size": r.block_size,
                "burn_total": _money(r.burn_total),
                "tip_revenue": _money(r.tip_revenue),
                "user_utility_total": str(r.user_utility_total),
                "mempool_depth": r.mempool_depth,
                "included_count": r.included_count,
                "evicted_count": r.evicted_count,
            }
            for r in trace.rows
        ]
    }


def trace_from_jsonable(obj: Mapping[str, Any]) -> Trace:
    rows = tuple(
        TraceRow(
            height=int(r["height"]),
            base_fee=int(r["base_fee"]),
            block_size=int(r["block_size"]),
            burn_total=int(r["burn_total"]),
            tip_revenue=int(r["tip_revenue"]),
            user_utility_total=int(r["user_utility_total"]),
            mempool_depth=int(r["mempool_depth"]),
            included_count=int(r["included_count"]),
            evicted_count=int(r["evicted_count"]),
        )
        for r in obj["rows"]
    )
    return Trace(rows=rows)


def mechanism_to_jsonable(mech: Mechanism) -> dict:
    return {
        "kind": mech.kind,
        "target_size": mech.target_size,
        "max_size": mech.max_size,
        "beta": _fraction(mech.beta),
        "delta": _money(mech.delta),
        "mu": _money(mech.mu),
    }


def transactions_to_jsonable(txs: Iterable[Transaction]) -> list[dict]:
    return [
        {
            "size": t.size,
            "valuation": _money(t.valuation),
            "fee_cap": _money(t.fee_cap),
            "tip": _money(t.tip),
        }
        for t in sorted(txs, key=lambda t: t.id)
    ]


def witness_to_jsonable(w: MmicWitness | DsicWitness | OcaWitness | None) -> dict | None:
    if w is None:
        return None
    if isinstance(w, MmicWitness):
        return {
            "type": "mmic",
            "fake_txs": [{"size": s, "bid": _money(b)} for s, b in w.fake_txs],
            "block_ids": list(w.block_ids),
            "honest_utility": str(w.honest_utility),
            "deviant_utility": str(w.deviant_utility),
            "utility_delta": str(w.utility_delta),
        }
    if isinstance(w, DsicWitness):
        return {
            "type": "dsic",
            "tx_id": w.tx_id,
            "competitor_bids": {str(i): _money(b) for i, b in sorted(w.competitor_bids.items())},
            "honest_bid": _money(w.honest_bid),
            "deviating_bid": _money(w.deviating_bid),
            "honest_utility": str(w.honest_utility),
            "deviant_utility": str(w.deviant_utility),
            "utility_delta": str(w.utility_delta),
        }
    return {
        "type": "oca",
        "sigma_bids": {str(i): _money(b) for i, b in sorted(w.sigma_bids.items())},
        "sigma_joint_utility": str(w.sigma_joint_utility),
        "best_bids": {str(i): _money(b) for i, b in sorted(w.best_bids.items())},
        "best_joint_utility": str(w.best_joint_utility),
        "transfers": {str(i): _fraction(f) for i, f in sorted(w.transfers.items())},
        "per_agent_gain": _fraction(w.per_agent_gain),
    }


def witness_from_jsonable(obj: Mapping[str, Any] | None):
    if obj is None:
        return None
    t = obj["type"]
    if t == "mmic":
        return MmicWitness(
            fake_txs=tuple((int(f["size"]), int(f["bid"])) for f in obj["fake_txs"]),
            block_ids=tuple(int(i) for i in obj["block_ids"]),
            honest_utility=int(obj["honest_utility"]),
            deviant_utility=int(obj["deviant_utility"]),
        )
    if t == "dsic":
        return DsicWitness(
            tx_id=int(obj["tx_id"]),
            competitor_bids={int(i): int(b) for i, b in obj["competitor_bids"].items()},
            honest_bid=int(obj["honest_bid"]),
            deviating_bid=int(obj["deviating_bid"]),
            honest_utility=int(obj["honest_utility"]),
            deviant_utility=int(obj["deviant_utility"]),
        )
    if t == "oca":
        return OcaWitness(
            sigma_bids={int(i): int(b) for i, b in obj["sigma_bids"].items()},
            sigma_joint_utility=int(obj["sigma_joint_utility"]),
            best_bids={int(i): int(b) for i, b in obj["best_bids"].items()},
            best_joint_utility=int(obj["best_joint_utility"]),
            transfers={
                int(i): Fraction(f["num"], f["den"]) for i, f in obj["transfers"].items()
            },
            per_agent_gain=Fraction(obj["per_agent_gain"]["num"], obj["per_agent_gain"]["den"]),
        )
    raise ValueError(f"unknown witness type {t!r}")


def verdict_to_jsonable(
    verdict: AuditVerdict, chain: ChainState, txs: Sequence[Transaction]
) -> dict:
    """Self-contained verdict document: instance plus verdict plus witness."""
    return {
        "instance": {
            "mechanism": mechanism_to_jsonable(verdict.mechanism),
            "base_fee": _money(chain.base_fee),
            "transactions": transactions_to_jsonable(txs),
        },
        "verdict": {
            "property": verdict.property,
            "result": verdict.result,
            "detail": verdict.detail,
            "witness": witness_to_jsonable(verdict.witness),
        },
    }


def verdict_from_jsonable(obj: Mapping[str, Any]) -> tuple[AuditVerdict, ChainState, tuple[Transaction, ...]]:
    inst = obj["instance"]
    mech = parse_mechanism(inst["mechanism"])
    chain = chain_at(parse_money(inst["base_fee"], "instance.base_fee"))
    txs = parse_transactions(inst["transactions"])
    v = obj["verdict"]
    verdict = AuditVerdict(
        property=v["property"],
        mechanism=mech,
        result=v["result"],
        witness=witness_from_jsonable(v.get("witness")),
        detail=v.get("detail", ""),
    )
    return verdict, chain, txs


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_and_recertify(path: str | Path) -> bool:
    """Import a verdict document and re-check its witness from scratch."""
    obj = json.loads(Path(path).read_text())
    verdict, chain, txs = verdict_from_jsonable(obj)
    if verdict.result != VIOLATED:
        return True
    return recertify(verdict, chain, txs)


def report_rows_to_csv(rows, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mechanism", "property", "verdict", "expected", "matches", "detail"])
        for r in rows:
            w.writerow([r.mechanism, r.property, r.verdict, r.expected, int(r.matches), r.detail])


def report_rows_to_jsonable(rows) -> list[dict]:
    return [
        {
            "mechanism": r.mechanism,
            "property": r.property,
            "verdict": r.verdict,
            "expected": r.expected,
            "matches": r.matches,
            "detail": r.detail,
        }
        for r in rows
    ]
