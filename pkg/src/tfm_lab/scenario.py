"""Strict JSON parsing for scenario and audit-instance files.

The schema is strict: unknown keys are rejected, every violated invariant is
reported with the offending key path.  Money values may be JSON integers or
strings of decimal digits (exports always write strings, so round-trips do
not depend on consumers handling big integers); rationals are {"num", "den"}
objects or plain integers.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .basefee import BaseFeeSchedule
from .mechanisms import KINDS, Mechanism
from .model import ChainState, Money, Transaction, chain_at
from .sim import (
    EVICT_AFTER,
    MINER_BEHAVIORS,
    PERSIST,
    DemandProcess,
    DemandSpike,
    MempoolPolicy,
    Scenario,
    SizeDistribution,
    ValuationDistribution,
)
from .strategies import STRATEGY_KINDS, BiddingStrategy


class ScenarioError(ValueError):
    """Schema or invariant violation, carrying the offending key path."""


def _fail(path: str, msg: str) -> None:
    raise ScenarioError(f"{path}: {msg}")


def _check_keys(obj: Mapping[str, Any], path: str, allowed: set[str], required: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        _fail(f"{path}.{sorted(unknown)[0]}", "unknown key")
    missing = required - set(obj)
    if missing:
        _fail(f"{path}.{sorted(missing)[0]}", "missing required key")


def parse_money(value: Any, path: str) -> Money:
    if isinstance(value, bool):
        _fail(path, "expected money, got a boolean")
    if isinstance(value, int):
        n = value
    elif isinstance(value, str) and value.isdigit():
        n = int(value)
    else:
        _fail(path, f"expected a non-negative integer or digit string, got {value!r}")
    if n < 0:
        _fail(path, "money must be non-negative")
    return n


def parse_int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}")
    return value


def parse_fraction(value: Any, path: str) -> Fraction:
    if isinstance(value, bool):
        _fail(path, f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, dict):
        _check_keys(value, path, {"num", "den"}, {"num", "den"})
        num = parse_int(value["num"], f"{path}.num")
        den = parse_int(value["den"], f"{path}.den", minimum=1)
        return Fraction(num, den)
    _fail(path, f"expected an integer or {{num, den}} object, got {value!r}")


def parse_mechanism(obj: Any, path: str = "mechanism") -> Mechanism:
    _check_keys(obj, path, {"kind", "target_size", "max_size", "beta", "delta", "mu"}, {"kind", "target_size"})
    kind = obj["kind"]
    if kind not in KINDS:
        _fail(f"{path}.kind", f"unknown mechanism {kind!r}; expected one of {', '.join(KINDS)}")
    kwargs: dict[str, Any] = {}
    if "beta" in obj:
        kwargs["beta"] = parse_fraction(obj["beta"], f"{path}.beta")
    if "delta" in obj:
        kwargs["delta"] = parse_money(obj["delta"], f"{path}.delta")
    if "mu" in obj:
        kwargs["mu"] = parse_money(obj["mu"], f"{path}.mu")
    if "max_size" in obj:
        kwargs["max_size"] = parse_int(obj["max_size"], f"{path}.max_size", minimum=1)
    try:
        return Mechanism(kind, parse_int(obj["target_size"], f"{path}.target_size", minimum=1), **kwargs)
    except ValueError as exc:
        _fail(path + (".beta" if "beta" in str(exc) else ".max_size" if "max_size" in str(exc) else ""), str(exc))


def parse_schedule(obj: Any, mech: Mechanism, path: str = "schedule") -> BaseFeeSchedule:
    if obj is None:
        return BaseFeeSchedule(genesis_fee=1000, target_size=mech.target_size)
    _check_keys(obj, path, {"genesis_fee", "target_size", "adjustment_quotient"}, {"genesis_fee"})
    target = mech.target_size
    if "target_size" in obj:
        target = parse_int(obj["target_size"], f"{path}.target_size", minimum=1)
    quotient = parse_int(obj.get("adjustment_quotient", 8), f"{path}.adjustment_quotient", minimum=1)
    return BaseFeeSchedule(
        genesis_fee=parse_money(obj["genesis_fee"], f"{path}.genesis_fee"),
        target_size=target,
        adjustment_quotient=quotient,
    )


def _parse_valuations(obj: Any, path: str) -> ValuationDistribution:
    _check_keys(obj, path, {"kind", "lo", "hi", "value"}, {"kind"})
    kind = obj["kind"]
    if kind == "point":
        v = parse_money(obj.get("value", obj.get("lo", 0)), f"{path}.value")
        return ValuationDistribution("point", v, v)
    if kind not in ("uniform", "log-uniform"):
        _fail(f"{path}.kind", f"unknown valuation distribution {kind!r}")
    lo = parse_money(obj.get("lo", 0), f"{path}.lo")
    hi = parse_money(obj.get("hi", lo), f"{path}.hi")
    try:
        return ValuationDistribution(kind, lo, hi)
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_sizes(obj: Any, path: str) -> SizeDistribution:
    if obj is None:
        return SizeDistribution("point", 1, 1)
    _check_keys(obj, path, {"kind", "lo", "hi", "value"}, {"kind"})
    kind = obj["kind"]
    if kind == "point":
        v = parse_int(obj.get("value", obj.get("lo", 1)), f"{path}.value", minimum=1)
        return SizeDistribution("point", v, v)
    if kind != "uniform":
        _fail(f"{path}.kind", f"unknown size distribution {kind!r}")
    lo = parse_int(obj.get("lo", 1), f"{path}.lo", minimum=1)
    hi = parse_int(obj.get("hi", lo), f"{path}.hi", minimum=1)
    try:
        return SizeDistribution(kind, lo, hi)
    except ValueError as exc:
        _fail(path, str(exc))


def parse_demand(obj: Any, path: str = "demand") -> DemandProcess:
    _check_keys(obj, path, {"arrival_rate", "valuations", "sizes", "spikes"}, {"arrival_rate", "valuations"})
    rate = obj["arrival_rate"]
    if isinstance(rate, bool) or not isinstance(rate, (int, float)) or rate < 0:
        _fail(f"{path}.arrival_rate", f"expected a non-negative number, got {rate!r}")
    spikes = []
    for i, s in enumerate(obj.get("spikes", [])):
        spath = f"{path}.spikes[{i}]"
        _check_keys(s, spath, {"height", "rate_multiplier", "valuation_shift"}, {"height"})
        mult = s.get("rate_multiplier", 1.0)
        if isinstance(mult, bool) or not isinstance(mult, (int, float)) or mult <= 0:
            _fail(f"{spath}.rate_multiplier", "must be a positive number")
        spikes.append(
            DemandSpike(
                height=parse_int(s["height"], f"{spath}.height", minimum=0),
                rate_multiplier=float(mult),
                valuation_shift=parse_money(s.get("valuation_shift", 0), f"{spath}.valuation_shift"),
            )
        )
    try:
        return DemandProcess(
            arrival_rate=float(rate),
            valuations=_parse_valuations(obj["valuations"], f"{path}.valuations"),
            sizes=_parse_sizes(obj.get("sizes"), f"{path}.sizes"),
            spikes=tuple(spikes),
        )
    except ValueError as exc:
        _fail(path, str(exc))


def parse_strategy(obj: Any, path: str = "strategy") -> BiddingStrategy:
    if obj is None:
        return BiddingStrategy(STRATEGY_KINDS[2])  # straightforward-1559
    _check_keys(obj, path, {"kind", "gamma"}, {"kind"})
    kind = obj["kind"]
    if kind not in STRATEGY_KINDS:
        _fail(f"{path}.kind", f"unknown strategy {kind!r}; expected one of {', '.join(STRATEGY_KINDS)}")
    gamma = parse_fraction(obj["gamma"], f"{path}.gamma") if "gamma" in obj else Fraction(1)
    try:
        return BiddingStrategy(kind, gamma)
    except ValueError as exc:
        _fail(f"{path}.gamma", str(exc))


def parse_policy(obj: Any, path: str = "mempool_policy") -> MempoolPolicy:
    if obj is None:
        return MempoolPolicy()
    if isinstance(obj, str):
        if obj == PERSIST:
            return MempoolPolicy()
        _fail(path, f"expected {PERSIST!r} or an object, got {obj!r}")
    _check_keys(obj, path, {"kind", "blocks"}, {"kind"})
    kind = obj["kind"]
    if kind == PERSIST:
        return MempoolPolicy()
    if kind != EVICT_AFTER:
        _fail(f"{path}.kind", f"unknown mempool policy {kind!r}")
    return MempoolPolicy(EVICT_AFTER, parse_int(obj.get("blocks", 0), f"{path}.blocks", minimum=1))


SCENARIO_KEYS = {
    "mechanism",
    "schedule",
    "demand",
    "strategy",
    "miner_behavior",
    "horizon",
    "seed",
    "mempool_policy",
}


def parse_scenario(source: str | Path | Mapping[str, Any]) -> Scenario:
    """Validated Scenario from a JSON file path or an already-loaded mapping.

    Defaults: schedule genesis 1000 / quotient 8 / the mechanism's target,
    straightforward-1559 strategy, intended miner, persist policy, seed 0.
    """
    obj = _load(source)
    _check_keys(obj, "scenario", SCENARIO_KEYS, {"mechanism", "demand", "horizon"})
    mech = parse_mechanism(obj["mechanism"])
    behavior = obj.get("miner_behavior", "intended")
    if behavior not in MINER_BEHAVIORS:
        _fail("scenario.miner_behavior", f"unknown behavior {behavior!r}")
    try:
        return Scenario(
            mechanism=mech,
            schedule=parse_schedule(obj.get("schedule"), mech),
            demand=parse_demand(obj["demand"]),
            strategy=parse_strategy(obj.get("strategy")),
            miner_behavior=behavior,
            horizon=parse_int(obj["horizon"], "scenario.horizon", minimum=1),
            seed=parse_int(obj.get("seed", 0), "scenario.seed", minimum=0),
            mempool_policy=parse_policy(obj.get("mempool_policy")),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        _fail("scenario", str(exc))


AUDIT_INSTANCE_KEYS = {
    "mechanism",
    "base_fee",
    "transactions",
    "strategy",
    "forbid_overbidding",
    "deviation",
}


def parse_transactions(items: Any, path: str = "transactions") -> tuple[Transaction, ...]:
    if not isinstance(items, list) or not items:
        _fail(path, "expected a non-empty array of transactions")
    txs = []
    for i, t in enumerate(items):
        tpath = f"{path}[{i}]"
        _check_keys(t, tpath, {"size", "valuation", "bid", "fee_cap", "tip"}, {"size"})
        size = parse_int(t["size"], f"{tpath}.size", minimum=1)
        valuation = parse_money(t.get("valuation", 0), f"{tpath}.valuation")
        if "bid" in t:
            if "fee_cap" in t or "tip" in t:
                _fail(f"{tpath}.bid", "give either bid or fee_cap/tip, not both")
            bid = parse_money(t["bid"], f"{tpath}.bid")
            cap, tip = bid, bid
        else:
            cap = parse_money(t.get("fee_cap", 0), f"{tpath}.fee_cap")
            tip = parse_money(t.get("tip", 0), f"{tpath}.tip")
        txs.append(Transaction(id=i + 1, size=size, valuation=valuation, fee_cap=cap, tip=tip))
    return tuple(txs)


def parse_audit_instance(
    source: str | Path | Mapping[str, Any],
) -> tuple[Mechanism, ChainState, tuple[Transaction, ...], BiddingStrategy | None, bool, dict]:
    """(mechanism, chain, transactions, strategy, forbid_overbidding, deviation kwargs)."""
    obj = _load(source)
    _check_keys(obj, "instance", AUDIT_INSTANCE_KEYS, {"mechanism", "transactions"})
    mech = parse_mechanism(obj["mechanism"])
    chain = chain_at(parse_money(obj.get("base_fee", 0), "instance.base_fee"))
    txs = parse_transactions(obj["transactions"])
    strategy = parse_strategy(obj["strategy"]) if "strategy" in obj else None
    forbid = obj.get("forbid_overbidding", False)
    if not isinstance(forbid, bool):
        _fail("instance.forbid_overbidding", "expected a boolean")
    dev_kwargs: dict[str, Any] = {}
    if "deviation" in obj:
        d = obj["deviation"]
        _check_keys(d, "instance.deviation", {"grid_step", "dense", "max_fake_count", "fake_sizes"})
        if "grid_step" in d:
            dev_kwargs["step"] = parse_int(d["grid_step"], "instance.deviation.grid_step", minimum=1)
        if "dense" in d:
            if not isinstance(d["dense"], bool):
                _fail("instance.deviation.dense", "expected a boolean")
            dev_kwargs["dense"] = d["dense"]
        if "max_fake_count" in d:
            dev_kwargs["max_fake_count"] = parse_int(d["max_fake_count"], "instance.deviation.max_fake_count", minimum=0)
        if "fake_sizes" in d:
            sizes = d["fake_sizes"]
            if not isinstance(sizes, list) or not sizes:
                _fail("instance.deviation.fake_sizes", "expected a non-empty array")
            dev_kwargs["fake_sizes"] = tuple(
                parse_int(s, f"instance.deviation.fake_sizes[{j}]", minimum=1) for j, s in enumerate(sizes)
            )
    return mech, chain, txs, strategy, forbid, dev_kwargs


def _load(source: str | Path | Mapping[str, Any]) -> Mapping[str, Any]:
    if isinstance(source, Mapping):
        return source
    p = Path(source)
    if not p.exists():
        raise ScenarioError(f"{p}: file not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc})") from exc
