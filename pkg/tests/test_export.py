import json

import pytest

from tfm_lab.audit import DeviationSpace, check_dsic, check_mmic, check_oca_proof
from tfm_lab.battery import (
    m1559_low_dsic_instance,
    spa_fake_bid_instance,
    tipless_low_oca_instance,
)
from tfm_lab.export import (
    TRACE_COLUMNS,
    load_and_recertify,
    read_trace_csv,
    report_rows_to_csv,
    report_rows_to_jsonable,
    trace_from_jsonable,
    trace_to_jsonable,
    verdict_from_jsonable,
    verdict_to_jsonable,
    write_json,
    write_trace_csv,
)
from tfm_lab.report import ReportRow
from tfm_lab.sim import Trace, TraceRow
from tfm_lab.strategies import STRAIGHTFORWARD_1559, TIPLESS_CAP, BiddingStrategy


def one_empty_block():
    return Trace(rows=(TraceRow(0, 1000, 0, 0, 0, 0, 0, 0, 0),))


def test_empty_trace_csv_golden(tmp_path):
    p = tmp_path / "t.csv"
    write_trace_csv(one_empty_block(), p)
    text = p.read_text()
    assert text.splitlines() == [
        "height,base_fee,block_size,burn_total,tip_revenue,user_utility_total,mempool_depth",
        "0,1000,0,0,0,0,0",
    ]


def test_trace_csv_round_trip(tmp_path):
    rows = (
        TraceRow(0, 1000, 3, 120, 9, 44, 2, 2, 0),
        TraceRow(1, 1015, 0, 0, 0, 0, 5, 0, 1),
    )
    p = tmp_path / "t.csv"
    write_trace_csv(Trace(rows=rows), p)
    got = read_trace_csv(p)
    for row, rec in zip(rows, got):
        for col in TRACE_COLUMNS:
            assert rec[col] == getattr(row, col)


def test_trace_json_round_trip_lossless():
    rows = (TraceRow(0, 10, 3, 12, 9, -4, 2, 2, 1),)
    doc = trace_to_jsonable(Trace(rows=rows))
    assert doc["rows"][0]["base_fee"] == "10"  # money as digit strings
    assert trace_from_jsonable(json.loads(json.dumps(doc))) == Trace(rows=rows)


def _verdict_docs():
    mech, chain, pool, dev = spa_fake_bid_instance()
    yield check_mmic(mech, chain, pool, dev), chain, pool.transactions
    mech, chain, txs = m1559_low_dsic_instance()
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
    yield check_dsic(mech, chain, txs, BiddingStrategy(STRAIGHTFORWARD_1559), dev, True), chain, txs
    mech, chain, txs = tipless_low_oca_instance()
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
    yield check_oca_proof(mech, chain, txs, BiddingStrategy(TIPLESS_CAP), dev), chain, txs


@pytest.mark.parametrize("case", range(3))
def test_verdict_round_trip_recertifies(case, tmp_path):
    verdict, chain, txs = list(_verdict_docs())[case]
    doc = verdict_to_jsonable(verdict, chain, txs)
    path = tmp_path / "v.json"
    write_json(doc, path)
    assert load_and_recertify(path)
    got, got_chain, got_txs = verdict_from_jsonable(json.loads(path.read_text()))
    assert got.witness == verdict.witness
    assert got_chain.base_fee == chain.base_fee
    assert [t.size for t in got_txs] == [t.size for t in txs]


def test_spa_witness_json_content(tmp_path):
    mech, chain, pool, dev = spa_fake_bid_instance()
    doc = verdict_to_jsonable(check_mmic(mech, chain, pool, dev), chain, pool.transactions)
    w = doc["verdict"]["witness"]
    assert w["fake_txs"] == [{"size": 1, "bid": "8"}]
    assert w["utility_delta"] == "7"
    assert doc["instance"]["transactions"][0]["fee_cap"] == "10"


def test_tampered_witness_fails_recertify(tmp_path):
    mech, chain, pool, dev = spa_fake_bid_instance()
    doc = verdict_to_jsonable(check_mmic(mech, chain, pool, dev), chain, pool.transactions)
    doc["verdict"]["witness"]["deviant_utility"] = "999"
    path = tmp_path / "bad.json"
    write_json(doc, path)
    assert not load_and_recertify(path)


def test_oca_transfers_serialize_as_rationals():
    verdict, chain, txs = list(_verdict_docs())[2]
    doc = verdict_to_jsonable(verdict, chain, txs)
    transfers = doc["verdict"]["witness"]["transfers"]
    assert all(set(v) == {"num", "den"} for v in transfers.values())


def test_report_rows_export(tmp_path):
    rows = [ReportRow("fpa", "mmic", "all-pass", "yes", True, "0/5 violations")]
    p = tmp_path / "card.csv"
    report_rows_to_csv(rows, p)
    assert "fpa,mmic,all-pass,yes,1,0/5 violations" in p.read_text()
    assert report_rows_to_jsonable(rows)[0]["matches"] is True
