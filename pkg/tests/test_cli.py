import json
from fractions import Fraction as F

import pytest

from artifact import cli
from artifact.analyzer import ManipulationWitness
from artifact.auctions import SECOND_PRICE, AuctionMechanism
from artifact.catalog import WitnessEntry
from artifact.cli import (
    EXIT_BUDGET,
    EXIT_FAILED,
    EXIT_OK,
    EXIT_VALIDATION,
    InstanceError,
    Report,
    audit_instance,
    degree_battery,
    format_report,
    main,
    parse_instance,
    parse_report,
    random_instance,
    run_instance,
    table,
)
from artifact.core import ReportDomain

AUCTION = {"domain": "auction", "mechanism": "SecondPrice", "bids": ["1", "5/2", "2"]}
GOODS = {"domain": "goods", "mechanism": "round_robin", "valuations": [["3", "2", "1"], ["1", "3", "2"]]}
CAKE = {"domain": "cake", "mechanism": "dubins_spanier",
        "densities": [{"breakpoints": ["0", "1/2", "1"], "values": ["3/2", "1/2"]},
                      {"breakpoints": ["0", "1"], "values": ["1"]}]}
VOTING = {"domain": "voting", "scores": ["0", "1", "2"], "ballots": [["c3", "c2", "c1"], "abstain"]}
MATCHING = {"domain": "matching", "mechanism": "DA",
            "M": {"m1": ["w2", "w1", "phi"], "m2": ["w1", "w2", "phi"]},
            "W": {"w1": ["m1", "phi", "m2"], "w2": ["m2", "m1", "phi"]}}


def dumps(obj):
    return json.dumps(obj).encode("utf-8")


def pointer_of(obj):
    with pytest.raises(InstanceError) as info:
        parse_instance(dumps(obj))
    return info.value.pointer, info.value.detail


# --- parsing -------------------------------------------------------------------------

def test_minimal_instances_parse():
    for obj in (AUCTION, GOODS, CAKE, VOTING, MATCHING):
        inst = parse_instance(dumps(obj))
        assert inst.domain == obj["domain"]
    assert parse_instance(dumps({"domain": "auction", "rule": {"variant": "FirstPriceDiscount", "t": "1/2"},
                                 "bids": ["1", "2"]})).mechanism.n == 2


def test_bad_rational_is_located():
    obj = dict(GOODS, valuations=[["1/0", "1", "1"], ["1", "1", "1"]])
    assert pointer_of(obj)[0] == "/valuations/0/0"
    assert pointer_of(dict(AUCTION, bids=["1", "x", "2"]))[0] == "/bids/1"


def test_unknown_mechanism_lists_valid_names():
    ptr, detail = pointer_of(dict(GOODS, mechanism="envy_cycle"))
    assert ptr == "/mechanism" and "round_robin" in detail and "mnw1" in detail


@pytest.mark.parametrize("data, ptr", [
    (b"{not json", ""),
    (b"\xff\xfe", ""),
    (b"[1, 2]", ""),
    (dumps({"domain": "chess"}), "/domain"),
    (dumps(dict(VOTING, ballots=[["c3", "c3", "c1"]])), "/ballots/0"),
    (dumps(dict(CAKE, densities=[{"breakpoints": ["0", "1"], "values": ["-1"]}])), "/densities/0"),
    (dumps(dict(AUCTION, analysis={"k": 7})), "/analysis/k"),
])
def test_structured_errors(data, ptr):
    with pytest.raises(InstanceError) as info:
        parse_instance(data)
    assert info.value.pointer == ptr


def test_matching_instance_semantics():
    inst = parse_instance(dumps(MATCHING))
    women = inst.profile[2:]
    assert women[0][:2] == (1, 0)
    rows = run_instance(inst).rows
    assert {r["agent"]: r["partner"] for r in rows}["w1"] == "m1"


# --- commands ------------------------------------------------------------------------

def test_run_reports():
    rep = run_instance(parse_instance(dumps(AUCTION)))
    assert rep.meta["price"] == "2" and [r["wins"] for r in rep.rows] == [False, True, False]
    rep = run_instance(parse_instance(dumps(GOODS)))
    assert [r["bundle"] for r in rep.rows] == ["g1 g3", "g2"]
    rep = run_instance(parse_instance(dumps(VOTING)))
    assert [r["winner"] for r in rep.rows] == [False, False, True]
    rep = run_instance(parse_instance(dumps(CAKE)))
    assert [r["piece"] for r in rep.rows] == ["[0,1/3]", "[1/3,1]"]
    assert [r["value"] for r in rep.rows] == ["1/2", "2/3"]


def test_audit_reports():
    assert audit_instance(parse_instance(dumps(GOODS))).meta["ef1"] is True
    assert audit_instance(parse_instance(dumps(CAKE))).meta["proportional"] is True
    assert audit_instance(parse_instance(dumps(MATCHING))).meta["stable"] is True
    boston = dict(MATCHING, mechanism="Boston")
    assert "stable" in audit_instance(parse_instance(dumps(boston))).meta
    rows = audit_instance(parse_instance(dumps(AUCTION))).rows
    assert all(r["individually_rational"] for r in rows)


def test_table_one_matches_published_order():
    rep = table(1)
    assert [r["mechanism"] for r in rep.rows] == ["FirstPrice", "FirstPriceDiscount(t=1/2)", "AverageFSP(w=1/2)",
                                                  "SecondPrice"]
    assert [r["k"] for r in rep.rows] == [0, 1, 2, 3]
    assert [r["claim"] for r in rep.rows] == ["0", "1", "n-1", "n"]


@pytest.mark.parametrize("number", [2, 3, 4])
def test_witness_tables(number):
    rep = table(number)
    assert rep.rows and all(r["verdict"] == "witness verified" for r in rep.rows)


def test_degree_battery_single_k():
    rep = degree_battery("auctions", k=0)
    assert [r["verdict"] for r in rep.rows] == ["witness", "exhausted", "exhausted", "exhausted"]


# --- formatting -------------------------------------------------------------------------

def test_json_round_trip():
    rep = degree_battery("matching", k=0)
    assert parse_report(format_report(rep, "json")) == rep
    rep = run_instance(parse_instance(dumps(GOODS)))
    assert parse_report(format_report(rep, "json")) == rep


def test_empty_csv_is_headers_only():
    assert format_report(Report("x", ["a", "b"]), "csv") == b"a,b\r\n"


def test_csv_quoting_and_determinism():
    rep = Report("x", ["name", "flag"], [{"name": 'a,"b"', "flag": True}, {"name": "c", "flag": None}])
    out = format_report(rep, "csv")
    assert out == b'name,flag\r\n"a,""b""",true\r\nc,\r\n'
    assert format_report(rep, "text") == format_report(rep, "text")


# --- entry point -------------------------------------------------------------------------

def run_main(capsysbinary, argv):
    code = main(argv)
    out, err = capsysbinary.readouterr()
    return code, out.decode(), err.decode()


def test_main_success_and_formats(tmp_path, capsysbinary):
    path = tmp_path / "inst.json"
    path.write_bytes(dumps(AUCTION))
    code, out, _ = run_main(capsysbinary, ["run", str(path), "--format", "json"])
    assert code == EXIT_OK and json.loads(out)["meta"]["price"] == "2"
    code, out, _ = run_main(capsysbinary, ["audit", str(path), "--format", "csv"])
    assert code == EXIT_OK and out.startswith("agent,utility,individually_rational\r\n")


def test_main_validation_error(tmp_path, capsysbinary):
    path = tmp_path / "bad.json"
    path.write_bytes(dumps(dict(AUCTION, bids=["1/0"])))
    code, _, err = run_main(capsysbinary, ["run", str(path)])
    assert code == EXIT_VALIDATION and json.loads(err)["pointer"] == "/bids/0"
    code, _, err = run_main(capsysbinary, ["run", str(tmp_path / "missing.json")])
    assert code == EXIT_VALIDATION
    code, _, err = run_main(capsysbinary, ["witness", "verify", "nothing/here"])
    assert code == EXIT_VALIDATION


def test_main_budget_exceeded_prints_partial(capsysbinary):
    code, out, err = run_main(capsysbinary, ["degree", "auctions", "--budget", "50", "--format", "json"])
    assert code == EXIT_BUDGET
    rep = json.loads(out)
    assert rep["meta"]["budget_exceeded"] is True
    assert rep["rows"][-1]["verdict"] == "partial"
    assert json.loads(err)["evaluations"] > 50


def test_main_failed_witness(monkeypatch, capsysbinary):
    mech = AuctionMechanism(SECOND_PRICE, 2)
    grid = ReportDomain(tuple(F(x) for x in (0, 1, 2)))
    bad = WitnessEntry("auction/bogus", "auction", "n",
                       lambda: ManipulationWitness(mech, 1, F(1), F(2), (), ((2, grid),), (F(0),), label="bogus"))
    monkeypatch.setattr(cli, "witness_catalog", lambda: {bad.name: bad})
    code, out, _ = run_main(capsysbinary, ["witness", "verify", "--format", "json"])
    assert code == EXIT_FAILED and json.loads(out)["meta"]["all_ok"] is False


def test_main_witness_prefix_and_random(capsysbinary):
    code, out, _ = run_main(capsysbinary, ["witness", "verify", "matching", "--format", "json"])
    rows = json.loads(out)["rows"]
    assert code == EXIT_OK and len(rows) == 3 and all(r["ok"] for r in rows)
    for domain in ("auction", "goods", "cake", "voting", "matching"):
        code, first, _ = run_main(capsysbinary, ["run", "--random", domain, "--seed", "4", "--format", "json"])
        assert code == EXIT_OK
        _, second, _ = run_main(capsysbinary, ["run", "--random", domain, "--seed", "4", "--format", "json"])
        assert first == second
    assert random_instance("goods", 1) == random_instance("goods", 1)


def test_main_degree_on_instance_grid(tmp_path, capsysbinary):
    obj = {"domain": "auction", "mechanism": "FirstPrice", "bids": ["0", "0"],
           "analysis": {"grid": ["0", "1", "2"]}}
    path = tmp_path / "fp.json"
    path.write_bytes(dumps(obj))
    code, out, _ = run_main(capsysbinary, ["degree", str(path), "--format", "json"])
    rows = json.loads(out)["rows"]
    assert code == EXIT_OK and rows[-1]["degree"] == 0
