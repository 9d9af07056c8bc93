import csv

from posetiles.engine import partition_general, partition_main
from posetiles.oracle import direct_lattice_partition
from posetiles.report import render_report
from posetiles.weights import build_mod_certificate, build_r_certificate


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_r_certificate_report(tmp_path, chain3):
    cert = build_r_certificate(chain3)
    paths = render_report(cert, tmp_path)
    assert sorted(p.suffix for p in paths) == [".csv", ".png"]
    rows = read_csv(next(p for p in paths if p.suffix == ".csv"))
    assert rows[0] == ["level", "total_num", "total_den", "target", "match"]
    assert len(rows) == 1 + 24
    assert all(row[4] == "True" for row in rows[1:])


def test_mod_certificate_report(tmp_path, diamond):
    cert = build_mod_certificate(diamond, 2)
    paths = render_report(cert, tmp_path)
    rows = read_csv(next(p for p in paths if p.suffix == ".csv"))
    assert len(rows) == 1 + 8
    assert all(row[3] == "True" for row in rows[1:])


def test_tile_certificate_report(tmp_path, inst_cycle4):
    cert = partition_main(inst_cycle4)[1]
    paths = render_report(cert, tmp_path)
    rows = read_csv(next(p for p in paths if p.suffix == ".csv"))
    assert len(rows) == 1 + len(cert.tiles)


def test_lattice_report(tmp_path, chain2):
    cert = direct_lattice_partition(chain2, 3)
    paths = render_report(cert, tmp_path)
    assert all(p.exists() for p in paths)


def test_plan_report(tmp_path, inst_singletons):
    plan = partition_general(inst_singletons)
    paths = render_report(plan, tmp_path)
    rows = read_csv(next(p for p in paths if p.suffix == ".csv"))
    assert rows[0][0] == "stage"
    assert len(rows) == 1 + len(plan.stages)
