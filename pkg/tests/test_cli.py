import json

import pytest

from dieudonne.cli import main
from dieudonne.isocrystal import direct_sum, standard_module
from dieudonne.serialize import load_module, module_to_json, save_module
from dieudonne.sslocus import point_module, superspecial_base
from dieudonne.wittring import default_precision, make_witt_ring


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    root = tmp_path_factory.mktemp("modules")
    paths = {}

    R2 = make_witt_ring(2, 1, default_precision(2))
    save_module(standard_module(1, 1, 1, R2), root / "m_11.json")
    paths["m_11"] = root / "m_11.json"

    save_module(direct_sum(standard_module(1, 0, 1, R2),
                           standard_module(0, 1, 1, R2)),
                root / "ordinary2.json")
    paths["ordinary2"] = root / "ordinary2.json"

    R4 = make_witt_ring(2, 4, default_precision(4))
    base4 = superspecial_base(R4)
    g4 = R4.teichmuller((0, 1, 0, 0))
    pt4 = point_module(base4, (R4.one(), g4))
    assert pt4.field_level == 2
    save_module(pt4.module, root / "mx_f4.json")
    paths["mx_f4"] = root / "mx_f4.json"

    R8 = make_witt_ring(2, 8, default_precision(4))
    base8 = superspecial_base(R8)
    g8 = R8.teichmuller((0, 1) + (0,) * 6)
    pt8 = point_module(base8, (R8.one(), g8))
    assert pt8.field_level == 4
    save_module(pt8.module, root / "mx_f8.json")
    paths["mx_f8"] = root / "mx_f8.json"
    return paths


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_classify_m11(fixtures, capsys):
    code, out, _ = run_cli(capsys, "classify", str(fixtures["m_11"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["newton_polygon"] == [[1, 1, 1]]
    assert doc["minimality"]["is_minimal"] is True
    assert doc["schema_version"] == 1
    assert doc["precision"] == default_precision(2)


def test_classify_ordinary(fixtures, capsys):
    code, out, _ = run_cli(capsys, "classify", str(fixtures["ordinary2"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["newton_polygon"] == [[1, 0, 1], [0, 1, 1]]


def test_classify_mx_f4(fixtures, capsys):
    code, out, _ = run_cli(capsys, "classify", str(fixtures["mx_f4"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["newton_polygon"] == [[1, 1, 2]]
    assert doc["minimality"]["is_minimal"] is False


def test_endo_m11(fixtures, capsys):
    code, out, _ = run_cli(capsys, "endo", str(fixtures["m_11"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["order"]["coindex_exponent"] == 0
    assert doc["order"]["zp_dimension"] == 4
    assert doc["order"]["maximal"] is True
    assert doc["order"]["algebra"] == [
        {"matrix_size": 1, "degree": 2, "invariant_num": 1,
         "invariant_den": 2}]


def test_endo_mx_f4(fixtures, capsys):
    code, out, _ = run_cli(capsys, "endo", str(fixtures["mx_f4"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["order"]["coindex_exponent"] == 4
    assert doc["order"]["maximal"] is False


def test_endo_mx_f8(fixtures, capsys):
    code, out, _ = run_cli(capsys, "endo", str(fixtures["mx_f8"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["order"]["coindex_exponent"] == 6


def test_minimal_command(fixtures, capsys):
    code, out, _ = run_cli(capsys, "minimal", str(fixtures["mx_f4"]))
    assert code == 0
    doc = json.loads(out)
    assert doc["minimal_isogeny"]["length_sub"] == 1
    assert doc["minimal_isogeny"]["isogeny_degree_exponent"] == 1
    assert doc["minimal_isogeny"]["annihilator_exponent"] == 1


def test_stratify_small(capsys):
    code, out, _ = run_cli(capsys, "stratify", "--p", "2", "--k-max", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["counts"]["V0"] == 5
    assert doc["counts"]["V6"] == 5
    assert doc["points"] == 5


def test_stratify_csv(capsys):
    code, out, _ = run_cli(capsys, "--format", "csv",
                           "stratify", "--p", "2", "--k-max", "1")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "a,b,field_level,c_p"
    assert len(lines) == 6


def test_selftest_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "selftest", "--seed", "7")
    code2, out2, _ = run_cli(capsys, "selftest", "--seed", "7")
    assert code1 == code2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["failed"] == 0


def test_missing_file_is_input_error(capsys):
    code, _, err = run_cli(capsys, "classify", "/nonexistent/file.json")
    assert code == 2
    assert "error" in err


def test_low_precision_is_precision_error(fixtures, capsys):
    code, _, err = run_cli(capsys, "endo", str(fixtures["mx_f8"]),
                           "--precision", "8")
    assert code == 3


def test_precision_override_floor(fixtures, capsys):
    code, _, err = run_cli(capsys, "endo", str(fixtures["m_11"]),
                           "--precision", "4")
    assert code == 2


def test_round_trip_bit_exact(fixtures):
    M = load_module(fixtures["mx_f4"])
    doc1 = module_to_json(M)
    doc2 = module_to_json(load_module(fixtures["mx_f4"]))
    assert doc1 == doc2
    with open(fixtures["mx_f4"]) as fh:
        on_disk = json.load(fh)
    assert doc1 == on_disk
