import csv
import io
import json
import math

import mpmath as mp
import pytest

from loopsoup.cli import InputError, RunManifest, content_hash, main, parse_complex, parse_real

MU = float(
    8 * mp.cbrt(2) * mp.pi**2 / (3 * mp.sqrt(3) * mp.gamma(mp.mpf(1) / 6) ** 2 * mp.gamma(mp.mpf(4) / 3) ** 2)
)
# coefficient tables close with this constant (see tests/test_blocks.py)
MU_TABLE = MU / 8


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return {(int(r["p"]), int(r["p_prime"])): float(r["value"]) for r in csv.DictReader(io.StringIO(text))}


@pytest.mark.parametrize(
    "text, value",
    [("1", 1.0), ("-pi/2", -math.pi / 2), ("2*pi/3", 2 * math.pi / 3), ("pi", math.pi), ("1e-3", 1e-3)],
)
def test_parse_real(text, value):
    assert parse_real(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize(
    "text, value",
    [("i+2", 2 + 1j), ("1j+2", 2 + 1j), ("-0.5+3i", -0.5 + 3j), ("1e-3j", 1e-3j), ("-i", -1j), ("2", 2 + 0j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["ab", "1+", "++1", ""])
def test_parse_complex_rejects(text):
    with pytest.raises(InputError):
        parse_complex(text)


def test_corr_plane_two_point(capsys):
    code, out, _ = run(capsys, "corr", "--points", "i,i+2", "--betas", "pi,pi", "--lambda", "5", "--domain", "plane")
    assert code == 0
    doc = json.loads(out)
    # Delta = 1 and |z12| = 2 give |z12|^(-4 Delta) = 2^-4
    assert doc["value"] == pytest.approx(2.0**-4, rel=1e-12)
    assert doc["schema"] == 1 and len(doc["manifest"]) == 40


def test_corr_half_plane_one_point_csv(capsys):
    code, out, _ = run(capsys, "corr", "--points", "i", "--betas", "pi", "--lambda", "5",
                       "--domain", "half-plane", "--out", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["value"]) == pytest.approx(0.25, rel=1e-12)


def test_corr_charge_conservation_exit(capsys):
    code, _, err = run(capsys, "corr", "--points", "0,1,2,3", "--betas", "1,1,1,1", "--domain", "plane")
    assert code == 2
    assert "charge conservation" in err
    assert err.count("charge conservation") == 1


def test_corr_bad_input_exit(capsys):
    assert run(capsys, "corr", "--points", "zz", "--betas", "1")[0] == 2
    assert run(capsys, "corr", "--points", "i", "--betas", "1", "--lambda", "-1", "--domain", "half-plane")[0] == 2
    assert run(capsys, "corr", "--points", "-i", "--betas", "1", "--domain", "half-plane")[0] == 2


@pytest.mark.parametrize("lam", [1.0, 0.5])
def test_blocks_all_pi(capsys, lam):
    code, out, err = run(capsys, "blocks", "--case", "pi", "--lambda", str(lam), "--max-p", "3")
    assert code == 0
    rows = csv_rows(out)
    assert rows[(0, 0)] == 1.0
    assert rows[(1, 1)] == pytest.approx(48 / 5 * MU_TABLE * lam, abs=1e-8)
    assert all((p - pp) % 3 == 0 for p, pp in rows)
    side = json.loads(err)
    assert side["schema"] == 1 and "null_states" in side


def test_blocks_all_half_pi(capsys):
    code, out, _ = run(capsys, "blocks", "--case", "pi2", "--lambda", "2", "--max-p", "6")
    assert code == 0
    rows = csv_rows(out)
    assert rows[(6, 0)] == pytest.approx(-2 / 100, abs=1e-12)
    assert rows[(0, 6)] == pytest.approx(-2 / 100, abs=1e-12)
    assert rows[(1, 1)] == pytest.approx(-12 / 5 * MU_TABLE * 2, abs=1e-8)
    assert all((p - pp) % 3 == 0 for p, pp in rows)


def test_blocks_general_and_scan(capsys, tmp_path):
    code, out, _ = run(capsys, "blocks", "--case", "general", "--betas", "1,2,-0.5,-2.5", "--max-p", "3",
                       "--out-dir", str(tmp_path))
    assert code == 0
    assert (tmp_path / "blocks.csv").read_text() == out
    side = json.loads((tmp_path / "null_poles.json").read_text())
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert side["manifest"] == man["config_hash"]
    assert rows_ok(out)
    code, _, err = run(capsys, "blocks", "--case", "pi", "--max-p", "8", "--scan", "0.4", "0.55", "301")
    assert code == 0
    hits = [s for s in json.loads(err)["scan"] if s["entry"] == [7, 1]]
    assert any(abs(h["lambda"] - 7 / 15) < 1e-3 for h in hits)


def rows_ok(text):
    rows = csv_rows(text)
    return rows[(0, 0)] == 1.0 and all((p - pp) % 3 == 0 for p, pp in rows)


@pytest.mark.parametrize("argv", [
    ("blocks", "--max-p", "40"),
    ("blocks", "--max-p", "-1"),
    ("blocks", "--case", "general"),
    ("blocks", "--case", "general", "--betas", "1,2"),
    ("blocks", "--case", "general", "--betas", "1,1,1,1"),
    ("blocks", "--case", "nope"),
])
def test_blocks_invalid_range(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_mc_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[soup]\nintensity = -2\n")
    code, _, err = run(capsys, "mc", str(bad), "--alpha", "0,1")
    assert code == 2 and "config error" in err
    assert run(capsys, "mc", str(tmp_path / "missing.ini"), "--alpha", "0")[0] == 2
    assert run(capsys, "mc")[0] == 2
    assert run(capsys, "mc", "--check", "nope")[0] == 2


SMALL_INI = """[soup]
intensity = {lam}
t_min = 0.05
t_max = 3.2
strata = 3
steps_per_loop = 64
coarse_steps = 8
window = -4, 4, -4, 4
seed = 17
replicas = 4
"""


def test_mc_zero_intensity(capsys, tmp_path):
    ini = tmp_path / "soup.ini"
    ini.write_text(SMALL_INI.format(lam=0.0))
    code, out, _ = run(capsys, "mc", str(ini), "--alpha", "0,0.5")
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert rec["mean"] == 0.0 and rec["raw_mean"] == 0.0 and rec["stderr"] == 0.0


def test_mc_determinism(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    ini = tmp_path / "soup.ini"
    ini.write_text(SMALL_INI.format(lam=1.0))
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, out, _ = run(capsys, "mc", str(ini), "--alpha", "0,0.5", "--out-dir", str(d))
        assert code == 0
        outs.append((out, (d / "manifest.json").read_text()))
    assert outs[0][0] == outs[1][0]
    assert content_hash(outs[0][0]) == content_hash(outs[1][0])
    man0 = json.loads(outs[0][1])
    man1 = json.loads(outs[1][1])
    assert man0["timestamp"] == man1["timestamp"] == "2023-11-14T22:13:20Z"
    assert man0["config_hash"] == man1["config_hash"] == json.loads(outs[0][0])["manifest"]


def test_mc_check_failure_exit(capsys, tmp_path, monkeypatch):
    from loopsoup.montecarlo import checks

    ini = tmp_path / "soup.ini"
    ini.write_text(SMALL_INI.format(lam=1.0).replace("window = -4, 4, -4, 4", "window = -4, 4, 0, 4")
                   + "domain = upper_half_plane\n")
    code, out, _ = run(capsys, "mc", str(ini), "--check", "pair-halfplane")
    rec = json.loads(out)["records"][0]
    assert code == (0 if rec["passed"] else 3)
    # a zero tolerance cannot be met by a stochastic estimate
    monkeypatch.setattr(checks, "_tolerance", lambda name, target, se: 0.0)
    code, out, _ = run(capsys, "mc", str(ini), "--check", "pair-halfplane")
    assert code == 3 and json.loads(out)["records"][0]["passed"] is False


def test_manifest_hash_is_content_addressed():
    a = RunManifest("corr", {"x": 1})
    b = RunManifest("corr", {"x": 1})
    c = RunManifest("corr", {"x": 2})
    assert a.config_hash == b.config_hash != c.config_hash
    # git blob hash of the empty JSON object
    assert content_hash({}) == "9e26dfeeb6e641a33dae4961196235bdb965b21b"


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--out-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"]
    names = {c["name"] for c in doc["identities"]}
    assert {"pair-weight-two-forms", "3f2-unit-limit", "A-inversion", "crossing-x-to-1-minus-x",
            "crossing-x-to-1-over-x", "four-point-permutations", "weights-linear-system"} <= names
    assert all("max_residual" in c for c in doc["identities"])
    assert (tmp_path / "verify.json").exists() and (tmp_path / "manifest.json").exists()


def test_verify_mu_canary(capsys):
    code, out, _ = run(capsys, "verify", "--perturb-mu", "1e-6")
    assert code == 3
    failed = {c["name"] for c in json.loads(out)["identities"] if not c["passed"]}
    assert "crossing-x-to-1-minus-x" in failed
