import json

import pytest

from relnls import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def test_epoly_gen(capsys):
    code, out = run(capsys, "epoly", "gen", "--dispersion", "sr", "--eps-order", "1", "--n", "4")
    assert code == 0
    assert out.out.strip() == "x^4 + (6*i)*x^2*t*hbar*m^-1 + (-3)*t^2*hbar^2*m^-2 + (3*i)*t*hbar^3*m^-3*eps"


def test_missing_flag_is_usage_error(capsys):
    code, out = run(capsys, "akns", "flow")
    assert code == 2 and "--n" in out.err


def test_bad_choice_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["evolve", "--ic", "vortex"])
    assert exc.value.code == 2


def test_verify_zc(capsys):
    code, out = run(capsys, "akns", "verify-zc", "--n", "2")
    assert code == 0
    assert json.loads(out.out)["residual"] == [["0", "0"], ["0", "0"]]


def test_verify_zc_general(capsys):
    code, _ = run(capsys, "akns", "verify-zc", "--dispersion", "sr", "--eps-order", "1")
    assert code == 0


def test_verification_failure_report(capsys, monkeypatch, tmp_path):
    from relnls import akns

    bad = akns.LaxPair.build(akns.lax_coefficients(2), literal=True)
    monkeypatch.setattr(akns, "verify_zero_curvature",
                        lambda n: akns.zero_curvature_residual(bad, akns.hierarchy_flow(2)))
    code, out = run(capsys, "--out", str(tmp_path), "akns", "verify-zc", "--n", "2")
    assert code == 1
    report = json.loads((tmp_path / "zero_curvature_report.json").read_text())
    assert report["status"] == "fail"
    assert {"entry", "p_power", "terms"} <= set(report["failures"][0])


def test_verify_all_quick(capsys):
    code, out = run(capsys, "verify", "all", "--quick")
    assert code == 0
    assert out.out.count("PASS") == 5


def test_akns_outputs(capsys):
    assert run(capsys, "akns", "flow", "--n", "2", "--kappa0")[1].out.startswith("upper: (-1)*psi[2]")
    code, out = run(capsys, "akns", "lax", "--n", "2")
    assert code == 0 and "A: " in out.out


def test_burgers_commands(capsys, tmp_path):
    code, _ = run(capsys, "--out", str(tmp_path), "burgers", "backlund", "--seed", "gaussian")
    assert code == 0
    summary = json.loads((tmp_path / "backlund_summary.json").read_text())
    assert summary["max_residual"] < 1e-8
    lines = (tmp_path / "backlund.csv").read_text().splitlines()
    assert lines[0].startswith("# {")
    assert "x,re_V,im_V,abs_residual" in lines
    assert (tmp_path / "backlund.gp").exists()
    code, out = run(capsys, "burgers", "shock", "--profile", "minus", "--samples", "0")
    assert code == 0 and abs(json.loads(out.out)["shock_time"] - 1) < 1e-9
    code, _ = run(capsys, "burgers", "residual", "--ic", "gaussian", "--c", "INF")
    assert code == 0


def test_vortex_csv(capsys, tmp_path):
    code, _ = run(capsys, "--out", str(tmp_path), "epoly", "vortex", "--n", "2")
    assert code == 0
    rows = [l for l in (tmp_path / "vortex.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "t,re(x_0),im(x_0),re(x_1),im(x_1)"
    assert len(rows) == 51


def test_evolve_is_deterministic(capsys, tmp_path):
    args = ["evolve", "--n", "128", "--steps", "50", "--record-every", "25", "--snapshots",
            "--c", "20", "--eps-order", "1"]
    for name in ("a", "b"):
        assert run(capsys, "--out", str(tmp_path / name), *args)[0] == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    header = json.loads((tmp_path / "a" / "snapshot_000050.json").read_text())
    assert header["grid"]["n"] == 128
    assert (tmp_path / "a" / "snapshot_000050.bin").stat().st_size == 128 * 16


def test_json_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "dispersion": "nr"}))
    code, out = run(capsys, "--json-config", str(cfg), "epoly", "gen")
    assert code == 0 and out.out.strip() == "x^3 + (3*i)*x*t*hbar*m^-1"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as exc:
        cli.main(["--json-config", str(cfg), "epoly", "gen"])
    assert exc.value.code == 2


def test_evolve_stability_guard_is_usage_error(capsys):
    code, out = run(capsys, "evolve", "--n", "128", "--dt", "0.5", "--steps", "1", "--c", "1",
                    "--eps-order", "1")
    assert code == 2 and "dt" in out.err
