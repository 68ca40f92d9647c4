from __future__ import annotations

import pytest

from picard import cli
from picard.theta import BUNDLED_CACHE


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("PICARD_CACHE", str(tmp_path / "user-cache.txt"))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_phi0(capsys):
    code, out, _ = run(capsys, "build", "phi0", "--order", "2")
    assert code == 0
    assert "1 + (9Y+9Z)w + (27Y²+54YZ+27Z²)w²" in out


def test_build_delimited_is_deterministic(capsys):
    first = run(capsys, "build", "zeta", "--order", "8", "--format", "delimited")
    second = run(capsys, "build", "zeta", "--order", "8", "--format", "delimited")
    assert first == second and first[0] == 0
    assert first[1].splitlines()[0].split("|")[:4] == ["zeta", "0", "6", "1"]


def test_restrict(capsys):
    code, out, _ = run(capsys, "restrict", "phi0", "--order", "4", "--format", "delimited")
    assert code == 0 and out.strip() == "1|18|108|234|234"


def test_restrict_vector_form_rejected(capsys):
    code, _, err = run(capsys, "restrict", "big_phi0")
    assert code == 1 and "scalar" in err


def test_hecke_single_form(capsys):
    code, out, _ = run(capsys, "hecke", "big_phi0", "T", "1+3r", "--order", "16")
    assert code == 0 and out.strip() == "759+261*r"


def test_hecke_delimited(capsys):
    code, out, _ = run(capsys, "hecke", "d0", "Tm", "2", "--order", "16", "--format", "delimited")
    fields = out.strip().split("|")
    assert code == 0 and "-72" in fields


def test_hecke_not_eigen_exit(capsys):
    code, _, err = run(capsys, "hecke", "gamma12", "T", "1+3r", "--order", "16")
    assert code == 2 and "NotAnEigenform" in err


def test_verify_exit_codes(capsys):
    assert run(capsys, "verify", "zeta_cubed", "--order", "16")[0] == 0
    code, out, _ = run(capsys, "verify", "psi1_gamma_constant", "--order", "16")
    assert code == 2 and "FAIL" in out
    code, out, _ = run(capsys, "verify", "d0_Tm_2_-72", "--order", "32")
    assert code == 0 and "pass" in out


def test_missing_operator_table_exit(capsys):
    code, _, err = run(capsys, "build", "phi0", "--order", "64")
    assert code == 3 and "missing operator cache" in err


def test_unknown_form(capsys):
    code, _, err = run(capsys, "build", "nope")
    assert code == 1 and "UnknownForm" in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "picard.conf"
    cfg.write_text("# defaults\nW = 16\noutput_format = delimited\n")
    code, out, _ = run(capsys, "hecke", "big_phi0", "Tm", "2", "--config", str(cfg))
    assert code == 0 and "|" in out
    code, out, _ = run(capsys, "hecke", "big_phi0", "Tm", "2", "--config", str(cfg), "--format", "human")
    assert out.strip() == "72"
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    assert run(capsys, "verify", "r5", "--config", str(bad))[0] == 1


def test_config_validation():
    with pytest.raises(ValueError):
        cli.Config(W=4).validate()
    with pytest.raises(ValueError):
        cli.Config(output_format="xml").validate()


def test_cache_list(capsys):
    code, out, _ = run(capsys, "cache", "list", "--format", "delimited")
    rows = [l.split("|") for l in out.splitlines()]
    assert code == 0
    assert any(r[0] == "1+3*r" and r[1] == "7" and r[2] == "yes" for r in rows)


def test_needed_alphas():
    got = {str(a) for a in cli._needed_alphas(13)}
    assert {"-2", "1+3*r"} <= got and "-5" not in got
    assert len(got) == 5


def test_cache_refresh_matches_bundled(tmp_path, capsys):
    dest = tmp_path / "fresh.txt"
    code, _, _ = run(capsys, "cache", "refresh", "--norms-up-to", "7", "--order", "8",
                     "--cache", str(dest))
    assert code == 0
    bundled = {l for l in BUNDLED_CACHE.read_text().splitlines() if l and not l.startswith("#")}
    fresh = [l for l in dest.read_text().splitlines() if l and not l.startswith("#")]
    assert fresh and all(l in bundled for l in fresh)


def test_tables_dims(capsys):
    code, out, _ = run(capsys, "tables", "dims", "--format", "delimited", "--k-max", "3")
    rows = {l.split("|")[0]: l.split("|")[1:] for l in out.splitlines()}
    assert code == 0 and rows["m3"] == ["4", "12", "24", "40"]
    assert rows["per_character"] == ["-"] * 4
