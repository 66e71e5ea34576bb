"""End-to-end command-line behavior: formats, exit codes, determinism."""

from hkxor.cli import main
from hkxor.instances import parse


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_gen_writes_instance(tmp_path, capsys):
    out = tmp_path / "inst.hkxor"
    code, _ = run(capsys, "gen", "--n", "8", "--k", "3", "--m", "50",
                  "--model", "rademacher", "--seed", "7", "--out", str(out))
    assert code == 0
    text = out.read_text()
    assert text.startswith("HKXOR v1 n=8 k=3 m=50 model=rademacher-semirandom seed=7")
    assert len(text.splitlines()) == 51
    inst = parse(text)
    assert inst.m == 50


def test_gen_one_basis(tmp_path, capsys):
    out = tmp_path / "z.hkxor"
    code, _ = run(capsys, "gen", "--n", "6", "--k", "3", "--m", "5",
                  "--model", "one-basis-z", "--seed", "1", "--out", str(out))
    assert code == 0
    inst = parse(out.read_text())
    assert all(c.pauli.xmask == 0 for c in inst.constraints)


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "gen", "--n", "6", "--k", "2", "--m", "9", "--seed", "3", "--out", str(a))
    run(capsys, "gen", "--n", "6", "--k", "2", "--m", "9", "--seed", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_gen_bad_ranges(tmp_path, capsys):
    code = main(["gen", "--n", "3", "--k", "5", "--m", "2",
                 "--out", str(tmp_path / "x")])
    capsys.readouterr()
    assert code == 3


def test_certify_empty_like_instance(tmp_path, capsys):
    # a single-constraint file certifies fine end to end
    path = tmp_path / "inst"
    run(capsys, "gen", "--n", "6", "--k", "2", "--m", "12", "--seed", "5",
        "--out", str(path))
    code, out = run(capsys, "certify", "--in", str(path), "--ell", "2")
    assert code == 0
    fields = dict(line.split("=", 1) for line in out.splitlines() if "=" in line)
    assert fields["branch"] == "even"
    assert float(fields["algval"]) >= 0.5


def test_certify_branch_mismatch(tmp_path, capsys):
    path = tmp_path / "odd"
    run(capsys, "gen", "--n", "6", "--k", "3", "--m", "6", "--seed", "2",
        "--out", str(path))
    code = main(["certify", "--in", str(path), "--ell", "2", "--branch", "even"])
    capsys.readouterr()
    assert code == 3


def test_certify_then_oracle_soundness(tmp_path, capsys):
    path = tmp_path / "inst"
    run(capsys, "gen", "--n", "7", "--k", "3", "--m", "10", "--model", "random",
        "--seed", "11", "--out", str(path))
    code, out = run(capsys, "certify", "--in", str(path), "--ell", "2", "--eps", "0.8")
    assert code == 0
    algval = float(dict(l.split("=", 1) for l in out.splitlines() if "=" in l)["algval"])
    code, out = run(capsys, "oracle", "--in", str(path))
    assert code == 0
    lam = float(dict(l.split("=", 1) for l in out.splitlines() if "=" in l)["lambda_max"])
    assert algval >= lam - 1e-9


def test_oracle_one_basis_and_expansion(tmp_path, capsys):
    path = tmp_path / "z"
    run(capsys, "gen", "--n", "8", "--k", "3", "--m", "4", "--model", "one-basis-z",
        "--seed", "9", "--out", str(path))
    code, out = run(capsys, "oracle", "--in", str(path), "--expansion", "1.0", "3")
    assert code == 0
    fields = dict(l.split("=", 1) for l in out.splitlines() if "=" in l)
    assert abs(float(fields["lambda_max"]) - float(fields["classical.value"])) < 1e-10
    assert "expansion.pass" in fields


def test_oracle_resource_guard(tmp_path, capsys):
    path = tmp_path / "big"
    run(capsys, "gen", "--n", "20", "--k", "2", "--m", "4", "--seed", "0",
        "--out", str(path))
    code = main(["oracle", "--in", str(path)])
    capsys.readouterr()
    assert code == 4


def test_witness_single_constraint(tmp_path, capsys):
    path = tmp_path / "one"
    path.write_text("HKXOR v1 n=3 k=3 m=1 model=one-basis-z seed=0\nZ1 Z2 Z3 1.0\n")
    code, out = run(capsys, "witness", "--in", str(path), "--degree", "3")
    assert code == 0
    assert "energy=+1" in out
    assert "positivity.pass=1" in out
    assert "PSEXP v1 n=3 d=3" in out


def test_witness_contradiction_exit_code(tmp_path, capsys):
    path = tmp_path / "tri"
    path.write_text(
        "HKXOR v1 n=3 k=2 m=3 model=one-basis-z seed=0\n"
        "Z1 Z2 1.0\nZ2 Z3 1.0\nZ1 Z3 -1.0\n")
    code, out = run(capsys, "witness", "--in", str(path), "--degree", "4")
    assert code == 2
    assert "kind=contradiction" in out
    assert "CONTRADICTION" in out


def test_witness_lift(tmp_path, capsys):
    inst_path = tmp_path / "cyc"
    inst_path.write_text(
        "HKXOR v1 n=3 k=2 m=3 model=one-basis-z seed=0\n"
        "Z1 Z2 1.0\nZ2 Z3 -1.0\nZ1 Z3 1.0\n")
    moments = tmp_path / "pmom"
    # the point distribution at the optimal assignment (1, 1, 1)
    moments.write_text(
        "PMOM v1 n=3 d=4\n- 1\n1 1\n2 1\n3 1\n1,2 1\n1,3 1\n2,3 1\n1,2,3 1\n")
    code, out = run(capsys, "witness", "--in", str(inst_path), "--degree", "2",
                    "--lift", str(moments))
    assert code == 0
    assert "kind=lifted" in out
    assert "energy=" in out
    # brute-force optimum of the 3-cycle is 2/3
    line = next(l for l in out.splitlines() if l.startswith("energy="))
    assert abs(float(Fraction_from(line.split("=", 1)[1])) - 2 / 3) < 1e-12


def Fraction_from(text):
    from fractions import Fraction
    return Fraction(text)


def test_sweep_deterministic_across_jobs(tmp_path, capsys):
    args = ["sweep", "--n", "12", "--k", "2", "--ell", "1", "--eps", "0.9",
            "--m-grid", "12,24", "--seeds", "3"]
    code, out1 = run(capsys, *args, "--jobs", "1")
    assert code == 0
    code, out2 = run(capsys, *args, "--jobs", "4")
    assert code == 0
    assert out1 == out2
    assert "agg.m=12.success_fraction=" in out1


def test_sweep_empty_grid_is_usage_error(capsys):
    code = main(["sweep", "--n", "8", "--k", "2", "--ell", "1", "--eps", "0.5",
                 "--m-grid", "", "--seeds", "2"])
    capsys.readouterr()
    assert code == 3


def test_unknown_flag_usage_error(capsys):
    assert main(["certify", "--bogus"]) == 3
    capsys.readouterr()


def test_missing_file_usage_error(capsys):
    assert main(["certify", "--in", "/nonexistent", "--ell", "1"]) == 3
    capsys.readouterr()


def test_certify_empty_instance_file(tmp_path, capsys):
    path = tmp_path / "empty"
    path.write_text("HKXOR v1 n=4 k=2 m=0 model=explicit seed=0\n")
    code, out = run(capsys, "certify", "--in", str(path), "--ell", "1")
    assert code == 0
    fields = dict(l.split("=", 1) for l in out.splitlines() if "=" in l)
    assert float(fields["algval"]) == 0.5
    assert fields["algval_clamped"] == "0.5"
