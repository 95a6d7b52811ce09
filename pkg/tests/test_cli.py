import pytest

from evolsort import acceptance
from evolsort.cli import (
    CSV_HEADER,
    UsageError,
    build_parser,
    emit_csv,
    load_config_file,
    main,
    parse_config,
)
from evolsort.model import TrajectoryRecord


def test_parse_basic_run_flags():
    args = build_parser().parse_args(
        "run --n 256 --b 2 --dist adjacent --steps 1000000 --seed 42".split())
    config = parse_config(args)
    assert (config.n, config.b, config.steps, config.seed) == (256, 2, 1_000_000, 42)
    assert config.perturbation().kind == "adjacent"


def test_geometric_dist_syntax():
    args = build_parser().parse_args("run --dist geometric:0.5".split())
    spec = parse_config(args).perturbation()
    assert spec.kind == "geometric" and spec.p == 0.5


def test_geometric_dist_rejects_bad_probability():
    args = build_parser().parse_args("run --dist geometric:1.5".split())
    with pytest.raises(UsageError):
        parse_config(args)
    assert main("run --dist geometric:1.5".split()) == 1


def test_unknown_config_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("n=8\nfrobnicate=1\n")
    with pytest.raises(UsageError, match="frobnicate"):
        load_config_file(str(path))
    assert main(["run", "--config", str(path)]) == 1


def test_config_file_and_flag_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nn=32\nb=3\nsteps=500\naux=true\n")
    args = build_parser().parse_args(["run", "--config", str(path), "--b", "1"])
    config = parse_config(args)
    assert (config.n, config.b, config.steps, config.aux) == (32, 1, 500, True)


def test_print_config_roundtrip(tmp_path):
    args = build_parser().parse_args(
        "run --n 17 --b 2 --dist geometric:0.25 --steps 77 --seed 5 "
        "--record-every 10 --aux --d 3 --alpha 1.5 --start identity".split())
    config = parse_config(args)
    path = tmp_path / "echo.cfg"
    path.write_text(config.print_lines())
    args2 = build_parser().parse_args(["run", "--config", str(path)])
    assert parse_config(args2) == config


def test_emit_csv_empty(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv([], str(path))
    assert path.read_text() == CSV_HEADER + "\n"


def test_emit_csv_fields(tmp_path):
    records = [
        TrajectoryRecord(1, 0, 2, 3, 4, None, None, None, 1, 0),
        TrajectoryRecord(5, 1, 2, 3, 4, 1234.56789, 7.0, 3, 3, 2),
    ]
    path = tmp_path / "out.csv"
    emit_csv(records, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "1,0,2,3,4,,,,1,0"
    assert lines[2] == "5,1,2,3,4,1234.57,7,3,3,2"
    steps = [int(line.split(",")[0]) for line in lines[1:]]
    assert steps == sorted(steps)


def test_run_subcommand_writes_deterministic_csv(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    base = "run --n 32 --b 1 --steps 2000 --seed 9 --record-every 500 --out".split()
    assert main(base + [str(out1)]) == 0
    assert main(base + [str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, first = out1.read_text().splitlines()[:2]
    assert header == CSV_HEADER


def test_run_subcommand_with_aux(tmp_path):
    out = tmp_path / "aux.csv"
    assert main(f"run --n 16 --b 1 --steps 200 --seed 2 --aux --out {out}".split()) == 0
    last = out.read_text().splitlines()[-1]
    phi_field = last.split(",")[5]
    assert phi_field != ""


def test_schedule_file(tmp_path):
    sched = tmp_path / "sched.txt"
    sched.write_text("0\n2\n0\n2\n" * 200)
    out = tmp_path / "out.csv"
    code = main(f"run --n 8 --steps 100 --schedule explicit:{sched} --out {out}".split())
    assert code == 0


def test_table_dist_file(tmp_path):
    table = tmp_path / "table.txt"
    table.write_text("-1 1\n1 1\n")
    out = tmp_path / "out.csv"
    assert main(f"run --n 8 --steps 100 --dist table:{table} --out {out}".split()) == 0


def test_lb_converge_subcommand(tmp_path):
    out = tmp_path / "conv.csv"
    code = main(f"lb-converge --n 16 --seeds 2 --initial-mdev 4 --out {out}".split())
    assert code == 0
    assert "fraction_slow" in out.read_text()


def test_verify_exit_codes(monkeypatch):
    monkeypatch.setattr(acceptance, "CRITERIA",
                        [(99, "always green", lambda: (True, "ok"))])
    assert main(["verify"]) == 0
    monkeypatch.setattr(acceptance, "CRITERIA",
                        [(99, "always red", lambda: (False, "boom"))])
    assert main(["verify"]) == 3


def test_missing_subcommand_is_usage_error():
    assert main([]) == 1


def test_runtime_error_exit_code(tmp_path):
    # explicit schedule exhausted mid-run surfaces as a runtime failure
    sched = tmp_path / "short.txt"
    sched.write_text("1\n")
    code = main(f"run --n 8 --steps 500 --schedule explicit:{sched} --out -".split())
    assert code == 2
