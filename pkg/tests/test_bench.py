"""Benchmark harness: records, sweeps, CSV emission, verify, CLI wiring."""

import math

import numpy as np
import pytest

from dualgrad.bench import (
    BenchRecord,
    CSV_HEADER,
    emit_csv,
    input_vector,
    main,
    read_csv,
    run_chunk_sweep,
    run_size_sweep,
    verify,
)


# ----------------------------------------------------------------------
# records
# ----------------------------------------------------------------------


def test_record_validation():
    BenchRecord("ackley", 10, 2, 1, 3, 0.5, 0.6)
    with pytest.raises(ValueError):
        BenchRecord("ackley", 10, 2, 1, 2, 0.5, 0.6)  # reps < 3
    with pytest.raises(ValueError):
        BenchRecord("ackley", 10, 2, 1, 3, 0.7, 0.6)  # min > mean


def test_input_vectors_are_seed_stable():
    a = input_vector("rosenbrock", 50, seed=7)
    b = input_vector("rosenbrock", 50, seed=7)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, input_vector("rosenbrock", 50, seed=8))
    assert np.all(np.abs(a) <= 2.0)
    assert np.all(np.abs(input_vector("ackley", 50)) <= 1.0)


# ----------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------


def test_chunk_sweep_shape():
    records = run_chunk_sweep("rosenbrock", 24, [1, 2, 4], reps=3)
    assert [r.chunk for r in records] == [1, 2, 4]
    assert all(r.k == 24 and r.reps == 3 and r.threads == 1 for r in records)
    assert all(r.min_seconds <= r.mean_seconds for r in records)
    single = run_chunk_sweep("ackley", 16, [1], reps=3)
    assert len(single) == 1


def test_chunk_sweep_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_chunk_sweep("nope", 16, [1], reps=3)
    with pytest.raises(ValueError):
        run_chunk_sweep("ackley", 16, [0], reps=3)


def test_size_sweep_shape():
    records = run_size_sweep("ackley", [8, 32], chunk=4, threads=1, reps=3)
    assert [r.k for r in records] == [8, 32]
    assert all(r.chunk == 4 for r in records)


def test_size_sweep_time_grows_with_work():
    # spaced far enough apart that timer noise cannot reorder them
    records = run_size_sweep("rosenbrock", [16, 512, 8192], chunk=8, threads=1, reps=3)
    times = [r.min_seconds for r in records]
    assert times[0] < times[2]
    inversions = sum(1 for a, b in zip(times, times[1:]) if a > b)
    assert inversions <= 1


# ----------------------------------------------------------------------
# csv
# ----------------------------------------------------------------------


def test_emit_csv_shape_and_roundtrip(tmp_path):
    records = run_chunk_sweep("rosenbrock", 12, [1, 2, 3, 4, 6], reps=3)
    path = tmp_path / "sweep.csv"
    emit_csv(records, path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert len([l for l in lines if l]) == 6  # header + 5 records
    assert "\r" not in text
    assert read_csv(path) == records


def test_emit_csv_rejects_empty():
    with pytest.raises(ValueError):
        emit_csv([], "anything.csv")


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------


def test_verify_passes_on_healthy_setup():
    report = verify("rosenbrock", k=100, chunk=8)
    assert report.passed
    assert report.passes == report.expected_passes == math.ceil(100 / 8)
    assert report.ad_vs_analytic[0] <= 1e-10
    assert report.chunk_invariant

    report = verify("ackley", k=50, chunk=10)
    assert report.passed


def test_verify_at_the_minimum_reports_exact_zeros():
    # ones is the rosenbrock minimum: every gradient entry is exactly 0
    report = verify("rosenbrock", k=30, chunk=4, x=np.ones(30))
    assert report.passed
    assert report.gradient_infnorm == 0.0
    assert report.ad_vs_analytic == (0.0, 0)


def test_verify_fails_when_tolerance_is_absurd():
    report = verify("ackley", k=40, chunk=8, tol=1e-30)
    assert not report.passed


# ----------------------------------------------------------------------
# command line
# ----------------------------------------------------------------------


def test_cli_chunk_sweep_writes_csv(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code = main([
        "chunk-sweep", "--function", "rosenbrock", "--size", "16",
        "--chunks", "1,2", "--reps", "3", "--csv", str(path),
    ])
    assert code == 0
    assert path.exists()
    out = capsys.readouterr().out
    assert out.startswith(",".join(CSV_HEADER))


def test_cli_size_sweep_runs(capsys):
    code = main([
        "size-sweep", "--function", "ackley", "--sizes", "8,16",
        "--chunk", "4", "--threads", "2", "--reps", "3",
    ])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 3


def test_cli_verify_pass_and_fail(capsys):
    assert main(["verify", "--function", "rosenbrock", "--size", "60", "--chunk", "6"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "max rel err" in out

    assert main([
        "verify", "--function", "rosenbrock", "--size", "60",
        "--chunk", "6", "--tol", "1e-30",
    ]) == 1
    captured = capsys.readouterr()
    assert "FAIL" in captured.err


def test_cli_usage_errors_exit_2():
    bad_invocations = [
        ["chunk-sweep", "--function", "unknown", "--size", "16", "--chunks", "1"],
        ["chunk-sweep", "--function", "ackley", "--size", "16",
         "--chunks", "1", "--reps", "2"],
        ["chunk-sweep", "--function", "ackley", "--size", "16", "--chunks", "0,2"],
        ["chunk-sweep", "--function", "rosenbrock", "--size", "1", "--chunks", "1"],
        ["size-sweep", "--function", "ackley", "--sizes", "8", "--threads", "0"],
        [],
    ]
    for argv in bad_invocations:
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2, argv


def test_cli_unwritable_csv_exits_1(tmp_path, capsys):
    code = main([
        "chunk-sweep", "--function", "ackley", "--size", "8",
        "--chunks", "1", "--reps", "3",
        "--csv", str(tmp_path / "missing_dir" / "out.csv"),
    ])
    assert code == 1
    assert "cannot write" in capsys.readouterr().err
