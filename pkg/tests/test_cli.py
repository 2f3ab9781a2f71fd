import csv
import json

import numpy as np
import pytest

from aciq.cli import main
from aciq.quantizer import ChannelTensor
from aciq.tensor_io import read_tensor, write_tensor


def run(argv):
    return main(argv)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def weight_file(tmp_path):
    rng = np.random.default_rng(3)
    tensor = ChannelTensor((8, 64), 0, rng.standard_normal(512))
    path = tmp_path / "w.tensor"
    write_tensor(tensor, path)
    return path


class TestOptimalAlpha:
    @pytest.mark.parametrize(
        "bits,scale,expected,tol",
        [(4, 1.0, 5.03, 0.01), (3, 1.0, 3.89, 0.01), (2, 2.0, 5.66, 0.02)],
    )
    def test_prints_four_decimals(self, capsys, bits, scale, expected, tol):
        code = run(
            ["optimal-alpha", "--family", "laplace", "--bits", str(bits), "--scale", str(scale)]
        )
        assert code == 0
        out = capsys.readouterr().out.strip()
        assert len(out.split(".")[-1]) == 4
        assert abs(float(out) - expected) <= tol

    def test_missing_bits_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run(["optimal-alpha", "--family", "laplace"])
        assert exc.value.code == 2

    def test_unknown_family_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run(["optimal-alpha", "--family", "cauchy", "--bits", "4"])
        assert exc.value.code == 2


class TestMseCurve:
    def test_writes_deterministic_csv(self, tmp_path):
        args = [
            "mse-curve", "--bits", "4", "--alpha-min", "1", "--alpha-max", "3",
            "--alpha-step", "0.5", "--n", "2000", "--seed", "9",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        rows = read_csv(a)
        assert list(rows[0]) == ["alpha", "analytic", "empirical"]
        assert len(rows) == 5

    def test_minima_track_the_constants(self, tmp_path):
        for bits, expected in ((2, 2.83), (3, 3.89), (4, 5.03)):
            out = tmp_path / f"m{bits}.csv"
            assert run(
                [
                    "mse-curve", "--bits", str(bits), "--alpha-min", "0.5",
                    "--alpha-max", "10", "--alpha-step", "0.1", "--n", "100000",
                    "--seed", "42", "--out", str(out),
                ]
            ) == 0
            rows = read_csv(out)
            emp = np.array([float(r["empirical"]) for r in rows])
            alphas = np.array([float(r["alpha"]) for r in rows])
            assert abs(alphas[emp.argmin()] - expected) <= 0.3

    def test_small_n_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["mse-curve", "--bits", "4", "--n", "0", "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2

    def test_plot_renders_png(self, tmp_path):
        out = tmp_path / "c.csv"
        png = tmp_path / "c.png"
        assert run(
            [
                "mse-curve", "--bits", "4", "--alpha-min", "1", "--alpha-max", "4",
                "--alpha-step", "0.5", "--n", "2000", "--out", str(out),
                "--plot", str(png),
            ]
        ) == 0
        assert png.stat().st_size > 0
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unwritable_output_is_io_error(self, tmp_path):
        assert run(
            [
                "mse-curve", "--bits", "4", "--n", "2000",
                "--out", str(tmp_path / "no" / "dir" / "x.csv"),
            ]
        ) == 3


class TestQuantize:
    def test_weights_pipeline_writes_tensor_and_report(self, tmp_path, weight_file):
        out = tmp_path / "q.tensor"
        report = tmp_path / "q.csv"
        code = run(
            [
                "quantize", str(weight_file), "--role", "weights",
                "--methods", "bit_alloc_w,bias_corr", "--weight-bits", "4",
                "--out", str(out), "--report", str(report),
            ]
        )
        assert code == 0
        quantized = read_tensor(out)
        assert quantized.shape == (8, 64)
        rows = read_csv(report)
        assert rows[-1]["channel"] == "total"
        assert rows[-1]["seed"] == "42"
        assert len(rows) == 9
        assert {r["bits"] for r in rows[:-1]} != {""}

    def test_json_report(self, tmp_path, weight_file):
        report = tmp_path / "q.json"
        code = run(
            [
                "quantize", str(weight_file), "--role", "activations",
                "--methods", "aciq", "--out", str(tmp_path / "q.tensor"),
                "--report", str(report), "--format", "json",
            ]
        )
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["role"] == "activations"
        assert payload["seed"] == 42
        assert len(payload["channels"]) == 8

    def test_missing_input_is_io_error(self, tmp_path):
        code = run(
            [
                "quantize", str(tmp_path / "absent.tensor"), "--role", "weights",
                "--out", str(tmp_path / "q.tensor"),
            ]
        )
        assert code == 3

    def test_non_finite_input_is_numeric_error(self, tmp_path):
        path = tmp_path / "nan.tensor"
        header = b'{"magic":"aciq-tensor-v1","shape":[1,2],"channel_axis":0,"dtype":"f32le"}\n'
        payload = np.array([1.0, np.nan], dtype="<f4").tobytes()
        path.write_bytes(header + payload)
        code = run(
            ["quantize", str(path), "--role", "weights", "--out", str(tmp_path / "q.tensor")]
        )
        assert code == 4

    def test_unknown_method_is_numeric_error(self, tmp_path, weight_file):
        code = run(
            [
                "quantize", str(weight_file), "--role", "weights",
                "--methods", "sparsify", "--out", str(tmp_path / "q.tensor"),
            ]
        )
        assert code == 4


class TestCompare:
    def test_full_matrix_rows_and_ranking(self, tmp_path, weight_file):
        out = tmp_path / "cmp.csv"
        code = run(
            ["compare", str(weight_file), "--bits", "4", "--full-matrix", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 16
        assert rows[0]["combination"] == "none"
        assert rows[15]["combination"] == "aciq+bit_alloc_w+bit_alloc_a+bias_corr"

    def test_partial_matrix_consistency(self, tmp_path, weight_file):
        out = tmp_path / "cmp.csv"
        assert run(["compare", str(weight_file), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert [r["combination"] for r in rows] == ["none"]


class TestKldCompare:
    def test_synthetic_rows_and_speed(self, tmp_path):
        out = tmp_path / "kld.csv"
        code = run(
            ["kld-compare", "--n", "10000", "--bits", "4", "--seed", "5", "--out", str(out)]
        )
        assert code == 0
        rows = {r["method"]: r for r in read_csv(out)}
        assert set(rows) == {"aciq", "kld", "naive"}
        assert float(rows["aciq"]["microseconds"]) < float(rows["kld"]["microseconds"])
        assert float(rows["aciq"]["mse"]) <= 1.10 * float(rows["kld"]["mse"])
        assert float(rows["naive"]["threshold"]) == pytest.approx(
            float(rows["naive"]["threshold"])
        )

    def test_tensor_input(self, tmp_path, weight_file):
        out = tmp_path / "kld.csv"
        assert run(["kld-compare", str(weight_file), "--bits", "4", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 3


class TestAllocBits:
    def test_alphas_flag(self, tmp_path):
        out = tmp_path / "alloc.csv"
        assert run(["alloc-bits", "--alphas", "1,8", "--avg-bits", "4", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert [r["bits"] for r in rows] == ["3", "5"]

    def test_requires_exactly_one_source(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["alloc-bits", "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2

    def test_tensor_source(self, tmp_path, weight_file):
        out = tmp_path / "alloc.csv"
        assert run(["alloc-bits", "--tensor", str(weight_file), "--out", str(out)]) == 0
        assert len(read_csv(out)) == 8

    def test_degenerate_layer_is_numeric_error(self, tmp_path):
        code = run(["alloc-bits", "--alphas", "0,0", "--out", str(tmp_path / "x.csv")])
        assert code == 4


class TestBiasCorrect:
    def test_corrects_moments_through_files(self, tmp_path, weight_file):
        quantized_path = tmp_path / "q.tensor"
        assert run(
            [
                "quantize", str(weight_file), "--role", "weights",
                "--weight-bits", "3", "--out", str(quantized_path),
            ]
        ) == 0
        corrected_path = tmp_path / "c.tensor"
        report = tmp_path / "bc.csv"
        code = run(
            [
                "bias-correct", str(weight_file), str(quantized_path),
                "--out", str(corrected_path), "--report", str(report),
            ]
        )
        assert code == 0
        original = read_tensor(weight_file)
        corrected = read_tensor(corrected_path)
        np.testing.assert_allclose(
            corrected.channels().mean(axis=1),
            original.channels().mean(axis=1),
            rtol=1e-6,
            atol=1e-7,
        )
        rows = read_csv(report)
        assert set(rows[0]) == {"channel", "mu", "xi", "mse_before", "mse_after"}


class TestTwoChannelExperiment:
    def test_table_summary_and_plot(self, tmp_path, capsys):
        out = tmp_path / "two.csv"
        png = tmp_path / "two.png"
        code = run(
            [
                "two-channel-experiment", "--alpha-i", "1", "--alpha-j", "8",
                "--quota", "32", "--n", "20000", "--seed", "42",
                "--out", str(out), "--plot", str(png),
            ]
        )
        assert code == 0
        assert len(read_csv(out)) == 31
        printed = capsys.readouterr().out
        assert "best=" in printed and "predicted=(6.40,25.60)" in printed
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_json_payload(self, tmp_path):
        out = tmp_path / "two.json"
        assert run(
            [
                "two-channel-experiment", "--alpha-i", "1", "--alpha-j", "1",
                "--quota", "8", "--n", "5000", "--format", "json", "--out", str(out),
            ]
        ) == 0
        payload = json.loads(out.read_text())
        assert payload["quota"] == 8
        assert len(payload["rows"]) == 7
        assert payload["seed"] == 42

    def test_small_quota_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(
                [
                    "two-channel-experiment", "--alpha-i", "1", "--alpha-j", "1",
                    "--quota", "2", "--out", str(tmp_path / "x.csv"),
                ]
            )
        assert exc.value.code == 2
