import csv
import json
import os
import re

import numpy as np
import pytest

from multidim_fs.cli import main
from multidim_fs.dataset import Dataset, load_madelon, make_parity_dataset, write_matrix_csv
from multidim_fs.io import load_result
from multidim_fs.pipeline import MdfsParams, relevant_variables, run_mdfs


@pytest.fixture(scope="module")
def parity_csv(tmp_path_factory):
    ds, base, _ = make_parity_dataset(n_objects=400, n_base=3, n_combined=2, n_noise=20, seed=8)
    path = tmp_path_factory.mktemp("data") / "parity.csv"
    write_matrix_csv(ds, str(path))
    return str(path), base


@pytest.fixture
def toy4(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "toy.csv"
    write_matrix_csv(Dataset(rng.normal(size=(20, 4)), rng.permutation(np.arange(20) % 2)), str(path))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_json(parity_csv, tmp_path, capsys):
    data, base = parity_csv
    out = tmp_path / "r.json"
    code = main(["run", "--data", data, "--dimensions", "2", "--seed", "4", "-o", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    for key in ("statistic", "p_value", "adjusted_p_value", "relevant", "fit", "params", "seed", "timing"):
        assert key in d
    assert d["fit"]["mode"] == "exp" and d["seed"] == 4
    assert set(base.tolist()) <= set(d["relevant"])
    summary = capsys.readouterr().out
    assert "relevant of 25 variables" in summary
    # summary lists names ordered by p-value
    listed = summary.split("by p-value: ")[1].split()
    assert listed == d["relevant_names"]
    result = load_result(out)
    np.testing.assert_array_equal(relevant_variables(result)[0], d["relevant"])


def test_run_csv_format(parity_csv, tmp_path):
    data, _ = parity_csv
    out = tmp_path / "r.csv"
    assert main(["run", "--data", data, "--seed", "1", "--format", "csv", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["variable", "name", "statistic", "p_value", "adjusted_p_value", "relevant"]
    assert len(rows) == 26
    float(rows[1][2])


def test_workers_and_repeat_identical(parity_csv, tmp_path):
    data, _ = parity_csv
    outs = []
    for i, w in enumerate(["1", "8", "1"]):
        out = tmp_path / f"r{i}.json"
        args = ["run", "--data", data, "--dimensions", "2", "--discretizations", "3",
                "--seed", "77", "--workers", w, "--no-timing", "-o", str(out)]
        assert main(args) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_missing_file_exit_3(tmp_path, capsys):
    missing = str(tmp_path / "nope.csv")
    assert main(["run", "--data", missing]) == 3
    assert missing in capsys.readouterr().err


def test_dimensions_6_exit_2(toy4, capsys):
    with pytest.raises(SystemExit) as e:
        main(["run", "--data", toy4, "--dimensions", "6"])
    assert e.value.code == 2
    assert "dimensions must be 1..5" in capsys.readouterr().err


@pytest.mark.parametrize("flags", [["--adjust", "bonf"], ["--level", "0"], ["--range", "2"], ["--bogus"]])
def test_bad_flags_exit_2(toy4, flags):
    with pytest.raises(SystemExit) as e:
        main(["run", "--data", toy4, *flags])
    assert e.value.code == 2


def test_both_inputs_rejected(toy4):
    with pytest.raises(SystemExit) as e:
        main(["run", "--data", toy4, "--madelon-data", toy4, "--madelon-labels", toy4])
    assert e.value.code == 2


def test_data_error_leaves_no_output(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,decision\n1,1\n2,1\n3,1\n4,1\n")
    out = tmp_path / "r.json"
    assert main(["run", "--data", str(bad), "-o", str(out)]) == 3
    assert not out.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["bad.csv"]


def test_tuples_header_only(toy4, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["tuples", "--data", toy4, "--dimensions", "2", "--threshold", "1e300", "-o", str(out)]) == 0
    assert read_csv(out) == [["variable", "name", "member1", "member2", "ig"]]


def test_tuples_exhaustive(toy4, tmp_path):
    out = tmp_path / "t.csv"
    # smoothed statistics can dip below -1, so -inf is the exhaustive cut
    assert main(["tuples", "--data", toy4, "--dimensions", "2", "--threshold=-inf", "-o", str(out)]) == 0
    rows = read_csv(out)[1:]
    assert len(rows) == 12
    keys = [(int(r[0]), int(r[2]), int(r[3])) for r in rows]
    assert keys == sorted(keys)
    for v, a, b in keys:
        assert v in (a, b) and a < b


def test_tuples_alpha_covers_relevant(parity_csv, tmp_path):
    data, _ = parity_csv
    res = tmp_path / "r.json"
    main(["run", "--data", data, "--dimensions", "2", "--contrast", "0", "--seed", "0",
          "--adjust", "holm", "-o", str(res)])
    relevant = set(json.loads(res.read_text())["relevant"])
    out = tmp_path / "t.csv"
    assert main(["tuples", "--data", data, "--dimensions", "2", "--alpha", "0.05", "-o", str(out)]) == 0
    covered = {int(r[0]) for r in read_csv(out)[1:]}
    assert relevant <= covered


def test_tuples_rejects_k1(toy4):
    with pytest.raises(SystemExit) as e:
        main(["tuples", "--data", toy4, "--dimensions", "1", "--threshold", "0"])
    assert e.value.code == 2


def test_ttest_constant_and_identical(tmp_path, capsys):
    path = tmp_path / "tt.csv"
    path.write_text("c,same,shift,decision\n5,1,1,0\n5,2,2,0\n5,3,3,0\n5,1,11,1\n5,2,12,1\n5,3,13,1\n")
    out = tmp_path / "p.csv"
    assert main(["ttest", "--data", str(path), "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["variable", "name", "p_value", "adjusted_p_value", "error"]
    assert rows[1][4] == "degenerate groups" and rows[1][2] == ""
    assert float(rows[2][2]) == 1.0
    assert float(rows[3][2]) < 1e-3
    text = capsys.readouterr().out
    assert "1 significant" in text and "shift" in text and "skipped" in text


def count_filled(svg):
    return len(re.findall(r'class="relevant"', svg))


def test_plot_deterministic(parity_csv, tmp_path):
    data, _ = parity_csv
    res = tmp_path / "r.json"
    main(["run", "--data", data, "--dimensions", "2", "--seed", "2", "-o", str(res)])
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert main(["plot", str(res), "-o", str(a)]) == 0
    assert main(["plot", str(res), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    svg = a.read_text()
    n_rel = len(json.loads(res.read_text())["relevant"])
    assert count_filled(svg) == n_rel
    assert len(re.findall(r'class="irrelevant"', svg)) == 25 - n_rel
    assert 'class="ig-limit"' in svg


def test_plot_empty_relevant(toy4, tmp_path):
    res = tmp_path / "r.json"
    main(["run", "--data", toy4, "--seed", "0", "--contrast", "0", "--level", "1e-9", "-o", str(res)])
    assert json.loads(res.read_text())["relevant"] == []
    svg = tmp_path / "e.svg"
    assert main(["plot", str(res), "-o", str(svg)]) == 0
    assert count_filled(svg.read_text()) == 0


def test_plot_malformed_exit_3(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["plot", str(bad), "-o", str(tmp_path / "x.svg")]) == 3
    bad.write_text('{"schema_version": 1}')
    assert main(["plot", str(bad), "-o", str(tmp_path / "x.svg")]) == 3


def test_madelon_format_input(tmp_path):
    ds, _, _ = make_parity_dataset(n_objects=300, n_base=3, n_combined=0, n_noise=497, seed=4)
    ints = np.round(ds.features * 100 + 500).astype(int)
    data = tmp_path / "m.data"
    data.write_text("".join(" ".join(map(str, row)) + " \n" for row in ints))
    labels = tmp_path / "m.labels"
    labels.write_text("".join(f"{2 * int(v) - 1}\n" for v in ds.decision))
    out = tmp_path / "r.json"
    argv = ["run", "--madelon-data", str(data), "--madelon-labels", str(labels),
            "--dimensions", "2", "--seed", "0", "-o", str(out)]
    assert main(argv) == 0
    d = json.loads(out.read_text())
    assert len(d["statistic"]) == 500
    assert d["variable_names"][0] == "V1"
    direct = run_mdfs(load_madelon(str(data), str(labels)), MdfsParams(dimensions=2, seed=0))
    assert d["statistic"] == direct.statistic.tolist()


MADELON = os.environ.get("MDFS_MADELON_DIR")
needs_madelon = pytest.mark.skipif(
    not MADELON or not os.path.isfile(os.path.join(MADELON or "", "madelon_train.data")),
    reason="Madelon data not available; set MDFS_MADELON_DIR",
)


@needs_madelon
def test_madelon_2d_tuples_and_plot(tmp_path):
    src = ["--madelon-data", os.path.join(MADELON, "madelon_train.data"),
           "--madelon-labels", os.path.join(MADELON, "madelon_train.labels")]
    res = tmp_path / "r.json"
    assert main(["run", *src, "--dimensions", "2", "--range", "0", "--contrast", "0",
                 "--seed", "0", "-o", str(res)]) == 0
    relevant = set(json.loads(res.read_text())["relevant"])
    assert len(relevant) == 19
    out = tmp_path / "t.csv"
    assert main(["tuples", *src, "--dimensions", "2", "--alpha", "0.05", "-o", str(out)]) == 0
    assert relevant <= {int(r[0]) for r in read_csv(out)[1:]}
    svg = tmp_path / "p.svg"
    assert main(["plot", str(res), "-o", str(svg)]) == 0
    assert count_filled(svg.read_text()) == 19
