import numpy as np
import pytest

from cvteleport import ParseError, parse_config, parse_grid
from cvteleport.cli import main
from cvteleport.optics import IDEAL


BASE = """\
input = bundled:silhouette
grid = -256:256:1024
output_dir = {out}
seed = 11

[scenario]
label = ideal
sigma_a = ideal
sigma_b = ideal
x3 = 0
p4 = 0

[scenario]
label = conv
sigma_a = 0.185185
sigma_b = ideal
x3 = 0
p4 = 2.7
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_config_basics(tmp_path):
    path = write_config(tmp_path, BASE.format(out=tmp_path / "out"))
    cfg = parse_config(path)
    assert cfg.seed == 11
    assert cfg.grid.n == 1024
    assert len(cfg.scenarios) == 2
    assert cfg.scenarios[0].sigma_a is IDEAL
    assert cfg.scenarios[1].p4 == 2.7


def test_parse_grid_spec():
    g = parse_grid("-256:256:1024")
    assert g.x_min == -256.0 and g.n == 1024 and g.dx == 0.5
    with pytest.raises(ParseError):
        parse_grid("0:10")
    with pytest.raises(ParseError):
        parse_grid("0:10:100")  # not a power of two


def test_parse_config_rejects_unknown_keys(tmp_path):
    path = write_config(tmp_path, "input = x\nwhatever = 3\noutput_dir = o\n")
    with pytest.raises(ParseError) as err:
        parse_config(path)
    assert err.value.line == 2


def test_parse_config_duplicate_labels(tmp_path):
    text = BASE.format(out=tmp_path) + "\n[scenario]\nlabel = conv\nsigma_a = 1\nsigma_b = 1\nx3 = 0\np4 = 0\n"
    with pytest.raises(ParseError):
        parse_config(write_config(tmp_path, text))


def test_parse_config_missing_required(tmp_path):
    with pytest.raises(ParseError):
        parse_config(write_config(tmp_path, "output_dir = o\n"))


def test_parse_config_bad_width(tmp_path):
    text = "input = x\noutput_dir = o\n[scenario]\nlabel = a\nsigma_a = perfect\nsigma_b = 1\nx3 = 0\np4 = 0\n"
    with pytest.raises(ParseError):
        parse_config(write_config(tmp_path, text))


def test_cli_run_success_and_outputs(tmp_path):
    out = tmp_path / "out"
    path = write_config(tmp_path, BASE.format(out=out))
    assert main(["run", str(path)]) == 0
    report = (out / "report.csv").read_text().splitlines()
    assert report[0] == "label,sigma_a,sigma_b,x3,p4,fidelity,l2_distortion"
    assert report[1].startswith("ideal,ideal,ideal,0.0,0.0,1.0,")
    assert (out / "conv_teleported.txt").exists()
    assert (out / "conv_teleported_p.txt").exists()
    assert (out / "conv_kernel.csv").exists()


def test_cli_run_is_byte_identical(tmp_path):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    text = BASE + "\n[scenario]\nlabel = sampled\nsigma_a = 0.5\nsigma_b = 40\nx3 = sample\np4 = sample\nseed = 3\ngrid = -1024:1024:4096\n"
    p1 = write_config(tmp_path, text.format(out=out1), "a.cfg")
    p2 = write_config(tmp_path, text.format(out=out2), "b.cfg")
    assert main(["run", str(p1)]) == 0
    assert main(["run", str(p2)]) == 0
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
    assert (out1 / "sampled_teleported.txt").read_bytes() == (
        out2 / "sampled_teleported.txt"
    ).read_bytes()


def test_cli_exit_codes(tmp_path):
    # config failure -> 1
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    # usage failure -> 1
    assert main(["kernel", "--sigma-a", "0.5"]) == 1
    # partial scenario failure -> 2, report still written
    out = tmp_path / "out"
    text = BASE.format(out=out) + (
        "\n[scenario]\nlabel = doomed\nsigma_a = ideal\nsigma_b = 1.0\n"
        "x3 = 10000\np4 = 0\n"
    )
    path = write_config(tmp_path, text, "partial.cfg")
    assert main(["run", str(path)]) == 2
    lines = (out / "report.csv").read_text().splitlines()
    assert lines[-1].startswith("doomed,") and lines[-1].endswith(",nan,nan")


def test_cli_empty_scenarios_is_config_error(tmp_path):
    path = write_config(tmp_path, f"input = bundled:silhouette\noutput_dir = {tmp_path/'o'}\n")
    assert main(["run", str(path)]) == 1


def test_cli_seed_override_changes_sampled_outcomes(tmp_path):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    text = (
        "input = bundled:silhouette\ngrid = -1024:1024:4096\noutput_dir = {out}\n"
        "seed = 1\n\n[scenario]\nlabel = s\nsigma_a = 0.5\nsigma_b = 40\n"
        "x3 = sample\np4 = sample\n"
    )
    p1 = write_config(tmp_path, text.format(out=out1), "s1.cfg")
    p2 = write_config(tmp_path, text.format(out=out2), "s2.cfg")
    assert main(["run", str(p1)]) == 0
    assert main(["run", str(p2), "--seed", "999"]) == 0
    row1 = (out1 / "report.csv").read_text().splitlines()[1]
    row2 = (out2 / "report.csv").read_text().splitlines()[1]
    assert row1 != row2


def test_cli_grid_override(tmp_path):
    out = tmp_path / "out"
    text = (
        "input = bundled:silhouette\ngrid = -256:256:1024\noutput_dir = {out}\n\n"
        "[scenario]\nlabel = m\nsigma_a = ideal\nsigma_b = 50\nx3 = 100\np4 = 0\n"
    )
    path = write_config(tmp_path, text.format(out=out))
    # default grid violates the span rule for this scenario -> partial failure
    assert main(["run", str(path)]) == 2
    # a wider override grid satisfies it
    assert main(["run", str(path), "--grid", "-1024:1024:4096"]) == 0


def test_cli_kernel_and_envelope_outputs(tmp_path):
    kcsv = tmp_path / "k.csv"
    assert main(
        ["kernel", "--sigma-a", "0.185185", "--p4", "2.7", "--window", "-3:3", "-o", str(kcsv)]
    ) == 0
    lines = kcsv.read_text().splitlines()
    assert lines[0] == "u,real,imag"
    u, re, im = map(float, lines[1].split(","))
    assert u == -3.0

    ecsv = tmp_path / "e.csv"
    assert main(
        ["envelope", "--sigma-b", "280", "--x3", "-280", "--window", "0:100", "-o", str(ecsv)]
    ) == 0
    lines = ecsv.read_text().splitlines()
    assert lines[0] == "x,value"
    x0, v0 = map(float, lines[1].split(","))
    assert v0 == pytest.approx(np.exp(-((0 + np.sqrt(2) * 280.0) / 280.0) ** 2))


def test_cli_info_prints_moments(tmp_path, capsys):
    assert main(["info", "bundled:silhouette"]) == 0
    captured = capsys.readouterr().out
    assert "mean_x = 49.956785559" in captured
    assert "support_length = 100.5" in captured


def test_threads_env_cap(tmp_path, monkeypatch):
    out = tmp_path / "out"
    path = write_config(tmp_path, BASE.format(out=out))
    monkeypatch.setenv("TELEPORT_THREADS", "1")
    assert main(["run", str(path)]) == 0
    monkeypatch.setenv("TELEPORT_THREADS", "zero")
    assert main(["run", str(path)]) == 1


def test_cli_image_run(tmp_path):
    from cvteleport import ImageAsset, save_image

    rng = np.random.default_rng(4)
    img = ImageAsset(
        pixels=np.rint(rng.uniform(30, 220, (32, 24))), maxval=255
    )
    img_path = tmp_path / "input.pgm"
    save_image(img_path, img)
    out = tmp_path / "out"
    text = (
        f"input = {img_path}\noutput_dir = {out}\n\n"
        "[scenario]\nlabel = ideal\nsigma_a = ideal\nsigma_b = ideal\nx3 = 0\np4 = 0\n\n"
        "[scenario]\nlabel = blur\nsigma_a = 1.2\nsigma_b = ideal\nx3 = 0\np4 = 0.4\n"
    )
    path = write_config(tmp_path, text, "img.cfg")
    assert main(["run", str(path)]) == 0
    assert (out / "ideal.pgm").exists()
    assert (out / "blur.pgm").exists()
    assert (out / "blur_intensity.txt").exists()
    from cvteleport import load_image

    back = load_image(out / "ideal.pgm")
    assert np.max(np.abs(back.pixels - img.pixels)) <= 1.0


def test_shipped_scenario_config_reproduces_frozen_fidelities(tmp_path, monkeypatch):
    from pathlib import Path
    from test_acceptance import FROZEN_FIDELITIES

    shipped = Path(__file__).resolve().parent.parent / "configs" / "reference_scenarios.cfg"
    monkeypatch.chdir(tmp_path)
    assert main(["run", str(shipped)]) == 0
    rows = (tmp_path / "out" / "report.csv").read_text().splitlines()[1:]
    assert len(rows) == 10
    for row in rows:
        fields = row.split(",")
        label, fid = fields[0], float(fields[5])
        assert fid == pytest.approx(FROZEN_FIDELITIES[label], abs=1e-6)


def test_cli_image_rejects_sampling(tmp_path):
    from cvteleport import ImageAsset, save_image

    img = ImageAsset(pixels=np.full((16, 16), 100.0), maxval=255)
    img_path = tmp_path / "input.pgm"
    save_image(img_path, img)
    text = (
        f"input = {img_path}\noutput_dir = {tmp_path/'o'}\n\n"
        "[scenario]\nlabel = s\nsigma_a = 1\nsigma_b = 2\nx3 = sample\np4 = 0\n"
    )
    path = write_config(tmp_path, text, "img.cfg")
    assert main(["run", str(path)]) == 1
