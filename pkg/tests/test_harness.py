from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab import __version__, identity_map, sample_boundary
from vortexlab.cli import main
from vortexlab.harness import (
    FIGURE_MAPS,
    PRESETS,
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    preset,
    run,
)

from .conftest import quartic


def cfg(experiment, domain=None, **kw):
    raw = {"domain": domain or {"kind": "identity", "label": "disk"}, "experiment": experiment}
    raw.update(kw)
    return ExperimentConfig.parse(json.dumps(raw))


def test_presets_exist():
    assert set(PRESETS) >= {"disk-orbit", "fig2-boundaries", "fig5-curves",
                            "thm-power-confinement", "unstable-log-exit", "lemdev-rate"}


def test_preset_examples():
    c = preset("disk-orbit")
    assert c.experiment == "single_vortex"
    assert c.domain["kind"] == "identity"
    assert c.params["z0"] == [0.5, 0.0]
    assert c.numeric["dt"] == 1e-3
    c = preset("thm-power-confinement")
    assert c.experiment == "blob_confinement"
    assert c.build_map() == quartic().__class__.from_dict(FIGURE_MAPS["fig2-right"])
    assert c.numeric["epsilon"] == 0.05 and c.numeric["beta"] == 0.45


def test_unknown_preset_lists_names():
    with pytest.raises(ConfigError, match="disk-orbit"):
        preset("nonexistent")


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_round_trip(name):
    c = preset(name)
    text = c.serialize()
    again = ExperimentConfig.parse(text)
    assert again == c
    assert again.serialize() == text


@settings(max_examples=40, deadline=None)
@given(dt=st.floats(1e-6, 1.0), beta=st.floats(0.01, 0.49), seed=st.integers(0, 2**63),
       eps=st.lists(st.floats(1e-6, 0.2), min_size=1, max_size=5, unique=True))
def test_config_round_trip_property(dt, beta, seed, eps):
    eps = sorted(eps, reverse=True)
    c = cfg("exit_sweep", numeric={"dt": dt, "beta": beta, "rng_seed": seed, "epsilons": eps})
    assert ExperimentConfig.parse(c.serialize()).serialize() == c.serialize()


@pytest.mark.parametrize("numeric,experiment", [
    ({"dt": 0}, "single_vortex"),
    ({"dt": -1e-3}, "single_vortex"),
    ({"beta": 0.5}, "blob_confinement"),
    ({"beta": 0.0}, "blob_confinement"),
    ({"epsilons": []}, "exit_sweep"),
    ({"epsilons": [0.01, 0.02]}, "exit_sweep"),
    ({"epsilons": [0.02, 0.02]}, "unstable_sweep"),
    ({"bogus": 1}, "single_vortex"),
])
def test_validation_errors(numeric, experiment):
    with pytest.raises(ConfigError):
        cfg(experiment, numeric=numeric)


def test_unknown_experiment_and_domain():
    with pytest.raises(ConfigError):
        cfg("teleport")
    with pytest.raises(ConfigError):
        cfg("classify", domain={"kind": "ellipse"})


def test_overrides():
    c = apply_overrides(preset("disk-orbit"), ["numeric.dt=0.002", "params.z0=[0.3, 0.1]",
                                               "output.prefix=out/x"])
    assert c.numeric["dt"] == 0.002
    assert c.params["z0"] == [0.3, 0.1]
    assert c.output["prefix"] == "out/x"
    with pytest.raises(ConfigError):
        apply_overrides(c, ["numeric.dt=0"])


def test_sample_boundary_examples():
    pts = sample_boundary(identity_map(), 16)
    assert len(pts) == 17 and pts[0] == pts[-1]
    four = identity_map().boundary(4)
    assert np.allclose(four, [1, 1j, -1, -1j, 1], atol=1e-15)
    with pytest.raises(ValueError):
        sample_boundary(identity_map(), 8)


def test_stationary_scan_output(tmp_path):
    out = run(cfg("stationary_scan"), output_prefix=str(tmp_path / "scan"))
    assert out.status == 0
    doc = json.loads((tmp_path / "scan.json").read_text())
    assert doc["version"] == __version__
    assert doc["config"]["experiment"] == "stationary_scan"
    assert len(doc["points"]) == 1
    assert doc["points"][0]["class"] == "valid"
    assert doc["points"][0]["location"] == [0.0, 0.0]


def test_boundary_export_output(tmp_path):
    c = cfg("boundary_export", domain=FIGURE_MAPS["fig2-right"], params={"samples": 512})
    out = run(c, output_prefix=str(tmp_path / "b"))
    lines = out.files[0].read_text().splitlines()
    assert lines[0] == f"# vortexlab {__version__}"
    assert lines[1].startswith("# config: ")
    assert lines[2] == "k,x,y"
    rows = lines[3:]
    assert len(rows) == 513
    assert rows[0] == "0,41,0"
    assert rows[0].split(",")[1:] == rows[-1].split(",")[1:]
    assert out.summary["simple"]["fig2-right"]


def test_single_vortex_csv_and_reproducibility(tmp_path):
    c = apply_overrides(preset("disk-orbit"), ["numeric.horizon=1.0"])
    a = run(c, output_prefix=str(tmp_path / "a"))
    b = run(c, output_prefix=str(tmp_path / "b"))
    assert a.files[0].read_bytes() == b.files[0].read_bytes()
    header = a.files[0].read_text().splitlines()[2]
    assert header == "t,x,y,robin"


def test_blob_confinement_csv(tmp_path):
    c = cfg("blob_confinement", numeric={"dt": 2e-3, "horizon": 0.02, "epsilon": 0.05,
                                         "n_particles": 40, "record_every": 5,
                                         "tail_radii": [0.01, 0.03]})
    out = run(c, output_prefix=str(tmp_path / "blob"))
    assert out.status == 0
    text = (tmp_path / "blob.csv").read_text().splitlines()
    assert text[2] == "t,Bx,By,I,R,H,m4,m8,tail_r1,tail_r2"
    assert len(text) == 3 + 3


def test_exit_sweep_sorted_and_thread_invariant(tmp_path):
    c = cfg("exit_sweep", numeric={"dt": 5e-3, "horizon": 0.05, "beta": 0.45,
                                   "epsilons": [0.1, 0.07, 0.05], "n_particles": 20})
    a = run(c, threads=1, output_prefix=str(tmp_path / "s1"))
    b = run(c, threads=3, output_prefix=str(tmp_path / "s3"))
    assert a.files[0].read_bytes() == b.files[0].read_bytes()
    lines = [json.loads(x) for x in a.files[0].read_text().splitlines()]
    assert lines[0]["type"] == "header" and lines[0]["version"] == __version__
    eps = [e["epsilon"] for e in lines if e["type"] == "entry"]
    assert eps == sorted(eps, reverse=True)


def test_rotation_check_output(tmp_path):
    out = run(preset("fig5-curves"), output_prefix=str(tmp_path / "r"))
    res = out.summary["results"]
    assert res["fig5a"] == {"p": 4, "invariant": True, "simple": True}
    assert res["fig5b"]["invariant"] and res["fig5b"]["p"] == 3


def test_point_vortices_physical_event(tmp_path):
    c = cfg("point_vortices", numeric={"dt": 0.05, "horizon": 1.0, "record_every": 1},
            params={"positions": [[0.9999995, 0.0], [-0.2, 0.0]], "masses": [1.0, 5.0]})
    out = run(c, output_prefix=str(tmp_path / "pv"))
    assert out.status == 3
    assert "boundary collision" in out.summary["event"]
    assert (tmp_path / "pv.csv").exists()


def test_point_vortices_energy(tmp_path):
    c = cfg("point_vortices", numeric={"dt": 1e-3, "horizon": 1.0, "record_every": 100},
            params={"positions": [[0.4, 0.0], [-0.3, 0.3]], "masses": [1.0, 0.7]})
    out = run(c, output_prefix=str(tmp_path / "pv"))
    assert out.status == 0 and out.summary["H_rel_drift"] < 1e-9


def test_no_temp_files_left(tmp_path):
    run(cfg("classify", params={"location": [0, 0]}), output_prefix=str(tmp_path / "c"))
    assert sorted(p.name for p in tmp_path.iterdir()) == ["c.json"]


# ----------------------------------------------------------------------
# command line
def test_cli_preset_run(tmp_path, capsys):
    rc = main(["preset", "fig5-curves", "--output-prefix", str(tmp_path / "f")])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["status"] == 0 and summary["experiment"] == "rotation_check"


def test_cli_run_config_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(cfg("stationary_scan", domain={"kind": "regular_polygon", "n": 5}).serialize())
    assert main(["run", "--config", str(path), "--output-prefix", str(tmp_path / "o")]) == 0
    assert json.loads(capsys.readouterr().out)["classes"] == ["valid"]


def test_cli_validation_error_exit_code(tmp_path, capsys):
    rc = main(["preset", "unstable-log-exit", "numeric.epsilons=[]",
               "--output-prefix", str(tmp_path / "x")])
    assert rc == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["status"] == 2 and "epsilons" in err["message"]


def test_cli_unknown_preset(capsys):
    assert main(["preset", "nope"]) == 2
    assert "disk-orbit" in capsys.readouterr().err


def test_cli_print_config_and_seed(capsys):
    assert main(["preset", "lemdev-rate", "--seed", "17", "--print-config"]) == 0
    assert json.loads(capsys.readouterr().out)["numeric"]["rng_seed"] == 17


def test_cli_boundary(tmp_path, capsys):
    dom = tmp_path / "dom.json"
    dom.write_text(json.dumps({"kind": "identity"}))
    assert main(["boundary", str(dom), "--samples", "4",
                 "--output-prefix", str(tmp_path / "bd")]) == 2  # fewer than 16 samples
    assert main(["boundary", str(dom), "--samples", "16",
                 "--output-prefix", str(tmp_path / "bd")]) == 0
    rows = (tmp_path / "bd.csv").read_text().splitlines()[3:]
    assert rows[0] == "0,1,0" and len(rows) == 17


def test_cli_entry_point_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vortexlab", "preset", "disk-orbit",
                           "--print-config"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["experiment"] == "single_vortex"
