import math
import os
import subprocess
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "..", "python"))

import ergolab


@pytest.fixture(scope="module")
def doubling():
    return ergolab.build_family({"builder": "expanding", "space": "torus1", "depth": 1})


def test_build_family_shape(doubling):
    assert doubling["kind"] == "family"
    assert doubling["p"] == 2
    assert doubling["q"] == 0
    assert len(doubling["maps"]) == 2


def test_check_family_passes(doubling):
    report = ergolab.check_family(doubling, c=0.34)
    assert report["pass"] is True
    assert report["partition"]["pass"] is True
    assert report["markov"]["pass"] is True
    assert report["constants"]["sigma1"]["value"] == 2.0


def test_orbit_record(doubling):
    rec = ergolab.orbit(doubling, [0.3], 100, stream="iid", seed=5)
    assert rec["steps"] == 100
    assert len(rec["points"]) == 100
    assert rec["a"][0] == pytest.approx(-math.log(2.0))
    assert not rec["truncated"]


def test_pliss_and_epsilon0():
    # n qualifies iff every suffix window of the first n terms averages <= -c;
    # the +1 at index 2 disqualifies n in {3, 4} but is absorbed by n = 5
    times = ergolab.pliss_times([-1.0, -1.0, 1.0, -1.0, -1.0, -1.0], 0.25)
    assert times == [1, 2, 5, 6]
    assert ergolab.hyperbolic_frequency([-1.0] * 10, 0.5) == 1.0
    assert ergolab.derive_epsilon0(2.0, 1.0, math.log(2.0) / 2.0) == pytest.approx(
        0.5, abs=1e-12
    )
    assert ergolab.derive_epsilon0(2.0, 1.0, math.log(2.0)) is None


def test_cylinder_volume(doubling):
    out = ergolab.cylinder(doubling, [0, 1, 0], c=0.34, samples=2000, seed=2)
    assert out["cylinder"]["volume"] == pytest.approx(0.125)
    assert out["hyperbolic"] == "yes"
    assert out["diameter_decay"]["pass"] is True


def test_transitivity_full(doubling):
    table = ergolab.transitivity(doubling, 4)
    assert table["all_true"] is True


def test_weak_cycle(doubling):
    rep = ergolab.weak_cycle(doubling, [[0.45], [0.55]], samples=200, depth=10, seed=3)
    assert rep["hit_fraction"] == 1.0


def test_ergodicity_and_probe(doubling):
    rep = ergolab.ergodicity(doubling, starts=4, steps=20000, seed=7)
    assert rep["pass"] is True
    names = [f["observable"] for f in rep["findings"]]
    assert names == ["one", "cos-x1", "x1", "region-0"]

    control = ergolab.build_family({"builder": "invariant-arcs"})
    probe = ergolab.invariant_set_probe(control, g=64, rounds=4096)
    assert probe["min_measure"] == pytest.approx(0.5, abs=1e-12)
    assert probe["ergodic_evidence"] is False


def test_equidistribution(doubling):
    rep = ergolab.equidistribution(doubling, [0.3], 20000, boxes=16, seed=9)
    assert rep["pass"] is True


def test_errors_are_typed(doubling):
    with pytest.raises(ergolab.ErgolabError):
        ergolab.pliss_times([-1.0], 0.0)
    with pytest.raises(ergolab.ErgolabError):
        ergolab.build_family({"builder": "hexagonal"})


def test_cli_binary_runs():
    cli = os.environ.get("ERGOLAB_CLI")
    if not cli:
        pytest.skip("ERGOLAB_CLI not set")
    out = subprocess.run([cli, "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "orbit" in out.stdout
