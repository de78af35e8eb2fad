import json
import math

import numpy as np
import pytest

from slimkms.errors import InputError
from slimkms.io import (
    correlator_from_dict,
    read_correlator,
    read_csv,
    read_json,
    read_probes,
    read_region,
    write_correlator,
    write_csv,
    write_json,
    write_probes,
)
from slimkms.kms import delta_pair, windowed_oscillator
from slimkms.rindler.verify import Probe


class TestJSON:
    def test_numpy_and_complex(self, tmp_path):
        p = write_json(tmp_path / "a.json", {"x": np.float64(1.5), "b": np.bool_(True), "z": 1 + 2j,
                                             "arr": np.arange(3), "inf": math.inf})
        doc = read_json(p)
        assert doc == {"x": 1.5, "b": True, "z": {"re": 1.0, "im": 2.0}, "arr": [0, 1, 2], "inf": "inf"}

    def test_missing_and_invalid(self, tmp_path):
        with pytest.raises(InputError):
            read_json(tmp_path / "nope.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(InputError):
            read_json(bad)


class TestCSV:
    def test_round_trip_with_config(self, tmp_path):
        rows = [{"a": 1, "b": 0.1}, {"a": 2, "c": [1, 2]}]
        p = write_csv(tmp_path / "r.csv", rows, {"seed": 3, "tol": 1e-10})
        back, cfg = read_csv(p)
        assert cfg == {"seed": 3, "tol": 1e-10}
        assert [r["a"] for r in back] == ["1", "2"]
        assert float(back[0]["b"]) == 0.1
        assert json.loads(back[1]["c"]) == [1, 2]
        assert p.read_text().startswith("# generated: ")

    def test_no_timestamp(self, tmp_path):
        p = write_csv(tmp_path / "r.csv", [{"a": 1}], timestamp=False)
        assert p.read_text().splitlines()[0] == "a"


class TestRegions:
    def test_builtin_and_polytope(self, tmp_path):
        f = tmp_path / "r.json"
        f.write_text(json.dumps({"kind": "wedge", "dim": 4}))
        assert read_region(f).contains(np.array([0.0, 1.0, 0.0, 0.0]))
        f.write_text(json.dumps({"kind": "polytope", "halfspaces": [[1, 1, 1], [-1, 0, 0], [0, -1, 0]]}))
        R = read_region(f)
        assert R.contains(np.array([0.2, 0.2])) and not R.contains(np.array([0.6, 0.6]))


class TestCorrelators:
    def test_round_trip_smooth(self, tmp_path):
        C = windowed_oscillator()
        t = np.linspace(-40, 40, 4001)
        back = read_correlator(write_correlator(tmp_path / "c.json", C, t))
        s = np.linspace(-10, 10, 37)
        assert np.max(np.abs(back(s) - C(s))) < 1e-6
        assert back.envelope == C.envelope
        assert "interpolated from samples" in back.notes

    def test_round_trip_deltas(self, tmp_path):
        C = delta_pair(1.5, 0.25j)
        back = read_correlator(write_correlator(tmp_path / "d.json", C, []))
        assert back.smooth is None and back.deltas == C.deltas

    @pytest.mark.parametrize(
        "doc",
        [
            {"format": "other"},
            {"format": "slimkms-correlator", "samples": [[0, 1, 0]] * 2},
            {"format": "slimkms-correlator", "samples": [[0, 1, 0], [0, 1, 0], [1, 0, 0], [2, 0, 0]]},
            {"format": "slimkms-correlator"},
        ],
    )
    def test_invalid(self, doc):
        with pytest.raises(InputError):
            correlator_from_dict(doc)


class TestProbes:
    def test_round_trip(self, tmp_path):
        probes = [Probe(1.0, 1.3, 0.7, (0.0, 0.2)), Probe(0.5, 2.0, 0.0, (0.1,))]
        back, meta = read_probes(write_probes(tmp_path / "p.json", probes, beta=6.28, mass=1.0))
        assert back == probes and meta == {"beta": 6.28, "mass": 1.0}

    def test_scalar_s_and_missing_fields(self, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"probes": [{"xi": 1, "xi_prime": 2, "s": 0.3}]}))
        (p,), _ = read_probes(f)
        assert p.s == (0.3,) and p.d_perp == 0.0
        f.write_text(json.dumps({"probes": [{"xi": 1}]}))
        with pytest.raises(InputError):
            read_probes(f)
        f.write_text(json.dumps({"probes": []}))
        with pytest.raises(InputError):
            read_probes(f)
