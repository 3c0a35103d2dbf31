import csv
import io
import json

import pytest

from hypercount.harness import (ConfigError, Experiment, failed, median_relative_errors, records_to_csv,
                                report, run_experiment, write_report)


def make(**over):
    base = dict(name="t", assertions=["thm14-band"], pattern={"catalog": "path-k3-l2"},
                host={"kind": "binomial", "k": 3, "n": [10], "p": 0.5, "seeds": [0]})
    base.update(over)
    return Experiment.from_dict(base)


class TestConfig:
    @pytest.mark.parametrize("over", [
        {"assertions": []},
        {"assertions": ["nope"]},
        {"pattern": {}},
        {"pattern": {"catalog": "missing"}},
        {"host": {"k": 3, "n": [10]}},
        {"host": {"kind": "binomial", "k": 3}},
        {"check_mode": "fast"},
        {"bogus": 1},
    ])
    def test_invalid(self, over):
        with pytest.raises(ConfigError):
            make(**over)

    def test_load_toml(self, tmp_path):
        (tmp_path / "H.hg").write_text("5 3 2\n0 1 2\n2 3 4\n")
        cfg_path = tmp_path / "exp.toml"
        cfg_path.write_text(
            'name = "x"\nassertions = ["extension"]\n[pattern]\nfile = "H.hg"\n'
            '[host]\nkind = "binomial"\nk = 3\nn = [8, 9]\np_scale = 2.0\np_exponent = 0.45\nseed_count = 2\n'
        )
        cfg = Experiment.load(cfg_path)
        pts = cfg.sweep()
        assert [(n, s) for n, _, _, s in pts] == [(8, 0), (8, 1), (9, 0), (9, 1)]
        assert pts[0][1] == pytest.approx(2 * 8 ** -0.45)
        assert cfg.load_pattern().edges == ((0, 1, 2), (2, 3, 4))

    def test_bad_toml(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("name = \n")
        with pytest.raises(ConfigError):
            Experiment.load(p)


class TestRuns:
    def test_empty_host_skips_band(self):
        recs = run_experiment(make(host={"kind": "binomial", "k": 3, "n": [8], "p": 0.0, "seeds": [0]}))
        (r,) = recs
        assert r.count["total"] == 0 and r.assertions["thm14-band"]["status"] == "skip"
        assert not failed(recs)

    def test_extension_holds_on_small_hosts(self):
        cfg = make(assertions=["extension", "cor33"], C=3.0,
                   host={"kind": "binomial", "k": 3, "n": [7, 8, 9], "p": [0.3, 0.6], "seeds": [0, 1, 2]})
        recs = run_experiment(cfg)
        assert len(recs) == 18
        for r in recs:
            for name in ("extension", "cor33"):
                assert r.assertions[name]["status"] in ("pass", "skip")
        assert any(r.assertions["extension"]["status"] == "pass" for r in recs)

    def test_precondition_failure_is_skip(self):
        # star-heavy host: BDD fails, so extension must not be marked failed
        cfg = make(assertions=["extension", "cor34"], C=1.01,
                   host={"kind": "planted-bad", "k": 3, "n": [9], "p": 0.2, "seeds": [0], "boost": 4.0})
        (r,) = run_experiment(cfg)
        assert r.assertions["extension"]["status"] == "skip"
        assert r.assertions["cor34"]["status"] == "skip"

    def test_budget_overrun_is_skip(self):
        cfg = make(assertions=["thm14-band"], node_budget=10,
                   host={"kind": "binomial", "k": 3, "n": [30], "p": 0.5, "seeds": [0]})
        (r,) = run_experiment(cfg)
        assert r.count is None and r.assertions["thm14-band"]["status"] == "skip"

    def test_lemma_assertions(self):
        cfg = make(assertions=["lemma21", "lemma25"], delta=0.5, sigma=0.45, delta_prime=0.45, C=3.0,
                   lemma_d=2, check_mode="sampled", samples=500,
                   host={"kind": "complete", "k": 3, "n": [9], "seeds": [0]})
        (r,) = run_experiment(cfg)
        assert r.assertions["lemma21"]["status"] == "pass"
        assert r.assertions["lemma25"]["status"] == "pass"

    def test_worker_count_does_not_change_records(self):
        cfg = make(assertions=["thm14-band", "extension"],
                   host={"kind": "binomial", "k": 3, "n": [8, 10], "p": 0.4, "seeds": [0, 1]})
        a = [r.to_dict() for r in run_experiment(cfg, workers=1)]
        b = [r.to_dict() for r in run_experiment(cfg, workers=2)]
        assert a == b


class TestReport:
    def test_single_record(self):
        recs = run_experiment(make())
        js, cs = report(recs)
        rows = list(csv.reader(io.StringIO(cs)))
        assert rows[0] == ["experiment", "seed", "n", "p", "total", "expected", "relative_error", "thm14-band"]
        assert len(rows) == 2
        assert len(json.loads(js)) == 1

    def test_rows_sorted_by_n_then_seed(self):
        recs = run_experiment(make(host={"kind": "binomial", "k": 3, "n": [9, 8], "p": 0.4, "seeds": [1, 0]}))
        _, cs = report(list(reversed(recs)))
        rows = list(csv.reader(io.StringIO(cs)))[1:]
        assert [(int(r[2]), int(r[1])) for r in rows] == [(8, 0), (8, 1), (9, 0), (9, 1)]

    def test_json_round_trip_reproduces_csv(self, tmp_path):
        recs = run_experiment(make(assertions=["thm14-band", "extension"],
                                   host={"kind": "binomial", "k": 3, "n": [8], "p": 0.4, "seeds": [0, 1]}))
        jp, cp = write_report(recs, tmp_path)
        assert records_to_csv(json.loads(jp.read_text())) == cp.read_text()

    def test_empty(self):
        with pytest.raises(ValueError):
            report([])

    def test_medians(self):
        recs = run_experiment(make(host={"kind": "binomial", "k": 3, "n": [8, 10], "p": 0.5, "seeds": [0, 1, 2]}))
        med = median_relative_errors(recs)
        assert set(med) == {8, 10}
        for n, m in med.items():
            errs = sorted(r.count["relative_error"] for r in recs if r.n == n)
            assert m == errs[1]
