import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ellhyp import checks
from ellhyp.errors import SamplingFailureError, UsageError
from ellhyp.gamma import BasePair

finite = st.floats(-1e6, 1e6, allow_nan=False)
reports = st.builds(
    checks.ResidualReport,
    check_id=st.sampled_from(sorted(checks.REGISTRY)),
    parameters=st.dictionaries(st.text("abtxz", min_size=1, max_size=3),
                               st.lists(finite, min_size=2, max_size=2), max_size=6),
    residual=st.floats(0, 1e3, allow_nan=False) | st.just(float("inf")),
    tolerance=st.floats(1e-15, 1, allow_nan=False),
    passed=st.booleans(),
    nodes_used=st.integers(0, 1 << 20),
    runtime_ms=st.integers(0, 10 ** 6),
    notes=st.text(max_size=40),
)


class TestRegistry:
    def test_ids_stable_and_grouped(self):
        ids = list(checks.REGISTRY)
        assert len(ids) == len(set(ids))
        prefixes = {c.split(".")[0] for c in ids}
        assert prefixes == {"theta", "gamma", "quadrature", "integrals", "biortho", "sklyanin", "heun"}

    def test_expensive_off_by_default(self):
        default = checks.select()
        assert "biortho.reproducing" not in default and "integrals.bailey_m1" not in default
        assert "biortho.reproducing" in checks.select(expensive=True)

    def test_filter(self):
        assert all(c.startswith("theta.") for c in checks.select("theta.*"))
        assert checks.select("theta.add_add,gamma.shift") == ["theta.add_add", "gamma.shift"]

    def test_filter_no_match(self):
        with pytest.raises(UsageError):
            checks.select("nothing.*")

    def test_unknown_id(self):
        with pytest.raises(UsageError):
            checks.run_check("theta.nope")
        with pytest.raises(UsageError):
            checks.select(cfg={"checks": [{"id": "theta.nope"}]})


class TestSampling:
    def test_beta_balanced(self):
        P = checks.sample_admissible("integrals.beta", 3).parameters
        t = checks.vec(P, "t")
        assert len(t) == 6
        assert abs(np.prod(t) - BasePair().pq) < 1e-12 * BasePair().pq

    def test_seed_determinism(self):
        a = checks.sample_admissible("integrals.v_permutation", 7)
        b = checks.sample_admissible("integrals.v_permutation", 7)
        c = checks.sample_admissible("integrals.v_permutation", 8)
        assert a == b and a.parameters != c.parameters

    def test_impossible_margin(self, monkeypatch):
        cid = "integrals.beta_margin_0.9"
        beta = checks.REGISTRY["integrals.beta"]
        monkeypatch.setitem(checks.REGISTRY, cid,
                            checks.Check(cid, 1e-9, beta.draw, beta.run, predicate=checks.margin_predicate(0.9)))
        monkeypatch.setattr(checks, "MAX_REJECTIONS", 200)
        with pytest.raises(SamplingFailureError, match="pole margin 0.9"):
            checks.sample_admissible(cid, 0)

    def test_derive_seed_separates_checks(self):
        assert checks.derive_seed(0, "theta.add_add") != checks.derive_seed(0, "theta.add_mult")
        assert checks.derive_seed(5, "x") == checks.derive_seed(5, "x")


class TestReports:
    @given(reports)
    def test_json_roundtrip(self, r):
        line = r.to_json()
        assert checks.ResidualReport.from_json(line) == r
        assert list(json.loads(line)) == ["check_id", "parameters", "residual", "tolerance", "pass", "nodes_used",
                                          "runtime_ms", "notes"]

    def test_params_roundtrip(self):
        P = {"a1": 0.3 - 0.1j, "n": 4}
        assert checks.decode_params(checks.encode_params(P)) == P

    def test_pass_requires_tolerance(self):
        r = checks.run_check("theta.triple_product", tol=0.0)
        assert not r.passed and r.residual > 0

    def test_rejected_override(self):
        r = checks.run_check("integrals.beta", params={"t1": 2.0, "t2": 0.5, "t3": 0.5, "t4": 0.5, "t5": 0.5,
                                                       "t6": 0.0121})
        assert not r.passed and r.residual == float("inf") and r.notes


class TestSuite:
    def test_theta_suite_passes(self):
        reps = checks.run_suite(filter="theta.*", workers=1)
        assert reps and all(r.passed for r in reps)

    def test_byte_identical(self):
        run = lambda: [r.to_json() for r in checks.run_suite(filter="gamma.*,heun.bethe*", seed=4, timing=False,
                                                              workers=2)]
        assert run() == run()

    def test_order_independent_of_workers(self):
        a = checks.run_suite(filter="theta.*,quadrature.*", timing=False, workers=1)
        b = checks.run_suite(filter="theta.*,quadrature.*", timing=False, workers=3)
        assert [x.to_json() for x in a] == [x.to_json() for x in b]

    def test_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bases": {"p": [0.2, 0.0], "q": 0.3},
                                   "checks": [{"id": "gamma.shift", "overrides": {"tolerance": 1e-9}},
                                              "theta.add_add"]}))
        reps = checks.run_suite(str(cfg), timing=False, workers=1)
        assert [r.check_id for r in reps] == ["gamma.shift", "theta.add_add"]
        assert reps[0].tolerance == 1e-9 and all(r.passed for r in reps)

    def test_bad_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2")
        with pytest.raises(UsageError):
            checks.run_suite(str(bad))
        with pytest.raises(UsageError):
            checks.run_suite(str(tmp_path / "missing.json"))

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv("ELLHYP_THREADS", "3")
        assert checks.worker_count() == 3
        monkeypatch.setenv("ELLHYP_THREADS", "x")
        with pytest.raises(UsageError):
            checks.worker_count()


@pytest.mark.parametrize("check_id", checks.select())
def test_registered_check(check_id):
    r = checks.run_check(check_id, 0)
    assert r.passed, f"{check_id}: residual {r.residual:.3e} > {r.tolerance:g} ({r.notes})"


@pytest.mark.expensive
@pytest.mark.parametrize("check_id", [c for c in checks.select(expensive=True) if checks.REGISTRY[c].expensive])
def test_expensive_check(check_id):
    assert checks.run_check(check_id, 0).passed
