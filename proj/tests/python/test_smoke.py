import json
import math
import os
from pathlib import Path

import pytest

import forensic_lr as fl

DATA = Path(os.environ.get("FORENSIC_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_likelihood_ratio_and_scale():
    assert fl.likelihood_ratio(1.0, 0.01) == 100.0
    assert fl.verbal_category(5000.0) == "strong support"
    assert fl.verbal_category(5000.0, "evett1998") == "very strong support"
    assert fl.posterior_odds(0.01, 1000.0) == pytest.approx(10.0)


def test_errors_raise_value_error():
    with pytest.raises(ValueError):
        fl.likelihood_ratio(0.0, 0.0)
    with pytest.raises(fl.ForensicError):
        fl.match_prob("a/a", 2.0, {"a": 0.5, "b": 0.5})


def test_match_probability():
    freqs = {"a": 0.2, "b": 0.3, "c": 0.5}
    assert fl.match_prob("a/b", 0.0, freqs) == pytest.approx(2 * 0.2 * 0.3)
    assert fl.genotype_prob_hwe("c/c", freqs) == pytest.approx(0.25)
    t = 0.05
    want = 2 * (t + (1 - t) * 0.2) * (t + (1 - t) * 0.3) / ((1 + t) * (1 + 2 * t))
    assert fl.match_prob("a/b", t, freqs) == pytest.approx(want, rel=1e-12)


def test_single_source_lr_from_table():
    table = (DATA / "freq" / "illustrative.json").read_text()
    out = fl.single_source_lr({"TH01": "9.3/9.3"}, table, 0.0)
    assert set(out["per_marker"]) == {"TH01"}
    assert out["lr"] == pytest.approx(out["per_marker"]["TH01"])


def test_exclusion_and_masking():
    freqs = {"a": 0.2, "b": 0.3, "c": 0.5}
    s = 0.5
    assert fl.exclusion_prob_locus(["a", "b"], freqs, 0.0) == pytest.approx(1 - s * s)
    assert fl.combine_exclusion([0.5, 0.5]) == pytest.approx(0.75)
    assert fl.masking_probability(2, [0.1] * 10, 4) == 1.0
    assert fl.mixture_proportion([310, 290, 1210, 1190]) == pytest.approx(0.2)


def test_polya_marginal_is_the_mean():
    probs = fl.polya_joint([1.0, 1.0], [3.0, 1.0], 3)
    assert len(probs) == 8
    assert sum(probs) == pytest.approx(1.0)
    assert fl.polya_marginal([1.0, 1.0], [3.0, 1.0], 3) == pytest.approx([4 / 6, 2 / 6])


def test_glass_ttest():
    r = fl.glass_ri_ttest([1.51820, 1.51823, 1.51819, 1.51822, 1.51821],
                          [1.51818, 1.51824, 1.51820, 1.51825, 1.51819])
    assert r["t"] == pytest.approx(-0.12803687993289597, abs=1e-9)
    assert r["p_value"] == pytest.approx(0.90234899132243991, abs=1e-6)


def test_network_inference():
    net = fl.load_network(DATA / "networks" / "diamond.json")
    assert len(net) == 4
    assert not net.is_polytree()
    post, engine = net.infer("A", {"D": "d1"})
    assert engine == "enumeration"
    assert sum(post.values()) == pytest.approx(1.0)
    crime = fl.load_network(DATA / "networks" / "fictional_crime.json")
    assert crime.conditionally_independent(["glass.matching_glass_on_clothes"], ["dna.profile_match"],
                                           ["identification.suspect_guilty"])
    assert json.loads(crime.to_json())["nodes"][0]["name"] == "identification.suspect_guilty"


def test_evaluate_case_dict_and_file():
    r = fl.evaluate_case({"kind": "single_source", "likelihoods": {"hp": 1, "hd": 0.01}})
    assert r["lr"] == 100.0
    assert r["verbal"]["category"] == "moderate support"
    crim = fl.evaluate_case_file(DATA / "cases" / "criminal.json")
    assert crim["engine"] == "propagation"
    assert math.isclose(crim["lr"], math.prod(m["lr"] for m in crim["per_marker"]), rel_tol=1e-12)
