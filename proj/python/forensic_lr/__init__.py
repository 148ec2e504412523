"""Forensic likelihood ratios, DNA mixtures, pedigrees and Bayesian networks."""

import json
from pathlib import Path

from ._core import (
    ForensicError,
    Network,
    combine_exclusion,
    exclusion_prob_locus,
    genotype_prob_hwe,
    glass_ri_ttest,
    likelihood_ratio,
    masking_probability,
    match_prob,
    mixture_proportion,
    polya_joint,
    polya_marginal,
    posterior_odds,
    single_source_lr,
    verbal_category,
    verbal_statement,
)
from ._core import evaluate_case as _evaluate_case

__all__ = [
    "ForensicError",
    "Network",
    "combine_exclusion",
    "evaluate_case",
    "evaluate_case_file",
    "exclusion_prob_locus",
    "genotype_prob_hwe",
    "glass_ri_ttest",
    "likelihood_ratio",
    "load_network",
    "masking_probability",
    "match_prob",
    "mixture_proportion",
    "polya_joint",
    "polya_marginal",
    "posterior_odds",
    "single_source_lr",
    "verbal_category",
    "verbal_statement",
]


def evaluate_case(case, base_dir=".", theta=None, edition=None, seed=1):
    """Evaluate a case document (dict or JSON text); returns the report dict."""
    text = case if isinstance(case, str) else json.dumps(case)
    report, _ = _evaluate_case(text, str(base_dir), theta, edition, seed)
    return json.loads(report)


def evaluate_case_file(path, theta=None, edition=None, seed=1):
    path = Path(path)
    return evaluate_case(path.read_text(), path.parent, theta=theta, edition=edition, seed=seed)


def load_network(path):
    return Network.from_json(Path(path).read_text())
