import random
from fractions import Fraction

import pytest

from generators import rand_interp, rand_lmu, rand_model
from lmucheck.checking import model_check_lmu, model_check_pctl
from lmucheck.evaluator import eval_closed
from lmucheck.model import parse_model
from lmucheck.oracle import OracleError
from lmucheck.parser import parse_lmu, parse_pctl
from lmucheck.translator import translate


def test_shared_evaluation_matches_isolated_evaluation():
    # the pipeline shares one evaluator and one translation memo across
    # states; values must equal fresh per-state translation and evaluation
    rng = random.Random(112358)
    for _ in range(40):
        m = rand_model(rng, max_states=3, max_dists=2)
        interp = rand_interp(rng, m)
        phi = rand_lmu(rng, depth=3)
        shared = model_check_lmu(phi, m, interp).values
        for s in m.states:
            assert shared[s] == eval_closed(translate(phi, m, interp, s))


def test_outcome_reports_iterations_and_requested_states():
    m, interp = parse_model(
        "state s0 s1\nprop P = { s1: 1 }\ntrans s0 -> { s0: 1/2, s1: 1/2 }"
    )
    out = model_check_lmu(parse_lmu("mu X. (P \\/ <>X)"), m, interp, states=("s1",))
    assert list(out.values) == ["s1"]
    assert out.values["s1"] == Fraction(1)
    assert out.iterations > 0


def test_pctl_checking_requires_boolean_valuations():
    m, interp = parse_model("state s0\nprop P = { s0: 1/2 }")
    with pytest.raises(OracleError, match="non-boolean"):
        model_check_pctl(parse_pctl("P"), m, interp)
