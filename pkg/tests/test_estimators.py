import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from regexfoundry.automaton import compile_regex
from regexfoundry.dsl import parse_dsl
from regexfoundry.estimators import ExampleGenerator, RegexSynthesizer

GOLD = ["rep(<num>,3)", "startwith(<a>)"]


def test_params_and_clone():
    est = RegexSynthesizer(beam=5, budget=40)
    assert est.get_params() == {"beam": 5, "k": 20, "budget": 40, "prune": True, "template": None}
    est.set_params(k=3)
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    assert ExampleGenerator(random_state=4).get_params() == {"n_examples": 6, "random_state": 4}


def test_unfitted_use_raises():
    with pytest.raises(NotFittedError):
        ExampleGenerator().transform(GOLD)
    with pytest.raises(NotFittedError):
        RegexSynthesizer().predict([(["1"], [])])


def test_fit_validates():
    with pytest.raises(ValueError):
        RegexSynthesizer(beam=0).fit()
    with pytest.raises(ValueError):
        RegexSynthesizer(template="union").fit()
    with pytest.raises(ValueError):
        RegexSynthesizer().fit([(["1"], [])], ["<a>", "<b>"])
    with pytest.raises(TypeError):
        RegexSynthesizer().fit([("1",)])
    with pytest.raises(ValueError):
        ExampleGenerator(n_examples=0).fit()
    with pytest.raises(TypeError):
        ExampleGenerator().fit("rep(<num>,3)")


def test_transform_is_sound_and_order_independent():
    gen = ExampleGenerator().fit(GOLD)
    out = gen.transform(GOLD)
    for g, (pos, neg) in zip(GOLD, out):
        d = compile_regex(parse_dsl(g))
        assert len(pos) == len(neg) == 6
        assert all(d.accepts(s) for s in pos) and not any(d.accepts(s) for s in neg)
    assert gen.fit_transform(GOLD) == out
    assert gen.transform(GOLD[:1]) == out[:1]


def test_pipeline_predict_and_score():
    tasks = ExampleGenerator().fit_transform(GOLD)
    syn = RegexSynthesizer().fit(tasks, GOLD)
    preds = syn.predict(tasks)
    assert all(p is not None for p in preds)
    assert syn.score(tasks, GOLD) == 1.0
    assert syn.score([], []) == 0.0
    with pytest.raises(ValueError):
        syn.score(tasks, GOLD[:1])
    pipe = Pipeline([("examples", ExampleGenerator())])
    assert pipe.fit_transform(GOLD) == tasks


def test_rank_returns_dsl_strings():
    syn = RegexSynthesizer(budget=30, k=4).fit()
    (ranked,) = syn.rank([(["123", "456"], ["12"])])
    assert len(ranked) <= 4 and all(isinstance(r, str) for r in ranked)
