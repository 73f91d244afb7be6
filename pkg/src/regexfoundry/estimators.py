"""scikit-learn style wrappers around example generation and synthesis.

Both estimators work on plain Python objects rather than numeric arrays:
``ExampleGenerator`` maps regexes to example sets, ``RegexSynthesizer`` maps
example sets to regexes. Neither learns anything in ``fit``; fitting only
validates inputs and freezes the search settings, which keeps them usable in
``Pipeline`` and ``GridSearchCV`` via ``get_params``/``set_params``.
"""
from __future__ import annotations

import random
from typing import Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import automaton as fa
from .automaton import DEFAULT_ALPHABET, compile_regex
from .dsl import Node, parse_dsl, print_dsl
from .examples import N_EXAMPLES, generate_examples
from .grammar import Template
from .sampler import GrammarConfig
from .synth import SearchConfig, SynthesisTask, filter_kbest, synth_beam


def _as_node(x) -> Node:
    if isinstance(x, Node):
        return x
    if isinstance(x, str):
        return parse_dsl(x)
    raise TypeError(f"expected a DSL string or Node, got {type(x).__name__}")


def _as_task(x) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if isinstance(x, SynthesisTask):
        return x.positives, x.negatives
    try:
        pos, neg = x
    except (TypeError, ValueError):
        raise TypeError("each task must be a (positives, negatives) pair") from None
    pos, neg = tuple(pos), tuple(neg)
    for s in pos + neg:
        if not isinstance(s, str):
            raise TypeError(f"examples must be strings, got {type(s).__name__}")
    return pos, neg


def _check_sequence(X, what: str) -> list:
    if isinstance(X, (str, bytes)) or not isinstance(X, Sequence):
        raise TypeError(f"{what} must be a sequence")
    return list(X)


class ExampleGenerator(TransformerMixin, BaseEstimator):
    """Turn regexes into (positives, negatives) string lists.

    The i-th item of ``transform`` uses its own random stream derived from
    ``random_state`` and ``i``, so output does not depend on batch order.
    """

    def __init__(self, n_examples: int = N_EXAMPLES, random_state: int = 0):
        self.n_examples = n_examples
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if not isinstance(self.n_examples, int) or self.n_examples < 1:
            raise ValueError("n_examples must be a positive integer")
        if X is not None:
            for x in _check_sequence(X, "X"):
                _as_node(x)
        self.alphabet_ = DEFAULT_ALPHABET
        return self

    def transform(self, X):
        check_is_fitted(self)
        out = []
        for i, x in enumerate(_check_sequence(X, "X")):
            rng = random.Random(f"{self.random_state}:{i}")
            pos, neg = generate_examples(_as_node(x), self.n_examples, rng, self.alphabet_)
            out.append(([p.string for p in pos], [n.string for n in neg]))
        return out


class RegexSynthesizer(BaseEstimator):
    """Beam-search synthesizer with optional approximation pruning.

    ``X`` is a list of ``(positives, negatives)`` pairs and ``y`` a list of gold
    regexes (DSL strings or nodes). ``predict`` returns, per task, the first
    ranked candidate consistent with the examples (DSL text), or None.
    """

    def __init__(self, beam: int = 20, k: int = 20, budget: int = 200, prune: bool = True,
                 template: str | None = None):
        self.beam = beam
        self.k = k
        self.budget = budget
        self.prune = prune
        self.template = template

    def fit(self, X=None, y=None):
        for name in ("beam", "k", "budget"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.template is not None:
            Template(self.template)
        if X is not None:
            X = _check_sequence(X, "X")
            for x in X:
                _as_task(x)
            if y is not None and len(_check_sequence(y, "y")) != len(X):
                raise ValueError(f"X has {len(X)} tasks but y has {len(y)} regexes")
        self.search_config_ = SearchConfig(prune=bool(self.prune), grammar=GrammarConfig())
        return self

    def rank(self, X) -> list[list[str]]:
        """Ranked candidate lists, best first."""
        check_is_fitted(self)
        out = []
        for x in _check_sequence(X, "X"):
            pos, neg = _as_task(x)
            task = SynthesisTask(pos, neg, self.template, self.beam, self.k, self.budget)
            out.append([print_dsl(c) for c in synth_beam(task, cfg=self.search_config_)])
        return out

    def predict(self, X) -> list[str | None]:
        tasks = [_as_task(x) for x in _check_sequence(X, "X")]
        out = []
        for (pos, neg), cands in zip(tasks, self.rank(tasks)):
            best = filter_kbest(cands, pos, neg)
            out.append(print_dsl(best) if best is not None else None)
        return out

    def score(self, X, y) -> float:
        """Fraction of tasks whose prediction is DFA-equivalent to the gold regex."""
        y = _check_sequence(y, "y")
        preds = self.predict(X)
        if len(preds) != len(y):
            raise ValueError(f"X has {len(preds)} tasks but y has {len(y)} regexes")
        if not y:
            return 0.0
        hits = 0
        for p, g in zip(preds, y):
            if p is not None:
                hits += fa.equivalent(compile_regex(parse_dsl(p)), compile_regex(_as_node(g)))
        return hits / len(y)


__all__ = ["ExampleGenerator", "RegexSynthesizer"]
