"""Structured regex generation, example synthesis and example-guided regex synthesis."""
from .automaton import (DEFAULT_ALPHABET, REDUCED_ALPHABET, Alphabet, Dfa, compile_regex, equivalent,
                        is_empty, is_universal)
from .dataset import GenRecord, PipelineConfig, emit_dataset, generate_records, load_dataset, make_splits, stats
from .dsl import Node, ast_metrics, parse_dsl, print_dsl, to_standard_regex
from .estimators import ExampleGenerator, RegexSynthesizer
from .examples import LabeledExample, gen_negative, gen_positive, generate_examples, perturb
from .figures import FigureSpec, audit, figure_spec, render_svg
from .grammar import Template, derivable, semantic_complexity
from .sampler import GenerationBudgetError, GrammarConfig, sample_batch, sample_regex
from .synth import SearchConfig, SynthesisTask, evaluate, filter_kbest, synth_beam
from .approx import feasible, over_approx, under_approx

__version__ = "0.1.0"
