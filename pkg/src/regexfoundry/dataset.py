"""Dataset records, JSON-lines persistence, splits, statistics and the
end-to-end generation pipeline."""
from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema

from .automaton import Alphabet, DEFAULT_ALPHABET, compile_regex
from .dsl import Node, ast_metrics, dsl_tokens, parse_dsl, print_dsl, to_standard_regex
from .examples import N_EXAMPLES, LabeledExample, generate_examples
from .figures import FigureSpec, figure_spec
from .grammar import Template
from .sampler import GenerationBudgetError, GrammarConfig, sample_batch, sample_regex

SPLITS = ("train", "dev", "test", "test-e")
# train / dev / test; "test-e" is a reserved tag that make_splits never assigns
DEFAULT_FRACTIONS = (0.62, 0.10, 0.28)

_NEGATIVE = {
    "type": "object",
    "required": ["string", "provenance"],
    "additionalProperties": False,
    "properties": {
        "string": {"type": "string"},
        "provenance": {"type": "string", "minLength": 1},
        "perturbed": {"type": "string"},
    },
}

RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "regex dataset record",
    "type": "object",
    "required": ["id", "template", "dsl", "regex", "positives", "negatives", "figure", "split"],
    "additionalProperties": False,
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "template": {"enum": [t.value for t in Template]},
        "dsl": {"type": "string", "minLength": 1},
        "regex": {"type": "string"},
        "positives": {"type": "array", "items": {"type": "string"},
                      "minItems": N_EXAMPLES, "maxItems": N_EXAMPLES},
        "negatives": {"type": "array", "items": _NEGATIVE, "minItems": N_EXAMPLES, "maxItems": N_EXAMPLES},
        "figure": {"type": "object", "required": ["template", "blocks", "labels", "links"]},
        "split": {"enum": list(SPLITS)},
        "description": {"type": "string"},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(RECORD_SCHEMA)


class DatasetError(ValueError):
    """A dataset line that cannot be read; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class GenRecord:
    id: str
    template: Template
    dsl: str
    regex: str
    positives: tuple[str, ...]
    negatives: tuple[LabeledExample, ...]
    figure: FigureSpec
    split: str = "train"
    description: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "template", Template(self.template))
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def ast(self) -> Node:
        return parse_dsl(self.dsl)

    def with_split(self, split: str) -> "GenRecord":
        return GenRecord(self.id, self.template, self.dsl, self.regex, self.positives, self.negatives,
                         self.figure, split, self.description)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "template": self.template.value,
            "dsl": self.dsl,
            "regex": self.regex,
            "positives": list(self.positives),
            "negatives": [x.to_dict() for x in self.negatives],
            "figure": self.figure.to_dict(),
            "split": self.split,
        }
        if self.description is not None:
            out["description"] = self.description
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GenRecord":
        validate_record(d)
        negs = tuple(LabeledExample(x["string"], "negative", x["provenance"], x.get("perturbed"))
                     for x in d["negatives"])
        return cls(d["id"], Template(d["template"]), d["dsl"], d["regex"], tuple(d["positives"]), negs,
                   FigureSpec.from_dict(d["figure"]), d["split"], d.get("description"))


def validate_record(d: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``d`` breaks the record schema."""
    _VALIDATOR.validate(d)


# -------------------------------------------------------------- persistence

def dumps_record(record: GenRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def emit_dataset(records: Iterable[GenRecord], path: str | Path) -> None:
    """Write one JSON object per line (UTF-8, keys sorted)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(dumps_record(r) + "\n")


def load_dataset(path: str | Path) -> list[GenRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(GenRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise DatasetError(f"malformed JSON: {exc.msg}", lineno) from exc
            except jsonschema.ValidationError as exc:
                raise DatasetError(f"schema violation: {exc.message}", lineno) from exc
            except ValueError as exc:
                raise DatasetError(str(exc), lineno) from exc
    return out


# ------------------------------------------------------------------- splits

def _allocate(n: int, fractions: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of ``n`` items."""
    raw = [f * n for f in fractions]
    counts = [int(x) for x in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def make_splits(records: Sequence[GenRecord], fractions: Sequence[float] = DEFAULT_FRACTIONS,
                rng: random.Random | None = None) -> list[GenRecord]:
    """Tag records train/dev/test so that each regex lands in exactly one split."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1) > 1e-9:
        raise ValueError("fractions must be three non-negative numbers summing to 1")
    rng = rng or random.Random(0)
    groups: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        groups.setdefault(r.dsl, []).append(i)
    keys = sorted(groups)
    needed = sum(1 for f in fractions if f > 0)
    if len(keys) < needed:
        raise ValueError(f"{len(keys)} distinct regexes cannot fill {needed} non-empty splits")
    counts = _allocate(len(keys), fractions)
    for i, f in enumerate(fractions):
        # a requested split must not come out empty because of rounding
        if f > 0 and counts[i] == 0:
            donor = max(range(3), key=lambda j: counts[j])
            counts[donor] -= 1
            counts[i] += 1
    rng.shuffle(keys)
    tag: dict[str, str] = {}
    start = 0
    for name, c in zip(SPLITS, counts):
        for k in keys[start:start + c]:
            tag[k] = name
        start += c
    return [r.with_split(tag[r.dsl]) for r in records]


# -------------------------------------------------------------------- stats

def stats(records: Iterable[GenRecord | Node | str]) -> dict:
    """Count, mean AST size and depth, and number of distinct DSL tokens."""
    sizes, depths, tokens = [], [], set()
    for r in records:
        node = r.ast if isinstance(r, GenRecord) else parse_dsl(r) if isinstance(r, str) else r
        m = ast_metrics(node)
        sizes.append(m["size"])
        depths.append(m["depth"])
        tokens.update(t for t in dsl_tokens(node) if t not in "(),")
    n = len(sizes)
    return {"count": n,
            "avg_size": sum(sizes) / n if n else 0.0,
            "avg_depth": sum(depths) / n if n else 0.0,
            "unique_tokens": len(tokens)}


def stats_table(summary: dict) -> str:
    rows = [("regexes", str(summary["count"])), ("avg size", f"{summary['avg_size']:.2f}"),
            ("avg depth", f"{summary['avg_depth']:.2f}"), ("unique tokens", str(summary["unique_tokens"]))]
    width = max(len(a) for a, _ in rows)
    return "\n".join(f"{a:<{width}}  {b:>8}" for a, b in rows)


# ----------------------------------------------------------------- pipeline

def build_record(index: int, template: Template, ast: Node, seed: int, attempt: int = 0,
                 alphabet: Alphabet = DEFAULT_ALPHABET) -> GenRecord | None:
    """Examples and figure for one regex, or None when it has too few strings."""
    rng = random.Random(f"{seed}:record:{index}:{attempt}")
    pos, neg = generate_examples(ast, N_EXAMPLES, rng, alphabet)
    if pos.shortfall or neg.shortfall:
        return None
    strings = tuple(x.string for x in pos)
    fig = figure_spec(ast, rng, strings, tuple(x.string for x in neg), template)
    return GenRecord(f"{seed}-{index:06d}", template, print_dsl(ast), to_standard_regex(ast),
                     strings, tuple(neg), fig)


def _build(args) -> GenRecord | None:
    return build_record(*args)


@dataclass
class PipelineConfig:
    n: int = 100
    seed: int = 0
    grammar: GrammarConfig = field(default_factory=GrammarConfig)
    mix: dict | None = None
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    jobs: int = 1
    alphabet: Alphabet = DEFAULT_ALPHABET


def generate_records(cfg: PipelineConfig) -> list[GenRecord]:
    """Sample regexes, attach examples and figures, and assign splits.

    Output depends only on the configuration: records are built from
    per-index random streams, so ``jobs`` changes speed but not results.
    """
    batch = sample_batch(cfg.n, cfg.mix, cfg.grammar, random.Random(cfg.seed), cfg.alphabet)
    args = [(i, t, a, cfg.seed, 0, cfg.alphabet) for i, (t, a) in enumerate(batch)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            built = list(pool.map(_build, args, chunksize=8))
    else:
        built = [_build(a) for a in args]
    seen = {compile_regex(a, cfg.alphabet).key() for _, a in batch}
    spare = {t: random.Random(f"{cfg.seed}:spare:{t.value}") for t in Template}
    records = []
    for i, ((template, _), rec) in enumerate(zip(batch, built)):
        attempt = 0
        while rec is None:
            # the regex accepts fewer than six strings: swap in a fresh one
            attempt += 1
            if attempt > cfg.grammar.budget:
                raise GenerationBudgetError(f"record {i}: no regex with enough examples")
            ast = sample_regex(template, cfg.grammar, spare[template], cfg.alphabet)
            key = compile_regex(ast, cfg.alphabet).key()
            if key in seen:
                continue
            seen.add(key)
            rec = build_record(i, template, ast, cfg.seed, attempt, cfg.alphabet)
        records.append(rec)
    return make_splits(records, cfg.fractions, random.Random(f"{cfg.seed}:splits"))


def check_record(record: GenRecord, alphabet: Alphabet = DEFAULT_ALPHABET) -> list[str]:
    """Examples of ``record`` that a fresh compile of its DSL disagrees with."""
    d = compile_regex(parse_dsl(record.dsl), alphabet)
    bad = [s for s in record.positives if not d.accepts(s)]
    bad += [x.string for x in record.negatives if d.accepts(x.string)]
    return bad


__all__ = ["GenRecord", "RECORD_SCHEMA", "SPLITS", "DEFAULT_FRACTIONS", "DatasetError", "PipelineConfig",
           "validate_record", "emit_dataset", "load_dataset", "dumps_record", "make_splits", "stats",
           "stats_table", "generate_records", "build_record", "check_record"]
