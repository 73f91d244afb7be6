"""Command line entry point.

    regexfoundry generate --n 100 --seed 7 --out data.jsonl
    regexfoundry examples "concat(<let>,rep(<num>,3))" --n 6
    regexfoundry figure "and(startwith(<C>),endwith(rep(<num>,4)))" --out fig.svg
    regexfoundry synth data.jsonl --beam 20 --k 20 --out preds.txt
    regexfoundry eval preds.txt data.jsonl --out report.json
    regexfoundry stats data.jsonl

Exit status is 0 on success, 1 on bad usage or unreadable input, and 2 when
generation runs out of budget.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

import jsonschema

from .dataset import (DatasetError, PipelineConfig, dumps_record, emit_dataset, generate_records, load_dataset,
                      stats, stats_table)
from .dsl import parse_dsl, print_dsl
from .examples import N_EXAMPLES, generate_examples
from .figures import figure_spec, render_svg
from .grammar import Template, UndefinedShapeError
from .sampler import GenerationBudgetError, GrammarConfig
from .synth import (SearchConfig, SynthesisTask, evaluate, filter_kbest, format_predictions,
                    parse_predictions, synth_beam)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; route usage errors to status 1 instead
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _grammar(args) -> GrammarConfig:
    return GrammarConfig.from_file(args.config) if args.config else GrammarConfig()


def _template(args) -> Template | None:
    return Template(args.template) if args.template else None


def cmd_generate(args) -> int:
    n = args.n if args.n is not None else 100
    template = _template(args)
    cfg = PipelineConfig(n=n, seed=args.seed, grammar=_grammar(args),
                         mix={template: n} if template else None, jobs=args.jobs)
    records = generate_records(cfg)
    if args.out:
        emit_dataset(records, args.out)
    else:
        sys.stdout.write("".join(dumps_record(r) + "\n" for r in records))
    return EXIT_OK


def cmd_examples(args) -> int:
    ast = parse_dsl(args.regex)
    n = args.n if args.n is not None else N_EXAMPLES
    pos, neg = generate_examples(ast, n, random.Random(args.seed))
    body = {"dsl": print_dsl(ast), "positives": [x.string for x in pos],
            "negatives": [x.to_dict() for x in neg]}
    _write(json.dumps(body, indent=2, ensure_ascii=False) + "\n", args.out)
    if pos.shortfall or neg.shortfall:
        print(f"only {len(pos)} positives and {len(neg)} negatives exist", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_figure(args) -> int:
    ast = parse_dsl(args.regex)
    rng = random.Random(args.seed)
    pos, neg = generate_examples(ast, N_EXAMPLES, rng)
    spec = figure_spec(ast, rng, [x.string for x in pos], [x.string for x in neg], _template(args))
    _write(render_svg(spec), args.out)
    return EXIT_OK


def _read_tasks(path: str) -> list[tuple[str, list[str], list[str], str | None]]:
    """Tasks from a dataset file or from lines with ``positives``/``negatives``."""
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"malformed JSON: {exc.msg}", lineno) from exc
            if not isinstance(d, dict) or not isinstance(d.get("positives"), list):
                raise DatasetError("expected an object with a positives list", lineno)
            negs = [x["string"] if isinstance(x, dict) else x for x in d.get("negatives", [])]
            tasks.append((str(d.get("id", lineno)), d["positives"], negs, d.get("template")))
    return tasks


def cmd_synth(args) -> int:
    cfg = SearchConfig(prune=not args.no_prune, grammar=_grammar(args))
    blocks = {}
    for tid, pos, neg, template in _read_tasks(args.examples):
        template = args.template or template
        task = SynthesisTask(pos, neg, template, args.beam, args.k, args.budget, task_id=tid)
        result = synth_beam(task, cfg=cfg)
        ranked = list(result)
        best = filter_kbest(ranked, pos, neg)
        if best is not None:
            # the consistent candidate goes first; the rest keep their order
            ranked = [best] + [c for c in ranked if c is not best]
        blocks[tid] = [print_dsl(c) for c in ranked]
    _write(format_predictions(blocks), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    preds = parse_predictions(Path(args.predictions).read_text(encoding="utf-8"))
    gold = load_dataset(args.gold)
    missing = [r.id for r in gold if r.id not in preds]
    if missing:
        raise UsageError(f"no predictions for {len(missing)} task(s), first: {missing[0]}")
    k = args.k if args.k is not None else None
    report = evaluate([preds[r.id][:k] for r in gold], [r.dsl for r in gold],
                      [(r.positives, [x.string for x in r.negatives]) for r in gold],
                      [r.id for r in gold])
    print(report.table())
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_stats(args) -> int:
    records = load_dataset(args.dataset)
    summary = stats(records)
    _write(stats_table(summary) + "\n", None)
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regexfoundry", description="Structured regex dataset generation and synthesis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    templates = [t.value for t in Template]

    def common(p, seed=True):
        if seed:
            p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.add_argument("--out", help="output file (default stdout)")
        return p

    p = common(sub.add_parser("generate", help="sample regexes with examples, figures and splits"))
    p.add_argument("--n", type=int, help="number of records (default 100)")
    p.add_argument("--config", help="grammar config file (key = value lines)")
    p.add_argument("--template", choices=templates, help="restrict to one template")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output is unchanged)")
    p.set_defaults(func=cmd_generate)

    p = common(sub.add_parser("examples", help="positive and negative examples for one regex"))
    p.add_argument("regex", help="regex in DSL syntax")
    p.add_argument("--n", type=int, help=f"examples per polarity (default {N_EXAMPLES})")
    p.set_defaults(func=cmd_examples)

    p = common(sub.add_parser("figure", help="render the figure of one regex as SVG"))
    p.add_argument("regex", help="regex in DSL syntax")
    p.add_argument("--template", choices=templates)
    p.set_defaults(func=cmd_figure)

    p = common(sub.add_parser("synth", help="synthesize ranked regexes from an examples file"), seed=False)
    p.add_argument("examples", help="dataset file or JSON lines with positives/negatives")
    p.add_argument("--beam", type=int, default=20)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--budget", type=int, default=200, help="beam items expanded per task")
    p.add_argument("--template", choices=templates)
    p.add_argument("--config", help="grammar config file")
    p.add_argument("--no-prune", action="store_true", help="disable approximation pruning")
    p.set_defaults(func=cmd_synth)

    p = common(sub.add_parser("eval", help="score predictions against a gold dataset"), seed=False)
    p.add_argument("predictions", help="predictions file (# id headers, one DSL per line)")
    p.add_argument("gold", help="gold dataset file")
    p.add_argument("--k", type=int, help="only consider the top k predictions")
    p.set_defaults(func=cmd_eval)

    p = common(sub.add_parser("stats", help="size and depth statistics of a dataset"), seed=False)
    p.add_argument("dataset")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        for name in ("n", "beam", "k", "budget", "jobs"):
            v = getattr(args, name, None)
            if v is not None and v < 1:
                raise UsageError(f"--{name} must be >= 1")
        return args.func(args)
    except GenerationBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (OSError, DatasetError, jsonschema.ValidationError, UndefinedShapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
