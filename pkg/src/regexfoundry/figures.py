"""Abstract figures for template-shaped regexes.

A figure is a row of blocks, one per constraint group or component. Start and
end constraints shade the head or tail of their block; every other constraint
or component becomes a short text label linked to the blocks it applies to.
Identical subtrees share one label. Label wording is drawn from a small pool
of phrasings per concept, and every phrasing can be parsed back, which is how
``audit`` recovers the constraint kinds from a figure alone.
"""
from __future__ import annotations

import random
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass

from .dsl import Node
from .grammar import Layout, Template, comp_kind, cons_kind, layout

# ------------------------------------------------------------------ phrasing

# "{x}" and "{y}" are quoted literal descriptions, "{k}" and friends integers
CONS_PHRASES: dict[str, tuple[str, ...]] = {
    "not-startwith": ('does not start with "{x}"', 'never begins with "{x}"'),
    "not-endwith": ('does not end with "{x}"', 'never ends in "{x}"'),
    "contain": ('contains "{x}"', 'has "{x}"'),
    "not-contain": ('does not contain "{x}"', 'has no "{x}"'),
    "length": ("exactly {k} characters long", "length {k}"),
    "length-atleast": ("at least {k} characters long", "length {k} or more"),
    "length-range": ("{k1} to {k2} characters long", "length between {k1} and {k2}"),
    "consist-of": ('only "{x}"', 'made of "{x}"', 'composed of "{x}"'),
    "adv-startwith": ('starts with "{x}" but not "{y}"', 'begins with "{x}", not "{y}"'),
    "adv-endwith": ('ends with "{x}" but not "{y}"', 'ends in "{x}", not "{y}"'),
    "cond-contain": ('"{x}" is always followed by "{y}"', 'after "{x}" comes "{y}"'),
    "cond-contain-before": ('"{y}" is always preceded by "{x}"', 'before "{y}" comes "{x}"'),
}

COMP_PHRASES: dict[str, tuple[str, ...]] = {
    "literal": ('"{x}"', 'just "{x}"'),
    "set": ('one of "{x}"', 'any of "{x}"'),
    "rep": ('exactly {k} of "{x}"', '"{x}" repeated {k} times'),
    "repatleast": ('at least {k} of "{x}"', '"{x}" repeated {k}+ times'),
    "reprange": ('{k1} to {k2} of "{x}"', '"{x}" repeated {k1}-{k2} times'),
    "alternative": ('either "{x}" or "{y}"', '"{x}", or else "{y}"'),
}
OPTIONAL_PREFIXES = ("optional: ", "maybe: ")

_SLOT = {"x": '[^"]*', "y": '[^"]*', "k": r"\d+", "k1": r"\d+", "k2": r"\d+"}

CLASS_WORDS = {
    "num": ("digit", "digits"), "let": ("letter", "letters"),
    "low": ("lowercase letter", "lowercase letters"), "cap": ("capital", "capitals"),
    "spec": ("special character", "special characters"), "any": ("character", "characters"),
    "null": ("nothing", "nothing"),
}


def _phrase_regex(phrase: str) -> re.Pattern:
    parts = re.split(r"(\{\w+\})", phrase)
    body = "".join(_SLOT[p[1:-1]] if p.startswith("{") else re.escape(p) for p in parts)
    return re.compile(body)


def _patterns(table: dict[str, tuple[str, ...]]) -> list[tuple[str, re.Pattern]]:
    out = []
    for concept, phrases in table.items():
        kind = "cond-contain" if concept == "cond-contain-before" else concept
        out += [(kind, _phrase_regex(p)) for p in phrases]
    return out


_CONS_PATTERNS = _patterns(CONS_PHRASES)
_COMP_PATTERNS = _patterns(COMP_PHRASES)


def describe(node: Node, plural: bool = False) -> str:
    """Short English description of a literal-level subtree."""
    k = node.kind
    if k == "class":
        return CLASS_WORDS[node.value][plural]
    if k in ("char", "string"):
        return node.value
    if k == "or":
        return f"{describe(node.children[0], plural)} or {describe(node.children[1], plural)}"
    if k == "concat":
        return f"{describe(node.children[0])} then {describe(node.children[1])}"
    if k == "rep":
        return f"{node.params[0]} {describe(node.children[0], node.params[0] != 1)}"
    if k == "repatleast":
        return f"{node.params[0]}+ {describe(node.children[0], True)}"
    if k == "reprange":
        return f"{node.params[0]}-{node.params[1]} {describe(node.children[0], True)}"
    if k == "notcc":
        return f"anything but {describe(node.children[0])}"
    return str(node)


# -------------------------------------------------------------------- model

@dataclass(frozen=True)
class Glyph:
    end: str                    # "head" (startwith) or "tail" (endwith)
    text: str

    def __post_init__(self):
        if self.end not in ("head", "tail"):
            raise ValueError(f"glyph end must be head or tail, not {self.end!r}")


@dataclass(frozen=True)
class Label:
    id: int
    text: str

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError(f"label {self.id} has empty text")


@dataclass(frozen=True)
class Block:
    id: int
    group: int                  # segment index, left to right
    role: str                   # "constraints" or "component"
    glyphs: tuple[Glyph, ...] = ()

    def __post_init__(self):
        if self.role not in ("constraints", "component"):
            raise ValueError(f"unknown block role {self.role!r}")


@dataclass(frozen=True)
class FigureSpec:
    template: Template
    blocks: tuple[Block, ...]
    labels: tuple[Label, ...]
    links: tuple[tuple[int, int], ...]          # (block id, label id)
    delimiter: str | None = None
    repeated: bool = False
    positives: tuple[str, ...] = ()
    negatives: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "template", Template(self.template))
        if not self.blocks:
            raise ValueError("a figure needs at least one block")
        block_ids = {b.id for b in self.blocks}
        label_ids = {lab.id for lab in self.labels}
        if len(block_ids) != len(self.blocks) or len(label_ids) != len(self.labels):
            raise ValueError("duplicate block or label id")
        for b, lab in self.links:
            if b not in block_ids or lab not in label_ids:
                raise ValueError(f"link ({b}, {lab}) names a missing block or label")
        if {lab for _, lab in self.links} != label_ids:
            raise ValueError("every label must be linked to a block")
        if (self.template is Template.SEPARATION) != (self.delimiter is not None):
            raise ValueError("a delimiter is required exactly for separation figures")

    @property
    def groups(self) -> list[list[Block]]:
        out: dict[int, list[Block]] = {}
        for b in self.blocks:
            out.setdefault(b.group, []).append(b)
        return [out[g] for g in sorted(out)]

    def label(self, label_id: int) -> Label:
        return next(lab for lab in self.labels if lab.id == label_id)

    def to_dict(self) -> dict:
        return {
            "template": self.template.value,
            "blocks": [{"id": b.id, "group": b.group, "role": b.role,
                        "glyphs": [{"end": g.end, "text": g.text} for g in b.glyphs]} for b in self.blocks],
            "labels": [{"id": lab.id, "text": lab.text} for lab in self.labels],
            "links": [list(x) for x in self.links],
            "delimiter": self.delimiter,
            "repeated": self.repeated,
            "positives": list(self.positives),
            "negatives": list(self.negatives),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FigureSpec":
        blocks = tuple(Block(b["id"], b["group"], b["role"],
                             tuple(Glyph(g["end"], g["text"]) for g in b["glyphs"])) for b in d["blocks"])
        return cls(Template(d["template"]), blocks,
                   tuple(Label(x["id"], x["text"]) for x in d["labels"]),
                   tuple((b, lab) for b, lab in d["links"]), d.get("delimiter"), bool(d.get("repeated")),
                   tuple(d.get("positives", ())), tuple(d.get("negatives", ())))


# ----------------------------------------------------------------- building

def _strip_not(node: Node) -> tuple[int, Node]:
    negs = 0
    while node.kind == "not":
        negs += 1
        node = node.children[0]
    return negs, node


def _fill(phrase: str, **slots) -> str:
    return phrase.format(**slots)


def _cons_text(node: Node, kind: str, rng: random.Random) -> str:
    pool = CONS_PHRASES
    if kind in ("length", "length-atleast", "length-range"):
        p = node.params
        k1 = p[0]
        return _fill(rng.choice(pool[kind]), k=k1, k1=k1, k2=p[-1])
    if kind == "consist-of":
        return _fill(rng.choice(pool[kind]), x=describe(node.children[0]))
    if kind in ("adv-startwith", "adv-endwith"):
        pos, neg = node.children
        return _fill(rng.choice(pool[kind]), x=describe(pos.children[0]),
                     y=describe(neg.children[0].children[0]))
    if kind == "cond-contain":
        first, second = node.children[0].children[0].children
        if first.kind == "notcc":
            return _fill(rng.choice(pool["cond-contain-before"]), x=describe(first.children[0]),
                         y=describe(second))
        return _fill(rng.choice(pool[kind]), x=describe(first), y=describe(second.children[0]))
    _, inner = _strip_not(node)
    return _fill(rng.choice(pool[kind]), x=describe(inner.children[0]))


def _comp_text(node: Node, kind: str, rng: random.Random) -> str:
    prefix = ""
    if kind.startswith("optional-"):
        prefix = rng.choice(OPTIONAL_PREFIXES)
        kind = kind[len("optional-"):]
        while node.kind == "optional":
            node = node.children[0]
    pool = COMP_PHRASES[kind]
    if kind == "literal":
        text = _fill(rng.choice(pool), x=describe(node))
    elif kind == "set":
        text = _fill(rng.choice(pool), x=describe(node))
    elif kind == "alternative":
        text = _fill(rng.choice(pool), x=describe(node.children[0]), y=describe(node.children[1]))
    else:
        p = node.params
        text = _fill(rng.choice(pool), x=describe(node.children[0], True), k=p[0], k1=p[0], k2=p[-1])
    return prefix + text


def figure_spec(ast: Node, rng: random.Random | None = None, positives=(), negatives=(),
                template: Template | str | None = None) -> FigureSpec:
    """Lay out ``ast`` as a figure; raises ``UndefinedShapeError`` off-template."""
    rng = rng or random.Random(0)
    lay: Layout = layout(ast, template)
    blocks: list[Block] = []
    labels: list[Label] = []
    links: list[tuple[int, int]] = []
    shared: dict[tuple[str, Node], int] = {}

    def label_for(role: str, unit: Node, kind: str) -> int:
        key = (role, unit)
        if key not in shared:
            text = _cons_text(unit, kind, rng) if role == "constraints" else _comp_text(unit, kind, rng)
            shared[key] = len(labels)
            labels.append(Label(len(labels), text))
        return shared[key]

    for g, seg in enumerate(lay.segments):
        if seg.template is Template.INTERSECTION:
            bid = len(blocks)
            glyphs = []
            for unit in seg.units:
                kind = cons_kind(unit)
                if kind in ("startwith", "endwith"):
                    _, inner = _strip_not(unit)
                    glyphs.append(Glyph("head" if kind == "startwith" else "tail", describe(inner.children[0])))
                else:
                    links.append((bid, label_for("constraints", unit, kind)))
            blocks.append(Block(bid, g, "constraints", tuple(glyphs)))
        else:
            for unit in seg.units:
                bid = len(blocks)
                blocks.append(Block(bid, g, "component"))
                links.append((bid, label_for("component", unit, comp_kind(unit))))
    delim = lay.delimiter.value if lay.delimiter is not None else None
    return FigureSpec(lay.template, tuple(blocks), tuple(labels), tuple(links), delim, lay.repeated,
                      tuple(positives), tuple(negatives))


# -------------------------------------------------------------------- audit

class AuditError(ValueError):
    """A label whose text does not read as exactly one concept."""


def read_label(text: str, role: str) -> str:
    """The constraint or component kind a label's text expresses."""
    optional = ""
    if role == "component":
        for prefix in OPTIONAL_PREFIXES:
            if text.startswith(prefix):
                optional, text = "optional-", text[len(prefix):]
                break
    patterns = _CONS_PATTERNS if role == "constraints" else _COMP_PATTERNS
    kinds = {kind for kind, pat in patterns if pat.fullmatch(text)}
    if len(kinds) != 1:
        raise AuditError(f"label {text!r} reads as {sorted(kinds) or 'nothing'}")
    return optional + kinds.pop()


def audit(spec: FigureSpec) -> Counter:
    """Multiset of constraint/component kinds recovered from the figure alone."""
    out: Counter = Counter()
    role = {b.id: b.role for b in spec.blocks}
    for b in spec.blocks:
        for g in b.glyphs:
            out["startwith" if g.end == "head" else "endwith"] += 1
    for bid, lid in spec.links:
        out[read_label(spec.label(lid).text, role[bid])] += 1
    if spec.template is Template.SEPARATION:
        out["delimiter-repeated" if spec.repeated else "delimiter"] += 1
    return out


def expected_kinds(ast: Node, template: Template | str | None = None) -> Counter:
    return Counter(layout(ast, template).kinds())


# ---------------------------------------------------------------------- SVG

CHAR_W = 7
BLOCK_H = 44
GLYPH_W = 70
GAP = 24
MARKER_R = 11
TOP = 20
LABEL_TOP = 130
LABEL_ROW = 26


def _block_width(block: Block) -> int:
    return max(80, sum(GLYPH_W + 10 for _ in block.glyphs) + 30)


def render_svg(spec: FigureSpec) -> str:
    """Static SVG: blocks in a row, delimiter markers between groups,
    labels underneath joined to their blocks by elbow connectors."""
    xs: dict[int, tuple[int, int]] = {}
    markers: list[tuple[int, str]] = []
    x = 10
    groups = spec.groups
    for gi, group in enumerate(groups):
        for b in group:
            w = _block_width(b)
            xs[b.id] = (x, w)
            x += w + 8
        if spec.delimiter is not None and (gi < len(groups) - 1 or spec.repeated):
            x += GAP // 2
            markers.append((x + MARKER_R, spec.delimiter))
            x += 2 * MARKER_R + GAP // 2
    if spec.repeated:
        markers.append((x + MARKER_R, "…"))
        x += 2 * MARKER_R + 8
    label_x: dict[int, int] = {}
    lx = 10
    for lab in spec.labels:
        label_x[lab.id] = lx
        lx += len(lab.text) * CHAR_W + 24
    n_rows = 1
    examples = [("+", s) for s in spec.positives] + [("−", s) for s in spec.negatives]
    height = LABEL_TOP + LABEL_ROW * n_rows + 20 + 16 * len(examples)
    width = max(x, lx) + 10
    svg = ET.Element("svg", {"xmlns": "http://www.w3.org/2000/svg", "width": str(width),
                             "height": str(height), "viewBox": f"0 0 {width} {height}",
                             "font-family": "monospace", "font-size": "12"})
    for b in spec.blocks:
        bx, w = xs[b.id]
        ET.SubElement(svg, "rect", {"class": "block", "x": str(bx), "y": str(TOP), "width": str(w),
                                    "height": str(BLOCK_H), "fill": "white", "stroke": "black"})
        for g in b.glyphs:
            gx = bx if g.end == "head" else bx + w - GLYPH_W
            ET.SubElement(svg, "rect", {"class": f"glyph {g.end}", "x": str(gx), "y": str(TOP),
                                        "width": str(GLYPH_W), "height": str(BLOCK_H), "fill": "#bbbbbb"})
            t = ET.SubElement(svg, "text", {"class": "glyph-text", "x": str(gx + 4), "y": str(TOP + BLOCK_H // 2 + 4)})
            t.text = g.text
    for mx, text in markers:
        ET.SubElement(svg, "circle", {"class": "delimiter", "cx": str(mx), "cy": str(TOP + BLOCK_H // 2),
                                      "r": str(MARKER_R), "fill": "white", "stroke": "black"})
        t = ET.SubElement(svg, "text", {"class": "delimiter-text", "x": str(mx - 3), "y": str(TOP + BLOCK_H // 2 + 4)})
        t.text = text
    for i, (bid, lid) in enumerate(spec.links):
        bx, w = xs[bid]
        start = bx + w // 2
        elbow = TOP + BLOCK_H + 12 + 6 * (i % 8)
        end = label_x[lid] + 10
        points = f"{start},{TOP + BLOCK_H} {start},{elbow} {end},{elbow} {end},{LABEL_TOP - 14}"
        ET.SubElement(svg, "polyline", {"class": "link", "points": points, "fill": "none", "stroke": "black"})
    for lab in spec.labels:
        t = ET.SubElement(svg, "text", {"class": "label", "x": str(label_x[lab.id]), "y": str(LABEL_TOP)})
        t.text = lab.text
    y = LABEL_TOP + LABEL_ROW * n_rows
    for sign, s in examples:
        t = ET.SubElement(svg, "text", {"class": "example", "x": "10", "y": str(y)})
        t.text = f"{sign} {s}"
        y += 16
    return ET.tostring(svg, encoding="unicode")
