"""Restricted-English referring expressions: tokenizer, parser, renderer.

Grammar (recursive descent, longest match for multiword relations):

    utterance   := imperative | declarative | np
    imperative  := ACTION np
    declarative := np "is" REL np
    np          := ["the" | "a"] ATTR* NOUN [relclause]
    relclause   := ["that" "is"] REL np
    ATTR        := COLOR | SIZE | SHAPE
    NOUN        := any single remaining token (open class)

Actions and relation surface forms are closed vocabularies; nouns are open
and synonym-normalized.  Relation clauses nest at most two levels deep.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .fuzzy import Relation, Shape
from .scene import Color, SizeClass, normalize_category

ACTIONS = (
    ("give", "me"),
    ("hand", "me"),
    ("pick", "up"),
    ("pass", "me"),
    ("point", "to"),
)

# Longest surface forms first so e.g. "to the left of" wins over "left of".
RELATION_SURFACES: tuple[tuple[tuple[str, ...], Relation], ...] = (
    (("to", "the", "left", "of"), Relation.LEFT_OF),
    (("to", "the", "right", "of"), Relation.RIGHT_OF),
    (("in", "front", "of"), Relation.IN_FRONT_OF),
    (("left", "of"), Relation.LEFT_OF),
    (("right", "of"), Relation.RIGHT_OF),
    (("next", "to"), Relation.NEXT_TO),
    (("behind",), Relation.BEHIND),
    (("near",), Relation.NEAR),
    (("on",), Relation.ON),
)

RELATION_RENDER = {
    Relation.LEFT_OF: "left of",
    Relation.RIGHT_OF: "right of",
    Relation.IN_FRONT_OF: "in front of",
    Relation.BEHIND: "behind",
    Relation.NEAR: "near",
    Relation.NEXT_TO: "next to",
    Relation.ON: "on",
}

COLOR_WORDS = {c.value: c for c in Color}
SIZE_WORDS = {s.value: s for s in SizeClass}
SHAPE_WORDS = {s.value: s for s in Shape}
DETERMINERS = ("the", "a")
MAX_RELATION_DEPTH = 2

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class ParseError(Exception):
    """Parse failure with the token position, what was expected, and what was found."""

    def __init__(self, position: int, expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"at token {position}: expected {expected}, found {found!r}")


@dataclass(frozen=True)
class RefExp:
    """Structured referring expression.

    ``raw_text`` is kept for transcripts but ignored by equality so parsed
    and programmatically built expressions compare structurally.
    """

    target_category: str
    color: Color | None = None
    size: SizeClass | None = None
    shape: Shape | None = None
    relations: tuple[tuple[Relation, "RefExp"], ...] = ()
    raw_text: str = field(default="", compare=False)

    def depth(self) -> int:
        if not self.relations:
            return 0
        return 1 + max(landmark.depth() for _, landmark in self.relations)


@dataclass(frozen=True)
class AnswerFragment:
    """Partial constraints extracted from a clarification answer."""

    category: str | None = None
    color: Color | None = None
    size: SizeClass | None = None
    shape: Shape | None = None
    relations: tuple[tuple[Relation, RefExp], ...] = ()


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return _TOKEN_RE.findall(text.lower())


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def take(self) -> str:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, expected: str) -> ParseError:
        found = self.peek()
        return ParseError(self.i, expected, found if found is not None else "end of input")

    def match_relation(self) -> Relation | None:
        for surface, rel in RELATION_SURFACES:
            if tuple(self.tokens[self.i : self.i + len(surface)]) == surface:
                self.i += len(surface)
                return rel
        return None

    def at_relation(self) -> bool:
        save = self.i
        rel = self.match_relation()
        self.i = save
        return rel is not None

    def utterance(self) -> RefExp:
        pair = (self.peek(), self.peek(1))
        if pair in ACTIONS:
            self.i += 2
            np = self.noun_phrase(0)
            self.expect_end()
            return np
        np = self.noun_phrase(0)
        if self.peek() == "is":
            self.take()
            rel = self.match_relation()
            if rel is None:
                raise self.error("a relation after 'is'")
            landmark = self.noun_phrase(1)
            np = replace(np, relations=np.relations + ((rel, landmark),))
        self.expect_end()
        return np

    def noun_phrase(self, depth: int) -> RefExp:
        if self.peek() in DETERMINERS:
            self.take()

        color: Color | None = None
        size: SizeClass | None = None
        shape: Shape | None = None
        while True:
            tok = self.peek()
            if tok in COLOR_WORDS:
                if color is not None:
                    raise self.error("a noun (color already given)")
                color = COLOR_WORDS[self.take()]
            elif tok in SIZE_WORDS:
                if size is not None:
                    raise self.error("a noun (size already given)")
                size = SIZE_WORDS[self.take()]
            elif tok in SHAPE_WORDS:
                if shape is not None:
                    raise self.error("a noun (shape already given)")
                shape = SHAPE_WORDS[self.take()]
            else:
                break

        if self.peek() is None:
            raise self.error("a noun")
        noun = normalize_category(self.take())

        relations: tuple[tuple[Relation, RefExp], ...] = ()
        has_clause = False
        if self.peek() == "that":
            if self.peek(1) != "is":
                raise self.error("'is' after 'that'")
            self.i += 2
            has_clause = True
        if has_clause or self.at_relation():
            if depth >= MAX_RELATION_DEPTH:
                raise self.error("end of phrase (relations nest at most two levels)")
            rel = self.match_relation()
            if rel is None:
                raise self.error("a relation")
            landmark = self.noun_phrase(depth + 1)
            relations = ((rel, landmark),)

        return RefExp(noun, color=color, size=size, shape=shape, relations=relations)

    def expect_end(self) -> None:
        if self.peek() is not None:
            raise self.error("end of utterance")


def parse(text: str) -> RefExp:
    """Parse an utterance into a RefExp; raises ParseError on any deviation."""
    parser = _Parser(tokenize(text))
    result = parser.utterance()
    return replace(result, raw_text=text)


def parse_fragment(text: str) -> AnswerFragment:
    """Parse a clarification answer: full phrase, bare attributes, or bare relation.

    Raises ParseError when none of the three forms fit.
    """
    tokens = tokenize(text)
    try:
        rx = parse(text)
        return AnswerFragment(
            category=rx.target_category,
            color=rx.color,
            size=rx.size,
            shape=rx.shape,
            relations=rx.relations,
        )
    except ParseError:
        pass

    fillers = {"the", "a", "one", "it", "that"}
    core = [t for t in tokens if t not in fillers]
    if core and all(t in COLOR_WORDS or t in SIZE_WORDS or t in SHAPE_WORDS for t in core):
        color = size = shape = None
        for t in core:
            if t in COLOR_WORDS:
                if color is not None:
                    raise ParseError(tokens.index(t), "a single color", t)
                color = COLOR_WORDS[t]
            elif t in SIZE_WORDS:
                if size is not None:
                    raise ParseError(tokens.index(t), "a single size", t)
                size = SIZE_WORDS[t]
            else:
                if shape is not None:
                    raise ParseError(tokens.index(t), "a single shape", t)
                shape = SHAPE_WORDS[t]
        return AnswerFragment(color=color, size=size, shape=shape)

    parser = _Parser(tokens)
    rel = parser.match_relation()
    if rel is not None:
        landmark = parser.noun_phrase(1)
        parser.expect_end()
        return AnswerFragment(relations=((rel, landmark),))
    raise ParseError(0, "an attribute, option, or noun phrase", tokens[0] if tokens else "end of input")


def render(rx: RefExp) -> str:
    """Canonical surface form; parse(render(r)) is structurally r for

    grammar-shaped expressions (at most one relation clause per phrase)."""
    parts = ["the"]
    if rx.color is not None:
        parts.append(rx.color.value)
    if rx.size is not None:
        parts.append(rx.size.value)
    if rx.shape is not None:
        parts.append(rx.shape.value)
    parts.append(rx.target_category)
    for rel, landmark in rx.relations:
        parts.append(RELATION_RENDER[rel])
        parts.append(render(landmark))
    return " ".join(parts)
