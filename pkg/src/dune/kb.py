"""Knowledge base DSL: parsing, validation, serialization.

Grammar (whitespace insignificant, '#' comments to end of line):

    kb      := { demon }
    demon   := "demon" IDENT "{" { clause } "}"
    clause  := "accept" INT | "reject" INT | "death" INT
             | "behavior" IDENT | "output" STRING
             | "leaf" IDENT INT
             | "group" IDENT "{" "members" "[" IDENT { "," IDENT } "]"
                                 [ "bonus" "[" INT { "," INT } "]" ] "}"
    IDENT   := [a-z_][a-z0-9_]*
    INT     := "-"? [0-9]+
    STRING  := double-quoted, with \\" \\\\ \\n escapes

Thresholds default to accept 90, reject 0, death 0 and each may appear at
most once per demon. The parser never raises on malformed input: it returns
positioned diagnostics, and any ERROR prevents a KnowledgeBase from being
produced. Line and column numbers are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .engine import (
    BonusSchedule,
    CONF_MAX,
    CONF_MIN,
    CriterionGroup,
    DemonDef,
    KnowledgeBase,
    STANDARD_BEHAVIOR,
    ThresholdSet,
)


class Severity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    line: int
    column: int
    code: str
    message: str

    def to_json(self) -> dict:
        return {
            "severity": self.severity.value,
            "line": self.line,
            "column": self.column,
            "code": self.code,
            "message": self.message,
        }

    def render(self, origin: str = "<kb>") -> str:
        tag = "error" if self.severity is Severity.ERROR else "warning"
        return f"{origin}:{self.line}:{self.column}: {tag}[{self.code}]: {self.message}"


@dataclass(frozen=True)
class KbSource:
    text: str
    origin: str = "<inline>"


class KbError(Exception):
    def __init__(self, message: str, diagnostics: list[Diagnostic]):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class ParseResult:
    kb: KnowledgeBase | None
    diagnostics: list[Diagnostic]
    origin: str = "<inline>"

    @property
    def ok(self) -> bool:
        return self.kb is not None

    def ensure(self) -> KnowledgeBase:
        if self.kb is None:
            raise KbError(f"knowledge base has errors ({self.origin})", self.diagnostics)
        return self.kb


# ---------------------------------------------------------------- lexing

_IDENT_START = set("abcdefghijklmnopqrstuvwxyz_")
_IDENT_CONT = _IDENT_START | set("0123456789")
_DIGITS = set("0123456789")
_PUNCT = {"{": "LBRACE", "}": "RBRACE", "[": "LBRACK", "]": "RBRACK", ",": "COMMA"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def bump(ch: str) -> None:
        nonlocal line, col
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            bump(ch)
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                bump(text[i])
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line, col))
            bump(ch)
            i += 1
            continue
        if ch in _IDENT_START:
            start, sline, scol = i, line, col
            while i < n and text[i] in _IDENT_CONT:
                bump(text[i])
                i += 1
            tokens.append(Token("IDENT", text[start:i], sline, scol))
            continue
        if ch in _DIGITS or (ch == "-" and i + 1 < n and text[i + 1] in _DIGITS):
            start, sline, scol = i, line, col
            bump(ch)
            i += 1
            while i < n and text[i] in _DIGITS:
                bump(text[i])
                i += 1
            tokens.append(Token("INT", text[start:i], sline, scol))
            continue
        if ch == '"':
            sline, scol = line, col
            bump(ch)
            i += 1
            value: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\n":
                    break
                if c == "\\" and i + 1 < n:
                    esc = text[i + 1]
                    value.append({"n": "\n", '"': '"', "\\": "\\"}.get(esc, esc))
                    bump(c)
                    bump(esc)
                    i += 2
                    continue
                if c == '"':
                    bump(c)
                    i += 1
                    closed = True
                    break
                value.append(c)
                bump(c)
                i += 1
            if not closed:
                diags.append(
                    Diagnostic(Severity.ERROR, sline, scol, "syntax", "unterminated string")
                )
            tokens.append(Token("STRING", "".join(value), sline, scol))
            continue
        diags.append(
            Diagnostic(Severity.ERROR, line, col, "syntax", f"unexpected character {ch!r}")
        )
        bump(ch)
        i += 1

    tokens.append(Token("EOF", "", line, col))
    return tokens, diags


# ---------------------------------------------------------------- parsing

_CLAUSE_KEYWORDS = {"accept", "reject", "death", "behavior", "output", "leaf", "group"}
_THRESHOLD_DEFAULTS = {"accept": 90, "reject": 0, "death": 0}


class _Parser:
    def __init__(self, tokens: list[Token], diags: list[Diagnostic]):
        self.tokens = tokens
        self.diags = diags
        self.pos = 0

    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, tok: Token, code: str, message: str) -> None:
        self.diags.append(Diagnostic(Severity.ERROR, tok.line, tok.col, code, message))

    def expect(self, kind: str, what: str) -> Token | None:
        tok = self.cur()
        if tok.kind != kind:
            self.error(tok, "syntax", f"expected {what}, found {tok.text or tok.kind!r}")
            return None
        return self.advance()

    def skip_to_clause_boundary(self) -> None:
        # Panic recovery inside a demon body: stop at the next clause keyword,
        # the closing brace of the body, or a new demon header.
        depth = 0
        while True:
            tok = self.cur()
            if tok.kind == "EOF":
                return
            if depth == 0:
                if tok.kind == "RBRACE":
                    return
                if tok.kind == "IDENT" and (tok.text in _CLAUSE_KEYWORDS or tok.text == "demon"):
                    return
            if tok.kind == "LBRACE":
                depth += 1
            elif tok.kind == "RBRACE" and depth > 0:
                depth -= 1
            self.advance()

    def skip_to_demon(self) -> None:
        while True:
            tok = self.cur()
            if tok.kind == "EOF" or (tok.kind == "IDENT" and tok.text == "demon"):
                return
            self.advance()

    # -- clause pieces

    def parse_int(self, what: str) -> tuple[int, Token] | None:
        tok = self.expect("INT", what)
        if tok is None:
            return None
        return int(tok.text), tok

    def parse_group(self, demon_name: str, seen_groups: set[str]) -> CriterionGroup | None:
        name_tok = self.expect("IDENT", "group name")
        if name_tok is None:
            return None
        if name_tok.text in seen_groups:
            self.error(name_tok, "duplicate_group", f"group declared twice: {name_tok.text!r}")
        seen_groups.add(name_tok.text)
        if self.expect("LBRACE", "'{'") is None:
            return None

        members: list[str] = []
        member_set: set[str] = set()
        kw = self.cur()
        if kw.kind == "IDENT" and kw.text == "members":
            self.advance()
            if self.expect("LBRACK", "'['") is None:
                self.skip_to_clause_boundary()
            else:
                while True:
                    tok = self.expect("IDENT", "group member")
                    if tok is None:
                        break
                    if tok.text in member_set:
                        self.error(
                            tok,
                            "duplicate_member",
                            f"member repeated within group {name_tok.text!r}: {tok.text!r}",
                        )
                    else:
                        member_set.add(tok.text)
                        members.append(tok.text)
                    if self.cur().kind == "COMMA":
                        self.advance()
                        continue
                    break
                self.expect("RBRACK", "']'")
        else:
            self.error(kw, "syntax", f"expected 'members', found {kw.text or kw.kind!r}")
        if not members:
            self.error(name_tok, "syntax", f"group {name_tok.text!r} has no members")

        schedule: BonusSchedule | None = None
        kw = self.cur()
        if kw.kind == "IDENT" and kw.text == "bonus":
            bonus_tok = self.advance()
            values: list[int] = []
            value_tokens: list[Token] = []
            if self.expect("LBRACK", "'['") is not None:
                while True:
                    got = self.parse_int("bonus value")
                    if got is None:
                        break
                    value, tok = got
                    values.append(value)
                    value_tokens.append(tok)
                    if self.cur().kind == "COMMA":
                        self.advance()
                        continue
                    break
                self.expect("RBRACK", "']'")
            for value, tok in zip(values, value_tokens):
                if not 0 <= value <= 100:
                    self.error(tok, "bonus_out_of_range", f"bonus value out of [0, 100]: {value}")
            for prev, (value, tok) in zip(values, list(zip(values, value_tokens))[1:]):
                if value < prev:
                    self.error(
                        tok,
                        "bonus_not_nondecreasing",
                        f"bonus list not nondecreasing at {value} (after {prev})",
                    )
            if members and len(values) > len(members):
                self.error(
                    value_tokens[len(members)],
                    "bonus_longer_than_members",
                    f"bonus list longer than members ({len(values)} > {len(members)})",
                )
            if values:
                schedule = BonusSchedule(tuple(values))
            else:
                self.error(bonus_tok, "syntax", "bonus clause with no values")

        self.expect("RBRACE", "'}'")
        return CriterionGroup(
            name=name_tok.text,
            members=tuple(members),
            schedule=schedule,
            source_pos=(name_tok.line, name_tok.col),
        )

    def parse_demon(self, seen_names: set[str]) -> DemonDef | None:
        head = self.cur()
        if not (head.kind == "IDENT" and head.text == "demon"):
            self.error(
                head, "unknown_keyword", f"expected 'demon', found {head.text or head.kind!r}"
            )
            self.advance()
            self.skip_to_demon()
            return None
        self.advance()

        name_tok = self.expect("IDENT", "demon name")
        if name_tok is None:
            self.skip_to_demon()
            return None
        if name_tok.text in seen_names:
            self.error(name_tok, "duplicate_demon", f"demon declared twice: {name_tok.text!r}")
        seen_names.add(name_tok.text)

        if self.expect("LBRACE", "'{'") is None:
            self.skip_to_demon()
            return None

        thresholds = dict(_THRESHOLD_DEFAULTS)
        seen_clauses: set[str] = set()
        seen_groups: set[str] = set()
        behavior = STANDARD_BEHAVIOR
        output_text: str | None = None
        leaves: dict[str, int] = {}
        groups: list[CriterionGroup] = []

        while True:
            tok = self.cur()
            if tok.kind == "RBRACE":
                self.advance()
                break
            if tok.kind == "EOF":
                self.error(tok, "syntax", f"unterminated demon {name_tok.text!r}")
                break
            if tok.kind != "IDENT":
                self.error(tok, "syntax", f"expected a clause, found {tok.text or tok.kind!r}")
                self.advance()
                self.skip_to_clause_boundary()
                continue
            if tok.text == "demon":
                self.error(tok, "syntax", f"unterminated demon {name_tok.text!r}")
                break
            if tok.text not in _CLAUSE_KEYWORDS:
                self.error(tok, "unknown_keyword", f"unknown keyword {tok.text!r}")
                self.advance()
                self.skip_to_clause_boundary()
                continue

            keyword = self.advance()
            if keyword.text in ("accept", "reject", "death"):
                if keyword.text in seen_clauses:
                    self.error(
                        keyword, "duplicate_clause", f"clause given twice: {keyword.text!r}"
                    )
                seen_clauses.add(keyword.text)
                got = self.parse_int(f"{keyword.text} threshold")
                if got is None:
                    self.skip_to_clause_boundary()
                    continue
                value, value_tok = got
                if not CONF_MIN <= value <= CONF_MAX:
                    self.error(
                        value_tok,
                        "threshold_out_of_range",
                        f"{keyword.text} threshold out of [{CONF_MIN}, {CONF_MAX}]: {value}",
                    )
                else:
                    thresholds[keyword.text] = value
            elif keyword.text == "behavior":
                if "behavior" in seen_clauses:
                    self.error(keyword, "duplicate_clause", "clause given twice: 'behavior'")
                seen_clauses.add("behavior")
                tok = self.expect("IDENT", "behavior id")
                if tok is None:
                    self.skip_to_clause_boundary()
                    continue
                behavior = tok.text
            elif keyword.text == "output":
                if "output" in seen_clauses:
                    self.error(keyword, "duplicate_clause", "clause given twice: 'output'")
                seen_clauses.add("output")
                tok = self.expect("STRING", "output string")
                if tok is None:
                    self.skip_to_clause_boundary()
                    continue
                output_text = tok.text
            elif keyword.text == "leaf":
                feature_tok = self.expect("IDENT", "feature name")
                if feature_tok is None:
                    self.skip_to_clause_boundary()
                    continue
                got = self.parse_int("leaf weight")
                if got is None:
                    self.skip_to_clause_boundary()
                    continue
                weight, weight_tok = got
                if feature_tok.text in leaves:
                    self.error(
                        feature_tok,
                        "duplicate_leaf",
                        f"leaf declared twice: {feature_tok.text!r}",
                    )
                    continue
                if not CONF_MIN <= weight <= CONF_MAX:
                    self.error(
                        weight_tok,
                        "weight_out_of_range",
                        f"leaf weight out of [{CONF_MIN}, {CONF_MAX}]: {weight}",
                    )
                    continue
                leaves[feature_tok.text] = weight
            else:  # group
                group = self.parse_group(name_tok.text, seen_groups)
                if group is None:
                    self.skip_to_clause_boundary()
                    continue
                groups.append(group)

        return DemonDef(
            name=name_tok.text,
            leaves=leaves,
            groups=groups,
            thresholds=ThresholdSet(
                death=thresholds["death"], reject=thresholds["reject"], accept=thresholds["accept"]
            ),
            behavior=behavior,
            output_text=output_text,
            source_pos=(name_tok.line, name_tok.col),
        )

    def parse(self) -> list[DemonDef]:
        demons: list[DemonDef] = []
        seen: set[str] = set()
        while self.cur().kind != "EOF":
            demon = self.parse_demon(seen)
            if demon is not None:
                demons.append(demon)
        return demons


def parse_kb(source: KbSource | str) -> ParseResult:
    """Parse DSL text into a KnowledgeBase.

    Never raises on malformed input. Any ERROR diagnostic leaves kb as None.
    """
    src = KbSource(source) if isinstance(source, str) else source
    tokens, diags = _lex(src.text)
    parser = _Parser(tokens, diags)
    demons = parser.parse()
    has_errors = any(d.severity is Severity.ERROR for d in diags)
    kb = None if has_errors else KnowledgeBase(demons)
    return ParseResult(kb=kb, diagnostics=diags, origin=src.origin)


def load_kb_file(path: str | Path) -> ParseResult:
    path = Path(path)
    return parse_kb(KbSource(path.read_text(encoding="utf-8"), origin=str(path)))


# ------------------------------------------------------------- validation

_BUILTIN_BEHAVIORS = frozenset({STANDARD_BEHAVIOR})


def _pos(obj) -> tuple[int, int]:
    return obj.source_pos if obj.source_pos else (0, 0)


def validate_kb(
    kb: KnowledgeBase, known_behaviors: frozenset[str] | set[str] | None = None
) -> list[Diagnostic]:
    """Semantic checks beyond the grammar.

    ERRORs: duplicate demon names, threshold values out of range or ordered
    against death <= reject < accept, behavior ids with no registration.
    WARNINGs: demons whose maximum attainable confidence cannot reach accept,
    and groups that carry an explicit bonus schedule totalling zero.
    """
    known = frozenset(known_behaviors) if known_behaviors is not None else _BUILTIN_BEHAVIORS
    diags: list[Diagnostic] = []
    seen: set[str] = set()

    for demon in kb.demons:
        line, col = _pos(demon)
        if demon.name in seen:
            diags.append(
                Diagnostic(
                    Severity.ERROR,
                    line,
                    col,
                    "duplicate_demon",
                    f"demon declared twice: {demon.name!r}",
                )
            )
        seen.add(demon.name)

        th = demon.thresholds
        for label, value in (("death", th.death), ("reject", th.reject), ("accept", th.accept)):
            if not CONF_MIN <= value <= CONF_MAX:
                diags.append(
                    Diagnostic(
                        Severity.ERROR,
                        line,
                        col,
                        "threshold_out_of_range",
                        f"{demon.name}: {label} threshold out of [{CONF_MIN}, {CONF_MAX}]: {value}",
                    )
                )
        if not (th.death <= th.reject < th.accept):
            diags.append(
                Diagnostic(
                    Severity.ERROR,
                    line,
                    col,
                    "threshold_order",
                    f"{demon.name}: thresholds must satisfy death <= reject < accept "
                    f"(got death {th.death}, reject {th.reject}, accept {th.accept})",
                )
            )

        if demon.behavior not in known:
            diags.append(
                Diagnostic(
                    Severity.ERROR,
                    line,
                    col,
                    "unknown_behavior",
                    f"demon {demon.name!r} references unregistered behavior {demon.behavior!r}",
                )
            )

        max_attainable = sum(max(0, w) for w in demon.leaves.values()) + sum(
            group.full_bonus() for group in demon.groups
        )
        if max_attainable < th.accept:
            diags.append(
                Diagnostic(
                    Severity.WARNING,
                    line,
                    col,
                    "unreachable_accept",
                    f"demon {demon.name!r} can never reach accept "
                    f"(max attainable {max_attainable} < {th.accept})",
                )
            )

        for group in demon.groups:
            gline, gcol = _pos(group)
            if group.schedule is not None and group.full_bonus() == 0:
                diags.append(
                    Diagnostic(
                        Severity.WARNING,
                        gline,
                        gcol,
                        "zero_bonus_group",
                        f"group {group.name!r} of demon {demon.name!r} carries a bonus "
                        f"schedule totalling zero",
                    )
                )
    return diags


# ---------------------------------------------------------- serialization

def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def serialize_kb(kb: KnowledgeBase) -> str:
    """Canonical text form: thresholds always explicit, clauses in a fixed
    order, so that parse(serialize(kb)) == kb."""
    chunks: list[str] = []
    for demon in kb.demons:
        lines = [f"demon {demon.name} {{"]
        th = demon.thresholds
        lines.append(f"  accept {th.accept}")
        lines.append(f"  reject {th.reject}")
        lines.append(f"  death {th.death}")
        if demon.behavior != STANDARD_BEHAVIOR:
            lines.append(f"  behavior {demon.behavior}")
        if demon.output_text != demon.name:
            lines.append(f'  output "{_escape(demon.output_text or "")}"')
        for feature, weight in demon.leaves.items():
            lines.append(f"  leaf {feature} {weight}")
        for group in demon.groups:
            lines.append(f"  group {group.name} {{")
            lines.append(f"    members [{', '.join(group.members)}]")
            if group.schedule is not None:
                lines.append(f"    bonus [{', '.join(str(v) for v in group.schedule.cumulative)}]")
            lines.append("  }")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n" if chunks else ""
