"""The ``.bnet`` network-definition format, its parser, and all serializers.

The format is line-oriented and mirrors a CPT-per-variable declaration style,
so published tables paste in directly (percent rows are normalized at build
time):

    # a trait with two levels, scored by one five-point question
    var F : 0 1 @trait
    var Q11 : 1 2 3 4 5 @question

    prior F = [ 50 50 ]
    cpt Q11 | F = [
      50 30 10 5 5 ;
      2 3 5 40 50
    ]

Grammar:

* ``#`` starts a line comment.
* ``var <name> : <state> <state> ...`` declares a variable; states are bare
  words or double-quoted strings (``\\`` escapes); an optional trailing
  ``@trait`` or ``@question`` sets the role.
* ``cpt <child> [| <parent> [, <parent>]*] = [ <row> ; <row> ; ... ]`` gives
  one row of nonnegative decimals per parent configuration, the last listed
  parent varying fastest.  ``prior X = [ ... ]`` is sugar for a parentless
  table.
* Declarations may span lines only inside ``[`` ``]``; variables must be
  declared before any table references them.

Files are UTF-8; LF and CRLF both work.  Errors carry 1-based line/column
positions pointing at (or before) the first offending character.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .errors import CycleError, ModelError
from .inference import QueryResult
from .model import Cpt, Network, Role, Variable, build_network
from .simulate import SampleSet

_BARE = re.compile(r'[^\s:|,=\[\];@"#]+')
_ROLES = {"trait": Role.TRAIT, "question": Role.QUESTION}
_DOT_SHAPES = {Role.TRAIT: "ellipse", Role.QUESTION: "box", Role.UNSPECIFIED: "circle"}


class ParseError(ValueError):
    """A syntax or consistency error in a network definition."""

    def __init__(self, line: int, column: int, message: str, snippet: str = ""):
        self.line = line
        self.column = column
        self.message = message
        self.snippet = snippet
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class _Token:
    kind: str  # "word" | "string" | "punct" | "newline"
    text: str
    line: int
    col: int


def _tokenize(lines: list[str]) -> list[_Token]:
    tokens: list[_Token] = []
    for ln, line in enumerate(lines, start=1):
        i = 0
        while i < len(line):
            ch = line[i]
            if ch in " \t":
                i += 1
                continue
            if ch == "#":
                break
            col = i + 1
            if ch == '"':
                buf: list[str] = []
                j = i + 1
                while j < len(line) and line[j] != '"':
                    if line[j] == "\\":
                        if j + 1 >= len(line) or line[j + 1] not in '"\\':
                            raise ParseError(ln, j + 1, "bad escape in string", line)
                        buf.append(line[j + 1])
                        j += 2
                    else:
                        buf.append(line[j])
                        j += 1
                if j >= len(line):
                    raise ParseError(ln, col, "unterminated string", line)
                tokens.append(_Token("string", "".join(buf), ln, col))
                i = j + 1
                continue
            if ch in ":|,=[];@":
                tokens.append(_Token("punct", ch, ln, col))
                i += 1
                continue
            match = _BARE.match(line, i)
            assert match is not None
            tokens.append(_Token("word", match.group(), ln, col))
            i = match.end()
        tokens.append(_Token("newline", "", ln, len(line) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.tokens = _tokenize(self.lines)
        self.pos = 0
        self.variables: dict[str, Variable] = {}
        self.var_tokens: dict[str, _Token] = {}
        self.cpts: dict[str, Cpt] = {}
        self.cpt_tokens: dict[str, _Token] = {}

    # -- cursor helpers ----------------------------------------------------

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token | None:
        tok = self._peek()
        if tok is not None:
            self.pos += 1
        return tok

    def _fail(self, tok: _Token | None, message: str):
        if tok is None:
            line = len(self.lines) or 1
            col = len(self.lines[-1]) + 1 if self.lines else 1
            raise ParseError(line, col, message, self.lines[-1] if self.lines else "")
        raise ParseError(tok.line, tok.col, message, self._snippet(tok.line))

    def _snippet(self, line: int) -> str:
        return self.lines[line - 1] if 0 < line <= len(self.lines) else ""

    def _expect_punct(self, text: str, context: str) -> _Token:
        tok = self._next()
        if tok is None or tok.kind == "newline":
            self._fail(tok, f"unexpected end of line in {context} (expected {text!r})")
        if tok.kind != "punct" or tok.text != text:
            self._fail(tok, f"expected {text!r} in {context}, got {tok.text!r}")
        return tok

    def _expect_name(self, context: str) -> _Token:
        tok = self._next()
        if tok is None or tok.kind == "newline":
            self._fail(tok, f"unexpected end of line in {context} (expected a name)")
        if tok.kind not in ("word", "string"):
            self._fail(tok, f"expected a name in {context}, got {tok.text!r}")
        return tok

    def _expect_end_of_line(self, context: str) -> None:
        tok = self._next()
        if tok is None:
            return
        if tok.kind != "newline":
            self._fail(tok, f"unexpected {tok.text!r} after {context}")

    # -- statements ----------------------------------------------------------

    def parse(self) -> Network:
        while True:
            tok = self._next()
            if tok is None:
                break
            if tok.kind == "newline":
                continue
            if tok.kind == "word" and tok.text == "var":
                self._parse_var(tok)
            elif tok.kind == "word" and tok.text in ("cpt", "prior"):
                self._parse_table(tok)
            else:
                self._fail(tok, f"expected 'var', 'cpt', or 'prior', got {tok.text!r}")

        if not self.variables:
            raise ParseError(1, 1, "no variables declared", self._snippet(1))
        for name, tok in self.var_tokens.items():
            if name not in self.cpts:
                raise ParseError(
                    tok.line, tok.col, f"variable {name!r} has no cpt or prior",
                    self._snippet(tok.line),
                )
        return self._build()

    def _parse_var(self, keyword: _Token) -> None:
        name_tok = self._expect_name("var declaration")
        name = name_tok.text
        if name in self.variables:
            self._fail(name_tok, f"duplicate declaration of variable {name!r}")
        self._expect_punct(":", f"var {name!r}")

        states: list[str] = []
        role = Role.UNSPECIFIED
        while True:
            tok = self._next()
            if tok is None or tok.kind == "newline":
                break
            if tok.kind == "punct" and tok.text == "@":
                role_tok = self._expect_name(f"role of var {name!r}")
                if role_tok.text not in _ROLES:
                    self._fail(role_tok, f"unknown role {role_tok.text!r}; use @trait or @question")
                role = _ROLES[role_tok.text]
                self._expect_end_of_line(f"var {name!r}")
                break
            if tok.kind not in ("word", "string"):
                self._fail(tok, f"expected a state label for var {name!r}, got {tok.text!r}")
            if tok.text in states:
                self._fail(tok, f"duplicate state {tok.text!r} for var {name!r}")
            states.append(tok.text)
        if len(states) < 2:
            self._fail(name_tok, f"var {name!r} needs at least 2 states, got {len(states)}")
        self.variables[name] = Variable(name=name, states=tuple(states), role=role)
        self.var_tokens[name] = name_tok

    def _parse_table(self, keyword: _Token) -> None:
        kind = keyword.text
        child_tok = self._expect_name(f"{kind} declaration")
        child = child_tok.text
        if child not in self.variables:
            self._fail(child_tok, f"undeclared variable {child!r}")
        if child in self.cpts:
            self._fail(child_tok, f"duplicate cpt or prior for variable {child!r}")

        parents: list[str] = []
        if kind == "cpt":
            tok = self._peek()
            if tok is not None and tok.kind == "punct" and tok.text == "|":
                self._next()
                while True:
                    parent_tok = self._expect_name(f"parent list of cpt {child!r}")
                    if parent_tok.text not in self.variables:
                        self._fail(parent_tok, f"undeclared variable {parent_tok.text!r}")
                    if parent_tok.text in parents:
                        self._fail(parent_tok, f"duplicate parent {parent_tok.text!r}")
                    parents.append(parent_tok.text)
                    nxt = self._peek()
                    if nxt is not None and nxt.kind == "punct" and nxt.text == ",":
                        self._next()
                        continue
                    break

        self._expect_punct("=", f"{kind} {child!r}")
        open_tok = self._expect_punct("[", f"{kind} {child!r}")

        rows: list[list[float]] = []
        row_tokens: list[_Token] = []
        current: list[float] = []
        current_start: _Token | None = None
        closed = False
        while not closed:
            tok = self._next()
            if tok is None:
                self._fail(None, f"{kind} {child!r}: missing closing ']'")
            if tok.kind == "newline":
                continue
            if tok.kind == "punct" and tok.text in (";", "]"):
                if not current:
                    self._fail(tok, f"{kind} {child!r}: empty row")
                rows.append(current)
                row_tokens.append(current_start)  # type: ignore[arg-type]
                current, current_start = [], None
                closed = tok.text == "]"
                continue
            if tok.kind != "word":
                self._fail(tok, f"{kind} {child!r}: expected a probability, got {tok.text!r}")
            try:
                value = float(tok.text)
            except ValueError:
                self._fail(tok, f"{kind} {child!r}: expected a probability, got {tok.text!r}")
            if not (value >= 0.0) or value != value or value == float("inf"):
                self._fail(tok, f"{kind} {child!r}: probabilities must be finite and nonnegative")
            if current_start is None:
                current_start = tok
            current.append(value)
        self._expect_end_of_line(f"{kind} {child!r}")

        expected_cols = self.variables[child].n_states
        for i, (row, start) in enumerate(zip(rows, row_tokens)):
            if len(row) != expected_cols:
                self._fail(
                    start,
                    f"row {i + 1} of {kind} {child!r} has {len(row)} entries, "
                    f"expected {expected_cols} (one per state of {child!r})",
                )
        expected_rows = 1
        for parent in parents:
            expected_rows *= self.variables[parent].n_states
        if len(rows) != expected_rows:
            self._fail(
                open_tok,
                f"{kind} {child!r} has {len(rows)} rows, expected {expected_rows} "
                f"(one per parent configuration)",
            )
        for i, (row, start) in enumerate(zip(rows, row_tokens)):
            if sum(row) == 0.0:
                self._fail(start, f"row {i + 1} of {kind} {child!r} sums to zero")

        self.cpts[child] = Cpt(child=child, parents=tuple(parents), rows=np.array(rows))
        self.cpt_tokens[child] = keyword

    def _build(self) -> Network:
        try:
            return build_network(self.variables.values(), self.cpts.values())
        except CycleError as exc:
            tok = min(
                (self.cpt_tokens[name] for name in exc.cycle if name in self.cpt_tokens),
                key=lambda t: (t.line, t.col),
            )
            raise ParseError(tok.line, tok.col, str(exc), self._snippet(tok.line)) from None
        except ModelError as exc:  # pragma: no cover - parser pre-validates
            raise ParseError(1, 1, str(exc), self._snippet(1)) from None


def parse_network(text: str) -> Network:
    """Parse a ``.bnet`` definition into a validated :class:`Network`."""
    return _Parser(text).parse()


def _atom(s: str) -> str:
    if _BARE.fullmatch(s):
        return s
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _role_suffix(role: Role) -> str:
    return "" if role is Role.UNSPECIFIED else f" @{role.value}"


def serialize_network(network: Network) -> str:
    """Canonical text for a network; parsing it back yields an equal network.

    Variables come out in topological order; states are quoted only when
    needed; probabilities print in shortest round-trip form.
    """
    out: list[str] = []
    for name in network.order:
        var = network.variable(name)
        states = " ".join(_atom(s) for s in var.states)
        out.append(f"var {_atom(name)} : {states}{_role_suffix(var.role)}")
    out.append("")
    for name in network.order:
        cpt = network.cpts[name]
        rows = [" ".join(repr(v) for v in row) for row in cpt.rows.tolist()]
        if not cpt.parents:
            out.append(f"prior {_atom(name)} = [ {rows[0]} ]")
        else:
            parents = ", ".join(_atom(p) for p in cpt.parents)
            out.append(f"cpt {_atom(name)} | {parents} = [")
            for i, row in enumerate(rows):
                out.append(f"  {row}{' ;' if i + 1 < len(rows) else ''}")
            out.append("]")
    return "\n".join(out) + "\n"


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(network: Network) -> str:
    """DOT digraph: one node per variable (shape by role), one edge per arc."""
    out = ["digraph network {"]
    for name in network.order:
        var = network.variable(name)
        out.append(f"  {_dot_id(name)} [label={_dot_id(name)}, shape={_DOT_SHAPES[var.role]}];")
    for parent, child in network.edges():
        out.append(f"  {_dot_id(parent)} -> {_dot_id(child)};")
    out.append("}")
    return "\n".join(out) + "\n"


def export_result_json(result: QueryResult) -> str:
    """Stable-key JSON for a query result, at full precision.

    Variables are keyed in sorted order; states keep their declared order.
    """
    payload = {
        "evidence_probability": result.evidence_probability,
        "marginals": {
            name: {state: p for state, p in result.marginals[name].items()}
            for name in sorted(result.marginals)
        },
    }
    return json.dumps(payload, indent=2) + "\n"


def export_samples(samples: SampleSet) -> str:
    """Tab-separated sample table: one column per variable plus the weight."""
    header = "\t".join(samples.columns + ("weight",))
    lines = [header]
    spaces = samples.state_spaces
    for row, weight in zip(samples.indices.tolist(), samples.weights.tolist()):
        labels = [spaces[j][i] for j, i in enumerate(row)]
        labels.append(repr(weight))
        lines.append("\t".join(labels))
    return "\n".join(lines) + "\n"
