"""Symbolic cable-word engine.

A cable word records, in order, the signed region-to-region transitions a
cable makes on its way from the interior point of a bounded region out to
the exterior.  Reduction collapses the word to a single integer coefficient
per cable in one left-to-right scan: each step either cancels an inverse
pair (the two signed contributions sum to zero) or merges two consecutive
transitions into one composite transition whose coefficient is the sum of
the two.  Either way the total signed sum is preserved, so the final
coefficient equals the plain signed crossing count.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import ChainError, MissingVolumeError, WordSyntaxError

import re


@dataclass(frozen=True, slots=True)
class RegionId:
    """One connected component of the complement; `inf` is the exterior."""

    label: str
    is_exterior: bool = False

    def __str__(self):
        return "inf" if self.is_exterior else self.label


EXTERIOR = RegionId("inf", is_exterior=True)

_REGION_CACHE: dict = {"inf": EXTERIOR}


def region(label) -> RegionId:
    """Normalize a label into a RegionId; `inf` maps to the exterior."""
    key = str(label)
    rid = _REGION_CACHE.get(key)
    if rid is None:
        rid = RegionId(key)
        _REGION_CACHE[key] = rid
    return rid


@dataclass(frozen=True, slots=True)
class Symbol:
    """A signed crossing from one region into an adjacent one."""

    source: RegionId
    target: RegionId
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.source == self.target:
            raise ValueError(f"crossing cannot stay in region {self.source}")

    def __str__(self):
        return f"{self.source}>{self.target}:{'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True, slots=True)
class CableWord:
    """Ordered transitions along one cable, starting from its home region."""

    cable_id: str
    home: RegionId
    symbols: tuple = ()

    def __len__(self):
        return len(self.symbols)

    @property
    def terminal(self) -> RegionId:
        return self.symbols[-1].target if self.symbols else self.home


@dataclass(frozen=True, slots=True)
class ReducedTerm:
    """Composite transition `coefficient * (source, target)`."""

    coefficient: int
    source: RegionId
    target: RegionId

    def __str__(self):
        return f"{self.coefficient}({self.source},{self.target})"


@dataclass(frozen=True)
class CableSystemWord:
    """One cable word per bounded region."""

    words: tuple
    region_set: frozenset

    @classmethod
    def from_words(cls, words: Iterable[CableWord]) -> "CableSystemWord":
        words = tuple(words)
        homes = [w.home for w in words]
        for h in homes:
            if h.is_exterior:
                raise ValueError(f"cable {h} has an exterior home region")
        if len(set(homes)) != len(homes):
            dupes = sorted({str(h) for h in homes if homes.count(h) > 1})
            raise ValueError(f"duplicate home regions: {', '.join(dupes)}")
        mentioned = set(homes)
        for w in words:
            for s in w.symbols:
                mentioned.add(s.source)
                mentioned.add(s.target)
        return cls(words=words, region_set=frozenset(mentioned))

    @property
    def missing_words(self) -> frozenset:
        """Bounded regions that are traversed but own no cable."""
        homes = {w.home for w in self.words}
        return frozenset(
            r for r in self.region_set if not r.is_exterior and r not in homes
        )


_HEADER_RE = re.compile(r"^\s*(?P<id>[^\s:]+)\s*:(?P<rest>.*)$")
_SYMBOL_RE = re.compile(r"^(?P<src>\d+|inf)>(?P<dst>\d+|inf):(?P<sign>[+-])$")


def check_chain(word: CableWord) -> None:
    """Raise ChainError unless the word chains from its home region."""
    current = word.home
    for j, sym in enumerate(word.symbols):
        if sym.source != current:
            raise ChainError(
                f"cable {word.cable_id}: symbol {j} starts in {sym.source} "
                f"but the previous transition ended in {current}"
            )
        current = sym.target


def parse_word(text: str, line: int | None = None) -> CableWord:
    """Parse one word-file line, `<cable-id> ":" (<from> ">" <to> ":" <sign>)*`.

    Region tokens are decimal labels or the literal `inf`.  An empty body is
    allowed; the home region then defaults to the cable id.
    """
    m = _HEADER_RE.match(text)
    if m is None:
        raise WordSyntaxError("expected '<cable-id>:' header", line=line, column=1)
    cable_id = m.group("id")
    symbols = []
    body_offset = m.start("rest")
    for tok_m in re.finditer(r"\S+", m.group("rest")):
        tok = tok_m.group(0)
        column = body_offset + tok_m.start() + 1
        sm = _SYMBOL_RE.match(tok)
        if sm is None:
            raise WordSyntaxError(
                f"bad symbol {tok!r}; expected '<from>><to>:+' or ':-'",
                line=line,
                column=column,
            )
        symbols.append(
            Symbol(
                source=region(sm.group("src")),
                target=region(sm.group("dst")),
                sign=1 if sm.group("sign") == "+" else -1,
            )
        )
    home = symbols[0].source if symbols else region(cable_id)
    word = CableWord(cable_id=cable_id, home=home, symbols=tuple(symbols))
    check_chain(word)
    return word


def parse_word_file(text: str) -> list[CableWord]:
    """Parse a whole word file; blank lines and `#` comments are skipped."""
    words = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        words.append(parse_word(raw, line=line_no))
    return words


def signed_sum(word: CableWord) -> int:
    """Plain signed crossing count of the word."""
    return sum(s.sign for s in word.symbols)


def reduce_word(word: CableWord) -> ReducedTerm:
    """Collapse a chain-valid word to a single composite transition.

    One pass, constant working state: the accumulated coefficient and the
    current endpoint region.  The final coefficient equals signed_sum(word).
    """
    coefficient = 0
    current = word.home
    cable_id = word.cable_id
    for j, sym in enumerate(word.symbols):
        if sym.source != current:
            raise ChainError(
                f"cable {cable_id}: symbol {j} starts in {sym.source} "
                f"but the previous transition ended in {current}"
            )
        coefficient += sym.sign
        current = sym.target
    return ReducedTerm(coefficient=coefficient, source=word.home, target=current)


def reduce_steps(word: CableWord) -> Iterator[tuple[str, ReducedTerm]]:
    """Yield ("cancel" | "merge", accumulated term) after each rewrite step.

    A step is a cancellation when the incoming symbol exactly inverts the
    previous one; every other step is a transitive merge.  Both add the
    incoming signed contribution to the accumulated coefficient.
    """
    coefficient = 0
    current = word.home
    previous = None
    for j, sym in enumerate(word.symbols):
        if sym.source != current:
            raise ChainError(
                f"cable {word.cable_id}: symbol {j} starts in {sym.source} "
                f"but the previous transition ended in {current}"
            )
        kind = "merge"
        if (
            previous is not None
            and previous.source == sym.target
            and previous.sign == -sym.sign
        ):
            kind = "cancel"
        coefficient += sym.sign
        current = sym.target
        previous = sym
        yield kind, ReducedTerm(coefficient, word.home, current)


@dataclass(frozen=True)
class CableCheck:
    """Word-level simplicity diagnostics for one cable."""

    cable_id: str
    endpoints_ok: bool
    reentered: tuple = ()
    violations: tuple = ()

    @property
    def simple(self) -> bool:
        return self.endpoints_ok and not self.reentered


@dataclass(frozen=True)
class SimplicityReport:
    cables: tuple
    notes: tuple = ()

    @property
    def all_simple(self) -> bool:
        return all(c.simple for c in self.cables)


def _check_cable(word: CableWord) -> CableCheck:
    check_chain(word)
    violations = []
    endpoints_ok = True
    if word.home.is_exterior:
        endpoints_ok = False
        violations.append("home region is the exterior")
    if not word.terminal.is_exterior:
        endpoints_ok = False
        violations.append(f"cable ends in {word.terminal}, not inf")
    visited = [word.home] + [s.target for s in word.symbols]
    left: set = set()
    reentered = []
    for prev, nxt in zip(visited, visited[1:]):
        if not prev.is_exterior:
            left.add(prev)
        if not nxt.is_exterior and nxt in left and nxt not in reentered:
            reentered.append(nxt)
    for r in reentered:
        violations.append(f"region {r} re-entered after departure")
    return CableCheck(
        cable_id=word.cable_id,
        endpoints_ok=endpoints_ok,
        reentered=tuple(reentered),
        violations=tuple(violations),
    )


def validate_simple(system: CableSystemWord) -> SimplicityReport:
    """Check the word-level simplicity conditions for every cable.

    Endpoint correctness and the no-re-entry condition are decidable from
    the words alone; pairwise disjointness of the cables is geometric and is
    reported as not checkable here.
    """
    checks = tuple(_check_cable(w) for w in system.words)
    notes = ["pairwise cable disjointness is geometric; not checkable at word level"]
    missing = system.missing_words
    if missing:
        labels = ", ".join(sorted(str(r) for r in missing))
        notes.append(f"regions without a cable of their own: {labels}")
    return SimplicityReport(cables=checks, notes=tuple(notes))


def vdeg(reduced: Iterable[ReducedTerm], volumes: Mapping[RegionId, float]) -> float:
    """Degree-weighted volume, sum of |coefficient| * Vol(home region)."""
    total = 0.0
    for term in reduced:
        vol = volumes.get(term.source)
        if vol is None:
            raise MissingVolumeError(f"no volume entry for region {term.source}")
        if vol < 0:
            raise ValueError(f"negative volume for region {term.source}: {vol}")
        total += abs(term.coefficient) * vol
    return total
