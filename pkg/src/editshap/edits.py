"""Edit-set production and manipulation.

Covers applying arbitrary subsets of edits to a source, extracting edits
from a (source, hypothesis) pair as a token-level minimal edit script,
merging edits into grouped players, and reading/writing the M2 and JSONL
interchange formats.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator

from .core import (
    Edit,
    EditSet,
    EditShapError,
    HypothesisMismatchError,
    InvalidPartitionError,
    Sentence,
    parse_sentence,
    validate_edit_set,
)


class M2SyntaxError(EditShapError):
    """Malformed M2 input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


M2_NONE = "-NONE-"
M2_NOOP = "noop"
M2_UNTYPED = "UNK"


def check_mask(mask: int, width: int) -> None:
    if not 0 <= mask < (1 << width):
        raise ValueError(f"mask {mask} out of range for width {width}")


def expand_mask(es: EditSet, mask: int) -> int:
    """Expand a player mask into the corresponding edit-index mask."""
    check_mask(mask, es.n_players)
    edit_mask = 0
    for g, members in enumerate(es.groups):
        if mask >> g & 1:
            for i in members:
                edit_mask |= 1 << i
    return edit_mask


def apply_edit_indices(source: Sentence, edits: tuple[Edit, ...], indices: Iterable[int]) -> Sentence:
    """Apply the selected edits to ``source``.

    Edits are applied in descending span order so that earlier spans keep
    their source-anchored indices.
    """
    tokens = list(source.tokens)
    for i in sorted(indices, key=lambda i: edits[i].sort_key(), reverse=True):
        e = edits[i]
        tokens[e.start:e.end] = e.replacement
    return Sentence(tuple(tokens))


def apply_subset(es: EditSet, mask: int) -> Sentence:
    """Source sentence after applying the players selected by ``mask``.

    The empty mask reproduces the source; the full mask reproduces the
    hypothesis.
    """
    edit_mask = expand_mask(es, mask)
    indices = [i for i in range(es.n_edits) if edit_mask >> i & 1]
    return apply_edit_indices(es.source, es.edits, indices)


def apply_all(es: EditSet) -> Sentence:
    return apply_subset(es, es.full_mask())


def _lcs_matches(a: tuple[str, ...], b: tuple[str, ...]) -> list[tuple[int, int]]:
    """Matched index pairs of one longest common subsequence of ``a`` and ``b``."""
    n, m = len(a), len(b)
    # length[i][j] = LCS length of a[i:], b[j:]
    length = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, nxt = length[i], length[i + 1]
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    matches: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j] and length[i][j] == length[i + 1][j + 1] + 1:
            matches.append((i, j))
            i += 1
            j += 1
        elif length[i + 1][j] >= length[i][j + 1]:
            i += 1
        else:
            j += 1
    return matches


def extract_edits(source: Sentence, hypothesis: Sentence) -> EditSet:
    """Token-level minimal edit script between ``source`` and ``hypothesis``.

    Each maximal run of unmatched tokens between two LCS matches becomes
    one replace/insert/delete edit; applying all edits reproduces the
    hypothesis exactly. Error types are left unset.
    """
    a, b = source.tokens, hypothesis.tokens
    matches = _lcs_matches(a, b)
    edits: list[Edit] = []
    prev_i = prev_j = 0
    for mi, mj in matches + [(len(a), len(b))]:
        if mi > prev_i or mj > prev_j:
            dels = a[prev_i:mi]
            ins = b[prev_j:mj]
            if dels != ins:  # equal runs cannot occur in a true LCS; guard anyway
                edits.append(Edit(prev_i, mi, ins))
        prev_i, prev_j = mi + 1, mj + 1
    return validate_edit_set(source, edits)


def group_edits(es: EditSet, groups: Iterable[Iterable[int]]) -> EditSet:
    """Merge edits into grouped players per the given partition of indices.

    Each group becomes one attribution player whose member edits apply and
    unapply atomically. Groups need not be contiguous. Raises
    :class:`InvalidPartitionError` if ``groups`` is not a partition of
    ``range(es.n_edits)``.
    """
    normalized: list[tuple[int, ...]] = []
    seen: set[int] = set()
    for group in groups:
        members = tuple(sorted(group))
        if not members:
            raise InvalidPartitionError("empty group")
        for i in members:
            if not 0 <= i < es.n_edits:
                raise InvalidPartitionError(f"edit index {i} out of range")
            if i in seen:
                raise InvalidPartitionError(f"edit index {i} appears in two groups")
            seen.add(i)
        normalized.append(members)
    if len(seen) != es.n_edits:
        missing = sorted(set(range(es.n_edits)) - seen)
        raise InvalidPartitionError(f"edit indices {missing} not covered by any group")
    normalized.sort(key=lambda g: g[0])
    return EditSet(es.source, es.edits, tuple(normalized))


# ---------------------------------------------------------------------------
# M2 format
# ---------------------------------------------------------------------------

def _iter_lines(data: str | IO[str] | Iterable[str]) -> Iterator[str]:
    if isinstance(data, str):
        return iter(data.splitlines())
    return iter(data)


def _parse_a_line(line: str, line_no: int) -> tuple[int, Edit | None]:
    body = line[2:]
    fields = body.split("|||")
    if len(fields) < 4:
        raise M2SyntaxError(line_no, f"expected at least 4 '|||' fields, got {len(fields)}")
    span = fields[0].split()
    if len(span) != 2:
        raise M2SyntaxError(line_no, f"bad span {fields[0]!r}")
    try:
        start, end = int(span[0]), int(span[1])
    except ValueError:
        raise M2SyntaxError(line_no, f"non-integer span {fields[0]!r}") from None
    error_type = fields[1]
    replacement = fields[2]
    try:
        annotator = int(fields[-1])
    except ValueError:
        raise M2SyntaxError(line_no, f"non-integer annotator id {fields[-1]!r}") from None
    if error_type.lower() == M2_NOOP or (start, end) == (-1, -1):
        return annotator, None
    if replacement == M2_NONE:
        replacement = ""
    try:
        edit = Edit(start, end, tuple(replacement.split()), error_type)
    except EditShapError as exc:
        raise M2SyntaxError(line_no, str(exc)) from None
    return annotator, edit


def parse_m2(data: str | IO[str] | Iterable[str]) -> list[dict[int, EditSet]]:
    """Parse M2 text into one ``{annotator: EditSet}`` mapping per sentence.

    Blocks are one ``S`` line followed by zero or more ``A`` lines,
    separated by blank lines. ``noop`` annotations and blocks without
    annotations yield empty edit sets. Raises :class:`M2SyntaxError` with
    the offending line number on malformed input.
    """
    blocks: list[dict[int, EditSet]] = []
    source: Sentence | None = None
    pending: dict[int, list[Edit]] = {}

    def close_block(line_no: int) -> None:
        nonlocal source, pending
        if source is None:
            return
        if not pending:
            pending = {0: []}
        out: dict[int, EditSet] = {}
        for annotator in sorted(pending):
            try:
                out[annotator] = validate_edit_set(source, pending[annotator])
            except EditShapError as exc:
                raise M2SyntaxError(line_no, f"annotator {annotator}: {exc}") from None
        blocks.append(out)
        source = None
        pending = {}

    line_no = 0
    for line_no, raw in enumerate(_iter_lines(data), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            close_block(line_no)
            continue
        if line.startswith("S ") or line == "S":
            if source is not None:
                raise M2SyntaxError(line_no, "unexpected 'S' line inside a block")
            source = parse_sentence(line[2:])
            continue
        if line.startswith("A "):
            if source is None:
                raise M2SyntaxError(line_no, "'A' line before any 'S' line")
            annotator, edit = _parse_a_line(line, line_no)
            pending.setdefault(annotator, [])
            if edit is not None:
                pending[annotator].append(edit)
            continue
        raise M2SyntaxError(line_no, f"unrecognized line {line!r}")
    close_block(line_no + 1)
    return blocks


def emit_m2(blocks: list[dict[int, EditSet]]) -> str:
    """Serialize sentence blocks to normalized M2 text (inverse of parse_m2)."""
    out: list[str] = []
    for block in blocks:
        if not block:
            raise ValueError("cannot emit an M2 block without annotators")
        sources = {es.source for es in block.values()}
        if len(sources) != 1:
            raise ValueError("annotators of one block must share the source sentence")
        source = next(iter(sources))
        out.append("S " + source.text() if source.tokens else "S")
        for annotator in sorted(block):
            es = block[annotator]
            if not es.edits:
                out.append(f"A -1 -1|||{M2_NOOP}|||{M2_NONE}|||REQUIRED|||{M2_NONE}|||{annotator}")
                continue
            for e in es.edits:
                repl = e.span_text() or M2_NONE
                etype = e.error_type or M2_UNTYPED
                out.append(f"A {e.start} {e.end}|||{etype}|||{repl}|||REQUIRED|||{M2_NONE}|||{annotator}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# JSONL format
# ---------------------------------------------------------------------------

def edit_set_to_json(es: EditSet, hypothesis: Sentence | None = None) -> dict:
    hyp = hypothesis if hypothesis is not None else apply_all(es)
    return {
        "source": es.source.text(),
        "hypothesis": hyp.text(),
        "edits": [
            {
                "start": e.start,
                "end": e.end,
                "replacement": e.span_text(),
                "type": e.error_type or "",
            }
            for e in es.edits
        ],
    }


def edit_set_from_json(obj: dict) -> EditSet:
    """Build an EditSet from one JSONL record.

    A record carries ``source`` plus ``edits`` and/or ``hypothesis``. With
    both present, applying the edits must reproduce the hypothesis; with
    only a hypothesis, edits are extracted; with only edits, the
    hypothesis is implied.
    """
    if "source" not in obj:
        raise EditShapError("record is missing 'source'")
    source = parse_sentence(obj["source"])
    hypothesis = parse_sentence(obj["hypothesis"]) if "hypothesis" in obj else None
    if "edits" in obj:
        edits = []
        for entry in obj["edits"]:
            repl = entry.get("replacement", "")
            edits.append(
                Edit(
                    int(entry["start"]),
                    int(entry["end"]),
                    tuple(repl.split()) if isinstance(repl, str) else tuple(repl),
                    entry.get("type") or None,
                )
            )
        es = validate_edit_set(source, edits)
        if hypothesis is not None and apply_all(es) != hypothesis:
            raise HypothesisMismatchError(
                f"edits applied to {source.text()!r} yield "
                f"{apply_all(es).text()!r}, not {hypothesis.text()!r}"
            )
        return es
    if hypothesis is None:
        raise EditShapError("record needs 'edits' or 'hypothesis'")
    return extract_edits(source, hypothesis)


def read_jsonl(data: str | IO[str] | Iterable[str]) -> list[EditSet]:
    """Read one EditSet per JSONL line; blank lines are skipped."""
    out = []
    for line_no, line in enumerate(_iter_lines(data), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EditShapError(f"line {line_no}: invalid JSON: {exc}") from None
        try:
            out.append(edit_set_from_json(obj))
        except EditShapError as exc:
            raise type(exc)(f"line {line_no}: {exc}") from None
    return out


def write_jsonl(edit_sets: Iterable[EditSet], stream: IO[str]) -> None:
    for es in edit_sets:
        stream.write(json.dumps(edit_set_to_json(es), ensure_ascii=False) + "\n")
