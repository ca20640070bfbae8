"""s-implication with advice: irreversible reference, block computation over
bounded-index-width formulas, the Bennett pebbling schedule, and reversible
execution with xor-cell semantics.

Flag values carried in a memory cell: 0 alive, 1 contradiction, 2 out of
advice (the two-children verdict), 3 satisfied early. The cell also carries a
satisfied-clause counter so the blocks can detect global satisfaction from
window-local events; without it the block composition diverges from the
reference on formulas that become satisfied before the last variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .formula import (
    UNSET,
    CnfFormula,
    PartialAssignment,
    SImplication,
    index_width,
    restrict,
    s_implied_over_clauses,
)

FLAG_ALIVE = 0
FLAG_CONTRADICTION = 1
FLAG_OUT_OF_ADVICE = 2
FLAG_SATISFIED = 3

_REASON = {FLAG_CONTRADICTION: "contradiction", FLAG_SATISFIED: "satisfied"}


@dataclass(frozen=True)
class SiaOutcome:
    kind: str                      # "zeroChildren" | "twoChildren"
    reason: str | None             # contradiction | satisfied | fullAssignment
    at_variable: int | None        # the guess variable for twoChildren
    advice_consumed: int
    flag: int

    def comparable(self) -> tuple:
        return (self.kind, self.reason, self.advice_consumed, self.flag)


@dataclass(frozen=True)
class Cell:
    """One memory cell: last block's values, advice cursor, flag, sat count."""

    block: tuple[int, ...]
    cursor: int
    flag: int
    sat_count: int

    @classmethod
    def zero(cls, w: int) -> "Cell":
        return cls((0,) * w, 0, 0, 0)

    def is_zero(self) -> bool:
        return (self.cursor == 0 and self.flag == 0 and self.sat_count == 0
                and all(b == 0 for b in self.block))

    def xor(self, other: "Cell") -> "Cell":
        if len(self.block) != len(other.block):
            raise ValueError("cell width mismatch")
        return Cell(tuple(a ^ b for a, b in zip(self.block, other.block)),
                    self.cursor ^ other.cursor, self.flag ^ other.flag,
                    self.sat_count ^ other.sat_count)


def _clause_spans(formula: CnfFormula) -> list[tuple[int, int, tuple[int, ...]]]:
    return [(min(abs(l) for l in c), max(abs(l) for l in c), c)
            for c in formula.clauses if c]


class _SiaCore:
    """Shared per-variable transition used by the reference and the blocks.

    `window` maps the last <= w assigned variables to values; the satisfied
    counter and flag reproduce the reference's contradiction / satisfied /
    out-of-advice stops exactly.
    """

    def __init__(self, formula: CnfFormula, s: int, w: int | None,
                 target_clauses: int | None = None):
        self.formula = formula
        self.s = s
        self.w = w
        self.spans = _clause_spans(formula)
        # Satisfaction target; padding clauses can be excluded by the caller.
        self.target = target_clauses if target_clauses is not None else len(self.spans)
        self.by_var: dict[int, list[int]] = {}
        for idx, (_, _, clause) in enumerate(self.spans):
            for lit in clause:
                self.by_var.setdefault(abs(lit), []).append(idx)

    def window_clauses(self, window: dict[int, int], var: int) -> list[tuple[int, ...]]:
        """Restricted clauses containing a variable >= var, computed from the
        window alone (sound for index width <= w)."""
        out = []
        for lo, hi, clause in self.spans:
            if hi < var:
                continue
            stripped = []
            alive = True
            for lit in clause:
                v = abs(lit)
                if v >= var:
                    stripped.append(lit)
                    continue
                if v not in window:
                    raise ValueError(
                        f"variable {v} outside the w-window while deciding {var}; "
                        "index width exceeds w")
                if (lit > 0) == bool(window[v]):
                    alive = False
                    break
            if alive:
                out.append(tuple(stripped))
        return out

    def implication(self, window: dict[int, int], var: int) -> SImplication:
        return s_implied_over_clauses(self.window_clauses(window, var), var, self.s)

    def post_assign(self, window: dict[int, int], var: int, sat_count: int) -> tuple[int, int]:
        """Clause fates sealed by assigning `var`: returns (sat_count, flag)."""
        for idx in self.by_var.get(var, ()):
            lo, hi, clause = self.spans[idx]
            made_true = False
            earlier_true = False
            for lit in clause:
                v = abs(lit)
                if v > var or v not in window:
                    continue
                if (lit > 0) == bool(window[v]):
                    if v == var:
                        made_true = True
                    else:
                        earlier_true = True
                        break
            if earlier_true:
                continue
            if made_true:
                sat_count += 1
                continue
            if hi == var:
                # Clause fully assigned with every literal false.
                return sat_count, FLAG_CONTRADICTION
        if sat_count == self.target:
            return sat_count, FLAG_SATISFIED
        return sat_count, FLAG_ALIVE


def sia_reference(formula: CnfFormula, advice: str | tuple[int, ...],
                  s: int = 1) -> SiaOutcome:
    """Irreversible SIA: walk variables 1..n, forcing by s-implication and
    spending advice bits on guesses; stops on contradiction, satisfaction, or
    advice exhaustion at a guess."""
    bits = tuple(int(b) for b in advice)
    core = _SiaCore(formula, s, None)
    if formula.has_empty_clause:
        return SiaOutcome("zeroChildren", "contradiction", None, 0, FLAG_CONTRADICTION)
    if core.target == 0:
        return SiaOutcome("zeroChildren", "satisfied", None, 0, FLAG_SATISFIED)
    window: dict[int, int] = {}
    cursor = 0
    sat_count = 0
    for var in range(1, formula.num_vars + 1):
        verdict = core.implication(window, var)
        if verdict == SImplication.FREE:
            if cursor == len(bits):
                return SiaOutcome("twoChildren", None, var, cursor, FLAG_OUT_OF_ADVICE)
            window[var] = bits[cursor]
            cursor += 1
        else:
            # Alg. 2 order: the positive test fires first on a double force.
            window[var] = 0 if verdict == SImplication.FORCED_FALSE else 1
        sat_count, flag = core.post_assign(window, var, sat_count)
        if flag == FLAG_CONTRADICTION:
            return SiaOutcome("zeroChildren", "contradiction", None, cursor, flag)
        if flag == FLAG_SATISFIED:
            return SiaOutcome("zeroChildren", "satisfied", None, cursor, flag)
    # Unreachable for formulas with clauses: a full assignment satisfies or
    # contradicts some clause. Kept for the m == 0 guard above.
    return SiaOutcome("zeroChildren", "fullAssignment", None, cursor, FLAG_ALIVE)


def reference_assignment(formula: CnfFormula, advice: str | tuple[int, ...],
                         s: int = 1) -> dict[int, int]:
    """Variable values assigned along the reference path (for audits)."""
    bits = tuple(int(b) for b in advice)
    core = _SiaCore(formula, s, None)
    window: dict[int, int] = {}
    cursor, sat_count = 0, 0
    if formula.has_empty_clause or core.target == 0:
        return {}
    for var in range(1, formula.num_vars + 1):
        verdict = core.implication(window, var)
        if verdict == SImplication.FREE:
            if cursor == len(bits):
                break
            window[var] = bits[cursor]
            cursor += 1
        else:
            window[var] = 0 if verdict == SImplication.FORCED_FALSE else 1
        sat_count, flag = core.post_assign(window, var, sat_count)
        if flag != FLAG_ALIVE:
            break
    return dict(window)


@dataclass(frozen=True)
class BlockInfo:
    """Side-channel detail from one block run (not part of the cell)."""
    at_variable: int | None = None
    assigned: tuple[tuple[int, int], ...] = ()


def siab_block(formula: CnfFormula, block_index: int, w: int,
               input_cell: Cell, advice: str | tuple[int, ...], s: int = 1,
               core: _SiaCore | None = None,
               with_info: bool = False) -> Cell | tuple[Cell, BlockInfo]:
    """Block i computes variables (i-1)*w+1 .. i*w from the previous block.

    Identity when the input flag is set. Block 1 ignores its input cell (it
    initializes cursor, flag and counter to zero).
    """
    if core is None:
        if index_width(formula) > w:
            raise ValueError("formula index width exceeds the block width w")
        core = _SiaCore(formula, s, w)
    bits = tuple(int(b) for b in advice)
    if block_index == 1:
        input_cell = Cell.zero(w)
        if formula.has_empty_clause:
            input_cell = replace(input_cell, flag=FLAG_CONTRADICTION)
        elif core.target == 0:
            input_cell = replace(input_cell, flag=FLAG_SATISFIED)
    if input_cell.flag != FLAG_ALIVE:
        out = input_cell
        return (out, BlockInfo()) if with_info else out
    first = (block_index - 1) * w + 1
    window = {first - w + i: v for i, v in enumerate(input_cell.block)
              if first - w + i >= 1}
    cursor = input_cell.cursor
    sat_count = input_cell.sat_count
    flag = FLAG_ALIVE
    values = [0] * w
    at_variable = None
    assigned: list[tuple[int, int]] = []
    for offset in range(w):
        var = first + offset
        if var > formula.num_vars:
            break
        verdict = core.implication(window, var)
        if verdict == SImplication.FREE:
            if cursor == len(bits):
                flag = FLAG_OUT_OF_ADVICE
                at_variable = var
                break
            window[var] = bits[cursor]
            cursor += 1
        else:
            window[var] = 0 if verdict == SImplication.FORCED_FALSE else 1
        values[offset] = window[var]
        assigned.append((var, window[var]))
        sat_count, flag = core.post_assign(window, var, sat_count)
        if flag != FLAG_ALIVE:
            break
    out = Cell(tuple(values), cursor, flag, sat_count)
    return (out, BlockInfo(at_variable, tuple(assigned))) if with_info else out


def _pad_formula(formula: CnfFormula, w: int) -> tuple[CnfFormula, int, int]:
    """Pad with forced-true dummy unit variables so w divides n and the block
    count is a power of two. Returns (padded, num_blocks, original clauses)."""
    n = formula.num_vars
    blocks = max(1, math.ceil(n / w))
    k = max(0, (blocks - 1).bit_length())
    blocks = 2 ** k
    padded_n = blocks * w
    clauses = list(formula.clauses)
    target = len(clauses)
    for var in range(n + 1, padded_n + 1):
        clauses.append((var,))
    padded = CnfFormula.from_clauses(padded_n, clauses, allow_empty_clause=True)
    return padded, blocks, target


@dataclass
class ScheduleEntry:
    block: int
    source: int    # pebble index, -1 is the input cell
    target: int

    def as_text(self) -> str:
        return f"M[{self.target}] ^= SIAB_{self.block}(M[{self.source}])"


@dataclass
class PebbleSchedule:
    pebbles: int
    entries: list[ScheduleEntry]

    def as_text(self) -> str:
        return "\n".join(e.as_text() for e in self.entries)


def siar_schedule(k: int) -> PebbleSchedule:
    """Bennett pebbling of the 2^k block chain: ternary compute/compute/
    uncompute recursion, 3^k leaf entries, at most k live intermediates."""
    if k < 0:
        raise ValueError("k must be >= 0")
    entries: list[ScheduleEntry] = []

    def rec(a: int, s: int, t: int, p: int) -> None:
        if p == 0:
            entries.append(ScheduleEntry(a, s, t))
            return
        r = p - 1
        b = a + 2 ** r
        rec(a, s, r, p - 1)
        rec(b, r, t, p - 1)
        rec(a, s, r, p - 1)

    rec(1, -1, k, k)
    return PebbleSchedule(k, entries)


@dataclass
class ReversibleTrace:
    """Per-entry audit data for the reversible execution."""

    live_counts: list[int]                  # populated intermediates per step
    peak_live_intermediate: int
    final_cells: dict[int, Cell]
    restored: bool                          # intermediates all zero at the end
    siab_calls: int


def siar_execute(formula: CnfFormula, advice: str | tuple[int, ...], w: int,
                 s: int = 1) -> tuple[SiaOutcome, ReversibleTrace]:
    """Run the pebbling schedule under xor-cell semantics; the final output
    cell reproduces the reference outcome."""
    if index_width(formula) > w:
        raise ValueError("formula index width exceeds the block width w")
    padded, blocks, target = _pad_formula(formula, w)
    core = _SiaCore(padded, s, w, target_clauses=target)
    k = blocks.bit_length() - 1
    schedule = siar_schedule(k)
    cells: dict[int, Cell] = {i: Cell.zero(w) for i in range(-1, k + 1)}
    live_counts = []
    peak = 0
    for entry in schedule.entries:
        value = siab_block(padded, entry.block, w, cells[entry.source], advice,
                           s, core=core)
        cells[entry.target] = cells[entry.target].xor(value)
        live = sum(1 for i in range(k) if not cells[i].is_zero())
        live_counts.append(live)
        peak = max(peak, live)
    restored = all(cells[i].is_zero() for i in range(k))
    out_cell = cells[k]
    outcome = _outcome_from_cell(out_cell)
    trace = ReversibleTrace(
        live_counts=live_counts,
        peak_live_intermediate=peak,
        final_cells=dict(cells),
        restored=restored,
        siab_calls=len(schedule.entries),
    )
    return outcome, trace


def _outcome_from_cell(cell: Cell) -> SiaOutcome:
    if cell.flag == FLAG_OUT_OF_ADVICE:
        # The cell does not carry the guess variable; the concatenation path
        # (siac_run) checks it against the reference instead.
        return SiaOutcome("twoChildren", None, None, cell.cursor, cell.flag)
    if cell.flag in _REASON:
        return SiaOutcome("zeroChildren", _REASON[cell.flag], None, cell.cursor,
                          cell.flag)
    return SiaOutcome("zeroChildren", "fullAssignment", None, cell.cursor, cell.flag)


def siac_run(formula: CnfFormula, advice: str | tuple[int, ...], w: int,
             s: int = 1) -> tuple[SiaOutcome, dict[int, int]]:
    """Plain composition of the blocks (no pebbling); returns the outcome and
    the full assignment observed along the way."""
    if index_width(formula) > w:
        raise ValueError("formula index width exceeds the block width w")
    padded, blocks, target = _pad_formula(formula, w)
    core = _SiaCore(padded, s, w, target_clauses=target)
    cell = Cell.zero(w)
    assignment: dict[int, int] = {}
    at_variable = None
    for block_index in range(1, blocks + 1):
        cell, info = siab_block(padded, block_index, w, cell, advice, s,
                                core=core, with_info=True)
        for var, val in info.assigned:
            if var <= formula.num_vars:
                assignment[var] = val
        if info.at_variable is not None and at_variable is None:
            at_variable = info.at_variable
    outcome = _outcome_from_cell(cell)
    if outcome.kind == "twoChildren":
        outcome = replace(outcome, at_variable=at_variable)
    return outcome, assignment


def double_execute_cells(formula: CnfFormula, advice: str | tuple[int, ...],
                         w: int, s: int = 1) -> dict[int, Cell]:
    """Run the schedule twice; SIAR is its own reverse, so every cell
    (including the output) returns to zero."""
    padded, blocks, target = _pad_formula(formula, w)
    core = _SiaCore(padded, s, w, target_clauses=target)
    k = blocks.bit_length() - 1
    schedule = siar_schedule(k)
    cells: dict[int, Cell] = {i: Cell.zero(w) for i in range(-1, k + 1)}
    for _ in range(2):
        for entry in schedule.entries:
            value = siab_block(padded, entry.block, w, cells[entry.source],
                               advice, s, core=core)
            cells[entry.target] = cells[entry.target].xor(value)
    return cells


def locality_check(formula: CnfFormula, w: int, samples: int,
                   seed: int | None = None, s: int = 1) -> dict:
    """Window-based s-implication must agree with the full-prefix computation
    on every sampled prefix; any mismatch is a hard failure."""
    import random as _random

    if index_width(formula) > w:
        raise ValueError("formula index width exceeds w; locality does not apply")
    rng = _random.Random(seed)
    core = _SiaCore(formula, s, w)
    n = formula.num_vars
    checked = 0
    for _ in range(samples):
        var = rng.randint(1, n)
        prefix = {v: rng.randint(0, 1) for v in range(1, var)}
        assignment = PartialAssignment.of(n, prefix)
        full_clauses = [c for c in restrict(formula, assignment).clauses]
        full = s_implied_over_clauses(full_clauses, var, s)
        window = {v: val for v, val in prefix.items() if v >= var - w}
        local = core.implication(window, var)
        if full != local:
            raise AssertionError(
                f"locality violation at variable {var}: full={full} window={local}")
        checked += 1
    return {"checked": checked, "width": w, "ok": True}


def resource_account(n: int, w: int, s: int, d: int) -> dict:
    """Predicted reversible resources with the polylog constituents itemized;
    cross-check the schedule length and peak cells against a measured run."""
    blocks = max(1, math.ceil(n / w))
    k = max(0, (blocks - 1).bit_length())
    loglog = math.log2(max(2.0, math.log2(max(4, n))))
    t_siab = w * (d ** s) * loglog
    cursor_bits = max(1, (n).bit_length())
    flag_bits = 2
    sat_bits = max(1, (n).bit_length())     # clause count is poly(n); itemized
    cell_bits = w + cursor_bits + flag_bits + sat_bits
    return {
        "k": k,
        "scheduleLength": 3 ** k,
        "siabTime": t_siab,
        "time": (3 ** k) * t_siab,
        "space": w * k + cursor_bits + flag_bits + sat_bits,
        "cellBits": cell_bits,
        "polylogItemized": {
            "cursor": cursor_bits,
            "flag": flag_bits,
            "satCounter": sat_bits,
            "siabAncillas": int(math.ceil(math.log2(max(2, n)) ** 2)),
        },
    }


def grover_advice_success_set(formula: CnfFormula, advice_len: int,
                              s: int = 1) -> set[str]:
    """All advice strings of the given length whose SIA path ends satisfied;
    the Grover-over-advice search space."""
    out = set()
    for value in range(2 ** advice_len):
        bits = tuple((value >> (advice_len - 1 - i)) & 1 for i in range(advice_len))
        outcome = sia_reference(formula, bits, s)
        if outcome.kind == "zeroChildren" and outcome.reason == "satisfied":
            out.add("".join(str(b) for b in bits))
    return out
