"""The 12-opcode register machine behind every complexity value.

A configuration is a pair of bit strings: ``cond`` (the condition
register, initialized to the conditioning string) and ``out`` (the
output register, initially empty), plus a step budget (``fuel``).
Programs are straight-line sequences of 4-bit opcodes, so program
length in bits is always 4 x instruction count.

Opcode map (values are the 4-bit encodings; 12..15 decode as NOP):

    0  OUT0   append 0 to out
    1  OUT1   append 1 to out
    2  CPY    append cond to out
    3  DROPC  drop the last bit of cond
    4  APC0   append 0 to cond
    5  APC1   append 1 to cond
    6  FST    cond := first component of cond as a pair code
    7  SND    cond := second component of cond as a pair code
    8  EXE    cond := output of running cond as a program from the
              empty condition, with half the remaining fuel
    9  SPG    cond := the canonical (shortest, then lexicographically
              least) program of at most 32 bits that produces cond from
              the empty condition, running under half the remaining
              fuel; unchanged if there is none
    10 CLR    append the closed (self-delimiting) encoding of cond to
              out: each bit doubled, then the 01 terminator
    11 NOP    do nothing

Every opcode is total: operations that do not apply (FST on a string
with no pair terminator, DROPC on the empty string, appends that would
exceed the 64-bit cap) leave the configuration unchanged.  This keeps
the reachability relation simple and the complexity function total.

The named instructions carry the constants used by the experiment
harnesses: CPY gives C(x|x) = 4, [FST, EXE, CPY] gives the 12-bit
decode-and-execute path, DROPC/APC give the condition-side Lipschitz
constant 4 by a one-instruction prepend, and [SPG, CPY] gives an 8-bit
description of a shortest program given its output.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from .bits import (
    BitString,
    CAP_BITS,
    EMPTY_KEY,
    key_append,
    key_concat,
    key_double,
    key_len,
    pair_split_key,
)

OPCODE_BITS = 4

#: Longest program SPG will return, in bits (8 instructions).  This is a
#: machine constant on par with the 64-bit string cap: it stratifies the
#: shortest-program instruction so its search is finite and its results
#: do not depend on the exact fuel once the budget is generous.
SPG_PROGRAM_CAP_BITS = 32
SPG_CAP_INSTR = SPG_PROGRAM_CAP_BITS // OPCODE_BITS

#: Budgets at or above this value behave identically at laboratory
#: scales (no run is ever truncated); used as a memoization class.
STABLE_FUEL = 256

DEFAULT_FUEL = 1 << 20

MACHINE_VERSION = "aitl-m1/ops12x4/cap64/spg32"


class Opcode(IntEnum):
    OUT0 = 0
    OUT1 = 1
    CPY = 2
    DROPC = 3
    APC0 = 4
    APC1 = 5
    FST = 6
    SND = 7
    EXE = 8
    SPG = 9
    CLR = 10
    NOP = 11


@dataclass(frozen=True)
class MachineConfig:
    """A machine state: condition register, output register, fuel left."""

    cond: BitString
    out: BitString
    fuel: int


def budget_class(budget: int) -> int:
    """Memoization key for a fuel budget: exact when small, -1 when stable."""
    return -1 if budget >= STABLE_FUEL else budget


def decode_program_key(key: int) -> tuple[int, ...]:
    """Opcodes from a packed bit string; trailing partial groups are ignored."""
    n = key_len(key)
    count = n // OPCODE_BITS
    payload = key ^ (1 << n)
    payload >>= n - count * OPCODE_BITS
    return tuple((payload >> (OPCODE_BITS * (count - 1 - i))) & 0xF for i in range(count))


def program_key(ops: Sequence[int]) -> int:
    """Packed bit-string key of an opcode sequence."""
    key = EMPTY_KEY
    for op in ops:
        key = (key << OPCODE_BITS) | (int(op) & 0xF)
    return key


def program_text(ops: Sequence[int]) -> str:
    return "[" + " ".join(Opcode(op).name if op < 12 else "NOP" for op in ops) + "]"


# Packed piece appended by CLR for a given cond: doubled bits + "01".
_clr_piece_cache: dict[int, int] = {}


def clr_piece(cond: int) -> int:
    piece = _clr_piece_cache.get(cond)
    if piece is None:
        piece = key_append(key_append(key_double(cond), 0), 1)
        _clr_piece_cache[cond] = piece
    return piece


# Callable installed by aitlab.oracle; takes (cond_key, budget) and returns
# the packed program key or None.  Deferred to avoid a circular import.
_spg_search = None


def _spg(cond: int, budget: int) -> int | None:
    global _spg_search
    if _spg_search is None:
        from . import oracle

        _spg_search = oracle.spg_search
    return _spg_search(cond, budget)


_exe_cache: dict[tuple[int, int], int] = {}


def exe_result(cond: int, budget: int) -> int:
    """Output of running cond as a program from the empty condition."""
    bc = budget_class(budget)
    key = (cond, bc)
    hit = _exe_cache.get(key)
    if hit is None:
        hit = run_key(decode_program_key(cond), EMPTY_KEY, budget)
        _exe_cache[key] = hit
    return hit


def spg_result(cond: int, budget: int) -> int:
    """New cond after SPG: canonical shortest program for cond, or cond."""
    prog = _spg(cond, budget)
    return cond if prog is None else prog


def run_key(ops: Sequence[int], cond: int, fuel: int) -> int:
    """Reference interpreter on packed keys.  Total and deterministic."""
    out = EMPTY_KEY
    f = fuel
    for op in ops:
        if f <= 0:
            break
        f -= 1
        if op == 0:  # OUT0
            if key_len(out) < CAP_BITS:
                out = out << 1
        elif op == 1:  # OUT1
            if key_len(out) < CAP_BITS:
                out = (out << 1) | 1
        elif op == 2:  # CPY
            if cond != EMPTY_KEY and key_len(out) + key_len(cond) <= CAP_BITS:
                out = key_concat(out, cond)
        elif op == 3:  # DROPC
            cond = cond >> 1 if cond > 1 else cond
        elif op == 4:  # APC0
            if key_len(cond) < CAP_BITS:
                cond = cond << 1
        elif op == 5:  # APC1
            if key_len(cond) < CAP_BITS:
                cond = (cond << 1) | 1
        elif op == 6:  # FST
            split = pair_split_key(cond)
            if split is not None:
                cond = split[0]
        elif op == 7:  # SND
            split = pair_split_key(cond)
            if split is not None:
                cond = split[1]
        elif op == 8:  # EXE
            cond = exe_result(cond, f // 2)
        elif op == 9:  # SPG
            new = spg_result(cond, f // 2)
            if key_len(new) <= CAP_BITS:
                cond = new
        elif op == 10:  # CLR
            piece = clr_piece(cond)
            if key_len(out) + key_len(piece) <= CAP_BITS:
                out = key_concat(out, piece)
        # 11..15: NOP
    return out


def run_program(program, condition: BitString, fuel: int) -> BitString:
    """Run a program (opcode sequence or packed BitString) on a condition."""
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    if isinstance(program, BitString):
        ops = decode_program_key(program.key)
    else:
        ops = tuple(int(op) for op in program)
    return BitString(run_key(ops, condition.key, fuel))


def step(config: MachineConfig, op: int) -> MachineConfig:
    """Single-instruction transition; fuel strictly decreases."""
    if config.fuel <= 0:
        return config
    cond = config.cond.key
    out = config.out.key
    f = config.fuel - 1
    op = int(op) & 0xF
    if op in (0, 1, 2, 10):
        for piece_op, piece in out_pieces(cond):
            if piece_op == op:
                if key_len(out) + key_len(piece) <= CAP_BITS:
                    out = key_concat(out, piece)
                break
    else:
        for cond_op, new_cond in cond_transitions(cond, f // 2):
            if cond_op == op:
                cond = new_cond
                break
    return MachineConfig(BitString(cond), BitString(out), f)


def cond_transitions(cond: int, budget: int) -> tuple[tuple[int, int], ...]:
    """Condition-register edges as (opcode, new_cond), no-ops omitted.

    ``budget`` is the inner fuel available to EXE/SPG at this step
    (remaining fuel after the decrement, halved by the instruction).
    """
    edges = []
    if cond > 1:
        edges.append((3, cond >> 1))
    n = key_len(cond)
    if n < CAP_BITS:
        edges.append((4, cond << 1))
        edges.append((5, (cond << 1) | 1))
    split = pair_split_key(cond)
    if split is not None:
        if split[0] != cond:
            edges.append((6, split[0]))
        if split[1] != cond:
            edges.append((7, split[1]))
    exe = exe_result(cond, budget)
    if exe != cond:
        edges.append((8, exe))
    spg = spg_result(cond, budget)
    if spg != cond and key_len(spg) <= CAP_BITS:
        edges.append((9, spg))
    edges.sort()
    return tuple(edges)


def out_pieces(cond: int) -> tuple[tuple[int, int], ...]:
    """Output-register edges as (opcode, appended piece key).

    The caller concatenates the piece onto out and enforces the cap.
    Pieces depend only on cond, so they are cached per condition.
    """
    pieces = [(0, 2), (1, 3)]  # OUT0 appends "0", OUT1 appends "1"
    if cond != EMPTY_KEY:
        pieces.append((2, cond))
    pieces.append((10, clr_piece(cond)))
    return tuple(pieces)
