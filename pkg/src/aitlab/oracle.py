"""Exactly computable conditional complexity for the toy machine.

C(x|y) is the length in bits of the shortest program producing x from
condition y.  It is computed as a shortest path in the configuration
graph: nodes are (cond, out) register pairs, edges are the twelve
opcodes at 4 bits each, deduplicated breadth-first.  This makes exact
values reachable at depths where blind program enumeration (16^depth)
is hopeless, and exactness is what lets the topology claims be tested
rather than estimated.

Every Exact(k) value carries a replayable witness program; GreaterThan
is a first-class value returned when the instruction-depth cap is hit,
never an exception.  Ties between equal-length witnesses are broken
lexicographically on the program bit encoding, so witnesses are
reproducible across implementations.

The SPG instruction's shortest-program search is grounded in a shared
search table: everything the machine can output from the empty
condition in at most 8 instructions (the 32-bit SPG cap).  The table is
iterated to a fixpoint because SPG edges occur inside the search space
itself; two passes stabilize in practice and the build asserts it.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from . import machine
from .bits import (
    BitString,
    CAP_BITS,
    EMPTY_KEY,
    key_from_text,
    key_len,
    key_to_text,
    pair_encode,
)
from .errors import CorruptCache, Indeterminate, NoWitness, VersionMismatch
from .machine import (
    DEFAULT_FUEL,
    MACHINE_VERSION,
    OPCODE_BITS,
    SPG_CAP_INSTR,
    STABLE_FUEL,
    budget_class,
    cond_transitions,
    decode_program_key,
    out_pieces,
    run_key,
)

DEFAULT_DEPTH_CAP = 8
MAX_DEPTH_CAP = 16

_STATE_SHIFT = 65
_OUT_MASK = (1 << _STATE_SHIFT) - 1


@dataclass(frozen=True)
class ComplexityValue:
    """Exact complexity in bits, or a certified lower bound at the cap."""

    kind: str  # "exact" or "greater_than"
    bits: int

    @classmethod
    def exact(cls, bits: int) -> "ComplexityValue":
        return cls("exact", bits)

    @classmethod
    def greater_than(cls, cap_bits: int) -> "ComplexityValue":
        return cls("greater_than", cap_bits)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def __str__(self) -> str:
        return f"{self.bits}" if self.is_exact else f">{self.bits}"


# ---------------------------------------------------------------------------
# Core breadth-first search over machine configurations


_cond_edge_cache: dict[tuple[int, int], tuple] = {}
_piece_cache: dict[int, tuple] = {}


def _clear_semantic_caches() -> None:
    _cond_edge_cache.clear()
    _piece_cache.clear()
    machine._exe_cache.clear()


def _search(
    cond_key: int,
    depth_cap: int,
    fuel: int,
    max_out_len: int | None = None,
    out_keys: frozenset[int] | None = None,
    stop_keys: frozenset[int] | None = None,
) -> dict[int, tuple[int, int]]:
    """First reach of every output value within depth_cap instructions.

    Returns {out_key: (depth_in_instructions, program_key)} with minimal
    depth and the lexicographically least witness at that depth.  The
    output register only ever grows, so exploration is pruned to outputs
    that stay inside ``out_keys`` (a prefix-closed set) or under
    ``max_out_len`` bits.

    Cross-level deduplication is exact whenever fuel is generous
    (budgets never truncate a run, so transitions are level-independent);
    for small fuel the search keeps per-level frontiers only.
    """
    if max_out_len is None and out_keys is None:
        max_out_len = CAP_BITS
    stable = fuel - 1 >= STABLE_FUEL
    found: dict[int, tuple[int, int]] = {EMPTY_KEY: (0, EMPTY_KEY)}
    pending = set(stop_keys) - set(found) if stop_keys is not None else None
    if pending is not None and not pending:
        return found
    start = (cond_key << _STATE_SHIFT) | EMPTY_KEY
    frontier: dict[int, int] = {start: EMPTY_KEY}
    visited = {start}
    for depth in range(1, depth_cap + 1):
        budget = (fuel - depth) // 2
        bclass = budget_class(budget)
        nxt: dict[int, int] = {}
        for state, prog in sorted(frontier.items(), key=lambda kv: kv[1]):
            cond = state >> _STATE_SHIFT
            out = state & _OUT_MASK
            out_len = key_len(out)
            base = prog << OPCODE_BITS
            pieces = _piece_cache.get(cond)
            if pieces is None:
                pieces = out_pieces(cond)
                _piece_cache[cond] = pieces
            ckey = (cond, bclass)
            cedges = _cond_edge_cache.get(ckey)
            if cedges is None:
                cedges = cond_transitions(cond, budget)
                _cond_edge_cache[ckey] = cedges
            # Opcode-ascending emission: OUT0, OUT1, CPY, cond ops, CLR.
            for op, piece in pieces[:-1]:
                plen = key_len(piece)
                if out_len + plen > CAP_BITS:
                    continue
                out2 = (out << plen) | (piece ^ (1 << plen))
                if out_keys is not None:
                    if out2 not in out_keys:
                        continue
                elif out_len + plen > max_out_len:
                    continue
                state2 = (cond << _STATE_SHIFT) | out2
                if state2 in visited or state2 in nxt:
                    continue
                nxt[state2] = base | op
                if out2 not in found:
                    found[out2] = (depth, base | op)
                    if pending is not None:
                        pending.discard(out2)
            for op, cond2 in cedges:
                state2 = (cond2 << _STATE_SHIFT) | out
                if state2 in visited or state2 in nxt:
                    continue
                nxt[state2] = base | op
            op, piece = pieces[-1]
            plen = key_len(piece)
            if out_len + plen <= CAP_BITS:
                out2 = (out << plen) | (piece ^ (1 << plen))
                ok = out2 in out_keys if out_keys is not None else out_len + plen <= max_out_len
                if ok:
                    state2 = (cond << _STATE_SHIFT) | out2
                    if state2 not in visited and state2 not in nxt:
                        nxt[state2] = base | op
                        if out2 not in found:
                            found[out2] = (depth, base | op)
                            if pending is not None:
                                pending.discard(out2)
        if pending is not None and not pending:
            return found
        if stable:
            visited.update(nxt)
        else:
            visited = set(nxt)
        frontier = nxt
        if not frontier:
            break
    return found


def prefix_closure(keys: Iterable[int]) -> frozenset[int]:
    """All prefixes (as packed keys) of the given packed strings."""
    closed = {EMPTY_KEY}
    for key in keys:
        k = key
        while k > 1 and k not in closed:
            closed.add(k)
            k >>= 1
    return frozenset(closed)


# ---------------------------------------------------------------------------
# The SPG search table: fixpoint of "what is producible from the empty
# condition in at most 8 instructions under generous fuel".

_EPS_DEPTH = SPG_CAP_INSTR
_eps_found: dict[int, tuple[int, int]] = {}
_eps_ready = False
_eps_building = False

CACHE_DIR_ENV = "AITL_CACHE_DIR"


def _eps_cache_path() -> str | None:
    root = os.environ.get(CACHE_DIR_ENV)
    if not root:
        return None
    tag = "".join(c if c.isalnum() else "-" for c in MACHINE_VERSION)
    return os.path.join(root, f"spg-table-{tag}.csv")


def _eps_store(path: str) -> None:
    lines = [f"AITL1-SPG {MACHINE_VERSION}"]
    for key in sorted(_eps_found):
        depth, prog = _eps_found[key]
        lines.append(f"{key:x},{depth},{prog:x}")
    body = "\n".join(lines) + "\n"
    crc = zlib.crc32(body.encode("ascii")) & 0xFFFFFFFF
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="ascii", newline="") as fh:
        fh.write(body + f"crc32={crc:08x}\n")
    os.replace(tmp, path)


def _eps_load(path: str) -> dict[int, tuple[int, int]] | None:
    try:
        with open(path, "r", encoding="ascii", newline="") as fh:
            text = fh.read()
    except OSError:
        return None
    body, _, tail = text.rstrip("\n").rpartition("\n")
    body += "\n"
    if not tail.startswith("crc32="):
        return None
    if f"{zlib.crc32(body.encode('ascii')) & 0xFFFFFFFF:08x}" != tail[6:]:
        return None
    lines = body.splitlines()
    if lines[0] != f"AITL1-SPG {MACHINE_VERSION}":
        return None
    table = {}
    for line in lines[1:]:
        key, depth, prog = line.split(",")
        table[int(key, 16)] = (int(depth), int(prog, 16))
    return table


def _build_eps_table() -> None:
    """Iterate the search space to a fixpoint.

    SPG edges inside the space are answered from the previous pass, so
    each pass can only refine reachability; convergence is checked, not
    assumed.  The converged table is cached on disk when AITL_CACHE_DIR
    is set, keyed by machine version.
    """
    global _eps_found, _eps_ready, _eps_building
    if _eps_ready or _eps_building:
        return
    _eps_building = True
    try:
        path = _eps_cache_path()
        if path is not None:
            loaded = _eps_load(path)
            if loaded is not None:
                _eps_found = loaded
                _clear_semantic_caches()
                _eps_ready = True
                return
        for _ in range(12):
            _clear_semantic_caches()
            table = _search(EMPTY_KEY, _EPS_DEPTH, DEFAULT_FUEL)
            if table == _eps_found:
                break
            _eps_found = table
        else:
            raise RuntimeError("SPG search table failed to stabilize")
        _clear_semantic_caches()
        _eps_ready = True
        if path is not None:
            _eps_store(path)
    finally:
        _eps_building = False


def spg_search(cond_key: int, budget: int) -> int | None:
    """Canonical shortest program (packed key) producing cond from empty.

    Searches the shared fixpoint table, restricted to programs of at
    most min(8, budget) instructions; for small budgets the candidate
    is additionally replayed at that budget and rejected if truncation
    changes its output.  Returns None when there is no such program,
    which makes the SPG opcode a no-op.
    """
    if budget < 1 or cond_key < 1:
        return None
    if not _eps_ready:
        _build_eps_table()
    entry = _eps_found.get(cond_key)
    if entry is None:
        return None
    depth, prog = entry
    if depth > min(_EPS_DEPTH, budget):
        return None
    if budget < STABLE_FUEL:
        if run_key(decode_program_key(prog), EMPTY_KEY, budget) != cond_key:
            return None
    return prog


# ---------------------------------------------------------------------------
# Public complexity queries


def _check_caps(depth_cap: int, fuel: int) -> None:
    if not 1 <= depth_cap <= MAX_DEPTH_CAP:
        raise ValueError(f"depth_cap must be 1..{MAX_DEPTH_CAP}, got {depth_cap}")
    if fuel < 1:
        raise ValueError("fuel must be at least 1")


def complexity(
    target: BitString,
    condition: BitString,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    fuel: int = DEFAULT_FUEL,
) -> ComplexityValue:
    """C(target | condition) in bits; C(x) is complexity(x, empty)."""
    _check_caps(depth_cap, fuel)
    trie = prefix_closure([target.key])
    found = _search(condition.key, depth_cap, fuel, out_keys=trie, stop_keys=frozenset([target.key]))
    hit = found.get(target.key)
    if hit is None:
        return ComplexityValue.greater_than(OPCODE_BITS * depth_cap)
    return ComplexityValue.exact(OPCODE_BITS * hit[0])


def shortest_program(
    target: BitString,
    condition: BitString,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    fuel: int = DEFAULT_FUEL,
) -> BitString:
    """Lexicographically least witness at minimal depth, as a bit string."""
    _check_caps(depth_cap, fuel)
    trie = prefix_closure([target.key])
    found = _search(condition.key, depth_cap, fuel, out_keys=trie, stop_keys=frozenset([target.key]))
    hit = found.get(target.key)
    if hit is None:
        raise NoWitness(f"complexity of {target.text!r} is > {OPCODE_BITS * depth_cap}")
    return BitString(hit[1])


def search_targets(
    condition: BitString,
    targets: Iterable[BitString],
    depth_cap: int = DEFAULT_DEPTH_CAP,
    fuel: int = DEFAULT_FUEL,
) -> dict[BitString, tuple[ComplexityValue, BitString | None]]:
    """One search serving many targets against a single condition."""
    _check_caps(depth_cap, fuel)
    keys = [t.key for t in targets]
    trie = prefix_closure(keys)
    found = _search(condition.key, depth_cap, fuel, out_keys=trie, stop_keys=frozenset(keys))
    result = {}
    for key in keys:
        hit = found.get(key)
        if hit is None:
            result[BitString(key)] = (ComplexityValue.greater_than(OPCODE_BITS * depth_cap), None)
        else:
            result[BitString(key)] = (ComplexityValue.exact(OPCODE_BITS * hit[0]), BitString(hit[1]))
    return result


def joint_complexity(
    a: BitString,
    b: BitString,
    depth_cap: int = 12,
    fuel: int = DEFAULT_FUEL,
) -> ComplexityValue:
    """K(a,b): complexity of the pair code of (a, b) from the empty condition."""
    return complexity(pair_encode(a, b), BitString.empty(), depth_cap, fuel)


def mutual_info(
    a: BitString,
    b: BitString,
    depth_cap: int = 12,
    fuel: int = DEFAULT_FUEL,
) -> int:
    """I(a:b) = C(a) + C(b) - C(a,b); may be slightly negative at toy scale."""
    empty = BitString.empty()
    ka = complexity(a, empty, depth_cap, fuel)
    kb = complexity(b, empty, depth_cap, fuel)
    kab = joint_complexity(a, b, depth_cap, fuel)
    for name, v in (("C(a)", ka), ("C(b)", kb), ("C(a,b)", kab)):
        if not v.is_exact:
            raise Indeterminate(f"{name} hit the search cap ({v})")
    return ka.bits + kb.bits - kab.bits


def find_incompressible(
    length: int,
    condition: BitString,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    fuel: int = DEFAULT_FUEL,
) -> BitString:
    """Lexicographically least string of the given length with maximal
    complexity relative to the condition."""
    if length == 0:
        return BitString.empty()
    _check_caps(depth_cap, fuel)
    found = _search(condition.key, depth_cap, fuel, max_out_len=length)
    best_key = None
    best_rank = None
    for value in range(1 << length):
        key = (1 << length) | value
        hit = found.get(key)
        # GreaterThan outranks any Exact value within the cap.
        rank = (1, 0) if hit is None else (0, hit[0])
        if best_rank is None or rank > best_rank:
            best_rank = rank
            best_key = key
    return BitString(best_key)


# ---------------------------------------------------------------------------
# Complexity tables and their on-disk cache format


@dataclass(frozen=True)
class ComplexityTable:
    """Immutable map from targets to complexity values for one condition.

    Every exact entry stores its witness program; tables round-trip
    bit-exactly through the cache file format.
    """

    condition: BitString
    depth_cap: int
    fuel: int
    max_target_len: int
    machine_version: str
    entries: Mapping[int, tuple[ComplexityValue, int | None]]

    def value(self, target: BitString) -> ComplexityValue:
        return self.entries[target.key][0]

    def witness(self, target: BitString) -> BitString | None:
        prog = self.entries[target.key][1]
        return None if prog is None else BitString(prog)

    def targets(self):
        return [BitString(k) for k in self.entries]


def table_build(
    condition: BitString,
    max_target_len: int = 6,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    fuel: int = DEFAULT_FUEL,
) -> ComplexityTable:
    """Exact complexities of every string up to max_target_len bits."""
    _check_caps(depth_cap, fuel)
    found = _search(condition.key, depth_cap, fuel, max_out_len=max_target_len)
    entries: dict[int, tuple[ComplexityValue, int | None]] = {}
    for length in range(max_target_len + 1):
        for value in range(1 << length):
            key = (1 << length) | value
            hit = found.get(key)
            if hit is None:
                entries[key] = (ComplexityValue.greater_than(OPCODE_BITS * depth_cap), None)
            else:
                entries[key] = (ComplexityValue.exact(OPCODE_BITS * hit[0]), hit[1])
    return ComplexityTable(
        condition=condition,
        depth_cap=depth_cap,
        fuel=fuel,
        max_target_len=max_target_len,
        machine_version=MACHINE_VERSION,
        entries=MappingProxyType(entries),
    )


def witness_hex(prog_key: int | None) -> str:
    if prog_key is None:
        return "-"
    ops = decode_program_key(prog_key)
    return "".join(format(op, "x") for op in ops) if ops else ""


def witness_from_hex(text: str) -> int | None:
    if text == "-":
        return None
    return machine.program_key([int(c, 16) for c in text])


def table_dump(table: ComplexityTable) -> str:
    lines = [
        "AITL1",
        f"machine_version={table.machine_version}",
        f"depth_cap={table.depth_cap}",
        f"fuel={table.fuel}",
        f"max_target_len={table.max_target_len}",
        f"condition={table.condition.text}",
        "target,kind,bits,witness_hex",
    ]
    for key in sorted(table.entries, key=lambda k: (key_len(k), k)):
        value, prog = table.entries[key]
        lines.append(f"{key_to_text(key)},{value.kind},{value.bits},{witness_hex(prog)}")
    body = "\n".join(lines) + "\n"
    crc = zlib.crc32(body.encode("ascii")) & 0xFFFFFFFF
    return body + f"crc32={crc:08x}\n"


def table_store(table: ComplexityTable, path) -> None:
    text = table_dump(table)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="ascii", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def table_parse(text: str) -> ComplexityTable:
    if not text.endswith("\n"):
        raise CorruptCache("missing trailing newline")
    body, _, tail = text.rstrip("\n").rpartition("\n")
    body += "\n"
    if not tail.startswith("crc32="):
        raise CorruptCache("missing checksum line")
    expect = tail[len("crc32=") :]
    actual = f"{zlib.crc32(body.encode('ascii')) & 0xFFFFFFFF:08x}"
    if actual != expect:
        raise CorruptCache(f"checksum mismatch: {actual} != {expect}")
    lines = body.splitlines()
    if len(lines) < 7 or lines[0] != "AITL1":
        raise CorruptCache("bad header")
    header = {}
    for line in lines[1:6]:
        k, _, v = line.partition("=")
        header[k] = v
    if header.get("machine_version") != MACHINE_VERSION:
        raise VersionMismatch(
            f"cache built by {header.get('machine_version')!r}, this is {MACHINE_VERSION!r}"
        )
    if lines[6] != "target,kind,bits,witness_hex":
        raise CorruptCache("bad column header")
    entries: dict[int, tuple[ComplexityValue, int | None]] = {}
    for line in lines[7:]:
        parts = line.split(",")
        if len(parts) != 4:
            raise CorruptCache(f"bad row: {line!r}")
        target, kind, bits, whex = parts
        if kind not in ("exact", "greater_than"):
            raise CorruptCache(f"bad kind: {kind!r}")
        entries[key_from_text(target)] = (ComplexityValue(kind, int(bits)), witness_from_hex(whex))
    return ComplexityTable(
        condition=BitString.from_text(header["condition"]),
        depth_cap=int(header["depth_cap"]),
        fuel=int(header["fuel"]),
        max_target_len=int(header["max_target_len"]),
        machine_version=header["machine_version"],
        entries=MappingProxyType(entries),
    )


def table_load(path) -> ComplexityTable:
    try:
        with open(path, "r", encoding="ascii", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise CorruptCache(f"unreadable cache: {exc}") from exc
    return table_parse(text)


# ---------------------------------------------------------------------------
# Audits


@dataclass(frozen=True)
class LipschitzAudit:
    """Worst-case complexity steps under single-bit edits.

    cond_side_max bounds |C(x|y b) - C(x|y)|: the machine guarantees 4
    by a one-instruction prepend (DROPC or APCb).  target_side_max
    bounds |C(x b|y) - C(x|y)|, which has no one-sided construction and
    is measured.  Pairs where either value hit the cap are counted
    separately, never silently mixed in.
    """

    max_len: int
    depth_cap: int
    cond_side_max: int
    target_side_max: int
    exact_pairs: int
    capped_pairs: int

    @property
    def c_machine(self) -> int:
        return self.cond_side_max


def lipschitz_audit(
    max_len: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    fuel: int = DEFAULT_FUEL,
) -> LipschitzAudit:
    """Exhaustive audit over all |x|, |y| <= max_len and b in {0,1}."""
    if max_len > 8:
        raise ValueError("audit is exhaustive; max_len must be <= 8")
    tables: dict[int, dict[int, tuple[int, int] | None]] = {}

    def table_for(cond_key: int) -> dict:
        hit = tables.get(cond_key)
        if hit is None:
            found = _search(cond_key, depth_cap, fuel, max_out_len=max_len + 1)
            hit = found
            tables[cond_key] = hit
        return hit

    cond_side = 0
    target_side = 0
    exact_pairs = 0
    capped = 0
    for ylen in range(max_len + 1):
        for yval in range(1 << ylen):
            ykey = (1 << ylen) | yval
            base = table_for(ykey)
            for b in (0, 1):
                ext = table_for((ykey << 1) | b)
                for xlen in range(max_len + 1):
                    for xval in range(1 << xlen):
                        xkey = (1 << xlen) | xval
                        h0 = base.get(xkey)
                        h1 = ext.get(xkey)
                        if h0 is None or h1 is None:
                            capped += 1
                        else:
                            exact_pairs += 1
                            delta = abs(h0[0] - h1[0]) * OPCODE_BITS
                            if delta > cond_side:
                                cond_side = delta
                        hx = base.get((xkey << 1) | b)
                        if h0 is None or hx is None:
                            capped += 1
                        else:
                            exact_pairs += 1
                            delta = abs(h0[0] - hx[0]) * OPCODE_BITS
                            if delta > target_side:
                                target_side = delta
    return LipschitzAudit(
        max_len=max_len,
        depth_cap=depth_cap,
        cond_side_max=cond_side,
        target_side_max=target_side,
        exact_pairs=exact_pairs,
        capped_pairs=capped,
    )
