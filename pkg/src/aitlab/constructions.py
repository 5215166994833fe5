"""Theorem harnesses: grid constructions from oracle queries.

Each harness builds a finite grid map from conditional-complexity
queries, runs the topology engine on it, and reports measured slacks in
place of the asymptotic constants.  Nothing is assumed: the Lipschitz
constant of a built grid is certified, boundary trajectories are
compared against their ideal shapes with frozen tolerances, and every
witness is replayable from the stored programs.

Scale notes, fixed by machine arithmetic: complexities are multiples of
4 bits (4-bit opcodes), the decode path [FST, EXE, CPY] puts a 12-bit
floor under every conditioned value, and pair codes cap at 64 bits.
The harnesses measure and report how far the toy regime gets toward the
asymptotic picture instead of pretending the constants vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .bits import BitString, pair_encode, drop_last
from .errors import (
    Indeterminate,
    InvalidPair,
    NoPairAtSlack,
    NotLipschitz,
    OracleCapped,
    TooClose,
    ZeroWinding,
    BoundaryTooClose,
)
from .machine import DEFAULT_FUEL, MACHINE_VERSION, run_program
from .oracle import (
    ComplexityValue,
    complexity,
    find_incompressible,
    joint_complexity,
    search_targets,
    shortest_program,
    witness_hex,
    _search,
    prefix_closure,
    OPCODE_BITS,
)
from .topology import (
    GridMap,
    LatticePath,
    PreimageCertificate,
    boundary_nodes,
    boundary_path,
    certify_lipschitz,
    discrete_ivt,
    find_preimage,
    scan_preimage,
    sup_dist,
    trajectory_match,
    winding_number,
)

#: Condition-side Lipschitz constant of the machine (one-instruction
#: prepend of DROPC or APCb), confirmed exhaustively by lipschitz_audit.
C_MACHINE = 4

#: Structural bound on grid steps: one parameter step changes the pair
#: code by at most 2 bits, each worth at most C_MACHINE.
C_MAP_BOUND = 2 * C_MACHINE

#: Profile cells (l, m) are swept while l + m stays within this budget;
#: beyond it the joint complexity structurally exceeds the depth cap
#: (4*(l+m+1) bits) and cells are reported as skipped, not guessed.
PROFILE_SWEEP_MAX = 12

_EMPTY = BitString.empty()


def _require_exact(value: ComplexityValue, what: str) -> int:
    if not value.is_exact:
        raise OracleCapped(f"{what} hit the search cap ({value})")
    return value.bits


# ---------------------------------------------------------------------------
# Mutual-information and epsilon-condition value caching


_eps_cache: dict[int, tuple[int | None, int]] = {}


def eps_complexity(s: BitString, depth_cap: int = 14, fuel: int = DEFAULT_FUEL) -> ComplexityValue:
    """C(s) with a process-wide cache (monotone in depth_cap)."""
    hit = _eps_cache.get(s.key)
    if hit is not None:
        bits, cap_used = hit
        if bits is not None:
            return ComplexityValue.exact(bits)
        if cap_used >= depth_cap:
            return ComplexityValue.greater_than(OPCODE_BITS * depth_cap)
    value = complexity(s, _EMPTY, depth_cap, fuel)
    _eps_cache[s.key] = (value.bits, depth_cap) if value.is_exact else (None, depth_cap)
    return value


def eps_joint(a: BitString, b: BitString, depth_cap: int = 14, fuel: int = DEFAULT_FUEL) -> ComplexityValue:
    return eps_complexity(pair_encode(a, b), depth_cap, fuel)


def eps_mutual_info(a: BitString, b: BitString, depth_cap: int = 14) -> int:
    ka = _require_exact(eps_complexity(a, depth_cap), "C(a)")
    kb = _require_exact(eps_complexity(b, depth_cap), "C(b)")
    kab = _require_exact(eps_joint(a, b, depth_cap), "C(a,b)")
    return ka + kb - kab


# ---------------------------------------------------------------------------
# The one-dimensional experiment: prescribing C(x|y) by deleting bits


@dataclass(frozen=True)
class HalveResult:
    x: BitString
    target: int
    y: BitString
    achieved: int
    dropped: int
    profile: tuple[int, ...]
    witnesses: tuple[str, ...]


def halve_information(
    x: BitString,
    target_bits: int,
    depth_cap: int = 8,
    fuel: int = DEFAULT_FUEL,
) -> HalveResult:
    """Find a prefix y of x with C(x|y) close to target_bits.

    Walks f(i) = C(x | x minus i last bits); each deletion moves the
    value by at most C_MACHINE, so the walk cannot cross the target
    without landing inside its open C_MACHINE-ball.  Targets at or
    below f(0) (or at or above f(|x|) = C(x)) clamp to the endpoints.
    """
    kx = complexity(x, _EMPTY, depth_cap, fuel)
    kx_bits = _require_exact(kx, "C(x)")
    if not 0 <= target_bits <= kx_bits:
        raise ValueError(f"target {target_bits} outside [0, C(x) = {kx_bits}]")
    profile = []
    witnesses = []
    for i in range(len(x) + 1):
        y = drop_last(x, i)
        res = search_targets(y, [x], depth_cap, fuel)[x]
        profile.append(_require_exact(res[0], f"C(x | x minus {i} last bits)"))
        witnesses.append(witness_hex(res[1].key if res[1] is not None else None))
    if target_bits <= profile[0]:
        idx = 0
    elif target_bits >= profile[-1]:
        idx = len(x)
    else:
        idx = discrete_ivt(profile, C_MACHINE, target_bits)
    return HalveResult(
        x=x,
        target=target_bits,
        y=drop_last(x, idx),
        achieved=profile[idx],
        dropped=idx,
        profile=tuple(profile),
        witnesses=tuple(witnesses),
    )


# ---------------------------------------------------------------------------
# Theorem 1: prescribing both C(x|y) and C(y|x)


@dataclass(frozen=True)
class Thm1Instance:
    """A fully evaluated grid for one (x, z) choice.

    Grid node (u, v) carries the image (C(x|y), C(y|x)) for
    y = pair(p minus u last bits, z minus v last bits), all values
    exact.  Slacks are measured, never assumed.
    """

    x: BitString
    p: BitString
    z: BitString
    target: tuple[int, int]
    grid: GridMap
    kx: int
    kz_given_x: int
    slacks: dict
    depth_cap_grid: int
    depth_cap_cond: int
    fuel: int

    @property
    def c_map(self) -> int:
        return self.grid.step_bound


def _grid_from_values(values: dict[tuple[int, int], tuple[int, int]], width: int, height: int) -> GridMap:
    rows = tuple(tuple(values[(u, v)] for u in range(width + 1)) for v in range(height + 1))
    measured = 0
    for v in range(height + 1):
        for u in range(width + 1):
            if u < width:
                measured = max(measured, sup_dist(rows[v][u], rows[v][u + 1]))
            if v < height:
                measured = max(measured, sup_dist(rows[v][u], rows[v + 1][u]))
    grid = GridMap(width, height, rows, max(measured, 1))
    if measured > C_MAP_BOUND:
        cert = certify_lipschitz(GridMap(width, height, rows, C_MAP_BOUND))
        raise NotLipschitz(cert.edge, f"grid step {measured} exceeds the structural bound {C_MAP_BOUND}")
    return grid


def thm1_build(
    x: BitString,
    n: int,
    m: int,
    z: BitString | None = None,
    fuel: int = DEFAULT_FUEL,
) -> Thm1Instance:
    """Build the Theorem 1 grid for x with target (n, m).

    z defaults to the lexicographically least string of maximal
    complexity given x, sized so the C(y|x) extent comfortably covers m.
    Any inexact grid entry rejects the instance (OracleCapped).
    """
    depth_cap_cond = min(len(x) + 2, 16)
    kx = _require_exact(complexity(x, _EMPTY, depth_cap_cond, fuel), "C(x)")
    if not 0 <= n <= kx:
        raise ValueError(f"n = {n} outside [0, C(x) = {kx}]")
    p = shortest_program(x, _EMPTY, depth_cap_cond, fuel)
    assert len(p) == kx, "witness length must equal C(x)"
    assert run_program(p, _EMPTY, fuel) == x, "witness must replay to x"
    if z is None:
        z_len = max(2, m // OPCODE_BITS + 1)
        if z_len > 6:
            raise ValueError(f"m = {m} needs |z| = {z_len} > 6; out of the toy regime")
        z = find_incompressible(z_len, x, depth_cap=min(z_len + 2, 16), fuel=fuel)
    kz = _require_exact(eps_complexity(z, min(len(z) + 2, 16), fuel), "C(z)")
    kz_given_x = _require_exact(
        complexity(z, x, min(len(z) + 2, 16), fuel), "C(z|x)"
    )
    kz_given_p = _require_exact(complexity(z, p, min(len(z) + 2, 16), fuel), "C(z|p)")
    kp_given_x = _require_exact(complexity(p, x, 8, fuel), "C(p|x)")

    width, height = len(p), len(z)
    ys = {}
    for u in range(width + 1):
        for v in range(height + 1):
            ys[(u, v)] = pair_encode(drop_last(p, u), drop_last(z, v))

    depth_cap_grid = min(16, (2 * width + 6 + 4 * height) // 8 + 6)
    cond_side = search_targets(x, list(ys.values()), depth_cap_grid, fuel)
    values = {}
    cap_hits = 0
    for (u, v), y in ys.items():
        cxy = complexity(x, y, depth_cap_cond, fuel)
        cyx = cond_side[y][0]
        if not (cxy.is_exact and cyx.is_exact):
            cap_hits += 1
            raise OracleCapped(
                f"grid node ({u}, {v}) not exact: C(x|y) = {cxy}, C(y|x) = {cyx}"
            )
        values[(u, v)] = (cxy.bits, cyx.bits)
    grid = _grid_from_values(values, width, height)
    slacks = {
        "c_map": grid.step_bound,
        "independence_slack": kz - kz_given_p,
        "kz": kz,
        "kz_given_p": kz_given_p,
        "kp_given_x": kp_given_x,
        "pair_overhead": abs(values[(width, height)][0] - kx),
    }
    return Thm1Instance(
        x=x,
        p=p,
        z=z,
        target=(n, m),
        grid=grid,
        kx=kx,
        kz_given_x=kz_given_x,
        slacks=slacks,
        depth_cap_grid=depth_cap_grid,
        depth_cap_cond=depth_cap_cond,
        fuel=fuel,
    )


def with_target(instance: Thm1Instance, n: int, m: int) -> Thm1Instance:
    return replace(instance, target=(n, m))


def admissible_targets(grid: GridMap) -> list[tuple[int, int]]:
    """Integer targets cleared by more than the step bound from every
    boundary image point and with nonzero boundary winding."""
    path = boundary_path(grid)
    pts = path.points
    c = grid.step_bound
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    result = []
    for tx in range(min(xs), max(xs) + 1):
        for ty in range(min(ys), max(ys) + 1):
            t = (tx, ty)
            if all(sup_dist(p, t) > c for p in pts) and winding_number(path, t) != 0:
                result.append(t)
    return result


def _ideal_rectangle(kx: int, kz_given_x: int) -> list[tuple[int, int]]:
    # Image corners C' D' A' B' in the order the ccw parameter boundary
    # visits them: C' = (0, C(z|x)), D' = (C(x), C(z|x)), A' = (C(x), 0),
    # B' = (0, 0).
    return [(0, kz_given_x), (kx, kz_given_x), (kx, 0), (0, 0), (0, kz_given_x)]


def thm1_run(instance: Thm1Instance, boundary_tolerance: int | None = None) -> dict:
    """Run the topology phase for one instance and assemble a report."""
    grid = instance.grid
    n, m = instance.target
    path = boundary_path(grid)
    ideal = _ideal_rectangle(instance.kx, instance.kz_given_x)
    tol = boundary_tolerance if boundary_tolerance is not None else 4 * C_MACHINE
    traj = trajectory_match(path, ideal, tol)
    report = {
        "experiment": "thm1",
        "machine_version": MACHINE_VERSION,
        "oracle": {
            "depth_cap_grid": instance.depth_cap_grid,
            "depth_cap_cond": instance.depth_cap_cond,
            "fuel": instance.fuel,
        },
        "instance": {
            "x": instance.x.text,
            "p": instance.p.text,
            "z": instance.z.text,
            "kx": instance.kx,
            "kz_given_x": instance.kz_given_x,
        },
        "grid": {
            "width": grid.width,
            "height": grid.height,
            "step_bound": grid.step_bound,
            "rows": [[list(grid.at(u, v)) for u in range(grid.width + 1)] for v in range(grid.height + 1)],
        },
        "boundary": [list(p) for p in path.points],
        "target": [n, m],
        "trajectory": {
            "ideal": [list(p) for p in ideal],
            "max_deviation": str(traj.max_deviation),
            "max_deviation_float": traj.max_deviation_float,
            "tolerance": tol,
            "matched": traj.matched,
            "in_order": traj.in_order,
        },
        "slacks": dict(instance.slacks),
        "cap_hits": 0,
    }
    target = (n, m)
    try:
        cert = find_preimage(grid, target)
    except ZeroWinding:
        report["status"] = "zero_winding"
        report["winding"] = 0
        report["witness"] = None
        return report
    except (BoundaryTooClose, TooClose):
        report["status"] = "boundary_too_close"
        report["winding"] = None
        report["witness"] = None
        return report
    report["winding"] = cert.trace[0][1]
    u, v = cert.node
    y = pair_encode(drop_last(instance.p, u), drop_last(instance.z, v))
    cxy = complexity(instance.x, y, instance.depth_cap_cond, instance.fuel)
    cyx_res = search_targets(instance.x, [y], instance.depth_cap_grid, instance.fuel)[y]
    wx = shortest_program(instance.x, y, instance.depth_cap_cond, instance.fuel)
    report["status"] = "ok"
    report["witness"] = {
        "node": [u, v],
        "y": y.text,
        "image": list(cert.image),
        "distance": cert.distance,
        "achieved_dn": abs(cert.image[0] - n),
        "achieved_dm": abs(cert.image[1] - m),
        "replay": {
            "c_x_given_y": cxy.bits,
            "c_y_given_x": cyx_res[0].bits,
            "program_x_given_y": witness_hex(wx.key),
            "program_y_given_x": witness_hex(cyx_res[1].key if cyx_res[1] else None),
        },
        "trace": [[list(r), w] for r, w in cert.trace],
    }
    scan = scan_preimage(grid, target, 2 * grid.step_bound)
    report["scan_agrees"] = scan is not None
    return report


# ---------------------------------------------------------------------------
# Theorem 2: prescribing C(a|y) and C(b|y) for weakly dependent a, b


@dataclass(frozen=True)
class Thm2Instance:
    a: BitString
    b: BitString
    p: BitString
    q: BitString
    target: tuple[int, int]
    grid: GridMap
    ka: int
    kb: int
    mutual_information: int
    identity_deviation: int
    depth_cap: int
    fuel: int


def thm2_build(
    a: BitString,
    b: BitString,
    alpha: int,
    beta: int,
    fuel: int = DEFAULT_FUEL,
) -> Thm2Instance:
    """Grid (u,v) -> (C(a|y), C(b|y)) with y = pair(p minus u, q minus v)."""
    depth_cap = min(max(len(a), len(b)) + 2, 16)
    ka = _require_exact(eps_complexity(a, depth_cap, fuel), "C(a)")
    kb = _require_exact(eps_complexity(b, depth_cap, fuel), "C(b)")
    p = shortest_program(a, _EMPTY, depth_cap, fuel)
    q = shortest_program(b, _EMPTY, depth_cap, fuel)
    info = eps_mutual_info(a, b, 14)
    width, height = len(p), len(q)
    values = {}
    for u in range(width + 1):
        for v in range(height + 1):
            y = pair_encode(drop_last(p, u), drop_last(q, v))
            res = search_targets(y, [a, b], depth_cap, fuel)
            ca = _require_exact(res[a][0], f"C(a|y) at ({u},{v})")
            cb = _require_exact(res[b][0], f"C(b|y) at ({u},{v})")
            values[(u, v)] = (ca, cb)
    grid = _grid_from_values(values, width, height)
    deviation = max(sup_dist(values[(u, v)], (u, v)) for u in range(width + 1) for v in range(height + 1))
    return Thm2Instance(
        a=a,
        b=b,
        p=p,
        q=q,
        target=(alpha, beta),
        grid=grid,
        ka=ka,
        kb=kb,
        mutual_information=info,
        identity_deviation=deviation,
        depth_cap=depth_cap,
        fuel=fuel,
    )


def sigma_interior(instance: Thm2Instance, sigma: int) -> list[tuple[int, int]]:
    """Targets farther than sigma + step bound from the ideal rectangle
    boundary; by the deviation bound their winding is forced nonzero."""
    margin = sigma + instance.grid.step_bound
    lo_a, hi_a = margin + 1, instance.ka - margin - 1
    lo_b, hi_b = margin + 1, instance.kb - margin - 1
    return [(x, y) for x in range(lo_a, hi_a + 1) for y in range(lo_b, hi_b + 1)]


def thm2_run(instance: Thm2Instance, sigma: int | None = None) -> dict:
    """Topology phase for Theorem 2; near-identity is asserted against
    the measured (or frozen) deviation."""
    grid = instance.grid
    alpha, beta = instance.target
    sig = sigma if sigma is not None else instance.identity_deviation
    path = boundary_path(grid)
    ideal = [(0, 0), (instance.ka, 0), (instance.ka, instance.kb), (0, instance.kb), (0, 0)]
    traj = trajectory_match(path, ideal, sig + grid.step_bound)
    report = {
        "experiment": "thm2",
        "machine_version": MACHINE_VERSION,
        "oracle": {"depth_cap": instance.depth_cap, "fuel": instance.fuel},
        "instance": {
            "a": instance.a.text,
            "b": instance.b.text,
            "p": instance.p.text,
            "q": instance.q.text,
            "ka": instance.ka,
            "kb": instance.kb,
            "mutual_information": instance.mutual_information,
        },
        "grid": {
            "width": grid.width,
            "height": grid.height,
            "step_bound": grid.step_bound,
            "rows": [[list(grid.at(u, v)) for u in range(grid.width + 1)] for v in range(grid.height + 1)],
        },
        "boundary": [list(p) for p in path.points],
        "target": [alpha, beta],
        "identity_deviation": instance.identity_deviation,
        "sigma": sig,
        "sigma_interior_size": len(sigma_interior(instance, sig)),
        "trajectory": {
            "ideal": [list(p) for p in ideal],
            "max_deviation": str(traj.max_deviation),
            "max_deviation_float": traj.max_deviation_float,
            "tolerance": sig + grid.step_bound,
            "matched": traj.matched,
        },
        "cap_hits": 0,
    }
    try:
        cert = find_preimage(grid, (alpha, beta))
    except ZeroWinding:
        report["status"] = "zero_winding"
        report["winding"] = 0
        report["witness"] = None
        return report
    except (BoundaryTooClose, TooClose):
        report["status"] = "boundary_too_close"
        report["winding"] = None
        report["witness"] = None
        return report
    report["winding"] = cert.trace[0][1]
    u, v = cert.node
    y = pair_encode(drop_last(instance.p, u), drop_last(instance.q, v))
    res = search_targets(y, [instance.a, instance.b], instance.depth_cap, instance.fuel)
    report["status"] = "ok"
    report["witness"] = {
        "node": [u, v],
        "y": y.text,
        "image": list(cert.image),
        "distance": cert.distance,
        "achieved_da": abs(cert.image[0] - alpha),
        "achieved_db": abs(cert.image[1] - beta),
        "replay": {
            "c_a_given_y": res[instance.a][0].bits,
            "c_b_given_y": res[instance.b][0].bits,
            "program_a_given_y": witness_hex(res[instance.a][1].key if res[instance.a][1] else None),
            "program_b_given_y": witness_hex(res[instance.b][1].key if res[instance.b][1] else None),
        },
    }
    report["scan_agrees"] = scan_preimage(grid, (alpha, beta), 2 * grid.step_bound) is not None
    return report


# ---------------------------------------------------------------------------
# Theorem 3 / the conditional-description lemma


@dataclass(frozen=True)
class MuchnikPair:
    """Strings a', b' of lengths C(a), C(b) that are simple given a, b
    and whose prefix pairs carry calibrated mutual information."""

    a: BitString
    b: BitString
    a_prime: BitString
    b_prime: BitString
    slack: int
    kab: int
    profile: tuple[tuple[int, int, int, int], ...]  # (l, m, info, ideal)
    skipped_cells: int


def _candidates(source: BitString, length: int, slack: int, fuel: int) -> list[BitString]:
    """Strings of the given length with C(w|source) <= slack, in lex order."""
    depth = max(0, min(16, slack // OPCODE_BITS))
    if depth == 0:
        return [w for w in [source] if len(w) == length]
    found = _search(source.key, depth, fuel, max_out_len=length)
    keys = [k for k in found if k.bit_length() - 1 == length]
    return [BitString(k) for k in sorted(keys)]


def _profile_cells(la: int, lb: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(1, la + 1) for m in range(1, lb + 1) if l + m <= PROFILE_SWEEP_MAX]


def _check_profile(
    a_prime: BitString,
    b_prime: BitString,
    kab: int,
    slack: int,
    fuel: int,
) -> tuple[tuple[tuple[int, int, int, int], ...], int] | None:
    """Profile sweep; None if some cell deviates by more than slack."""
    la, lb = len(a_prime), len(b_prime)
    cells = _profile_cells(la, lb)
    skipped = la * lb - len(cells)
    rows = []
    for l, m in sorted(cells, key=lambda lm: (lm[0] + lm[1], lm)):
        al = a_prime.prefix(l)
        bm = b_prime.prefix(m)
        ka = eps_complexity(al, 14, fuel)
        kb = eps_complexity(bm, 14, fuel)
        kj = eps_joint(al, bm, 14, fuel)
        if not (ka.is_exact and kb.is_exact and kj.is_exact):
            skipped += 1
            continue
        info = ka.bits + kb.bits - kj.bits
        ideal = max(0, l + m - kab)
        if abs(info - ideal) > slack:
            return None
        rows.append((l, m, info, ideal))
    return tuple(rows), skipped


def muchnik_pair_search(
    a: BitString,
    b: BitString,
    slack: int,
    fuel: int = DEFAULT_FUEL,
) -> MuchnikPair:
    """Exhaustive search for (a', b') meeting the three conditions at the
    given slack: |a'| = C(a) and |b'| = C(b); C(a'|a), C(b'|b) <= slack;
    and the prefix information profile within slack of
    max(0, l + m - C(a,b)) over the exactly-computable sweep.

    a' is searched first over conditions not involving b', then b' given
    a'; the first (lexicographically least) solution wins.  On failure
    the error reports the minimal slack at which a pair exists.
    """
    depth = min(max(len(a), len(b)) + 2, 16)
    la = _require_exact(eps_complexity(a, depth, fuel), "C(a)")
    lb = _require_exact(eps_complexity(b, depth, fuel), "C(b)")
    if la + lb > 20:
        raise ValueError(f"search space 2^{la + lb} infeasible; need |a'| + |b'| <= 20 bits")
    kab = _require_exact(eps_joint(a, b, 14, fuel), "C(a,b)")

    def attempt(s: int) -> MuchnikPair | None:
        for a_prime in _candidates(a, la, s, fuel):
            for b_prime in _candidates(b, lb, s, fuel):
                checked = _check_profile(a_prime, b_prime, kab, s, fuel)
                if checked is None:
                    continue
                profile, skipped = checked
                return MuchnikPair(
                    a=a,
                    b=b,
                    a_prime=a_prime,
                    b_prime=b_prime,
                    slack=s,
                    kab=kab,
                    profile=profile,
                    skipped_cells=skipped,
                )
        return None

    found = attempt(slack)
    if found is not None:
        return found
    minimal = None
    for s in range(slack + 1, 33):
        if attempt(s) is not None:
            minimal = s
            break
    raise NoPairAtSlack(slack, minimal)


def validate_pair(pair: MuchnikPair, fuel: int = DEFAULT_FUEL) -> None:
    la = _require_exact(eps_complexity(pair.a, min(len(pair.a) + 2, 16), fuel), "C(a)")
    lb = _require_exact(eps_complexity(pair.b, min(len(pair.b) + 2, 16), fuel), "C(b)")
    if len(pair.a_prime) != la or len(pair.b_prime) != lb:
        raise InvalidPair("component lengths must equal C(a), C(b)")
    s = pair.slack
    ca = complexity(pair.a_prime, pair.a, min(16, max(1, s // OPCODE_BITS)), fuel)
    cb = complexity(pair.b_prime, pair.b, min(16, max(1, s // OPCODE_BITS)), fuel)
    if not (ca.is_exact and ca.bits <= s and cb.is_exact and cb.bits <= s):
        raise InvalidPair(f"conditional descriptions not simple at slack {s}")


def _pentagon_nodes(la: int, lb: int, ca_b: int, cb_a: int, info: int) -> list[tuple[int, int]]:
    """Lattice path around the pentagon: bottom edge through V and W, up
    the right side to X1, the diagonal to X2, then around the remaining
    frame back to U."""
    v_l = max(0, min(ca_b, la))
    x1_m = max(0, min(cb_a, lb))
    lam = max(0, min(info, la, lb - x1_m))
    nodes = []
    for l in range(0, la + 1):
        nodes.append((l, 0))  # U .. V .. W
    for m in range(1, x1_m + 1):
        nodes.append((la, m))  # W .. X1
    for t in range(1, lam + 1):
        nodes.append((la - t, x1_m + t))  # X1 .. X2 diagonal
    for m in range(x1_m + lam + 1, lb + 1):
        nodes.append((la - lam, m))  # X2 up to the top edge
    for l in range(la - lam - 1, -1, -1):
        nodes.append((l, lb))  # .. Y
    for m in range(lb - 1, 0, -1):
        nodes.append((0, m))  # Y .. Z .. U
    _ = v_l
    return nodes


def _ideal_hexagon(ka: int, kb: int, ca_b: int, cb_a: int) -> list[tuple[int, int]]:
    info_a = max(0, ka - ca_b)
    info_b = max(0, kb - cb_a)
    return [
        (ka, kb),  # U'
        (info_a, kb),  # V'
        (0, info_b),  # W'  (= (0, kb - I) with I measured via cb_a)
        (0, 0),  # X'
        (ca_b, 0),  # Y'
        (ka, info_b),  # Z'
        (ka, kb),
    ]


def thm3_run(
    a: BitString,
    b: BitString,
    alpha: int,
    beta: int,
    pair: MuchnikPair,
    fuel: int = DEFAULT_FUEL,
    tolerance: int | None = None,
) -> dict:
    """Theorem 3 harness: grid over prefix lengths of (a', b').

    Walks the pentagon boundary (with the diagonal segment), matches the
    image against the ideal hexagon, checks the triangle region
    l + m >= C(a,b) against the all-information corner, and searches a
    preimage for (alpha, beta).
    """
    validate_pair(pair, fuel)
    depth = min(max(len(a), len(b)) + 2, 16)
    ka = _require_exact(eps_complexity(a, depth, fuel), "C(a)")
    kb = _require_exact(eps_complexity(b, depth, fuel), "C(b)")
    ca_b = _require_exact(complexity(a, b, depth, fuel), "C(a|b)")
    cb_a = _require_exact(complexity(b, a, depth, fuel), "C(b|a)")
    info = eps_mutual_info(a, b, 14)
    la, lb = len(pair.a_prime), len(pair.b_prime)
    values = {}
    for l in range(la + 1):
        for m in range(lb + 1):
            y = pair_encode(pair.a_prime.prefix(l), pair.b_prime.prefix(m))
            res = search_targets(y, [a, b], depth, fuel)
            ca = _require_exact(res[a][0], f"C(a|y) at ({l},{m})")
            cb = _require_exact(res[b][0], f"C(b|y) at ({l},{m})")
            values[(l, m)] = (ca, cb)
    grid = _grid_from_values(values, la, lb)

    pentagon = _pentagon_nodes(la, lb, ca_b, cb_a, info)
    pentagon_image = LatticePath(tuple(values[n] for n in pentagon), grid.step_bound)
    hexagon = _ideal_hexagon(ka, kb, ca_b, cb_a)
    tol = tolerance if tolerance is not None else pair.slack + 3 * C_MACHINE
    traj = trajectory_match(pentagon_image, hexagon, tol)

    corner = values[(la, lb)]
    triangle = [
        (l, m, values[(l, m)])
        for l in range(la + 1)
        for m in range(lb + 1)
        if l + m >= pair.kab
    ]
    triangle_dev = max((sup_dist(v, corner) for _, _, v in triangle), default=0)

    report = {
        "experiment": "thm3",
        "machine_version": MACHINE_VERSION,
        "oracle": {"depth_cap": depth, "fuel": fuel},
        "instance": {
            "a": a.text,
            "b": b.text,
            "a_prime": pair.a_prime.text,
            "b_prime": pair.b_prime.text,
            "slack": pair.slack,
            "ka": ka,
            "kb": kb,
            "ca_given_b": ca_b,
            "cb_given_a": cb_a,
            "kab": pair.kab,
            "mutual_information": info,
        },
        "grid": {
            "width": grid.width,
            "height": grid.height,
            "step_bound": grid.step_bound,
            "rows": [[list(grid.at(u, v)) for u in range(grid.width + 1)] for v in range(grid.height + 1)],
        },
        "pentagon": [list(n) for n in pentagon],
        "boundary": [list(p) for p in pentagon_image.points],
        "target": [alpha, beta],
        "trajectory": {
            "ideal": [list(p) for p in hexagon],
            "max_deviation": str(traj.max_deviation),
            "max_deviation_float": traj.max_deviation_float,
            "tolerance": tol,
            "matched": traj.matched,
        },
        "triangle": {
            "cells": len(triangle),
            "corner": list(corner),
            "max_deviation": triangle_dev,
            "within_slack": triangle_dev <= pair.slack + C_MACHINE,
        },
        "profile": [list(row) for row in pair.profile],
        "profile_skipped_cells": pair.skipped_cells,
        "cap_hits": 0,
    }
    try:
        cert = find_preimage(grid, (alpha, beta))
    except ZeroWinding:
        report["status"] = "zero_winding"
        report["winding"] = 0
        report["witness"] = None
        return report
    except (BoundaryTooClose, TooClose):
        report["status"] = "boundary_too_close"
        report["winding"] = None
        report["witness"] = None
        return report
    report["winding"] = cert.trace[0][1]
    l, m = cert.node
    y = pair_encode(pair.a_prime.prefix(l), pair.b_prime.prefix(m))
    res = search_targets(y, [a, b], depth, fuel)
    report["status"] = "ok"
    report["witness"] = {
        "node": [l, m],
        "y": y.text,
        "image": list(cert.image),
        "distance": cert.distance,
        "achieved_da": abs(cert.image[0] - alpha),
        "achieved_db": abs(cert.image[1] - beta),
        "replay": {
            "c_a_given_y": res[a][0].bits,
            "c_b_given_y": res[b][0].bits,
            "program_a_given_y": witness_hex(res[a][1].key if res[a][1] else None),
            "program_b_given_y": witness_hex(res[b][1].key if res[b][1] else None),
        },
    }
    report["scan_agrees"] = scan_preimage(grid, (alpha, beta), 2 * grid.step_bound) is not None
    return report


# ---------------------------------------------------------------------------
# Instance generators (deterministic; used by the CLI and the acceptance
# suite)


def prefix_incompressible_strings(length: int, fuel: int = DEFAULT_FUEL) -> list[BitString]:
    """Strings whose every prefix has maximal complexity 4 * length."""
    out = []
    for value in range(1 << length):
        s = BitString((1 << length) | value)
        ok = True
        for nlen in range(1, length + 1):
            pre = s.prefix(nlen)
            v = eps_complexity(pre, min(nlen + 2, 16), fuel)
            if not (v.is_exact and v.bits == 4 * nlen):
                ok = False
                break
        if ok:
            out.append(s)
    return out


def gen_thm1_instances(
    count: int,
    x_len: int = 6,
    z_len: int = 5,
    target: tuple[int, int] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> list[Thm1Instance]:
    """Deterministic enumeration of (x, z) instances: x ranges over the
    prefix-incompressible strings, z over maximally-x-independent
    strings, lexicographically."""
    xs = prefix_incompressible_strings(x_len, fuel)
    if not xs:
        raise OracleCapped(f"no prefix-incompressible strings of length {x_len}")
    instances = []
    per_x = max(1, -(-count // len(xs)))
    for x in xs:
        found = _search(x.key, min(z_len + 2, 16), fuel, max_out_len=z_len)
        zs = []
        for key in sorted(k for k in found if k.bit_length() - 1 == z_len):
            if found[key][0] == z_len:  # maximal: 4 * z_len bits = z_len instructions
                zs.append(BitString(key))
            if len(zs) >= per_x:
                break
        for z in zs:
            if len(instances) >= count:
                return instances
            nm = target if target is not None else (4 * x_len - 6, 2 * z_len + 8)
            instances.append(thm1_build(x, nm[0], nm[1], z=z, fuel=fuel))
    return instances


def low_info_pairs(count: int, length: int = 5, max_info: int = 0, fuel: int = DEFAULT_FUEL) -> list[tuple[BitString, BitString]]:
    """Pairs of maximal-complexity strings with measured I(a:b) <= max_info."""
    singles = []
    for value in range(1 << length):
        s = BitString((1 << length) | value)
        v = eps_complexity(s, min(length + 2, 16), fuel)
        if v.is_exact and v.bits == 4 * length:
            singles.append(s)
    pairs = []
    for i, a in enumerate(singles):
        for b in singles[i + 1 :]:
            try:
                info = eps_mutual_info(a, b, 14)
            except Indeterminate:
                continue
            if info <= max_info:
                pairs.append((a, b))
                if len(pairs) >= count:
                    return pairs
    return pairs


def dependent_pairs(count: int) -> list[tuple[BitString, BitString]]:
    """Shared-prefix dependent pairs inside the search-feasible regime
    (|a'| + |b'| <= 20 bits means |a| + |b| <= 5)."""
    raw = [
        ("0", "00"),
        ("1", "11"),
        ("0", "01"),
        ("1", "10"),
        ("00", "000"),
        ("01", "010"),
        ("10", "101"),
        ("11", "111"),
        ("01", "011"),
        ("10", "100"),
        ("00", "001"),
        ("11", "110"),
        ("0", "000"),
        ("1", "111"),
        ("00", "00"),
        ("01", "01"),
    ]
    return [(BitString.from_text(a), BitString.from_text(b)) for a, b in raw[:count]]
