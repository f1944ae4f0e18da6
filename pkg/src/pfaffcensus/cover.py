"""Determinant-method covers: exact rank sweeps and curve-count budgets.

The constructive side: given height-bounded rational points on a graph
piece, partition them (in x-order) into consecutive blocks whose
monomial-evaluation rows stay rank-deficient, and emit for each block an
exact kernel curve supported in the prescribed monomial set.  The
numeric side: the certified count bound

    (4 C D 4^(1/rho) + 2) * L^rho * H^sigma

for points of height <= H on a length-<= L graph piece with small slope
and one-signed derivatives, and the derivative-threshold subdivision
whose leaf count that bound controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .enclosures import format_decimal, pow_bounds
from .monomials import (MonomialSet, PlaneCurve, evaluate_curve,
                        monomial_row, parameters, curve_to_json)
from .pfaffian import (PfaffianFunction, derivatives_up_to, evaluate,
                       isolate_zeros, certified_sign, _midpoint)
from .rationals import RationalPoint, format_point, simplest_between


class PreconditionError(ValueError):
    """A named precondition failed; the message names the inequality."""


def exact_rank(rows: Sequence[Sequence[Fraction]]
               ) -> tuple[int, Optional[tuple[Fraction, ...]]]:
    """Rank over Q by fraction-free elimination.

    Returns (rank, kernel_vector): when rank < width, kernel_vector is an
    exact nonzero integer vector in the common nullspace of all rows,
    otherwise None.
    """
    rows = [list(map(Fraction, r)) for r in rows]
    if not rows:
        return 0, None
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("rows must have equal length")
    # clear denominators row by row (row scaling preserves rank and kernel)
    mat = []
    for r in rows:
        lcm = 1
        for c in r:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        mat.append([int(c * lcm) for c in r])
    # fraction-free elimination (integer cross-multiplication, gcd-reduced)
    piv_rows: list[list[int]] = []
    piv_cols: list[int] = []
    for row in mat:
        row = row[:]
        for pr, pc in zip(piv_rows, piv_cols):
            if row[pc] == 0:
                continue
            p, c = pr[pc], row[pc]
            row = [p * a - c * b for a, b in zip(row, pr)]
            g = 0
            for v in row:
                g = math.gcd(g, v)
            if g > 1:
                row = [v // g for v in row]
        pc = next((j for j, v in enumerate(row) if v != 0), None)
        if pc is None:
            continue
        piv_rows.append(row)
        piv_cols.append(pc)
    rank = len(piv_rows)
    if rank >= width:
        return rank, None
    # kernel vector: set the first free column to 1, back-substitute
    free = next(j for j in range(width) if j not in piv_cols)
    v = [Fraction(0)] * width
    v[free] = Fraction(1)
    for pr, pc in sorted(zip(piv_rows, piv_cols), key=lambda t: -t[1]):
        s = sum(Fraction(pr[j]) * v[j] for j in range(width) if j != pc)
        v[pc] = -s / pr[pc]
    lcm = 1
    for c in v:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in v]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    ints = [c // g for c in ints]
    lead = next(c for c in ints if c != 0)
    if lead < 0:
        ints = [-c for c in ints]
    return rank, tuple(Fraction(c) for c in ints)


class _RankSweep:
    """Incremental echelon basis over Q for the block sweep."""

    def __init__(self, width: int):
        self.width = width
        self.rows: list[list[Fraction]] = []
        self.piv: list[int] = []
        self.raw: list[tuple[Fraction, ...]] = []

    def would_increase(self, row: Sequence[Fraction]) -> bool:
        r = self._reduce(list(row))
        return any(v != 0 for v in r)

    def add(self, row: Sequence[Fraction]) -> bool:
        self.raw.append(tuple(row))
        r = self._reduce(list(row))
        pc = next((j for j, v in enumerate(r) if v != 0), None)
        if pc is None:
            return False
        scale = r[pc]
        r = [v / scale for v in r]
        self.rows.append(r)
        self.piv.append(pc)
        return True

    def _reduce(self, r: list[Fraction]) -> list[Fraction]:
        for er, pc in zip(self.rows, self.piv):
            if r[pc] != 0:
                c = r[pc]
                r = [a - c * b for a, b in zip(r, er)]
        return r

    @property
    def rank(self) -> int:
        return len(self.rows)

    def kernel_vector(self) -> tuple[Fraction, ...]:
        _, v = exact_rank(self.raw)
        if v is None:
            raise ValueError("no kernel vector at full rank")
        return v


@dataclass(frozen=True)
class CoverBlock:
    indices: tuple[int, ...]
    curve: PlaneCurve


@dataclass(frozen=True)
class CoverReport:
    blocks: tuple[CoverBlock, ...]
    M: MonomialSet
    H: int
    L: Fraction
    bound_value: Fraction  # certified upper bound on the block count

    @property
    def size(self) -> int:
        return len(self.blocks)

    def within_bound(self) -> bool:
        return self.size <= self.bound_value


def cover_count_bound(M: MonomialSet, L, H: int, bits: int = 64) -> Fraction:
    """Certified upper bound (4 C D 4^(1/rho) + 2) L^rho H^sigma.

    Preconditions (each named on failure): D >= 2, S >= 2R, H >= 1,
    L >= 1/H^2.
    """
    p = parameters(M)
    L = Fraction(L)
    if p.D < 2:
        raise PreconditionError(f"D >= 2 fails: D = {p.D}")
    if p.S < 2 * p.R:
        raise PreconditionError(f"S >= 2R fails: S = {p.S}, R = {p.R}")
    if H < 1:
        raise PreconditionError(f"H >= 1 fails: H = {H}")
    if L * H * H < 1:
        raise PreconditionError(f"L >= 1/H^2 fails: L = {L}, H = {H}")
    const = cover_count_constant(M, bits)
    l_pow = pow_bounds(L, p.rho, bits).hi if L != 1 else Fraction(1)
    h_pow = pow_bounds(H, p.sigma, bits).hi if H != 1 else Fraction(1)
    return const * l_pow * h_pow


def cover_count_constant(M: MonomialSet, bits: int = 64) -> Fraction:
    """Certified upper bound on the constant 4 C D 4^(1/rho) + 2."""
    p = parameters(M)
    if p.D < 2:
        raise PreconditionError(f"D >= 2 fails: D = {p.D}")
    four_pow = pow_bounds(4, 1 / p.rho, bits).hi
    return 4 * p.c_upper * p.D * four_pow + 2


def block_cover(points: Sequence[RationalPoint], M: MonomialSet,
                H: Optional[int] = None, L=None) -> CoverReport:
    """Greedy x-sorted sweep cover of the points by curves in M.

    A block stays open while its monomial rows have rank <= D-1; the
    point that would force full rank closes the block with an exact
    kernel curve and starts the next one.  Every curve is verified to
    vanish on its own block before the report is returned.
    """
    p = parameters(M)
    if p.D < 2:
        raise PreconditionError(f"D >= 2 fails: D = {p.D}")
    order = sorted(range(len(points)), key=lambda i: (points[i].x, points[i].y))
    pts = [points[i] for i in order]
    if H is None:
        H = max((pt.height() for pt in pts), default=1)
    if L is None:
        if len(pts) >= 2:
            L = pts[-1].x - pts[0].x
        else:
            L = Fraction(0)
        L = max(L, Fraction(1, H * H))
    blocks: list[CoverBlock] = []
    sweep = _RankSweep(p.D)
    members: list[int] = []

    def close():
        if not members:
            return
        kv = sweep.kernel_vector()
        curve = PlaneCurve(M, kv)
        for i in members:
            val = evaluate_curve(curve, points[i])
            if val != 0:
                raise AssertionError(
                    f"cover curve fails to vanish at {format_point(points[i])}")
        blocks.append(CoverBlock(tuple(members), curve))

    for idx, pt in zip(order, pts):
        row = monomial_row(M, pt)
        if sweep.rank == p.D - 1 and sweep.would_increase(row):
            close()
            sweep = _RankSweep(p.D)
            members = []
        sweep.add(row)
        members.append(idx)
    close()
    bound = cover_count_bound(M, L, H)
    return CoverReport(tuple(blocks), M, H, Fraction(L), bound)


def verify_cover(points: Sequence[RationalPoint], M: MonomialSet, L,
                 H: int) -> tuple[bool, CoverReport]:
    """Cover the points and test |blocks| <= cover_count_bound(M, L, H)."""
    report = block_cover(points, M, H=H, L=Fraction(L))
    bound = cover_count_bound(M, Fraction(L), H)
    ok = report.size <= bound
    report = CoverReport(report.blocks, M, H, Fraction(L), bound)
    return ok, report


def cover_report_to_json(report: CoverReport, points: Sequence[RationalPoint]
                         ) -> dict:
    return {
        "M": [[h, k] for h, k in report.M.pairs],
        "H": report.H,
        "L": str(report.L),
        "bound": format_decimal(report.bound_value, 6, "up"),
        "size": report.size,
        "blocks": [
            {"points": [format_point(points[i]) for i in blk.indices],
             "curve": curve_to_json(blk.curve)}
            for blk in report.blocks
        ],
    }


# ---------------------------------------------------------------------------
# Derivative-threshold subdivision
# ---------------------------------------------------------------------------


@dataclass
class SubdivisionNode:
    lo: Fraction
    hi: Fraction
    depth: int
    kind: str  # 'internal' | 'small-derivative' | 'terminal-short'
    budget: Fraction  # length budget L at this level
    split_points: tuple[Fraction, ...] = ()
    children: tuple["SubdivisionNode", ...] = ()

    def leaves(self) -> list["SubdivisionNode"]:
        if not self.children:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out


@dataclass(frozen=True)
class SubdivisionTree:
    root: SubdivisionNode
    M: MonomialSet
    H: int
    a_lower: Fraction        # certified lower bound on A^(1/(D-1)) = 2 D 4^(1/rho)
    lam_upper: Fraction      # certified upper bound on lambda = 4^(-1/rho)
    depth_bound: int         # least n with lambda^n < 1/(L H^2)
    threshold_variant: str = "kappa! * A^(kappa/(D-1)) * L^(1-kappa), kappa=2..D"

    def leaves(self) -> list[SubdivisionNode]:
        return self.root.leaves()

    def small_leaves(self) -> list[SubdivisionNode]:
        return [n for n in self.leaves() if n.kind == "small-derivative"]


def _pow4_exponent_compare(n: int, rho: Fraction, tau: Fraction) -> bool:
    """Exact test of 4**(-n/rho) < tau for rational rho > 0, tau > 0."""
    # 4^(-n/rho) < tau  <=>  4^(n * q) > (1/tau)^p  with rho = p/q
    p, q = rho.numerator, rho.denominator
    return Fraction(4) ** (n * q) > (1 / tau) ** p


def subdivision_depth_bound(M: MonomialSet, L: Fraction, H: int) -> int:
    """Least n with lambda^n < 1/(L H^2), lambda = 4^(-1/rho), exact."""
    rho = parameters(M).rho
    tau = Fraction(1, L * H * H)
    if tau > 1:
        return 0
    n = 1
    while not _pow4_exponent_compare(n, rho, tau):
        n += 1
        if n > 10 ** 6:
            raise ArithmeticError("runaway depth computation")
    return n


def threshold_subdivision(f: PfaffianFunction, lo: Fraction, hi: Fraction,
                          M: MonomialSet, H: int,
                          bits: int = 64) -> SubdivisionTree:
    """Split [lo, hi] at derivative-threshold crossings.

    Preconditions (caller establishes, e.g. via sign_partition): |f'| <= 1
    on the interval and each f^(j), j <= D, one-signed or identically
    zero on its interior.  Each recursion level either emits one
    small-derivative leaf where |f^(kappa)| <= kappa! A^(kappa/(D-1))
    L^(1-kappa) for all kappa <= D (thresholds rounded DOWN to rationals,
    which only strengthens the leaf condition), or stops on intervals
    shorter than 1/H^2.  Side pieces re-enter with budget lambda * L.
    """
    p = parameters(M)
    if p.D < 2:
        raise PreconditionError(f"D >= 2 fails: D = {p.D}")
    if H < 1:
        raise PreconditionError(f"H >= 1 fails: H = {H}")
    L0 = hi - lo
    if L0 * H * H < 1:
        raise PreconditionError(f"L >= 1/H^2 fails: L = {L0}")
    D = p.D
    a_enc = pow_bounds(4, 1 / p.rho, bits)
    a_lower = 2 * D * a_enc.lo           # lower bound on 2 D 4^(1/rho)
    lam_upper = Fraction(1) / a_enc.lo   # upper bound on 4^(-1/rho)
    derivs = derivatives_up_to(f, D + 1)
    n_bound = subdivision_depth_bound(M, L0, H)

    def thresholds(L: Fraction) -> list[tuple[int, Fraction]]:
        out = []
        for kappa in range(2, D + 1):
            t = math.factorial(kappa) * a_lower ** kappa * L ** (1 - kappa)
            out.append((kappa, t))
        return out

    def rec(a: Fraction, b: Fraction, budget: Fraction, depth: int
            ) -> SubdivisionNode:
        length = b - a
        if length * H * H < 1:
            return SubdivisionNode(a, b, depth, "terminal-short", budget)
        if depth > n_bound:
            raise ArithmeticError(
                f"subdivision exceeded depth bound {n_bound}")
        # intersect the satisfaction intervals over kappa = 2..D
        s_lo, s_hi = a, b
        splits: list[Fraction] = []
        for kappa, thr in thresholds(budget):
            g = derivs[kappa]
            if g.P.is_zero:
                continue
            sgn = certified_sign(g, _midpoint(a, b), 4096)
            if sgn == 0:
                sgn = 1
            # crossings of sgn*g = thr inside (a, b)
            shifted = PfaffianFunction(
                g.chain,
                (g.P if sgn > 0 else -g.P).shift_rational(-thr),
                max(g.beta, 1))
            if shifted.P.is_zero:
                continue
            cuts = isolate_zeros(shifted, a, b)
            # determine on which side |g| <= thr holds: sample each gap
            gaps = []
            prev = a
            for c in cuts:
                gaps.append((prev, c.lo))
                splits.append((c.lo + c.hi) / 2)
                prev = c.hi
            gaps.append((prev, b))
            ok_gaps = []
            for g_lo, g_hi in gaps:
                if g_lo >= g_hi:
                    ok_gaps.append(False)
                    continue
                sample = simplest_between(g_lo, g_hi)
                enc = evaluate(derivs[kappa], sample, 48, max_bits=4096)
                val = max(abs(enc.lo), abs(enc.hi))
                ok_gaps.append(val <= thr)
            # satisfaction region: hull of consecutive ok gaps (one-signed
            # monotone |g| makes it a prefix or suffix; tolerate interior)
            best = None
            run_start = None
            for i, ok in enumerate(ok_gaps):
                if ok and run_start is None:
                    run_start = i
                if (not ok or i == len(ok_gaps) - 1) and run_start is not None:
                    end = i if ok else i - 1
                    cand = (gaps[run_start][0], gaps[end][1])
                    if best is None or cand[1] - cand[0] > best[1] - best[0]:
                        best = cand
                    run_start = None
            if best is None:
                s_lo, s_hi = b, b
                break
            s_lo = max(s_lo, best[0])
            s_hi = min(s_hi, best[1])
            if s_lo >= s_hi:
                s_lo, s_hi = b, b
                break

        children = []
        if s_lo < s_hi:
            if a < s_lo:
                children.append(rec(a, s_lo, lam_upper * budget, depth + 1))
            children.append(SubdivisionNode(
                s_lo, s_hi, depth + 1, "small-derivative", budget))
            if s_hi < b:
                children.append(rec(s_hi, b, lam_upper * budget, depth + 1))
        else:
            # empty satisfaction interval: whole piece re-enters one level down
            children.append(rec(a, b, lam_upper * budget, depth + 1))
        if len(children) == 1 and children[0].lo == a and children[0].hi == b \
                and children[0].kind != "internal":
            return children[0]
        return SubdivisionNode(a, b, depth, "internal", budget,
                               tuple(splits), tuple(children))

    root = rec(lo, hi, L0, 0)
    return SubdivisionTree(root, M, H, a_lower, lam_upper, n_bound)


def audit_subdivision(tree: SubdivisionTree, f: PfaffianFunction,
                      samples: int = 10) -> dict:
    """A-posteriori checks: leaf partition, budget count, leaf thresholds."""
    p = parameters(tree.M)
    D = p.D
    leaves = tree.leaves()
    leaves_sorted = sorted(leaves, key=lambda n: n.lo)
    # partition check (endpoint overlap allowed)
    contiguous = all(x.hi == y.lo for x, y in zip(leaves_sorted, leaves_sorted[1:]))
    union_ok = (leaves_sorted[0].lo == tree.root.lo
                and leaves_sorted[-1].hi == tree.root.hi and contiguous)
    budget = cover_count_bound(tree.M, tree.root.hi - tree.root.lo, tree.H)
    count_ok = len(leaves) <= budget
    derivs = derivatives_up_to(f, D)
    leaf_ok = True
    for leaf in tree.small_leaves():
        if leaf.hi <= leaf.lo:
            continue
        for kappa in range(2, D + 1):
            g = derivs[kappa]
            if g.P.is_zero:
                continue
            thr = (math.factorial(kappa) * tree.a_lower ** kappa
                   * leaf.budget ** (1 - kappa))
            for i in range(1, samples + 1):
                x = leaf.lo + (leaf.hi - leaf.lo) * Fraction(i, samples + 1)
                enc = evaluate(g, x, 48, max_bits=4096)
                if max(abs(enc.lo), abs(enc.hi)) > thr:
                    leaf_ok = False
    max_depth = max(n.depth for n in leaves)
    return {
        "leaves": len(leaves),
        "budget": budget,
        "count_ok": bool(count_ok),
        "partition_ok": bool(union_ok),
        "leaf_thresholds_ok": bool(leaf_ok),
        "max_depth": max_depth,
        "depth_bound": tree.depth_bound,
        "depth_ok": max_depth <= tree.depth_bound + 1,
    }
