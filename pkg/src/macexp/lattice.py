"""Vectorized minimization of branch objectives over rational type lattices.

The exponent of each error branch is an exact minimum of

    D(V_{Z|XYU} || W | .) + I_V(X;Y|U) + |clamp(V) - rate offset|+

over joint distributions V subject to marginal pinning, mutual-information
rate constraints, and (for the expurgated branches) the decoder condition
that the true pair's equivocation is at least the competitor pair's.

Candidates are all joint types with a fixed denominator d, enumerated in
ascending lexicographic order of the flattened count tensor.  Every
entropic quantity of a type is a rational combination of integer
"g*log2(g)" sums over marginal count tensors, so for a given (branch,
alphabet sizes, d) they are computed once, cached, and reused across
channels and rate pairs; a channel evaluation then reduces to one
matrix-vector product plus vector comparisons.

The grid is chunked and reduced with an associative (value, index) min,
so chunk size and thread count cannot change results: ties always resolve
to the smallest enumeration index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .typeclasses import MAX_ENUM_CELLS, MAX_ENUM_DENOM, compositions_array

# Slack for the equivocation comparison alpha(true) >= alpha(competitor).
# Symmetric candidates (competitor identical to the true pair) produce the
# two sides from the same integer counts summed in different axis orders,
# which can differ by a few ulp; the slack keeps those ties feasible while
# staying far below every reported tolerance.
ALPHA_TOL = 1e-10

# Slack for the rate constraints, for the same reason: candidates such as
# the duplicated-competitor anchor routinely sit mathematically exactly on
# a constraint boundary (for instance I equal to a sum of rates), where
# rounding alone would decide feasibility.
RATE_TOL = 1e-10

# Objective values are sums of entropic terms, each carrying ulp-scale
# rounding; anything this small is indistinguishable from an exact zero.
ZERO_SNAP = 1e-12

_EVAL_CHUNK = 1 << 18


@dataclass(frozen=True)
class MITerm:
    """One conditional mutual information I(a ; b | c) by axis labels."""

    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...]


@dataclass(frozen=True)
class RateConstraint:
    name: str
    terms: tuple[MITerm, ...]
    offset: str  # key into constraint_rhs


@dataclass(frozen=True)
class BranchSpec:
    """Declarative description of one branch's feasible set and objective."""

    name: str
    labels: tuple[str, ...]
    # (marginal axes of V, corresponding axes of the input law to pin to)
    marginal_eq: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    constraints: tuple[RateConstraint, ...]
    clamp_terms: tuple[MITerm, ...]
    clamp_offset: str  # "rx" | "ry" | "rxy"
    alpha_competitor: tuple[str, ...] | None


def constraint_rhs(offset: str, rx: float, ry: float, delta: float) -> float:
    m = min(rx, ry)
    table = {
        "min3": m + 3 * delta,
        "rx_min4": rx + m + 4 * delta,
        "ry_min4": ry + m + 4 * delta,
        "rxy_min5": rx + ry + m + 5 * delta,
        "rx3": rx + 3 * delta,
        "ry3": ry + 3 * delta,
        "rxy3": rx + ry + 3 * delta,
    }
    return table[offset]


def clamp_offset_value(kind: str, rx: float, ry: float) -> float:
    if kind == "rx":
        return rx
    if kind == "ry":
        return ry
    if kind == "rxy":
        return rx + ry
    raise ValidationError(f"unknown clamp offset {kind!r}")


def _mi(a, b, c=()):
    def as_labels(v):
        return (v,) if isinstance(v, str) else tuple(v)
    return MITerm(as_labels(a), as_labels(b), as_labels(c))


# Expurgated branches.  Branch X confuses the X codeword only: the
# competitor axis X~ carries the other codeword, pinned to the same
# conditional law as X.  Branch Y mirrors it; branch XY confuses both and
# carries the full ten-inequality constraint set realized joint types of a
# good code must satisfy.
BRANCH_X = BranchSpec(
    name="X",
    labels=("U", "X", "Y", "X~", "Z"),
    marginal_eq=(
        (("U", "X"), ("U", "X")),
        (("U", "X~"), ("U", "X")),
        (("U", "Y"), ("U", "Y")),
    ),
    constraints=(
        RateConstraint("pair_xy", (_mi("X", "Y", "U"),), "min3"),
        RateConstraint("pair_xty", (_mi("X~", "Y", "U"),), "min3"),
        RateConstraint(
            "triple_x",
            (_mi("X", "Y", "U"), _mi("X~", "Y", "U"), _mi("X~", "X", ("U", "Y"))),
            "rx_min4",
        ),
    ),
    clamp_terms=(_mi("X~", ("X", "Z"), ("Y", "U")), _mi("X~", "Y", "U")),
    clamp_offset="rx",
    alpha_competitor=("X~", "Y"),
)

BRANCH_Y = BranchSpec(
    name="Y",
    labels=("U", "X", "Y", "Y~", "Z"),
    marginal_eq=(
        (("U", "Y"), ("U", "Y")),
        (("U", "Y~"), ("U", "Y")),
        (("U", "X"), ("U", "X")),
    ),
    constraints=(
        RateConstraint("pair_xy", (_mi("X", "Y", "U"),), "min3"),
        RateConstraint("pair_xyt", (_mi("X", "Y~", "U"),), "min3"),
        RateConstraint(
            "triple_y",
            (_mi("X", "Y", "U"), _mi("X", "Y~", "U"), _mi("Y~", "Y", ("U", "X"))),
            "ry_min4",
        ),
    ),
    clamp_terms=(_mi("Y~", ("Y", "Z"), ("X", "U")), _mi("X", "Y~", "U")),
    clamp_offset="ry",
    alpha_competitor=("X", "Y~"),
)

# The full constraint family on joint types of (u, x_i, y_j, x_k, y_l).
CONFUSABILITY_CONSTRAINTS = (
    RateConstraint("pair_xy", (_mi("X", "Y", "U"),), "min3"),
    RateConstraint("pair_xyt", (_mi("X", "Y~", "U"),), "min3"),
    RateConstraint("pair_xty", (_mi("X~", "Y", "U"),), "min3"),
    RateConstraint("pair_xtyt", (_mi("X~", "Y~", "U"),), "min3"),
    RateConstraint(
        "triple_x",
        (_mi("X", "Y", "U"), _mi("X~", "Y", "U"), _mi("X~", "X", ("U", "Y"))),
        "rx_min4",
    ),
    RateConstraint(
        "triple_x_alt",
        (_mi("X", "Y~", "U"), _mi("X~", "Y~", "U"), _mi("X~", "X", ("U", "Y~"))),
        "rx_min4",
    ),
    RateConstraint(
        "triple_y",
        (_mi("X", "Y", "U"), _mi("X", "Y~", "U"), _mi("Y~", "Y", ("U", "X"))),
        "ry_min4",
    ),
    RateConstraint(
        "triple_y_alt",
        (_mi("X~", "Y", "U"), _mi("X~", "Y~", "U"), _mi("Y~", "Y", ("U", "X~"))),
        "ry_min4",
    ),
    RateConstraint(
        "quad",
        (_mi("X", "Y", "U"), _mi("X~", "Y~", "U"), _mi(("X~", "Y~"), ("X", "Y"), "U")),
        "rxy_min5",
    ),
    RateConstraint(
        "quad_alt",
        (_mi("X~", "Y", "U"), _mi("X", "Y~", "U"), _mi(("X", "Y~"), ("X~", "Y"), "U")),
        "rxy_min5",
    ),
)

BRANCH_XY = BranchSpec(
    name="XY",
    labels=("U", "X", "Y", "X~", "Y~", "Z"),
    marginal_eq=(
        (("U", "X"), ("U", "X")),
        (("U", "X~"), ("U", "X")),
        (("U", "Y"), ("U", "Y")),
        (("U", "Y~"), ("U", "Y")),
    ),
    constraints=CONFUSABILITY_CONSTRAINTS,
    clamp_terms=(_mi(("X~", "Y~"), ("X", "Y", "Z"), "U"), _mi("X~", "Y~", "U")),
    clamp_offset="rxy",
    alpha_competitor=("X~", "Y~"),
)

# Relaxed reference branches: no competitor axes, no decoder condition,
# a single rate constraint, and the clamp written on the true pair only.
BASELINE_X = BranchSpec(
    name="baseline_X",
    labels=("U", "X", "Y", "Z"),
    marginal_eq=((("U", "X"), ("U", "X")), (("U", "Y"), ("U", "Y"))),
    constraints=(RateConstraint("pair_xy", (_mi("X", "Y", "U"),), "rx3"),),
    clamp_terms=(_mi("X", ("Y", "Z"), "U"),),
    clamp_offset="rx",
    alpha_competitor=None,
)

BASELINE_Y = BranchSpec(
    name="baseline_Y",
    labels=("U", "X", "Y", "Z"),
    marginal_eq=((("U", "X"), ("U", "X")), (("U", "Y"), ("U", "Y"))),
    constraints=(RateConstraint("pair_xy", (_mi("X", "Y", "U"),), "ry3"),),
    clamp_terms=(_mi("Y", ("X", "Z"), "U"),),
    clamp_offset="ry",
    alpha_competitor=None,
)

BASELINE_XY = BranchSpec(
    name="baseline_XY",
    labels=("U", "X", "Y", "Z"),
    marginal_eq=((("U", "X"), ("U", "X")), (("U", "Y"), ("U", "Y"))),
    constraints=(RateConstraint("pair_xy", (_mi("X", "Y", "U"),), "rxy3"),),
    clamp_terms=(_mi(("X", "Y"), "Z", "U"), _mi("X", "Y", "U")),
    clamp_offset="rxy",
    alpha_competitor=None,
)

BRANCH_SPECS = {"X": BRANCH_X, "Y": BRANCH_Y, "XY": BRANCH_XY}
BASELINE_SPECS = {"X": BASELINE_X, "Y": BASELINE_Y, "XY": BASELINE_XY}


def _combo_from_terms(terms) -> dict[frozenset, float]:
    """Entropy-combination form of a sum of conditional MI terms."""
    combo: dict[frozenset, float] = {}

    def add(subset, coef):
        s = frozenset(subset)
        if not s:
            return
        combo[s] = combo.get(s, 0.0) + coef
        if combo[s] == 0.0:
            del combo[s]

    for t in terms:
        a, b, c = set(t.a), set(t.b), set(t.c)
        add(a | c, +1.0)
        add(b | c, +1.0)
        add(a | b | c, -1.0)
        add(c, -1.0)
    return combo


def _branch_combos(spec: BranchSpec) -> dict[str, dict[frozenset, float]]:
    combos: dict[str, dict[frozenset, float]] = {}
    combos["mi_xy"] = _combo_from_terms((_mi("X", "Y", "U"),))
    for c in spec.constraints:
        combos[c.name] = _combo_from_terms(c.terms)
    combos["clamp"] = _combo_from_terms(spec.clamp_terms)
    # -H(Z | everything but Z) over the true-pair marginal (U, X, Y)
    all_l = set(spec.labels)
    combos["div_ent"] = {
        frozenset(all_l & {"U", "X", "Y"}): 1.0,
        frozenset((all_l & {"U", "X", "Y"}) | {"Z"}): -1.0,
    }
    if spec.alpha_competitor is not None:
        true_s = frozenset({"U", "X", "Y", "Z"})
        comp_s = frozenset({"U", "Z"} | set(spec.alpha_competitor))
        combos["alpha_diff"] = {true_s: 1.0, comp_s: -1.0}
    return combos


@dataclass
class LatticeCache:
    """Channel-independent per-type quantities for one (branch, sizes, d)."""

    spec: BranchSpec
    sizes: tuple[int, ...]
    d: int
    counts: np.ndarray                      # (N, cells) uint8
    quantities: dict[str, np.ndarray]       # name -> (N,) float64
    marginals: dict[tuple[str, ...], np.ndarray]  # axes -> (N, cells_s) int16

    @property
    def total(self) -> int:
        return self.counts.shape[0]


_CACHE: dict[tuple, LatticeCache] = {}
_CACHE_LIMIT = 6


def clear_lattice_cache() -> None:
    _CACHE.clear()


def _subset_axes(labels, subset) -> tuple[int, ...]:
    return tuple(i for i, l in enumerate(labels) if l in subset)


def get_cache(spec: BranchSpec, sizes: tuple[int, ...], d: int,
              max_cells=None, max_denom=None) -> LatticeCache:
    key = (spec.name, sizes, d)
    if key in _CACHE:
        return _CACHE[key]

    cells = int(np.prod(sizes))
    limit_cells = MAX_ENUM_CELLS if max_cells is None else max_cells
    limit_denom = MAX_ENUM_DENOM if max_denom is None else max_denom
    if cells > limit_cells or d > limit_denom:
        from .errors import ScaleGuardError
        raise ScaleGuardError(
            f"branch {spec.name}: lattice over {cells} cells at denominator {d} "
            f"exceeds the enumeration guard ({limit_cells} cells, {limit_denom})"
        )

    counts = compositions_array(cells, d)
    n_rows = counts.shape[0]
    combos = _branch_combos(spec)
    subsets = sorted({s for combo in combos.values() for s in combo},
                     key=lambda s: (len(s), sorted(s)))
    marg_subsets = [tuple(m[0]) for m in spec.marginal_eq]

    table = np.zeros(d + 1, dtype=np.float64)
    g = np.arange(1, d + 1, dtype=np.float64)
    table[1:] = g * np.log2(g)

    quantities = {name: np.empty(n_rows, dtype=np.float64) for name in combos}
    marginals = {
        s: np.empty((n_rows, int(np.prod([sizes[i] for i in _subset_axes(spec.labels, s)]))),
                    dtype=np.int16)
        for s in marg_subsets
    }

    chunk = 1 << 17
    for a in range(0, n_rows, chunk):
        b = min(a + chunk, n_rows)
        view = counts[a:b].reshape((b - a,) + sizes)
        xl: dict[frozenset, np.ndarray] = {}
        g_cache: dict[frozenset, np.ndarray] = {}
        for s in subsets:
            keep = _subset_axes(spec.labels, s)
            drop = tuple(i + 1 for i in range(len(sizes)) if i not in keep)
            gsum = view.sum(axis=drop, dtype=np.int64) if drop else view.astype(np.int64)
            g_cache[s] = gsum
            xl[s] = np.take(table, gsum).reshape(b - a, -1).sum(axis=1)
        for name, combo in combos.items():
            acc = np.zeros(b - a, dtype=np.float64)
            for s, coef in combo.items():
                acc += coef * xl[s]
            quantities[name][a:b] = -acc / d
        for s in marg_subsets:
            fs = frozenset(s)
            if fs in g_cache:
                gsum = g_cache[fs]
            else:
                keep = _subset_axes(spec.labels, fs)
                drop = tuple(i + 1 for i in range(len(sizes)) if i not in keep)
                gsum = view.sum(axis=drop, dtype=np.int64)
            marginals[s][a:b] = gsum.reshape(b - a, -1)

    cache = LatticeCache(spec, sizes, d, counts, quantities, marginals)
    if len(_CACHE) >= _CACHE_LIMIT:
        _CACHE.pop(next(iter(_CACHE)))
    _CACHE[key] = cache
    return cache


def channel_log_vector(spec: BranchSpec, sizes: tuple[int, ...], w: np.ndarray):
    """Flattened -log2 W(z|x,y) broadcast over the branch's cells.

    Returns (finite_vector, infinite_cell_indices): cells where the channel
    puts zero mass are split out so 0 * inf never arises in the matvec.
    """
    labels = spec.labels
    with np.errstate(divide="ignore"):
        neg = -np.log2(w)
    shape = [1] * len(labels)
    for lab, axis in (("X", 0), ("Y", 1), ("Z", 2)):
        shape[labels.index(lab)] = w.shape[axis]
    # X, Y, Z appear in that relative order in every branch label tuple
    full = np.broadcast_to(neg.reshape(shape), sizes).ravel()
    inf_cells = np.flatnonzero(~np.isfinite(full))
    finite = np.where(np.isfinite(full), full, 0.0)
    return finite, inf_cells


def _chunk_value(cache: LatticeCache, a: int, b: int, rhs: list,
                 targets: list, alpha: bool, w_finite: np.ndarray,
                 inf_cells: np.ndarray, clamp_off: float,
                 weighting: str, p_uxy: np.ndarray | None):
    d = cache.d
    q = cache.quantities
    feas = np.ones(b - a, dtype=bool)
    half = 0.5 / d
    for subset, target in targets:
        m = cache.marginals[subset][a:b].astype(np.float64) / d
        feas &= (np.abs(m - target[None, :]) <= half).all(axis=1)
    for name, bound in rhs:
        feas &= q[name][a:b] <= bound + RATE_TOL
    if alpha:
        feas &= q["alpha_diff"][a:b] >= -ALPHA_TOL
    if weighting == "V":
        cnts = cache.counts[a:b].astype(np.float64)
        value = q["div_ent"][a:b] + cnts @ w_finite / d
        if inf_cells.size:
            hit = cache.counts[a:b][:, inf_cells].sum(axis=1) > 0
            value = np.where(hit, np.inf, value)
    else:
        value = _p_weighted_divergence(cache, a, b, w_finite, inf_cells, p_uxy)
    value = value + q["mi_xy"][a:b] + np.maximum(q["clamp"][a:b] - clamp_off, 0.0)
    # sums of divergences and mutual informations are >= 0; rounding can
    # leave ulp-scale residue on either side of zero, corrupting zero minima
    value = np.maximum(value, 0.0)
    value[value < ZERO_SNAP] = 0.0
    value = np.where(feas, value, np.inf)
    i = int(np.argmin(value))
    return float(value[i]), a + i, bool(feas.any())


def _p_weighted_divergence(cache: LatticeCache, a: int, b: int,
                           w_finite: np.ndarray, inf_cells: np.ndarray,
                           p_uxy: np.ndarray) -> np.ndarray:
    """D(V_{Z|XYU} || W | P_{UXY}) per type; conditioning cells with zero
    V-mass contribute zero by convention (their conditional is free)."""
    labels = cache.spec.labels
    sizes = cache.sizes
    keep = _subset_axes(labels, {"U", "X", "Y", "Z"})
    drop = tuple(i + 1 for i in range(len(sizes)) if i not in keep)
    view = cache.counts[a:b].reshape((b - a,) + sizes)
    g = view.sum(axis=drop, dtype=np.int64) if drop else view.astype(np.int64)
    # g has axes (rows, U, X, Y, Z)
    g = g.astype(np.float64)
    gz = g.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(gz > 0, g / np.where(gz > 0, gz, 1.0), 0.0)
        logc = np.where(cond > 0, np.log2(np.where(cond > 0, cond, 1.0)), 0.0)
    zcount = sizes[labels.index("Z")]
    wneg = w_finite.reshape(cache.sizes)
    # collapse the broadcast tilde axes back to (U, X, Y, Z)
    wneg4 = wneg
    for i in reversed(range(len(sizes))):
        if i not in keep:
            wneg4 = np.take(wneg4, 0, axis=i)
    inf_mask4 = np.zeros(cache.sizes, dtype=bool)
    if inf_cells.size:
        flat = np.zeros(int(np.prod(cache.sizes)), dtype=bool)
        flat[inf_cells] = True
        inf_mask4 = flat.reshape(cache.sizes)
        for i in reversed(range(len(sizes))):
            if i not in keep:
                inf_mask4 = np.take(inf_mask4, 0, axis=i)
    per_cell = cond * (logc + wneg4[None])
    bad = (cond > 0) & inf_mask4[None]
    contrib = (per_cell * p_uxy[None, ..., None]).sum(axis=-1)
    out = contrib.reshape(b - a, -1).sum(axis=1)
    if inf_cells.size:
        hit = (bad & (p_uxy[None, ..., None] > 0)).reshape(b - a, -1).any(axis=1)
        out = np.where(hit, np.inf, out)
    return out


def minimize_branch(cache: LatticeCache, rx: float, ry: float, delta: float,
                    law_marginals: dict, w: np.ndarray, weighting: str = "V",
                    threads: int = 1):
    """Exact lattice minimum of the branch objective.

    Returns (value, argmin_counts or None, any_feasible).  Ties resolve to
    the smallest enumeration index regardless of chunking or threads.
    """
    spec = cache.spec
    rhs = [(c.name, constraint_rhs(c.offset, rx, ry, delta))
           for c in spec.constraints]
    targets = []
    for subset, base in spec.marginal_eq:
        targets.append((tuple(subset), law_marginals[tuple(base)]))
    clamp_off = clamp_offset_value(spec.clamp_offset, rx, ry)
    alpha = spec.alpha_competitor is not None
    w_finite, inf_cells = channel_log_vector(spec, cache.sizes, w)
    p_uxy = None
    if weighting == "P":
        p_uxy = law_marginals[("U", "X", "Y")].reshape(
            tuple(cache.sizes[i] for i in _subset_axes(spec.labels, {"U", "X", "Y"}))
        )
    ranges = [(a, min(a + _EVAL_CHUNK, cache.total))
              for a in range(0, cache.total, _EVAL_CHUNK)]

    def run(rg):
        return _chunk_value(cache, rg[0], rg[1], rhs, targets, alpha,
                            w_finite, inf_cells, clamp_off, weighting, p_uxy)

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, ranges))
    else:
        results = [run(rg) for rg in ranges]

    best_val, best_idx, any_feas = math.inf, -1, False
    for val, idx, feas in results:
        any_feas = any_feas or feas
        if val < best_val:
            best_val, best_idx = val, idx
    if best_idx >= 0 and math.isinf(best_val):
        best_idx = -1
    argmin = cache.counts[best_idx] if best_idx >= 0 else None
    return best_val, argmin, any_feas
