"""Expurgated and baseline error exponents, pentagons, and the rate region.

The expurgated bound is a minimum over three branches (wrong X word,
wrong Y word, both wrong).  Each branch minimizes

    D(V_{Z|XYU} || W | V_XYU)  +  I_V(X;Y|U)  +  | clamp(V) - rates |+

over joint laws V whose marginals match the code's input law and whose
mutual-information profile is one a good expurgated code can realize,
restricted further by the decoder condition that the transmitted pair's
equivocation weakly exceeds the competitor's.  The baseline drops the
competitor coupling and keeps only the relaxed constraint set, which makes
it provably no larger than the expurgated value on a shared lattice.

Minimization is exact over the denominator-d type lattice (see
``lattice``), augmented with zero-divergence anchor candidates of the form
"input law x channel" with the competitor word either an independent fresh
copy or an exact duplicate of the true one.  The duplicate anchor is the
one that realizes value 0 once both rates exceed the alphabet entropies;
anchors are feasibility-tested like any other candidate and never bypass a
constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import ValidationError
from .lattice import (
    ALPHA_TOL,
    BASELINE_SPECS,
    BRANCH_SPECS,
    CONFUSABILITY_CONSTRAINTS,
    RATE_TOL,
    ZERO_SNAP,
    BranchSpec,
    MITerm,
    clamp_offset_value,
    constraint_rhs,
    get_cache,
    minimize_branch,
)
from .probability import (
    EQ_TOL,
    Alphabet,
    Channel,
    JointDist,
    conditional_entropy,
    conditional_mutual_information,
    joint_from_law_and_channel,
    marginalize,
)
from .typeclasses import compositions_array


@dataclass(frozen=True)
class RatePair:
    rx: float
    ry: float

    def __post_init__(self) -> None:
        if not (self.rx >= 0.0 and self.ry >= 0.0):
            raise ValidationError("rates must be nonnegative")

    @property
    def lower(self) -> float:
        return min(self.rx, self.ry)


@dataclass(frozen=True)
class SolverSpec:
    """How branch minima are computed."""

    lattice_denominator: int = 4
    refine: bool = False
    refine_steps: int = 0
    divergence_weighting: str = "V"  # weight D by the candidate V or by the law P
    max_cells: int | None = None
    max_denom: int | None = None

    def __post_init__(self) -> None:
        if self.lattice_denominator < 2:
            raise ValidationError("lattice_denominator must be >= 2")
        if self.divergence_weighting not in ("V", "P"):
            raise ValidationError("divergence_weighting must be 'V' or 'P'")
        if self.refine_steps < 0:
            raise ValidationError("refine_steps must be >= 0")


@dataclass(frozen=True)
class InputLaw:
    """Time-shared product input law P(u) P(x|u) P(y|u) as a (U,X,Y) joint.

    The conditional independence of the two senders given the shared
    variable is validated within EQ_TOL on construction.
    """

    joint: JointDist

    def __post_init__(self) -> None:
        if self.joint.labels != ("U", "X", "Y"):
            raise ValidationError(
                f"InputLaw joint must have axes ('U','X','Y'), got {self.joint.labels}"
            )
        p = self.joint.probs
        pu = p.sum(axis=(1, 2))
        for u in range(p.shape[0]):
            if pu[u] == 0.0:
                continue
            px = p[u].sum(axis=1) / pu[u]
            py = p[u].sum(axis=0) / pu[u]
            prod = pu[u] * px[:, None] * py[None, :]
            gap = np.abs(p[u] - prod)
            if gap.max() > EQ_TOL:
                x, y = np.unravel_index(int(np.argmax(gap)), gap.shape)
                raise ValidationError(
                    f"senders are not independent given U: cell (u={u}, x={x}, "
                    f"y={y}) deviates by {gap.max():.3e}"
                )

    @classmethod
    def from_components(cls, p_u, p_x_given_u, p_y_given_u,
                        u_label="U", x_label="X", y_label="Y") -> "InputLaw":
        pu = np.asarray(p_u, dtype=np.float64)
        px = np.asarray(p_x_given_u, dtype=np.float64)
        py = np.asarray(p_y_given_u, dtype=np.float64)
        if pu.ndim != 1 or px.ndim != 2 or py.ndim != 2:
            raise ValidationError("from_components: expected p_u 1-D, conditionals 2-D")
        if px.shape[0] != pu.size or py.shape[0] != pu.size:
            raise ValidationError("from_components: conditional row count != |U|")
        joint = pu[:, None, None] * px[:, :, None] * py[:, None, :]
        axes = (Alphabet(pu.size, u_label), Alphabet(px.shape[1], x_label),
                Alphabet(py.shape[1], y_label))
        return cls(JointDist(axes, joint))

    def u_size(self) -> int:
        return self.joint.axes[0].size

    def x_size(self) -> int:
        return self.joint.axes[1].size

    def y_size(self) -> int:
        return self.joint.axes[2].size

    def marginal_flat(self, labels: tuple[str, ...]) -> np.ndarray:
        return marginalize(self.joint, labels).probs.ravel()

    def conditionals(self):
        """(P_U, P_{X|U}, P_{Y|U}); zero-mass u rows get uniform rows."""
        p = self.joint.probs
        pu = p.sum(axis=(1, 2))
        safe = np.where(pu > 0.0, pu, 1.0)
        px = p.sum(axis=2) / safe[:, None]
        py = p.sum(axis=1) / safe[:, None]
        px[pu == 0.0] = 1.0 / self.x_size()
        py[pu == 0.0] = 1.0 / self.y_size()
        return pu, px, py


@dataclass(frozen=True)
class ExponentResult:
    value: float
    branch: str
    argmin: JointDist | None
    lattice_denominator: int
    delta: float
    feasible_empty: bool = False
    source: str = "lattice"


@dataclass(frozen=True)
class PackingExponents:
    """Exponents bounding how often confusable joint types occur in a good
    random code: the plain pair, wrong-X, wrong-Y and wrong-both cases."""

    pair: float
    x: float
    y: float
    xy: float


def _mi_value(v: JointDist, t: MITerm) -> float:
    return conditional_mutual_information(v, t.a, t.b, t.c)


def packing_exponent_pair(v: JointDist) -> float:
    return conditional_mutual_information(v, ("X",), ("Y",), ("U",))


def packing_exponent_x(v: JointDist, rx: float) -> float:
    return (conditional_mutual_information(v, ("X",), ("Y",), ("U",))
            + conditional_mutual_information(v, ("X~",), ("Y",), ("U",))
            + conditional_mutual_information(v, ("X~",), ("X",), ("U", "Y"))
            - rx)


def packing_exponent_y(v: JointDist, ry: float) -> float:
    return (conditional_mutual_information(v, ("X",), ("Y",), ("U",))
            + conditional_mutual_information(v, ("X",), ("Y~",), ("U",))
            + conditional_mutual_information(v, ("Y~",), ("Y",), ("U", "X"))
            - ry)


def packing_exponent_xy(v: JointDist, rx: float, ry: float) -> float:
    return (conditional_mutual_information(v, ("X",), ("Y",), ("U",))
            + conditional_mutual_information(v, ("X~",), ("Y~",), ("U",))
            + conditional_mutual_information(v, ("X~", "Y~"), ("X", "Y"), ("U",))
            - rx - ry)


def packing_exponents(v: JointDist, rates: RatePair) -> PackingExponents:
    """All four packing exponents of a five-axis (U,X,Y,X~,Y~) joint."""
    need = {"U", "X", "Y", "X~", "Y~"}
    if not need.issubset(set(v.labels)):
        raise ValidationError(f"packing_exponents: joint must carry axes {sorted(need)}")
    return PackingExponents(
        pair=packing_exponent_pair(v),
        x=packing_exponent_x(v, rates.rx),
        y=packing_exponent_y(v, rates.ry),
        xy=packing_exponent_xy(v, rates.rx, rates.ry),
    )


def pair_equivocation(v: JointDist) -> float:
    """H(X,Y | Z,U): the decoder's score for the pair carried by (X, Y)."""
    return conditional_entropy(v, ("X", "Y"), ("Z", "U"))


@dataclass(frozen=True)
class ConstraintViolation:
    name: str
    lhs: float
    rhs: float


def confusability_feasible(v: JointDist, p: InputLaw, rates: RatePair,
                           delta: float = 0.0, tol: float = EQ_TOL):
    """Check the rate-constraint family a realized confusable joint type
    must satisfy.

    ``v`` carries axes (U, X, Y) plus any subset of the competitor axes
    (X~, Y~); only the constraints whose variables are present are
    checked, alongside the marginal pinning of every present axis to the
    input law.  Returns (feasible, violations).
    """
    labels = set(v.labels)
    if not {"U", "X", "Y"}.issubset(labels):
        raise ValidationError("confusability check needs axes (U, X, Y)")
    violations: list[ConstraintViolation] = []

    pins = [(("U", "X"), ("U", "X")), (("U", "Y"), ("U", "Y"))]
    if "X~" in labels:
        pins.append((("U", "X~"), ("U", "X")))
    if "Y~" in labels:
        pins.append((("U", "Y~"), ("U", "Y")))
    for subset, base in pins:
        got = marginalize(v, subset).probs.ravel()
        want = p.marginal_flat(base)
        gap = float(np.abs(got - want).max())
        if gap > tol:
            violations.append(ConstraintViolation(f"marginal_{'_'.join(subset)}", gap, tol))

    for c in CONFUSABILITY_CONSTRAINTS:
        used = set()
        for t in c.terms:
            used |= set(t.a) | set(t.b) | set(t.c)
        if not used.issubset(labels):
            continue
        lhs = sum(_mi_value(v, t) for t in c.terms)
        rhs = constraint_rhs(c.offset, rates.rx, rates.ry, delta)
        if not lhs <= rhs + RATE_TOL:
            violations.append(ConstraintViolation(c.name, lhs, rhs))
    return (len(violations) == 0), violations


@dataclass(frozen=True)
class ObjectiveReport:
    value: float
    divergence: float
    mi_xy: float
    clamp: float
    feasible: bool
    violations: tuple[ConstraintViolation, ...]


def _divergence_term(v: JointDist, w: Channel, p: InputLaw | None,
                     weighting: str) -> float:
    vm = marginalize(v, ("U", "X", "Y", "Z"))
    probs = vm.probs  # axes (U, X, Y, Z) in branch label order
    if weighting == "V":
        lin = 0.0
        mask = probs > 0.0
        wb = np.broadcast_to(w.w[None], probs.shape)
        if np.any(wb[mask] == 0.0):
            return math.inf
        lin = float((probs[mask] * -np.log2(wb[mask])).sum())
        h = conditional_entropy(vm, ("Z",), ("U", "X", "Y"))
        return lin - h
    # weighting == "P": conditioning weights come from the law, the kernel
    # from V; zero-mass V cells contribute nothing (free conditional).
    law = p.joint.probs
    total = 0.0
    m_uxy = probs.sum(axis=3)
    for u in range(probs.shape[0]):
        for x in range(probs.shape[1]):
            for y in range(probs.shape[2]):
                mass = float(law[u, x, y])
                if mass == 0.0 or m_uxy[u, x, y] == 0.0:
                    continue
                cond = probs[u, x, y] / m_uxy[u, x, y]
                row = w.w[x, y]
                for z in range(cond.size):
                    if cond[z] == 0.0:
                        continue
                    if row[z] == 0.0:
                        return math.inf
                    total += mass * cond[z] * math.log2(cond[z] / row[z])
    return total


def branch_objective(spec: BranchSpec | str, v: JointDist, rates: RatePair,
                     w: Channel, p: InputLaw, delta: float = 0.0,
                     weighting: str = "V", marginal_tol: float = EQ_TOL
                     ) -> ObjectiveReport:
    """Scalar evaluation of one branch's objective and feasibility at V.

    The value is computed regardless of feasibility so results can be
    re-verified at reported argmins; violations list what fails.
    """
    if isinstance(spec, str):
        spec = BRANCH_SPECS.get(spec) or BASELINE_SPECS[spec.removeprefix("baseline_")]
    if v.labels != spec.labels:
        raise ValidationError(
            f"branch {spec.name}: expected axes {spec.labels}, got {v.labels}"
        )
    violations: list[ConstraintViolation] = []
    for subset, base in spec.marginal_eq:
        got = marginalize(v, subset).probs.ravel()
        want = p.marginal_flat(base)
        gap = float(np.abs(got - want).max())
        if gap > marginal_tol:
            violations.append(
                ConstraintViolation(f"marginal_{'_'.join(subset)}", gap, marginal_tol)
            )
    for c in spec.constraints:
        lhs = sum(_mi_value(v, t) for t in c.terms)
        rhs = constraint_rhs(c.offset, rates.rx, rates.ry, delta)
        if not lhs <= rhs + RATE_TOL:
            violations.append(ConstraintViolation(c.name, lhs, rhs))
    if spec.alpha_competitor is not None:
        diff = (pair_equivocation(v)
                - conditional_entropy(v, spec.alpha_competitor, ("Z", "U")))
        if not diff >= -ALPHA_TOL:
            violations.append(ConstraintViolation("equivocation_order", diff, -ALPHA_TOL))

    # every term is a divergence or mutual information, hence >= 0; clamp
    # away the ulp-scale negatives float cancellation can leave behind
    div = max(0.0, _divergence_term(v, w, p, weighting))
    mi = max(0.0, conditional_mutual_information(v, ("X",), ("Y",), ("U",)))
    clamp_base = sum(_mi_value(v, t) for t in spec.clamp_terms)
    clamp = max(0.0, clamp_base - clamp_offset_value(spec.clamp_offset,
                                                     rates.rx, rates.ry))
    value = div + mi + clamp
    if value < ZERO_SNAP:
        value = 0.0
    return ObjectiveReport(value, div, mi, clamp,
                           len(violations) == 0, tuple(violations))


def _place(a: np.ndarray, labs: tuple[str, ...], labels: tuple[str, ...]) -> np.ndarray:
    shape = [1] * len(labels)
    for dim, lab in enumerate(labs):
        shape[labels.index(lab)] = a.shape[dim]
    return a.reshape(shape)


def _anchor_joint(spec: BranchSpec, p: InputLaw, w: Channel, kind: str) -> JointDist:
    """Zero-divergence candidate: law x competitor copies x channel.

    kind 'fresh' draws each competitor axis independently from the same
    conditional law; kind 'diag' makes it an exact duplicate of the true
    word's axis.  'product' is the baseline variant without competitor
    axes.
    """
    labels = spec.labels
    u_ax, x_ax, y_ax = p.joint.axes
    _, px, py = p.conditionals()
    arr = _place(p.joint.probs, ("U", "X", "Y"), labels).astype(np.float64)
    axes = {lab: None for lab in labels}
    axes["U"], axes["X"], axes["Y"] = u_ax, x_ax, y_ax
    if "X~" in labels:
        axes["X~"] = x_ax.relabel("X~")
        if kind == "diag":
            arr = arr * _place(np.eye(x_ax.size), ("X", "X~"), labels)
        else:
            arr = arr * _place(px, ("U", "X~"), labels)
    if "Y~" in labels:
        axes["Y~"] = y_ax.relabel("Y~")
        if kind == "diag":
            arr = arr * _place(np.eye(y_ax.size), ("Y", "Y~"), labels)
        else:
            arr = arr * _place(py, ("U", "Y~"), labels)
    axes["Z"] = w.z_alphabet.relabel("Z")
    arr = arr * _place(w.w, ("X", "Y", "Z"), labels)
    return JointDist(tuple(axes[lab] for lab in labels), arr)


def _law_marginals(p: InputLaw) -> dict:
    return {
        ("U", "X"): p.marginal_flat(("U", "X")),
        ("U", "Y"): p.marginal_flat(("U", "Y")),
        ("U", "X", "Y"): p.joint.probs.ravel(),
    }


def _branch_sizes(spec: BranchSpec, p: InputLaw, w: Channel) -> tuple[int, ...]:
    if p.x_size() != w.x_alphabet.size or p.y_size() != w.y_alphabet.size:
        raise ValidationError("input law and channel alphabets disagree")
    by_label = {
        "U": p.u_size(), "X": p.x_size(), "Y": p.y_size(),
        "X~": p.x_size(), "Y~": p.y_size(), "Z": w.z_alphabet.size,
    }
    return tuple(by_label[lab] for lab in spec.labels)


def _counts_to_joint(spec: BranchSpec, counts: np.ndarray, sizes, d: int,
                     p: InputLaw, w: Channel) -> JointDist:
    u_ax, x_ax, y_ax = p.joint.axes
    by_label = {
        "U": u_ax, "X": x_ax, "Y": y_ax,
        "X~": x_ax.relabel("X~"), "Y~": y_ax.relabel("Y~"),
        "Z": w.z_alphabet.relabel("Z"),
    }
    axes = tuple(by_label[lab] for lab in spec.labels)
    return JointDist(axes, counts.astype(np.float64).reshape(sizes) / d)


def _refine_result(spec: BranchSpec, start: JointDist, start_value: float,
                   rates: RatePair, w: Channel, p: InputLaw, delta: float,
                   solver: SolverSpec) -> tuple[float, JointDist, bool]:
    """Greedy local descent around the lattice argmin.

    Steps of size 1/(4d) along cell-pair exchange directions projected
    onto the null space of the pinned-marginal map, so the argmin's
    realized marginals are preserved exactly; candidates are accepted only
    when they stay feasible and strictly improve the objective.
    """
    d = solver.lattice_denominator
    sizes = start.probs.shape
    cells = int(np.prod(sizes))
    rows = []
    for subset, _ in spec.marginal_eq:
        keep = tuple(i for i, lab in enumerate(spec.labels) if lab in subset)
        reduced = int(np.prod([sizes[i] for i in keep]))
        mat = np.zeros((reduced, cells))
        for flat in range(cells):
            multi = np.unravel_index(flat, sizes)
            r = np.ravel_multi_index(tuple(multi[i] for i in keep),
                                     tuple(sizes[i] for i in keep))
            mat[r, flat] = 1.0
        rows.append(mat)
    a_mat = np.concatenate(rows, axis=0)
    projector = np.eye(cells) - np.linalg.pinv(a_mat) @ a_mat

    step = 1.0 / (4.0 * d)
    vec = start.probs.ravel().copy()
    value = start_value
    improved_any = False
    for _ in range(solver.refine_steps):
        best = None
        for i in range(cells):
            for j in range(cells):
                if i == j:
                    continue
                direction = projector[:, i] - projector[:, j]
                peak = np.abs(direction).max()
                if peak < 1e-12:
                    continue
                cand = vec + direction * (step / peak)
                if cand.min() < -1e-12:
                    continue
                cand = np.clip(cand, 0.0, None)
                joint = JointDist(start.axes, cand.reshape(sizes))
                rep = branch_objective(spec, joint, rates, w, p, delta,
                                       solver.divergence_weighting,
                                       marginal_tol=0.5 / d + 1e-9)
                if rep.feasible and rep.value < value:
                    if best is None or rep.value < best[0]:
                        best = (rep.value, joint)
        if best is None:
            break
        value, start = best
        vec = start.probs.ravel().copy()
        improved_any = True
    return value, start, improved_any


def _solve_branch(spec: BranchSpec, rates: RatePair, w: Channel, p: InputLaw,
                  delta: float, solver: SolverSpec, anchor_kinds,
                  threads: int = 1) -> ExponentResult:
    if delta < 0.0:
        raise ValidationError("delta must be >= 0")
    sizes = _branch_sizes(spec, p, w)
    d = solver.lattice_denominator
    cache = get_cache(spec, sizes, d, max_cells=solver.max_cells,
                      max_denom=solver.max_denom)
    lm = _law_marginals(p)
    val, argmin_counts, any_feas = minimize_branch(
        cache, rates.rx, rates.ry, delta, lm, w.w,
        weighting=solver.divergence_weighting, threads=threads,
    )
    candidates: list[tuple[float, str, JointDist]] = []
    if argmin_counts is not None:
        candidates.append(
            (val, "lattice", _counts_to_joint(spec, argmin_counts, sizes, d, p, w))
        )
    elif any_feas:
        # feasible points exist but every objective is infinite
        candidates.append((math.inf, "lattice", None))
    for kind in anchor_kinds:
        joint = _anchor_joint(spec, p, w, kind)
        rep = branch_objective(spec, joint, rates, w, p, delta,
                               solver.divergence_weighting,
                               marginal_tol=0.5 / d)
        if rep.feasible:
            candidates.append((rep.value, f"anchor_{kind}", joint))

    if not candidates:
        return ExponentResult(math.inf, spec.name, None, d, delta,
                              feasible_empty=True)
    best_val, best_src, best_joint = candidates[0]
    for v2, s2, j2 in candidates[1:]:
        if v2 < best_val:
            best_val, best_src, best_joint = v2, s2, j2

    if solver.refine and solver.refine_steps > 0 and best_joint is not None \
            and math.isfinite(best_val):
        new_val, new_joint, moved = _refine_result(
            spec, best_joint, best_val, rates, w, p, delta, solver)
        if moved:
            best_val, best_joint, best_src = new_val, new_joint, "refined"

    return ExponentResult(best_val, spec.name, best_joint, d, delta,
                          feasible_empty=False, source=best_src)


def branch_exponent(branch: str, rates: RatePair, w: Channel, p: InputLaw,
                    delta: float = 0.0, solver: SolverSpec = SolverSpec(),
                    threads: int = 1) -> ExponentResult:
    """Exact lattice minimum of one expurgated branch objective."""
    if branch not in BRANCH_SPECS:
        raise ValidationError(f"branch must be one of {sorted(BRANCH_SPECS)}")
    return _solve_branch(BRANCH_SPECS[branch], rates, w, p, delta, solver,
                         anchor_kinds=("fresh", "diag"), threads=threads)


def expurgated_exponent(rates: RatePair, w: Channel, p: InputLaw,
                        delta: float = 0.0, solver: SolverSpec = SolverSpec(),
                        threads: int = 1) -> ExponentResult:
    """min over the three branches; ties resolve X, then Y, then XY."""
    best = None
    for name in ("X", "Y", "XY"):
        res = branch_exponent(name, rates, w, p, delta, solver, threads)
        if best is None or res.value < best.value:
            best = res
    return best


def baseline_branch_exponent(branch: str, rates: RatePair, w: Channel,
                             p: InputLaw, delta: float = 0.0,
                             solver: SolverSpec = SolverSpec(),
                             threads: int = 1) -> ExponentResult:
    if branch not in BASELINE_SPECS:
        raise ValidationError(f"branch must be one of {sorted(BASELINE_SPECS)}")
    res = _solve_branch(BASELINE_SPECS[branch], rates, w, p, delta, solver,
                        anchor_kinds=("product",), threads=threads)
    return ExponentResult(res.value, branch, res.argmin, res.lattice_denominator,
                          res.delta, res.feasible_empty, res.source)


def baseline_exponent(rates: RatePair, w: Channel, p: InputLaw,
                      delta: float = 0.0, solver: SolverSpec = SolverSpec(),
                      threads: int = 1) -> ExponentResult:
    """Relaxed reference exponent; never exceeds the expurgated value."""
    best = None
    for name in ("X", "Y", "XY"):
        res = baseline_branch_exponent(name, rates, w, p, delta, solver, threads)
        if best is None or res.value < best.value:
            best = res
    return best


@dataclass(frozen=True)
class Pentagon:
    """One achievable-rate pentagon: per-sender and sum-rate ceilings."""

    i_x: float
    i_y: float
    i_xy: float

    def __post_init__(self) -> None:
        if self.i_x < -1e-12 or self.i_y < -1e-12 or self.i_xy < -1e-12:
            raise ValidationError("pentagon bounds must be nonnegative")
        if max(self.i_x, self.i_y) > self.i_xy + 1e-9:
            raise ValidationError("pentagon: single-sender bound exceeds sum bound")
        if self.i_xy > self.i_x + self.i_y + 1e-9:
            raise ValidationError("pentagon: sum bound exceeds i_x + i_y")

    def contains(self, rates: RatePair) -> bool:
        return (rates.rx <= self.i_x and rates.ry <= self.i_y
                and rates.rx + rates.ry <= self.i_xy)


def capacity_pentagon(p: InputLaw, w: Channel) -> Pentagon:
    """Rate ceilings of one input law: I(X;Z|YU), I(Y;Z|XU), I(XY;Z|U)."""
    joint = joint_from_law_and_channel(p.joint, w)
    return Pentagon(
        i_x=conditional_mutual_information(joint, ("X",), ("Z",), ("Y", "U")),
        i_y=conditional_mutual_information(joint, ("Y",), ("Z",), ("X", "U")),
        i_xy=conditional_mutual_information(joint, ("X", "Y"), ("Z",), ("U",)),
    )


@dataclass(frozen=True)
class RegionWitness:
    found: bool
    pentagon: Pentagon | None
    input_law: InputLaw | None
    u_grid: int


def _simplex_grid(size: int, denom: int) -> np.ndarray:
    return compositions_array(size, denom).astype(np.float64) / denom


def region_contains(rates: RatePair, w: Channel, u_grid: int = 8) -> RegionWitness:
    """Grid search for an input law whose pentagon contains the rate pair.

    Mixtures use at most four time-sharing atoms, with atom weights and
    per-atom sender distributions both on a 1/u_grid grid.  This is an
    inner approximation: a found witness is a true member certificate, a
    miss only means the grid found nothing.
    """
    if u_grid < 1:
        raise ValidationError("u_grid must be >= 1")
    sx, sy = w.x_alphabet.size, w.y_alphabet.size
    if (rates.rx > math.log2(sx) or rates.ry > math.log2(sy)
            or rates.rx + rates.ry > math.log2(sx) + math.log2(sy)):
        return RegionWitness(False, None, None, u_grid)

    gx = _simplex_grid(sx, u_grid)
    gy = _simplex_grid(sy, u_grid)
    atoms = []
    vals = []
    for i in range(gx.shape[0]):
        for j in range(gy.shape[0]):
            law = InputLaw.from_components([1.0], gx[i:i + 1], gy[j:j + 1])
            pent = capacity_pentagon(law, w)
            atoms.append((i, j))
            vals.append((pent.i_x, pent.i_y, pent.i_xy))
    vals = np.asarray(vals)

    # only Pareto-maximal atoms can matter in a dominating mixture
    keep = []
    for k in range(vals.shape[0]):
        dominated = False
        for m in range(vals.shape[0]):
            if m == k:
                continue
            if np.all(vals[m] >= vals[k]) and np.any(vals[m] > vals[k]):
                dominated = True
                break
        if not dominated:
            keep.append(k)
    pvals = vals[keep]

    weights = compositions_array(4, u_grid).astype(np.float64) / u_grid
    target = np.asarray([rates.rx, rates.ry, rates.rx + rates.ry])
    for combo in combinations_with_replacement(range(len(keep)), 4):
        mix = weights @ pvals[list(combo)]
        ok = np.all(mix >= target[None, :], axis=1)
        if not ok.any():
            continue
        wsel = weights[int(np.argmax(ok))]
        support = [(float(wsel[s]), atoms[keep[combo[s]]])
                   for s in range(4) if wsel[s] > 0.0]
        pu = [m for m, _ in support]
        px = [gx[a[0]] for _, a in support]
        py = [gy[a[1]] for _, a in support]
        law = InputLaw.from_components(pu, np.asarray(px), np.asarray(py))
        return RegionWitness(True, capacity_pentagon(law, w), law, u_grid)
    return RegionWitness(False, None, None, u_grid)
