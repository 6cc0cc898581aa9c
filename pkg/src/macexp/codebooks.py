"""Constant-composition codebook pairs, packing tallies, and expurgation.

Codewords are drawn uniformly from a conditional type class around a shared
time-sharing sequence, so every word has the exact same joint type with it.
Packing reports tally, for each realized joint type, how often confusable
patterns occur:

* ``pair``      the transmitted pair (u, x_i, y_j),
* ``triple_x``  the pair plus a wrong X word x_k, k != i,
* ``triple_y``  the pair plus a wrong Y word y_l, l != j,
* ``quad``      the pair plus a wrong word from each book.

A tally is compared against 2^(-n (F - offset - c * delta)) where F is the
family's packing exponent and c its delta coefficient; reports carry the
exact tallies as fractions plus the smallest delta that would satisfy each
family.  ``expurgate`` halves the higher-rate book four times (one family
per stage, worst offenders dropped) which trades a factor 16 in size for
per-pair guarantees; ``audit_confusability`` then re-checks every realized
competitor type against the rate-constraint family used by the exponent
minimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConstructionError, ValidationError
from .exponents import (
    InputLaw,
    RatePair,
    confusability_feasible,
    packing_exponent_pair,
    packing_exponent_x,
    packing_exponent_xy,
    packing_exponent_y,
)
from .probability import Alphabet, conditional_mutual_information
from .typeclasses import (
    SymbolSequence,
    TypeVector,
    empirical_type,
    sample_conditional_type_class,
)

FAMILY_ORDER = ("pair", "triple_x", "triple_y", "quad")
AVG_DELTA_COEFF = {"pair": 2, "triple_x": 3, "triple_y": 3, "quad": 4}
PAIR_DELTA_COEFF = {"pair": 3, "triple_x": 4, "triple_y": 4, "quad": 5}


def _as_int_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim != 2 or not np.issubdtype(arr.dtype, np.integer):
        raise ValidationError(f"{name} must be a 2-D integer array")
    out = arr.astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CodebookPair:
    """Two constant-composition books sharing one time-sharing sequence."""

    u_seq: np.ndarray          # (n,)
    x_book: np.ndarray         # (m_x, n)
    y_book: np.ndarray         # (m_y, n)
    u_alphabet: Alphabet
    x_alphabet: Alphabet
    y_alphabet: Alphabet
    p_ux: TypeVector           # target joint type of (u, x word)
    p_uy: TypeVector

    def __post_init__(self) -> None:
        u = np.asarray(self.u_seq)
        if u.ndim != 1 or not np.issubdtype(u.dtype, np.integer):
            raise ValidationError("u_seq must be a 1-D integer array")
        u = u.astype(np.int64)
        u.setflags(write=False)
        object.__setattr__(self, "u_seq", u)
        object.__setattr__(self, "x_book", _as_int_matrix(self.x_book, "x_book"))
        object.__setattr__(self, "y_book", _as_int_matrix(self.y_book, "y_book"))
        n = u.size
        if n == 0:
            raise ValidationError("blocklength must be positive")
        for book, alph, name in ((self.x_book, self.x_alphabet, "x_book"),
                                 (self.y_book, self.y_alphabet, "y_book")):
            if book.shape[0] == 0 or book.shape[1] != n:
                raise ValidationError(f"{name} must be nonempty with row length {n}")
            if book.min() < 0 or book.max() >= alph.size:
                raise ValidationError(f"{name} contains symbols outside its alphabet")
        if u.min() < 0 or u.max() >= self.u_alphabet.size:
            raise ValidationError("u_seq contains symbols outside its alphabet")
        for book, target, name in ((self.x_book, self.p_ux, "x_book"),
                                   (self.y_book, self.p_uy, "y_book")):
            if target.n != n:
                raise ValidationError(f"target type for {name} has wrong blocklength")
            rows = {row.tobytes() for row in book}
            if len(rows) != book.shape[0]:
                raise ValidationError(f"{name} has duplicate codewords")
            su = self.u_alphabet.size
            s2 = target.counts.size // su
            for r in range(book.shape[0]):
                got = np.bincount(u * s2 + book[r], minlength=su * s2)
                if not np.array_equal(got, target.counts.ravel()):
                    raise ValidationError(
                        f"{name} row {r} does not have the target joint type"
                    )

    @property
    def n(self) -> int:
        return int(self.u_seq.size)

    @property
    def m_x(self) -> int:
        return int(self.x_book.shape[0])

    @property
    def m_y(self) -> int:
        return int(self.y_book.shape[0])

    @property
    def rates(self) -> RatePair:
        return RatePair(math.log2(self.m_x) / self.n, math.log2(self.m_y) / self.n)

    def input_law(self) -> InputLaw:
        """The (U, X, Y) product law realized by the books' exact types."""
        su, sx = self.u_alphabet.size, self.x_alphabet.size
        sy = self.y_alphabet.size
        cux = self.p_ux.counts.reshape(su, sx).astype(np.float64)
        cuy = self.p_uy.counts.reshape(su, sy).astype(np.float64)
        nu = cux.sum(axis=1)
        safe = np.where(nu > 0, nu, 1.0)
        px = cux / safe[:, None]
        py = cuy / safe[:, None]
        px[nu == 0] = 1.0 / sx
        py[nu == 0] = 1.0 / sy
        return InputLaw.from_components(nu / self.n, px, py)

    def restrict(self, x_rows, y_rows) -> "CodebookPair":
        return CodebookPair(self.u_seq, self.x_book[list(x_rows)],
                            self.y_book[list(y_rows)], self.u_alphabet,
                            self.x_alphabet, self.y_alphabet, self.p_ux, self.p_uy)


def _conditional_class_size(p_joint: TypeVector) -> int:
    su = p_joint.axes[0].size
    counts = p_joint.counts.reshape(su, -1)
    total = 1
    for u in range(su):
        row = counts[u]
        size = math.factorial(int(row.sum()))
        for c in row:
            size //= math.factorial(int(c))
        total *= size
    return total


def generate_codebooks(p_ux: TypeVector, p_uy: TypeVector, u_seq: SymbolSequence,
                       m_x: int, m_y: int, rng, max_draws: int | None = None
                       ) -> CodebookPair:
    """Draw two books of distinct words uniformly from conditional classes.

    Duplicates are resampled; the draw budget defaults to 50 per requested
    word plus 1000.  Books larger than the conditional type class raise
    ConstructionError immediately.
    """
    if m_x < 1 or m_y < 1:
        raise ValidationError("book sizes must be >= 1")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    u_arr = u_seq.array()
    for target, m, name in ((p_ux, m_x, "x"), (p_uy, m_y, "y")):
        if target.axes[0].size != u_seq.alphabet.size:
            raise ValidationError(f"p_u{name}: U alphabet size mismatch")
        have = _conditional_class_size(target)
        if have < m:
            raise ConstructionError(
                f"conditional type class for the {name} book has only {have} "
                f"members, cannot hold {m} distinct words"
            )
    books = []
    for target, m in ((p_ux, m_x), (p_uy, m_y)):
        budget = max_draws if max_draws is not None else 50 * m + 1000
        seen: set[bytes] = set()
        rows: list[np.ndarray] = []
        draws = 0
        while len(rows) < m:
            if draws >= budget:
                raise ConstructionError(
                    f"resampling budget ({budget} draws) exhausted at "
                    f"{len(rows)}/{m} distinct words"
                )
            draws += 1
            word = sample_conditional_type_class(target, u_seq, rng).array()
            key = word.tobytes()
            if key in seen:
                continue
            seen.add(key)
            rows.append(word)
        books.append(np.stack(rows))
    return CodebookPair(u_arr, books[0], books[1], u_seq.alphabet,
                        p_ux.axes[1], p_uy.axes[1], p_ux, p_uy)


def _family_axes(pair: CodebookPair, family: str):
    u = pair.u_alphabet.relabel("U")
    x = pair.x_alphabet.relabel("X")
    y = pair.y_alphabet.relabel("Y")
    xt = pair.x_alphabet.relabel("X~")
    yt = pair.y_alphabet.relabel("Y~")
    return {
        "pair": (u, x, y),
        "triple_x": (u, x, y, xt),
        "triple_y": (u, x, y, yt),
        "quad": (u, x, y, xt, yt),
    }[family]


def _tally_family(pair: CodebookPair, family: str, x_rows, y_rows):
    """dict (i, j) -> dict type-key -> pattern count, competitor indices
    drawn from the same row sets."""
    sx, sy = pair.x_alphabet.size, pair.y_alphabet.size
    cells3 = pair.u_alphabet.size * sx * sy
    u = pair.u_seq
    out: dict[tuple[int, int], dict[tuple, int]] = {}
    for i in x_rows:
        xi = pair.x_book[i]
        for j in y_rows:
            b3 = (u * sx + xi) * sy + pair.y_book[j]
            d: dict[tuple, int] = {}
            if family == "pair":
                key = tuple(np.bincount(b3, minlength=cells3).tolist())
                d[key] = 1
            elif family == "triple_x":
                for k in x_rows:
                    if k == i:
                        continue
                    key = tuple(np.bincount(b3 * sx + pair.x_book[k],
                                            minlength=cells3 * sx).tolist())
                    d[key] = d.get(key, 0) + 1
            elif family == "triple_y":
                for l in y_rows:
                    if l == j:
                        continue
                    key = tuple(np.bincount(b3 * sy + pair.y_book[l],
                                            minlength=cells3 * sy).tolist())
                    d[key] = d.get(key, 0) + 1
            else:
                for k in x_rows:
                    if k == i:
                        continue
                    b4 = (b3 * sx + pair.x_book[k]) * sy
                    for l in y_rows:
                        if l == j:
                            continue
                        key = tuple(np.bincount(b4 + pair.y_book[l],
                                                minlength=cells3 * sx * sy).tolist())
                        d[key] = d.get(key, 0) + 1
            out[(i, j)] = d
    return out


def _family_f(pair: CodebookPair, family: str, key: tuple, rates: RatePair,
              cache: dict) -> float:
    if key in cache:
        return cache[key]
    axes = _family_axes(pair, family)
    shape = tuple(a.size for a in axes)
    joint = TypeVector(axes, np.asarray(key, dtype=np.int64).reshape(shape),
                       pair.n).to_joint()
    if family == "pair":
        f = packing_exponent_pair(joint)
    elif family == "triple_x":
        f = packing_exponent_x(joint, rates.rx)
    elif family == "triple_y":
        f = packing_exponent_y(joint, rates.ry)
    else:
        f = packing_exponent_xy(joint, rates.rx, rates.ry)
    cache[key] = f
    return f


@dataclass(frozen=True)
class TypeTallyEntry:
    key: tuple
    count: int
    lhs: Fraction
    f_value: float
    need_delta: float


@dataclass(frozen=True)
class FamilyReport:
    family: str
    delta_coeff: int
    rate_offset: float
    worst_need_delta: float
    entries: tuple[TypeTallyEntry, ...]


@dataclass(frozen=True)
class PackingReport:
    n: int
    rates: RatePair
    kind: str                     # "average" or "per_pair_max"
    families: dict[str, FamilyReport]

    def satisfied(self, delta: float, tol: float = 1e-12) -> bool:
        return all(rep.worst_need_delta <= delta + tol
                   for rep in self.families.values())


def _log2_fraction(fr: Fraction) -> float:
    return math.log2(fr.numerator) - math.log2(fr.denominator)


def _build_report(pair: CodebookPair, kind: str, rates: RatePair) -> PackingReport:
    n = pair.n
    x_rows = range(pair.m_x)
    y_rows = range(pair.m_y)
    families: dict[str, FamilyReport] = {}
    for family in FAMILY_ORDER:
        tally = _tally_family(pair, family, x_rows, y_rows)
        f_cache: dict = {}
        if kind == "average":
            coeff = AVG_DELTA_COEFF[family]
            offset = 0.0
            totals: dict[tuple, int] = {}
            for d in tally.values():
                for key, cnt in d.items():
                    totals[key] = totals.get(key, 0) + cnt
            denom = pair.m_x * pair.m_y
            items = [(key, cnt, Fraction(cnt, denom)) for key, cnt in totals.items()]
        else:
            coeff = AVG_DELTA_COEFF[family]
            offset = rates.rx + rates.ry
            peaks: dict[tuple, int] = {}
            for d in tally.values():
                for key, cnt in d.items():
                    if cnt > peaks.get(key, 0):
                        peaks[key] = cnt
            items = [(key, cnt, Fraction(cnt)) for key, cnt in peaks.items()]
        entries = []
        worst = -math.inf
        for key, cnt, lhs in sorted(items):
            f = _family_f(pair, family, key, rates, f_cache)
            need = (_log2_fraction(lhs) + n * (f - offset)) / (n * coeff)
            worst = max(worst, need)
            entries.append(TypeTallyEntry(key, cnt, lhs, f, need))
        families[family] = FamilyReport(family, coeff, offset, worst, tuple(entries))
    return PackingReport(n, rates, kind, families)


def packing_averages(pair: CodebookPair) -> PackingReport:
    """Average tallies per type against 2^(-n (F - c delta)), c = 2,3,3,4."""
    return _build_report(pair, "average", pair.rates)


def per_pair_maxima(pair: CodebookPair) -> PackingReport:
    """Worst single-pair tallies against 2^(-n (F - Rx - Ry - c delta))."""
    return _build_report(pair, "per_pair_max", pair.rates)


@dataclass(frozen=True)
class StageReport:
    family: str
    book: str
    kept: tuple[int, ...]
    threshold_score: float


@dataclass(frozen=True)
class ExpurgationResult:
    final: CodebookPair
    kept_x: tuple[int, ...]
    kept_y: tuple[int, ...]
    expurgated_book: str
    stages: tuple[StageReport, ...]
    achieved_delta: dict[str, float]
    target_delta: float
    original_sizes: tuple[int, int]
    product_ok: bool


def _achieved_deltas(pair: CodebookPair, x_rows, y_rows, rates: RatePair
                     ) -> dict[str, float]:
    """Smallest delta validating every per-pair bound at min-rate offset."""
    n = pair.n
    offset = rates.lower
    out: dict[str, float] = {}
    for family in FAMILY_ORDER:
        coeff = PAIR_DELTA_COEFF[family]
        tally = _tally_family(pair, family, x_rows, y_rows)
        f_cache: dict = {}
        worst = 0.0
        for d in tally.values():
            for key, cnt in d.items():
                f = _family_f(pair, family, key, rates, f_cache)
                need = (math.log2(cnt) + n * (f - offset)) / (n * coeff)
                worst = max(worst, need)
        out[family] = worst
    return out


def expurgate(pair: CodebookPair, delta: float) -> ExpurgationResult:
    """Halve one book four times, once per packing family.

    The book whose own rate is larger is the one expurgated (ties fall to
    the Y book): the surviving per-pair bounds then carry the smaller
    rate as their offset, which is the tighter of the two choices.
    Scoring is deterministic: a word's score in a family is the largest
    delta needed to validate any per-pair bound it participates in, with
    competitor tallies taken over the original books; the best-scoring
    ceil(M/2) words survive each stage (ties keep lower indices).  Rates
    and offsets refer to the original sizes throughout.  Returns the final
    books, stage logs, and the delta each family actually achieves.
    """
    if delta < 0.0:
        raise ValidationError("delta must be >= 0")
    rates = pair.rates
    full_x = tuple(range(pair.m_x))
    full_y = tuple(range(pair.m_y))
    start = _achieved_deltas(pair, full_x, full_y, rates)
    base = dict(final=pair, kept_x=full_x, kept_y=full_y,
                target_delta=delta, original_sizes=(pair.m_x, pair.m_y))
    if max(start.values()) <= delta:
        return ExpurgationResult(stages=(), achieved_delta=start,
                                 expurgated_book="none", product_ok=True, **base)

    score_y = rates.rx <= rates.ry
    book = "Y" if score_y else "X"
    if (pair.m_y if score_y else pair.m_x) < 2:
        return ExpurgationResult(stages=(), achieved_delta=start,
                                 expurgated_book=book, product_ok=True, **base)

    order = (("pair", "triple_x", "triple_y", "quad") if score_y
             else ("pair", "triple_y", "triple_x", "quad"))
    n, offset = pair.n, rates.lower
    active = list(range(pair.m_y if score_y else pair.m_x))
    stages = []
    for family in order:
        coeff = PAIR_DELTA_COEFF[family]
        tally = _tally_family(pair, family, full_x, full_y)
        f_cache: dict = {}
        scores = []
        for w in active:
            worst = 0.0
            others = full_x if score_y else full_y
            for o in others:
                ij = (o, w) if score_y else (w, o)
                for key, cnt in tally[ij].items():
                    f = _family_f(pair, family, key, rates, f_cache)
                    need = (math.log2(cnt) + n * (f - offset)) / (n * coeff)
                    worst = max(worst, need)
            scores.append(worst)
        keep_count = (len(active) + 1) // 2
        ranking = np.argsort(np.asarray(scores), kind="stable")
        kept = sorted(active[t] for t in ranking[:keep_count])
        stages.append(StageReport(family, book, tuple(kept),
                                  float(scores[ranking[keep_count - 1]])))
        active = kept

    kept_x = full_x if score_y else tuple(active)
    kept_y = tuple(active) if score_y else full_y
    final = pair.restrict(kept_x, kept_y)
    achieved = _achieved_deltas(pair, kept_x, kept_y, rates)
    product_ok = 16 * len(kept_x) * len(kept_y) >= pair.m_x * pair.m_y
    return ExpurgationResult(final=final, kept_x=kept_x, kept_y=kept_y,
                             expurgated_book=book, stages=tuple(stages),
                             achieved_delta=achieved, target_delta=delta,
                             original_sizes=(pair.m_x, pair.m_y),
                             product_ok=product_ok)


@dataclass(frozen=True)
class AuditViolation:
    pattern: str
    example: tuple
    constraint: str
    lhs: float
    rhs: float


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    pattern_counts: dict[str, int]
    distinct_types: dict[str, int]
    violations: tuple[AuditViolation, ...]


def audit_confusability(pair: CodebookPair, rates: RatePair, delta: float,
                        law: InputLaw | None = None) -> AuditReport:
    """Check every realized competitor joint type against the exponent
    engine's rate-constraint family.

    Patterns sharing a joint type are checked once.  The default law is
    the one the books realize exactly, so marginal pinning holds by
    construction and any violation is a genuine rate-constraint failure.
    """
    if law is None:
        law = pair.input_law()
    x_rows = range(pair.m_x)
    y_rows = range(pair.m_y)
    violations = []
    pattern_counts: dict[str, int] = {}
    distinct: dict[str, int] = {}
    for family in FAMILY_ORDER:
        tally = _tally_family(pair, family, x_rows, y_rows)
        reps: dict[tuple, tuple] = {}
        total = 0
        for ij, d in tally.items():
            for key, cnt in d.items():
                total += cnt
                if key not in reps:
                    reps[key] = ij
        pattern_counts[family] = total
        distinct[family] = len(reps)
        axes = _family_axes(pair, family)
        shape = tuple(a.size for a in axes)
        for key, ij in sorted(reps.items()):
            joint = TypeVector(axes, np.asarray(key, dtype=np.int64).reshape(shape),
                               pair.n).to_joint()
            feasible, viols = confusability_feasible(joint, law, rates, delta)
            if not feasible:
                for v in viols:
                    violations.append(AuditViolation(family, ij, v.name,
                                                     v.lhs, v.rhs))
    return AuditReport(len(violations) == 0, pattern_counts, distinct,
                       tuple(violations))


@dataclass(frozen=True)
class SingleUserReport:
    n: int
    rate: float
    avg_worst_need_delta: float
    per_word_worst_need_delta: float
    avg_entries: tuple[TypeTallyEntry, ...]

    def satisfied(self, delta: float, tol: float = 1e-12) -> bool:
        return (self.avg_worst_need_delta <= delta + tol
                and self.per_word_worst_need_delta <= delta + tol)


def single_user_packing_check(u_seq: SymbolSequence, book: np.ndarray,
                              alphabet: Alphabet, p_joint: TypeVector
                              ) -> SingleUserReport:
    """Packing tallies for one book against its own wrong words.

    For each realized (U, X, X~) type with I = I(X; X~ | U): the average
    over words i of #{k != i with that type} is compared to
    2^(-n (I - R - 2 delta)), the per-word maximum to
    2^(-n (I - 2R - 3 delta)).
    """
    book = _as_int_matrix(book, "book")
    m, n = book.shape
    if m < 1 or n != u_seq.array().size:
        raise ValidationError("book shape does not match the shared sequence")
    rate = math.log2(m) / n
    u = u_seq.array()
    s = alphabet.size
    su = u_seq.alphabet.size
    cells = su * s * s
    totals: dict[tuple, int] = {}
    peaks: dict[tuple, int] = {}
    for i in range(m):
        b2 = (u * s + book[i]) * s
        per: dict[tuple, int] = {}
        for k in range(m):
            if k == i:
                continue
            key = tuple(np.bincount(b2 + book[k], minlength=cells).tolist())
            per[key] = per.get(key, 0) + 1
        for key, cnt in per.items():
            totals[key] = totals.get(key, 0) + cnt
            if cnt > peaks.get(key, 0):
                peaks[key] = cnt
    axes = (u_seq.alphabet.relabel("U"), alphabet.relabel("X"),
            alphabet.relabel("X~"))
    shape = (su, s, s)
    entries = []
    avg_worst = 0.0
    peak_worst = 0.0
    for key in sorted(totals):
        joint = TypeVector(axes, np.asarray(key, dtype=np.int64).reshape(shape),
                           n).to_joint()
        info = conditional_mutual_information(joint, ("X",), ("X~",), ("U",))
        lhs = Fraction(totals[key], m)
        avg_need = (_log2_fraction(lhs) + n * (info - rate)) / (n * 2)
        peak_need = (math.log2(peaks[key]) + n * (info - 2 * rate)) / (n * 3)
        avg_worst = max(avg_worst, avg_need)
        peak_worst = max(peak_worst, peak_need)
        entries.append(TypeTallyEntry(key, totals[key], lhs, info, avg_need))
    return SingleUserReport(n, rate, avg_worst, peak_worst, tuple(entries))
