"""Finite probability primitives for two-sender channel analysis.

Everything here works in bits (base-2 logarithms) on dense numpy tensors.
Distributions are validated on construction: probabilities must be
nonnegative and sum to one.  A total mass within ``RENORM_TOL`` of one is
silently renormalized (accumulated float error from upstream arithmetic);
anything further off is rejected as a genuine mistake.

Joint distributions carry named axes.  All information measures
(conditional entropy, conditional mutual information, divergences) are
addressed by axis label so call sites read like the formulas they
implement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Tolerance ladder.  SUM_TOL is what stored tensors actually satisfy after
# construction; EQ_TOL is for semantic equality checks between quantities
# that are computed along different float paths; RENORM_TOL bounds how much
# drift the constructors will repair silently.
SUM_TOL = 1e-12
EQ_TOL = 1e-10
RENORM_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    """A finite symbol set ``{0, ..., size-1}`` with a display label."""

    size: int
    label: str

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValidationError(f"alphabet {self.label!r} must have size >= 1")
        if not self.label:
            raise ValidationError("alphabet label must be nonempty")

    def relabel(self, label: str) -> "Alphabet":
        """Same symbol set under a different axis label (e.g. a fresh copy
        of the X alphabet playing the competitor role X~)."""
        return Alphabet(self.size, label)


def _clean_probs(raw, shape, what: str) -> np.ndarray:
    p = np.asarray(raw, dtype=np.float64)
    if p.shape != shape:
        raise ValidationError(f"{what}: expected shape {shape}, got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{what}: non-finite entries")
    if np.any(p < 0.0):
        raise ValidationError(f"{what}: negative probability entries")
    total = float(p.sum())
    if abs(total - 1.0) > RENORM_TOL:
        raise ValidationError(f"{what}: total mass {total!r} is not 1")
    if total != 1.0:
        p = p / total
    p = np.ascontiguousarray(p)
    p.flags.writeable = False
    return p


@dataclass(frozen=True)
class Dist:
    """Probability distribution over a single alphabet."""

    alphabet: Alphabet
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "probs", _clean_probs(self.probs, (self.alphabet.size,), "Dist")
        )

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])


@dataclass(frozen=True)
class JointDist:
    """Probability distribution over a product of labeled alphabets."""

    axes: tuple[Alphabet, ...]
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        labels = [a.label for a in self.axes]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate axis labels {labels}")
        shape = tuple(a.size for a in self.axes)
        object.__setattr__(self, "probs", _clean_probs(self.probs, shape, "JointDist"))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.label for a in self.axes)

    def axis_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"no axis {label!r}; joint has {self.labels}"
            ) from None

    def _axis_indices(self, labels) -> tuple[int, ...]:
        idx = tuple(self.axis_index(l) for l in labels)
        if len(set(idx)) != len(idx):
            raise ValidationError(f"repeated axis labels in {tuple(labels)}")
        return idx


def marginalize(joint: JointDist, keep) -> JointDist:
    """Marginal of ``joint`` over the axes whose labels are in ``keep``.

    The kept axes stay in the order they have in ``joint`` regardless of
    the order given.  Keeping every axis returns an equal joint; keeping
    none yields the zero-axis distribution with scalar mass 1.
    """
    keep = tuple(keep)
    keep_idx = set(joint._axis_indices(keep))
    drop = tuple(i for i in range(len(joint.axes)) if i not in keep_idx)
    probs = joint.probs.sum(axis=drop) if drop else joint.probs
    axes = tuple(a for i, a in enumerate(joint.axes) if i in keep_idx)
    return JointDist(axes, probs)


def _entropy_of_probs(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def entropy(dist) -> float:
    """Shannon entropy in bits of a Dist or of a whole JointDist."""
    if isinstance(dist, Dist):
        return _entropy_of_probs(dist.probs)
    if isinstance(dist, JointDist):
        return _entropy_of_probs(dist.probs.ravel())
    raise ValidationError(f"entropy expects Dist or JointDist, got {type(dist)}")


def conditional_entropy(joint: JointDist, target, given=()) -> float:
    """H(target | given) in bits, computed as H(target, given) - H(given)."""
    target = tuple(target)
    given = tuple(given)
    joint._axis_indices(target + given)  # validates disjointness
    h_both = entropy(marginalize(joint, target + given))
    if not given:
        return h_both
    return h_both - entropy(marginalize(joint, given))


def conditional_mutual_information(joint: JointDist, a, b, c=()) -> float:
    """I(a ; b | c) in bits.  ``c`` may be empty for plain mutual information."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    joint._axis_indices(a + b + c)  # validates disjointness
    return conditional_entropy(joint, a, c) - conditional_entropy(joint, a, b + c)


def kl_divergence(p: Dist, q: Dist) -> float:
    """D(p || q) in bits; +inf when p puts mass where q has none."""
    if p.alphabet.size != q.alphabet.size:
        raise ValidationError("kl_divergence: alphabet size mismatch")
    return _kl_rows(p.probs, q.probs)


def _kl_rows(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        return math.inf
    ps = p[mask]
    return float((ps * np.log2(ps / q[mask])).sum())


@dataclass(frozen=True)
class Channel:
    """Stochastic map from sender pairs (x, y) to receiver symbols z.

    ``w[x, y, z]`` is the probability of output z on inputs (x, y).  Rows
    are validated like distributions (renormalized within RENORM_TOL).
    """

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    z_alphabet: Alphabet
    w: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        shape = (self.x_alphabet.size, self.y_alphabet.size, self.z_alphabet.size)
        w = np.asarray(self.w, dtype=np.float64)
        if w.shape != shape:
            raise ValidationError(f"Channel: expected w shape {shape}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("Channel: non-finite entries")
        if np.any(w < 0.0):
            raise ValidationError("Channel: negative entries")
        sums = w.sum(axis=2)
        if np.any(np.abs(sums - 1.0) > RENORM_TOL):
            bad = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
            raise ValidationError(
                f"Channel: row {bad} sums to {sums[bad]!r}, not 1"
            )
        w = w / sums[:, :, None]
        w = np.ascontiguousarray(w)
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    def row(self, x: int, y: int) -> np.ndarray:
        return self.w[x, y]


def conditional_kl_divergence(v: Channel, w: Channel, p) -> float:
    """D(v || w | p): p-weighted divergence between channel rows, in bits.

    ``p`` may be a JointDist whose axes include the channel input labels
    (extra axes, e.g. a time-sharing variable the channels ignore, are
    marginalized away) or a plain 2-D JointDist over (x, y).
    """
    for a, b in ((v.x_alphabet, w.x_alphabet), (v.y_alphabet, w.y_alphabet),
                 (v.z_alphabet, w.z_alphabet)):
        if a.size != b.size:
            raise ValidationError("conditional_kl_divergence: alphabet mismatch")
    if not isinstance(p, JointDist):
        raise ValidationError("conditional_kl_divergence: p must be a JointDist")
    xl, yl = v.x_alphabet.label, v.y_alphabet.label
    pxy = marginalize(p, (xl, yl))
    # marginalize preserves the joint's own axis order, which may be (y, x)
    if pxy.labels != (xl, yl):
        probs = np.transpose(pxy.probs, (pxy.labels.index(xl), pxy.labels.index(yl)))
    else:
        probs = pxy.probs
    total = 0.0
    for x in range(v.x_alphabet.size):
        for y in range(v.y_alphabet.size):
            mass = float(probs[x, y])
            if mass == 0.0:
                continue
            d = _kl_rows(v.w[x, y], w.w[x, y])
            if d == math.inf:
                return math.inf
            total += mass * d
    return total


def product_channel_likelihood(w: Channel, x_seq, y_seq, z_seq) -> float:
    """Probability of the output word under memoryless use of the channel."""
    x = np.asarray(x_seq, dtype=np.intp)
    y = np.asarray(y_seq, dtype=np.intp)
    z = np.asarray(z_seq, dtype=np.intp)
    if not (len(x) == len(y) == len(z)) or len(x) == 0:
        raise ValidationError("product_channel_likelihood: equal nonzero lengths required")
    for arr, alph in ((x, w.x_alphabet), (y, w.y_alphabet), (z, w.z_alphabet)):
        if arr.min() < 0 or arr.max() >= alph.size:
            raise ValidationError(
                f"product_channel_likelihood: symbol out of range for {alph.label}"
            )
    return float(np.prod(w.w[x, y, z]))


def joint_from_law_and_channel(law_joint: JointDist, w: Channel,
                               z_label: str = "Z") -> JointDist:
    """Extend a (U, X, Y) input joint by the channel: P(u,x,y) * W(z|x,y)."""
    if len(law_joint.axes) != 3:
        raise ValidationError("expected a three-axis (U, X, Y) joint")
    u_ax, x_ax, y_ax = law_joint.axes
    if x_ax.size != w.x_alphabet.size or y_ax.size != w.y_alphabet.size:
        raise ValidationError("input law does not match channel alphabets")
    probs = law_joint.probs[:, :, :, None] * w.w[None, :, :, :]
    return JointDist((u_ax, x_ax, y_ax, w.z_alphabet.relabel(z_label)), probs)
