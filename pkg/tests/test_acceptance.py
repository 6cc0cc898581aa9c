"""Acceptance gate: nine criteria, each printing one PASS or FAIL line.

Every criterion is checked at its stated tolerance and runtime budget.
The oracle comparisons use the brute-force reimplementations under
tests/, which share no solver or tally machinery with the package.
"""

import math
import time

import numpy as np

import tally_oracle as to
from exhaustive_oracle import oracle_branch_min, oracle_expurgated
from helpers import (
    UNIFORM_COMPONENTS,
    binary_codebooks,
    identity_channel,
    random_channel,
    uniform_law,
    xor_bsc,
)
from macexp import Alphabet
from macexp.cli import main
from macexp.codebooks import FAMILY_ORDER, audit_confusability, expurgate
from macexp.exponents import (
    RatePair,
    SolverSpec,
    baseline_exponent,
    branch_exponent,
    expurgated_exponent,
)
from macexp.fileio import (
    channel_to_dict,
    codebook_to_dict,
    law_to_dict,
    save_json,
)
from macexp.probability import (
    Dist,
    JointDist,
    conditional_entropy,
    conditional_mutual_information,
    kl_divergence,
)
from macexp.simulate import error_prob_exact, error_prob_mc
from macexp.typeclasses import enumerate_types, type_class_size

D4 = SolverSpec(lattice_denominator=4)
D6 = SolverSpec(lattice_denominator=6)


def _verdict(num: int, desc: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {desc} ({detail})"
    print("\n" + line, flush=True)
    assert ok, line


def _same(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= 1e-12


def _nested(w) -> list:
    return [[list(map(float, w.w[x, y])) for y in range(w.y_alphabet.size)]
            for x in range(w.x_alphabet.size)]


def test_criterion_1_engine_matches_exhaustive_oracle():
    t0 = time.time()
    law = uniform_law()
    pairs = [(0.2, 0.2), (0.5, 0.8), (0.8, 0.5), (1.1, 1.1)]
    bad = []
    for seed in range(5):
        w = random_channel(np.random.default_rng(100 + seed))
        wn = _nested(w)
        for rx, ry in pairs:
            rates = RatePair(rx, ry)
            for br in ("X", "Y", "XY"):
                got = branch_exponent(br, rates, w, law, 0.0, D4).value
                want, _ = oracle_branch_min(br, 4, (rx, ry), wn,
                                            UNIFORM_COMPONENTS)
                if not _same(got, want):
                    bad.append((seed, rx, ry, br, got, want))
            got = expurgated_exponent(rates, w, law, 0.0, D4).value
            want = oracle_expurgated(4, (rx, ry), wn, UNIFORM_COMPONENTS)
            if not _same(got, want):
                bad.append((seed, rx, ry, "ex", got, want))
    elapsed = time.time() - t0
    ok = not bad and elapsed < 120.0
    _verdict(1, "branch and combined exponents match the exhaustive "
             "enumeration oracle at d=4", ok,
             f"{len(bad)} mismatches, {elapsed:.1f}s of 120s")


def test_criterion_2_expurgated_dominates_baseline():
    t0 = time.time()
    law = uniform_law()
    grid = [(a, b) for a in (0.2, 0.6, 1.0) for b in (0.2, 0.6, 1.0)]
    bad = []
    for seed in range(20):
        w = random_channel(np.random.default_rng(200 + seed))
        for rx, ry in grid:
            rates = RatePair(rx, ry)
            ex = expurgated_exponent(rates, w, law, 0.0, D6).value
            base = baseline_exponent(rates, w, law, 0.0, D6).value
            if not ex >= base - 1e-9:
                bad.append((seed, rx, ry, ex, base))
    elapsed = time.time() - t0
    ok = not bad and elapsed < 300.0
    _verdict(2, "expurgated exponent dominates the baseline on identical "
             "d=6 lattices", ok,
             f"{len(bad)} violations over 180 cells, {elapsed:.1f}s of 300s")


def test_criterion_3_high_rates_give_exact_zero():
    law = uniform_law()
    channels = [xor_bsc(0.1), random_channel(np.random.default_rng(7))]
    t0 = time.time()
    values = [expurgated_exponent(RatePair(2.0, 2.0), ch, law, 0.0, D4).value
              for ch in channels]
    elapsed = time.time() - t0
    ok = all(v == 0.0 for v in values) and elapsed < 1.0
    _verdict(3, "rates (2.0, 2.0) on binary-input channels give an exact "
             "zero", ok, f"values {values}, {elapsed:.3f}s of 1s")


def test_criterion_4_exponent_is_monotone_in_each_rate():
    t0 = time.time()
    law = uniform_law()
    grid = [0.3, 0.6, 0.9, 1.2]
    bad = []
    for seed in range(5):
        w = random_channel(np.random.default_rng(300 + seed))
        vals = {(rx, ry): expurgated_exponent(RatePair(rx, ry), w, law,
                                              0.0, D4).value
                for rx in grid for ry in grid}
        for i in range(3):
            for j in range(4):
                if vals[(grid[i + 1], grid[j])] > vals[(grid[i], grid[j])] + 1e-9:
                    bad.append((seed, "rx", grid[i], grid[j]))
                if vals[(grid[j], grid[i + 1])] > vals[(grid[j], grid[i])] + 1e-9:
                    bad.append((seed, "ry", grid[j], grid[i]))
    elapsed = time.time() - t0
    ok = not bad
    _verdict(4, "expurgated exponent is nonincreasing along each rate axis "
             "on a 4x4 grid", ok, f"{len(bad)} violations, {elapsed:.1f}s")


def test_criterion_5_expurgation_outcome_audit():
    t0 = time.time()
    pair = binary_codebooks(8, 8, 8, seed=20240817)
    res = expurgate(pair, 0.0)
    achieved = max(res.achieved_delta.values())
    product_ok = (res.product_ok
                  and 16 * res.final.m_x * res.final.m_y >= 64)
    r = pair.rates
    recount = to.achieved_deltas(pair, res.kept_x, res.kept_y, r.rx, r.ry)
    per_pair_ok = all(recount[f] <= achieved + 1e-12 for f in FAMILY_ORDER)
    audit = audit_confusability(res.final, r, achieved + 1e-12)
    elapsed = time.time() - t0
    ok = (product_ok and per_pair_ok and audit.ok
          and len(audit.violations) == 0 and elapsed < 120.0)
    _verdict(5, "8x8 expurgation keeps a sixteenth of the pairs and meets "
             "every per-pair and confusability bound at its achieved delta",
             ok, f"sizes {res.final.m_x}x{res.final.m_y}, achieved "
             f"{achieved:.4f}, {len(audit.violations)} violations, "
             f"{elapsed:.1f}s of 120s")


def test_criterion_6_type_counts_partition_the_sequence_space():
    bad = []
    for size in (1, 2, 3):
        axes = (Alphabet(size, "A"),)
        for n in range(1, 11):
            total = sum(type_class_size(t) for t in enumerate_types(n, axes))
            if total != size ** n:
                bad.append((size, n, total))
    _verdict(6, "type class sizes sum exactly to |A|^n for n <= 10,"
             " |A| <= 3", not bad, f"{len(bad)} mismatches")


def test_criterion_7_decoder_soundness():
    t0 = time.time()
    clean = binary_codebooks(6, 2, 2, seed=0)
    exact_zero = error_prob_exact(clean, identity_channel()).p
    noisy = binary_codebooks(3, 2, 2, seed=5, x_ones=1, y_ones=1)
    w = xor_bsc(0.1)
    exact = error_prob_exact(noisy, w)
    mc = error_prob_mc(noisy, w, 100_000, seed=7)
    gap = abs(exact.p - mc.p)
    elapsed = time.time() - t0
    ok = exact_zero == 0.0 and gap <= 3.0 * mc.stderr and elapsed < 60.0
    _verdict(7, "identity channel decodes error-free and Monte Carlo agrees "
             "with exact enumeration", ok,
             f"identity {exact_zero}, gap {gap:.5f} vs 3*stderr "
             f"{3 * mc.stderr:.5f}, {elapsed:.1f}s of 60s")


def test_criterion_8_information_measure_suite():
    rng = np.random.default_rng(808)
    axes = (Alphabet(2, "U"), Alphabet(2, "X"), Alphabet(2, "Y"),
            Alphabet(2, "X~"))
    bad = 0
    worst_chain = 0.0
    for _ in range(1000):
        probs = rng.gamma(1.0, 1.0, size=(2, 2, 2, 2))
        probs /= probs.sum()
        joint = JointDist(axes, probs)
        vec = rng.gamma(1.0, 1.0, size=4)
        p = Dist(Alphabet(4, "S"), vec / vec.sum())
        if kl_divergence(p, p) != 0.0:
            bad += 1
            continue
        info = conditional_mutual_information(joint, ("X",), ("Y",), ("U",))
        if info < -1e-12:
            bad += 1
            continue
        if conditional_entropy(joint, ("X",), ("U", "Y")) > \
                conditional_entropy(joint, ("X",), ("U",)) + 1e-12:
            bad += 1
            continue
        chain = abs(
            conditional_mutual_information(joint, ("X~",), ("Y",), ("U",))
            + conditional_mutual_information(joint, ("X~",), ("X",), ("U", "Y"))
            - conditional_mutual_information(joint, ("X~",), ("X", "Y"), ("U",)))
        worst_chain = max(worst_chain, chain)
        if chain > 1e-10:
            bad += 1
    _verdict(8, "divergence, information, conditioning, and chain identities "
             "hold on 1000 random joints", bad == 0,
             f"{bad} failures, worst chain gap {worst_chain:.2e}")


def test_criterion_9_cli_reruns_are_byte_identical(tmp_path):
    d = tmp_path
    save_json(d / "chan.json", channel_to_dict(xor_bsc(0.1)))
    save_json(d / "law.json", law_to_dict(uniform_law()))
    save_json(d / "iden.json", channel_to_dict(identity_channel()))
    save_json(d / "books.json",
              codebook_to_dict(binary_codebooks(8, 8, 8, seed=20240817)))
    save_json(d / "clean.json",
              codebook_to_dict(binary_codebooks(6, 2, 2, seed=0)))
    commands = {
        "exponent": lambda tag: [
            "exponent", "--channel", str(d / "chan.json"), "--law",
            str(d / "law.json"), "--rx", "0.4,0.7", "--ry", "0.4",
            "--denominator", "4", "--baseline",
            "--out", str(d / f"exp_{tag}.json"),
            "--csv", str(d / f"exp_{tag}.csv")],
        "verify-packing": lambda tag: [
            "verify-packing", "--codebook", str(d / "books.json"),
            "--delta", "1.0", "--out", str(d / f"ver_{tag}.json")],
        "expurgate": lambda tag: [
            "expurgate", "--codebook", str(d / "books.json"), "--delta",
            "0.1", "--out", str(d / f"xp_{tag}.json"),
            "--report", str(d / f"xprep_{tag}.json")],
        "simulate": lambda tag: [
            "simulate", "--codebook", str(d / "clean.json"), "--channel",
            str(d / "chan.json"), "--trials", "2000", "--seed", "5",
            "--out", str(d / f"sim_{tag}.json"),
            "--csv", str(d / f"sim_{tag}.csv")],
        "region": lambda tag: [
            "region", "--channel", str(d / "chan.json"), "--rx", "0.2",
            "--ry", "0.2", "--out", str(d / f"reg_{tag}.json")],
    }
    outputs = {
        "exponent": ("exp_{}.json", "exp_{}.csv"),
        "verify-packing": ("ver_{}.json",),
        "expurgate": ("xp_{}.json", "xprep_{}.json"),
        "simulate": ("sim_{}.json", "sim_{}.csv"),
        "region": ("reg_{}.json",),
    }
    bad = []
    for name, build in commands.items():
        rc_a = main(build("a"))
        rc_b = main(build("b"))
        if rc_a != rc_b or rc_a not in (0, 3):
            bad.append((name, "exit", rc_a, rc_b))
        for pattern in outputs[name]:
            fa = d / pattern.format("a")
            fb = d / pattern.format("b")
            if fa.read_bytes() != fb.read_bytes():
                bad.append((name, pattern))
    _verdict(9, "every CLI command rerun with the same config and seed "
             "writes byte-identical outputs", not bad, f"{bad or 'all equal'}")
