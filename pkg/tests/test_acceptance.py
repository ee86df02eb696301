"""Acceptance gate: thirteen criteria at their stated tolerances and time limits.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts the verdict.
"""

import itertools
import math
import time

import numpy as np
import pytest

from warpcoorbit.bapu import Bapu, partition_defect, support_check
from warpcoorbit.covering import (
    alpha_verify,
    besov_covering,
    corner_probe,
    cross_intersections,
    induced_covering,
    lattice_ball,
)
from warpcoorbit.decomp_norms import norm_equivalence_probe
from warpcoorbit.embeddings import INF, besov_ln_relation, equality_check, mixed_weight_summability, t_exponents
from warpcoorbit.radial_warping import SlowStartParams, catalog_map
from warpcoorbit.transform import (
    analyze,
    bump_prototype,
    fourier_localization_check,
    gaussian_signal,
    parseval_defect,
    random_bandlimited,
    synthesize,
)
from warpcoorbit.warping_core import identity_map, jacobian_consistency


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_c01_covering_validity_boundary(record):
    ok = True
    with Timer() as t:
        for d in (1, 2, 3, 4):
            edge = math.sqrt(d) / 2
            for r in (edge, edge - 0.1):
                with pytest.raises(ValueError):
                    induced_covering(identity_map(d), 1.0, r)
                ok &= not corner_probe(d, r)["covered"]
            induced_covering(identity_map(d), 1.0, edge + 1e-6)
            ok &= corner_probe(d, edge + 1e-6)["covered"]
    ok &= t.elapsed < 1.0
    record(1, ok, f"boundary sqrt(d)/2 enforced for d=1..4, corner uncovered when rejected ({t.elapsed:.2f}s)")
    assert ok


def _brute_cluster(k, n, r):
    # n-fold neighbour set of the identity covering by explicit ball intersections
    cur = {k}
    for _ in range(n):
        nxt = set()
        for c in cur:
            for off in itertools.product(range(-2, 3), repeat=2):
                if math.hypot(*off) < 2 * r:
                    nxt.add((c[0] + off[0], c[1] + off[1]))
        cur = nxt
    return cur


def test_c02_neighbor_oracle(record):
    with Timer() as t:
        cov = induced_covering(identity_map(2), 1.0, 0.8)
        win = [tuple(int(v) for v in k) for k in lattice_ball(2, 6)]
        single = all(len(cov.neighbors(k)) == 9 for k in win)
        growth = all(len(cov.neighbors((0, 0), n)) == (1 + 2 * n) ** 2 for n in range(6))
        brute = all(cov.neighbors((2, -1), n) == _brute_cluster((2, -1), n, 0.8) for n in range(4))
        b = besov_covering(1)
        besov = all(len(b.neighbors((j,), n)) <= 1 + 2 * n for j in range(21) for n in range(6))
    ok = single and growth and brute and besov and t.elapsed < 5.0
    record(2, ok, f"|k*|=9 on {len(win)} indices, (1+2n)^2 for n<=5, Besov <= 1+2n ({t.elapsed:.2f}s)")
    assert ok


def test_c03_besov_signature(record):
    with Timer() as t:
        cov2 = induced_covering(catalog_map("ln", 2), 1 / 16, 0.75)
        rep2 = cross_intersections(cov2, besov_covering(2), lattice_ball(2, 2), [(j,) for j in range(21)])
        c2 = [rep2.counts_b[(j,)] for j in range(21)]
        cov1 = induced_covering(catalog_map("ln", 1), 1 / 16, 0.75)
        rep1 = cross_intersections(cov1, besov_covering(1), lattice_ball(1, 2), [(j,) for j in range(21)])
        c1 = [rep1.counts_b[(j,)] for j in range(21)]
    increasing = all(b > a for a, b in zip(c2, c2[1:]))
    doubling = c2[16] >= 2 * c2[8]
    band = max(c1) / min(c1)
    ok = increasing and doubling and band <= 2.0 and rep1.exact and rep2.exact and t.elapsed < 30.0
    record(
        3,
        ok,
        f"d=2 |I_j| strictly increasing, |I_16|/|I_8| = {c2[16] / c2[8]:.3f}; d=1 band {min(c1)}..{max(c1)} ({t.elapsed:.2f}s)",
    )
    assert ok


def test_c04_alpha_covering(record):
    with Timer() as t:
        bands = {}
        passed = True
        for a in (-1.0, 0.0, 0.5):
            cov = induced_covering(catalog_map(f"alpha:{a:g}", 1), 1.0, 0.75)
            rep = alpha_verify(cov, a, window=lattice_ball(1, 200))
            bands[a] = rep.band_ratio
            passed &= rep.passed and rep.band_ratio <= 10.0
        with pytest.raises(ValueError):
            alpha_verify(induced_covering(catalog_map("alpha:0.5", 1), 1.0, 0.75), 1.5)
    ok = passed and t.elapsed < 60.0
    record(4, ok, "band ratios " + ", ".join(f"a={a:g}: {v:.2f}" for a, v in bands.items()) + f"; alpha=1.5 rejected ({t.elapsed:.2f}s)")
    assert ok


def test_c05_bapu(record):
    rng = np.random.default_rng(2024)
    defects = {}
    supports = True
    with Timer() as t:
        for spec, d in (("identity", 1), ("ln", 1), ("alpha:0.5", 2)):
            b = Bapu(induced_covering(catalog_map(spec, d), 1.0, math.sqrt(d) / 2 + 0.25))
            defects[spec] = partition_defect(b, rng.uniform(-40, 40, size=(1000, d)))
            for k in ((0,) * d, (3,) * d, (-5,) + (1,) * (d - 1)):
                supports &= support_check(b, k)["pass"]
    ok = max(defects.values()) <= 1e-8 and supports and t.elapsed < 30.0
    record(5, ok, "defects " + ", ".join(f"{k}: {v:.1e}" for k, v in defects.items()) + f", supports ok ({t.elapsed:.2f}s)")
    assert ok


def test_c06_jacobian_weight(record):
    rng = np.random.default_rng(6)
    worst = 0.0
    with Timer() as t:
        maps = [("ln", 1), ("ln", 2), ("ln", 3), ("alpha:0.5", 1), ("alpha:0.5", 2), ("alpha:-1", 2), ("alpha:0", 3),
                ("tensor:ln,ln", 2), ("tensor:ln,alpha:0.5", 2)]
        for spec, d in maps:
            m = catalog_map(spec, d)
            rep = jacobian_consistency(m, rng.uniform(-20, 20, size=(100, m.dim)))
            worst = max(worst, rep.details["max_inverse_residual"])
    ok = worst <= 1e-6 and t.elapsed < 10.0
    record(6, ok, f"max |w - det(FD)|/w = {worst:.2e} over {len(maps)} maps ({t.elapsed:.2f}s)")
    assert ok


def test_c07_tight_frame(record):
    with Timer() as t:
        sig = gaussian_signal(1, 4096, 64.0, center=3.1, width=0.1, shift=1.0)
        theta = bump_prototype(1, 1.0, "bump")
        defects = [parseval_defect(sig, identity_map(1), theta, dl)["defect"] for dl in (0.5, 0.25, 0.125)]
        ln_sig = gaussian_signal(1, 4096, 400.0, center=20.0, width=6.0)
        m = catalog_map("ln", 1)
        _, err = synthesize(analyze(ln_sig, m, theta, 0.125), m, theta, ln_sig)
    monotone = defects[0] > defects[1] > defects[2]
    ok = monotone and defects[2] <= 1e-3 and err <= 1e-2 and t.elapsed < 120.0
    record(7, ok, "defects " + ", ".join(f"{v:.1e}" for v in defects) + f"; ln round trip {err:.1e} ({t.elapsed:.2f}s)")
    assert ok


def test_c08_localization_identity(record):
    with Timer() as t:
        b = Bapu(induced_covering(catalog_map("ln", 1), 0.125, 1.0))
        sig = gaussian_signal(1, 4096, 400.0, center=20.0, width=6.0)
        diffs = [fourier_localization_check(sig, b, k)["relative_difference"] for k in (0, 4, 12, 20, 24)]
    ok = max(diffs) <= 1e-3 and t.elapsed < 60.0
    record(8, ok, f"max relative difference {max(diffs):.1e} over 5 indices ({t.elapsed:.2f}s)")
    assert ok


def test_c09_norm_equivalence(record):
    setups = {"identity": (64.0, 2048, 6.0), "ln": (128.0, 4096, 20.0)}
    widths = {}
    with Timer() as t:
        for spec, (L, n, band) in setups.items():
            sigs = [random_bandlimited(1, n, L, band, seed=s) for s in range(10)]
            for p, q in ((2, 2), (1, INF), (INF, 1)):
                res = norm_equivalence_probe(sigs, catalog_map(spec, 1), None, p, q, 0.125, 2.0, workers=4)
                widths[(spec, p, q)] = res.band_width
    ok = max(widths.values()) <= 16.0 and t.elapsed < 120.0
    record(9, ok, f"max band width {max(widths.values()):.3f} over 6 probes ({t.elapsed:.2f}s)")
    assert ok


def _expected_relation(d, p, q):
    if d == 1 or (p == 2 and q == 2):
        return "equal"
    if p != 2:
        return "neither"
    return "besov_into_coorbit" if q < 2 else "coorbit_into_besov"


def test_c10_truth_table(record):
    with Timer() as t:
        rows = [(d, p, q) for d in (1, 2) for p in (1, 2, 3) for q in (1, 2, INF)]
        matched = sum(besov_ln_relation(d, p, q)["relation"] == _expected_relation(d, p, q) for d, p, q in rows)
    ok = matched == 18 and t.elapsed < 1.0
    record(10, ok, f"{matched}/18 configurations matched ({t.elapsed:.2f}s)")
    assert ok


# hand-derived t and t~ for p1 = p2 = p and q1 = q2 = q
HAND_T = {
    (1, 1): (1.0, 0.0), (1, 2): (0.5, 0.5), (1, INF): (0.0, 1.0),
    (2, 1): (0.5, 0.0), (2, 2): (0.0, 0.0), (2, INF): (0.0, 0.5),
    (4, 1): (0.75, 0.0), (4, 2): (0.25, 0.25), (4, INF): (0.0, 0.75),
    (INF, 1): (1.0, 0.0), (INF, 2): (0.5, 0.5), (INF, INF): (0.0, 1.0),
}


def test_c11_exponents(record):
    with Timer() as t:
        got = {(p, q): t_exponents(p, p, q, q) for p, q in HAND_T}
    matched = sum(np.allclose(got[k], v, atol=0, rtol=0) for k, v in HAND_T.items())
    ok = matched == 12 and got[(1, INF)][1] == 1.0 and got[(INF, 1)][0] == 1.0 and t.elapsed < 1.0
    record(11, ok, f"{matched}/12 configurations exact ({t.elapsed:.2f}s)")
    assert ok


def test_c12_equality(record):
    with Timer() as t:
        same = [
            equality_check(catalog_map("ln", d), catalog_map("ln", d, SlowStartParams(epsilon=2.0, c=0.2)))
            for d in (1, 2)
        ]
        diff = [equality_check(catalog_map("ln", d), catalog_map("alpha:0.5", d)) for d in (1, 2)]
    ok = all(r.verdict == "equal" for r in same)
    ok &= all(r.verdict == "not equal" and not r.bounded_12 and r.bounded_21 for r in diff)
    ok &= all(r.subordinate == ["Q(map2) almost subordinate to Q(map1)"] for r in diff)
    ok &= t.elapsed < 10.0
    record(12, ok, f"slow-start variants equal (sup {same[0].sup_12:.2f}/{same[0].sup_21:.2f}); ln vs alpha one-sided ({t.elapsed:.2f}s)")
    assert ok


def test_c13_mixed_summability(record):
    with Timer() as t:
        fin = mixed_weight_summability(2, 2, 2)
        viol = [mixed_weight_summability(N, p, d)["verdict"] for N, p, d in ((1, 2, 2), (0.5, 2, 2), (2, 1, 2), (1, 1, 1))]
    ok = fin["verdict"] == "finite" and fin["tail_fraction"] < 0.01
    ok &= all(v == "condition-violated" for v in viol) and t.elapsed < 5.0
    record(13, ok, f"(2,2,2) finite, tail fraction {fin['tail_fraction']:.1e}; N <= d/p violated ({t.elapsed:.2f}s)")
    assert ok
