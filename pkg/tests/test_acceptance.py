"""Acceptance gate: each test pins one release criterion at its stated
tolerance and prints a one-line verdict (run with -s to see them inline)."""

import itertools
import json
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from weqlab.action import orbits, oz_partition, product_action, translation_action
from weqlab.cli import main
from weqlab.expansion import cheeger_exact, spectral_gap
from weqlab.group import crt_check, det_int, enumerate_group
from weqlab.quasirandom import mixing_check, quasirandomness_bound, triple_mixing_check
from weqlab.steplab import (
    claim3_bound,
    fz_partition,
    invariance_defect,
    step_search_actions,
    target_u,
)
from weqlab.wstat import (
    Partition,
    dist_inf,
    dist_mu,
    phi_convolution,
    step_partition,
    w_vector,
    wvec_equal,
)


@contextmanager
def criterion(number, label):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number}: FAIL - {label}")
        raise
    elapsed = time.perf_counter() - start
    print(f"ACCEPTANCE {number}: PASS - {label} ({elapsed:.1f}s)")


def test_criterion_1_group_construction():
    with criterion(1, "quotient orders match det-filter oracles; CRT injective"):
        start = time.perf_counter()
        for n, expected in ((2, 6), (3, 24), (5, 120), (6, 144)):
            group = enumerate_group(2, n)
            oracle = sum(
                1
                for flat in itertools.product(range(n), repeat=4)
                if det_int([flat[:2], flat[2:]]) % n == 1
            )
            assert group.order == oracle == expected
        for n in (6, 12):
            report = crt_check(enumerate_group(2, n))
            assert report.order_matches_product and report.reduction_injective
        assert time.perf_counter() - start < 10.0


def test_criterion_2_orbit_structure(g3, g5, g9, sanov):
    with criterion(2, "product orbits equal the coupled labeling on all instances"):
        start = time.perf_counter()
        for gn, gm in ((g3, g3), (g3, g9), (g5, g5)):
            an = translation_action(gn, sanov)
            am = translation_action(gm, sanov)
            uf = orbits(product_action(an, am))
            oz = oz_partition(gn, gm, sanov)
            assert uf.count == gn.order
            assert set(uf.sizes) == {gm.order}
            assert oz.same_blocks(uf)
        assert time.perf_counter() - start < 30.0


def test_criterion_3_exact_w_identities(pair33, pair39, pair55, a3):
    with criterion(3, "half-set statistic, convolution identity, both Lipschitz bounds"):
        for pair in (pair33, pair39, pair55):
            half = range(pair.order_n // 2)
            vec = w_vector(pair.product(), fz_partition(pair, half))
            assert wvec_equal(vec, target_u(pair.labels))
        rng = np.random.default_rng(33)
        for pair in (pair33, pair39, pair55):
            prod = pair.product()
            for _ in range(200):
                g = Partition.random(pair.order_n, 2, rng)
                h = Partition.random(pair.order_m, 2, rng)
                phi = rng.integers(0, 2, size=(2, 2)).tolist()
                lhs = w_vector(prod, step_partition(g, h, phi, 2))
                rhs = phi_convolution(
                    w_vector(pair.action_n, g), w_vector(pair.action_m, h), phi, 2
                )
                assert wvec_equal(lhs, rhs)
        for _ in range(1000):
            f = Partition.random(24, 3, rng)
            g = Partition.random(24, 3, rng)
            assert dist_inf(w_vector(a3, f), w_vector(a3, g)) <= 2 * dist_mu(f, g)
        quartic = 2**4
        for _ in range(1000):
            u = w_vector(a3, Partition.random(24, 2, rng))
            ut = w_vector(a3, Partition.random(24, 2, rng))
            v = w_vector(a3, Partition.random(24, 2, rng))
            vt = w_vector(a3, Partition.random(24, 2, rng))
            phi = rng.integers(0, 2, size=(2, 2)).tolist()
            lhs = dist_inf(phi_convolution(u, v, phi, 2), phi_convolution(ut, vt, phi, 2))
            assert lhs <= quartic * (dist_inf(u, ut) + dist_inf(v, vt))


def test_criterion_4_mixing_inequalities(g3, g5, g9):
    with criterion(4, "pair mixing at the prime floor and coupled triple mixing"):
        start = time.perf_counter()
        for p in (3, 5, 7, 11, 13):
            group = enumerate_group(2, p)
            report = mixing_check(group, quasirandomness_bound(p), trials=200, seed=7)
            assert report.passed, f"p={p} max ratio {report.max_ratio}"
            assert report.max_ratio <= 1 + 1e-9
        for gn, gm in ((g3, g3), (g3, g9), (g5, g5)):
            report = triple_mixing_check(gn, gm, trials=50, seed=7)
            assert report.passed, f"(n,m)=({gn.n},{gm.n}) max {report.max_ratio}"
        assert time.perf_counter() - start < 120.0


def test_criterion_5_expansion_dichotomy(g2, g3, a3, a5, sanov):
    with criterion(5, "Cheeger dichotomy exact; spectral gap matches dense solver"):
        start = time.perf_counter()
        h3 = cheeger_exact(a3)
        assert h3 > 0 and a3.transitive
        a2 = translation_action(g2, sanov)
        assert cheeger_exact(a2) == 0 and not a2.transitive
        assert time.perf_counter() - start < 60.0
        gap = spectral_gap(a5, seed=3)
        size = a5.size
        dense = np.zeros((size, size))
        for lab in a5.labels:
            dense[np.arange(size), a5.perm(lab)] += 1.0 / len(a5.labels)
        evals = np.linalg.eigvalsh(dense)
        rest = sorted(evals, key=abs, reverse=True)[1:]
        mag = abs(rest[0])
        has_pos = any(abs(v - mag) < 1e-9 for v in rest)
        expected = mag if has_pos else -mag
        assert gap.converged
        assert abs(gap.magnitude - mag) < 1e-6
        assert abs(gap.value - expected) < 1e-6


def test_criterion_6_step_function_floor(pair33, pair39, pair55):
    with criterion(6, "single-class floor is exactly 1/2; two-class search deterministic"):
        for pair in (pair33, pair39, pair55):
            res = step_search_actions(pair.action_n, pair.action_m, 1)
            assert res.best_dist == Fraction(1, 2)
        kwargs = dict(seed=7, restarts=8, exhaustive_budget=10)
        r1 = step_search_actions(pair33.action_n, pair33.action_m, 2, **kwargs)
        r2 = step_search_actions(pair33.action_n, pair33.action_m, 2, **kwargs)
        assert (r1.best_dist, r1.best_g, r1.best_h, r1.best_phi) == (
            r2.best_dist, r2.best_g, r2.best_h, r2.best_phi
        )
        assert 0 <= r1.best_dist <= Fraction(1, 2)


def test_criterion_7_claim_level_checks(pair33):
    with criterion(7, "floor-bound sign change; defect equals off-diagonal statistics"):
        small = claim3_bound(3, 1)
        assert small.status == "vacuous" and small.bound < 0
        large = claim3_bound(1013, 1)
        assert large.status == "active"
        assert abs(large.bound - 0.161) < 1e-3
        assert large.bound > 0.125
        rng = np.random.default_rng(77)
        prod = pair33.product()
        for _ in range(500):
            f = Partition.random(prod.size, 2, rng)
            defect = invariance_defect(pair33, f)
            vec = w_vector(prod, f)
            for lab, value in defect.per_symbol:
                s = vec.labels.index(lab)
                assert value == vec.entry(s, 0, 1) + vec.entry(s, 1, 0)


def test_criterion_8_end_to_end_report(tmp_path, capsys):
    with criterion(8, "full report CLI under budget, schema-valid, byte-identical"):
        base = tmp_path / "disc"
        args = [
            "steplab", "report", "--primes", "3,5,7,11,13", "--step-N", "2",
            "--seed", "7", "--out", f"{base}.json", "--csv", f"{base}.csv",
        ]
        start = time.perf_counter()
        assert main(list(args)) == 0
        elapsed = time.perf_counter() - start
        assert elapsed < 600.0, f"report took {elapsed:.0f}s"
        first_json = (tmp_path / "disc.json").read_bytes()
        first_csv = (tmp_path / "disc.csv").read_bytes()

        payload = json.loads(first_json)
        assert payload["artifact"] == "weqlab"
        assert payload["version"]
        assert payload["config"]["seed"] == 7
        rows = payload["result"]["rows"]
        assert [row["p"] for row in rows] == [3, 5, 7, 11, 13]
        for row in rows:
            assert row["error"] is None
            assert row["u_member"] is True
            dist = Fraction(
                int(row["best_step_dist"]["num"]), int(row["best_step_dist"]["den"])
            )
            assert 0 <= dist <= Fraction(1, 2)
            assert row["claim_bound_status"] == "vacuous"
            assert 0 < row["lambda2"] < 1
        header = first_csv.decode().splitlines()[0]
        assert header == (
            "p,order_n,order_m,u_member,best_step_dist_num,best_step_dist_den,"
            "claim3_status,lambda2"
        )
        assert len(first_csv.decode().strip().splitlines()) == 6

        assert main(list(args)) == 0
        capsys.readouterr()
        assert (tmp_path / "disc.json").read_bytes() == first_json
        assert (tmp_path / "disc.csv").read_bytes() == first_csv
        for suffix in ("step_distance", "spectral", "floor_bound"):
            assert (tmp_path / f"disc_{suffix}.png").exists()
