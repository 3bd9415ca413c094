import math
from fractions import Fraction

import numpy as np
import pytest

from weqlab.group import mat_mul, reduce_mod
from weqlab.quasirandom import (
    GroupFunction,
    adversarial_mixing_ratio,
    circled_conv,
    conv,
    expectation,
    mixing_check,
    norm2,
    norm2_sq,
    norm_inf,
    quasirandomness_bound,
    triple_mixing_check,
)


def brute_conv(group, z, w):
    """Triple-loop oracle for the convolution, exact."""
    out = [Fraction(0)] * group.order
    for a in range(group.order):
        for b in range(group.order):
            x = group.index_of(mat_mul(group.element(a), group.element(b)))
            out[x] += z.values[a] * w.values[b]
    return out


def brute_circled(group_n, group_m, z, xi):
    out = [Fraction(0)] * group_n.order
    for a in range(group_n.order):
        for b in range(group_m.order):
            x = group_n.index_of(
                mat_mul(group_n.element(a), reduce_mod(group_m.element(b), group_n.n))
            )
            out[x] += z.values[a] * xi.values[b]
    return out


class TestNorms:
    def test_constant(self, g3):
        one = GroupFunction.constant(g3, 1)
        assert expectation(one) == 1
        assert abs(norm2(one) - math.sqrt(24)) < 1e-12
        assert norm_inf(one) == 1

    def test_delta(self, g3):
        d = GroupFunction.delta(g3)
        assert expectation(d) == Fraction(1, 24)
        assert norm2_sq(d) == 1

    def test_centering_identity(self, g3):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(24)
        z = GroupFunction(g3, v, exact=False)
        centered = GroupFunction(g3, v - v.mean(), exact=False)
        lhs = norm2_sq(centered)
        rhs = norm2_sq(z) - 24 * float(expectation(z)) ** 2
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs))


class TestConv:
    def test_delta_is_identity(self, g3):
        z = GroupFunction(g3, list(range(24)), exact=True)
        out = conv(GroupFunction.delta(g3), z)
        assert out.values == z.values
        out2 = conv(z, GroupFunction.delta(g3))
        assert out2.values == z.values

    def test_constants(self, g3):
        one = GroupFunction.constant(g3, 1)
        out = conv(one, one)
        assert all(v == 24 for v in out.values)

    def test_matches_brute_force(self, g3):
        rng = np.random.default_rng(1)
        z = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-5, 6, 24)])
        w = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-5, 6, 24)])
        assert list(conv(z, w).values) == brute_conv(g3, z, w)

    def test_numeric_matches_exact(self, g3):
        rng = np.random.default_rng(2)
        vals_z = rng.integers(-5, 6, 24)
        vals_w = rng.integers(-5, 6, 24)
        exact = conv(
            GroupFunction(g3, [Fraction(int(v)) for v in vals_z]),
            GroupFunction(g3, [Fraction(int(v)) for v in vals_w]),
        )
        numeric = conv(
            GroupFunction(g3, vals_z.astype(float), exact=False),
            GroupFunction(g3, vals_w.astype(float), exact=False),
        )
        assert np.allclose(numeric.values, [float(v) for v in exact.values])

    def test_sparse_fast_path(self, g3):
        rng = np.random.default_rng(3)
        vals = np.zeros(24)
        vals[2] = 1.5
        z = GroupFunction(g3, vals, exact=False)
        w = GroupFunction(g3, rng.standard_normal(24), exact=False)
        dense = z.numeric() @ w.numeric()[g3.left_division_table]
        assert np.allclose(conv(z, w).values, dense)

    def test_associative_distributive(self, g3):
        rng = np.random.default_rng(4)
        for _ in range(30):
            z, w, u = (
                GroupFunction(g3, rng.standard_normal(24), exact=False)
                for _ in range(3)
            )
            left = conv(conv(z, w), u).numeric()
            right = conv(z, conv(w, u)).numeric()
            assert np.allclose(left, right, rtol=1e-9, atol=1e-9)
            lhs = conv(z, GroupFunction(g3, w.numeric() + u.numeric(), exact=False))
            rhs = conv(z, w).numeric() + conv(z, u).numeric()
            assert np.allclose(lhs.numeric(), rhs, rtol=1e-9, atol=1e-9)

    def test_expectation_identity_exact(self, g3):
        rng = np.random.default_rng(5)
        for _ in range(20):
            z = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-4, 5, 24)])
            w = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-4, 5, 24)])
            assert expectation(conv(z, w)) == 24 * expectation(z) * expectation(w)

    def test_group_mismatch(self, g3, g5):
        with pytest.raises(ValueError):
            conv(GroupFunction.delta(g3), GroupFunction.delta(g5))


class TestCircledConv:
    def test_delta_pair(self, g3):
        out = circled_conv(GroupFunction.delta(g3), GroupFunction.delta(g3))
        assert out.values[g3.identity_index] == 1
        assert sum(out.values) == 1

    def test_constants_33(self, g3):
        one_n = GroupFunction.constant(g3, 1)
        out = circled_conv(one_n, one_n)
        assert all(v == 24 for v in out.values)
        assert list(out.values) == brute_circled(g3, g3, one_n, one_n)

    def test_constants_39(self, g3, g9):
        out = circled_conv(
            GroupFunction.constant(g3, 1), GroupFunction.constant(g9, 1)
        )
        assert all(v == 648 for v in out.values)

    def test_matches_brute_force_33(self, g3):
        rng = np.random.default_rng(6)
        z = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-3, 4, 24)])
        xi = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-3, 4, 24)])
        assert list(circled_conv(z, xi).values) == brute_circled(g3, g3, z, xi)

    def test_fiber_identity_39(self, g3, g9):
        # pulling a small-quotient function back along the reduction matches
        # (|G_m| / |G_n|) times the plain convolution
        rng = np.random.default_rng(7)
        z = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-3, 4, 24)])
        xi_small = [Fraction(int(v)) for v in rng.integers(-3, 4, 24)]
        pn = g9.reduction_indices(g3)
        xi_lifted = GroupFunction(g9, [xi_small[int(i)] for i in pn])
        lhs = circled_conv(z, xi_lifted)
        plain = conv(z, GroupFunction(g3, xi_small))
        ratio = Fraction(648, 24)
        assert list(lhs.values) == [ratio * v for v in plain.values]

    def test_mass_conservation(self, g3, g9):
        rng = np.random.default_rng(8)
        z = GroupFunction(g3, [Fraction(int(v)) for v in rng.integers(-3, 4, 24)])
        xi = GroupFunction(g9, [Fraction(int(v)) for v in rng.integers(-3, 4, 648)])
        out = circled_conv(z, xi)
        assert sum(out.values) == sum(z.values) * sum(xi.values)

    def test_divisibility_error(self, g3, g5):
        with pytest.raises(ValueError):
            circled_conv(GroupFunction.delta(g3), GroupFunction.delta(g5))


class TestQuasirandomness:
    def test_bound_values(self):
        assert quasirandomness_bound(5) == 2
        assert quasirandomness_bound(2) == 1
        assert quasirandomness_bound(3) == 1
        assert quasirandomness_bound(35) == 2

    def test_mixing_small_primes(self, g3, g5):
        for group, p in ((g3, 3), (g5, 5)):
            report = mixing_check(group, quasirandomness_bound(p), trials=50, seed=7)
            assert report.passed
            assert report.max_ratio <= 1 + 1e-9

    def test_mixing_d1_always_passes(self, g3):
        report = mixing_check(g3, 1, trials=50, seed=11)
        assert report.passed

    def test_mixing_seed_determinism(self, g3):
        r1 = mixing_check(g3, 1, trials=20, seed=3)
        r2 = mixing_check(g3, 1, trials=20, seed=3)
        assert r1.ratios == r2.ratios

    def test_adversarial_ratio_below_one(self, g5):
        ratio = adversarial_mixing_ratio(g5, quasirandomness_bound(5), rounds=30, seed=3)
        assert 0 < ratio <= 1 + 1e-9

    def test_invalid_bound_rejected(self, g3):
        with pytest.raises(ValueError):
            mixing_check(g3, Fraction(1, 2))


class TestTripleMixing:
    def test_constants_cancel_exactly(self, g3):
        one = GroupFunction.constant(g3, 1, exact=False)
        mixed = circled_conv(conv(one, one), one)
        centered = mixed.numeric() - 1.0 * 1.0 * 1.0 * 24 * 24
        assert np.max(np.abs(centered)) == 0.0

    def test_33(self, g3):
        report = triple_mixing_check(g3, g3, trials=100, seed=7)
        assert report.passed
        assert report.smallest_prime == 3

    def test_39(self, g3, g9):
        report = triple_mixing_check(g3, g9, trials=50, seed=7)
        assert report.passed

    def test_divisibility_error(self, g3, g5):
        with pytest.raises(ValueError):
            triple_mixing_check(g3, g5)
