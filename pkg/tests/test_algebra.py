import math
import random
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

import oracles
from grids import BLP3, F1, P1, small_models
from qkmirror.algebra import (
    EULER_GAMMA,
    EXP,
    GAMMA,
    GAMMA_ONE_PLUS,
    LOG,
    TODD,
    ZETA,
    analytic_apply,
    build_algebra,
    char_class,
    chern_character,
    chq,
    degree_scale,
    gamma_qinv_fn,
    inv_one_minus_cq_fn,
    q_gamma_fn,
    q_power_fn,
    t_gamma_c_fn,
    t_gamma_q_fn,
)
from qkmirror.errors import ConfigError, PoleError
from qkmirror.toric import RankTwoModel

P2 = RankTwoModel(3, (), rank=1)
GAMMA_E = float(EULER_GAMMA)


def random_element(alg, rng, nilpotent=False):
    coeffs = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(alg.size)]
    if nilpotent:
        coeffs[0] = 0
    return alg.element(coeffs)


def close(x, y, tol=1e-12):
    a, b = np.asarray(x.coeffs, dtype=complex), np.asarray(y.coeffs, dtype=complex)
    return np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(b)))


class TestStructure:
    def test_p1_basis(self):
        assert build_algebra(P1).basis == [(0,), (1,)]

    def test_blow_up_basis(self):
        assert build_algebra(BLP3).size == 6

    @pytest.mark.parametrize("model", small_models(), ids=str)
    def test_basis_size(self, model):
        expected = model.N * (model.k + 1) if model.rank == 2 else model.N
        assert build_algebra(model).size == expected

    def test_f1_relation(self):
        alg = build_algebra(F1)
        assert set(alg.basis) == {(0, 0), (1, 0), (0, 1), (1, 1)}
        assert alg.p(2) * alg.p(2) == alg.from_poly({(1, 1): 1})

    def test_p2_cube(self):
        alg = build_algebra(P2)
        p = alg.p(1)
        assert (p * p * p).is_zero()

    def test_unit(self):
        alg = build_algebra(BLP3)
        x = random_element(alg, random.Random(0))
        assert alg.one() * x == x

    def test_mixed_algebras_rejected(self):
        with pytest.raises(ConfigError):
            build_algebra(P1).p(1) * build_algebra(F1).p(1)

    def test_rejects_non_model(self):
        with pytest.raises(ConfigError):
            build_algebra("P1")

    def test_unknown_backend(self):
        with pytest.raises(ConfigError):
            build_algebra(P1, "decimal")

    def test_no_storage_above_dimension(self):
        alg = build_algebra(F1)
        assert max(alg.degrees) == F1.dim
        assert alg.from_poly({(5, 3): 1}).is_zero()


@pytest.mark.parametrize("model", small_models(), ids=str)
class TestRingAxioms:
    def test_axioms(self, model):
        alg = build_algebra(model)
        rng = random.Random(model.N * 13 + model.k)
        one = alg.one()
        for _ in range(500):
            x, y, z = (random_element(alg, rng) for _ in range(3))
            assert x * y == y * x
            assert (x * y) * z == x * (y * z)
            assert x * (y + z) == x * y + x * z
            assert one * x == x

    def test_exp_inverse(self, model):
        alg = build_algebra(model)
        rng = random.Random(model.N * 17 + model.k)
        for _ in range(100):
            x = random_element(alg, rng, nilpotent=True)
            assert analytic_apply(EXP, x) * analytic_apply(EXP, -x) == alg.one()

    def test_ch_homomorphism(self, model):
        alg = build_algebra(model)
        rng = random.Random(model.N * 19 + model.k)
        for _ in range(20):
            E = tuple(rng.randint(-3, 3) for _ in range(model.rank))
            F = tuple(rng.randint(-3, 3) for _ in range(model.rank))
            EF = tuple(e + f for e, f in zip(E, F))
            assert chern_character(alg, EF) == chern_character(alg, E) * chern_character(alg, F)

    def test_backends_agree(self, model):
        alg = build_algebra(model)
        rng = random.Random(model.N * 23 + model.k)
        for _ in range(50):
            x, y, z = (random_element(alg, rng) for _ in range(3))
            exact = (x * y + z) * x
            xf, yf, zf = x.to_float(), y.to_float(), z.to_float()
            assert close((xf * yf + zf) * xf, exact.to_float())
            n = random_element(alg, rng, nilpotent=True)
            assert close(analytic_apply(EXP, n.to_float()), analytic_apply(EXP, n).to_float())
            if x.constant != 0:
                assert close(xf.inverse(), x.inverse().to_float())

    def test_degree_scale_multiplicative(self, model):
        alg = build_algebra(model)
        rng = random.Random(model.N * 29 + model.k)
        for _ in range(50):
            x, y = random_element(alg, rng), random_element(alg, rng)
            t = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
            assert degree_scale(t, x * y) == degree_scale(t, x) * degree_scale(t, y)
            s = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
            assert degree_scale(s, degree_scale(t, x)) == degree_scale(s * t, x)


class TestAnalytic:
    def test_exp_p1(self):
        alg = build_algebra(P1)
        assert analytic_apply(EXP, alg.p(1)) == alg.from_poly({(0,): 1, (1,): 1})

    def test_gamma_one_plus(self):
        alg = build_algebra(P1, "float")
        out = analytic_apply(GAMMA_ONE_PLUS, alg.p(1) * 2)
        assert abs(out.coefficient((0,)) - 1) < 1e-15
        assert abs(out.coefficient((1,)) + 2 * 0.5772156649015329) < 1e-14

    def test_todd_p1(self):
        alg = build_algebra(P1)
        assert analytic_apply(TODD, alg.p(1) * 2) == alg.from_poly({(0,): 1, (1,): 1})

    def test_gamma_pole(self):
        alg = build_algebra(P1, "float")
        with pytest.raises(PoleError):
            analytic_apply(GAMMA, alg.p(1))

    def test_log_exp_roundtrip(self):
        alg = build_algebra(BLP3)
        x = random_element(alg, random.Random(3), nilpotent=True)
        assert analytic_apply(LOG, analytic_apply(EXP, x)) == x

    def test_exact_backend_rejects_irrational(self):
        alg = build_algebra(P1)
        with pytest.raises(ConfigError):
            analytic_apply(GAMMA_ONE_PLUS, alg.p(1))

    def test_zeta_constants(self):
        with mp.workdps(40):
            assert abs(mp.mpf(EULER_GAMMA) - mp.euler) < mp.mpf(10) ** -28
            for k, v in ZETA.items():
                assert abs(mp.mpf(v) - mp.zeta(k)) < mp.mpf(10) ** -28

    @pytest.mark.parametrize("x0", [1.0, 2.0, 3.0, 1.7, 0.4, -0.5])
    def test_gamma_taylor(self, x0):
        ref = oracles.mp_taylor(mp.gamma, x0, 6)
        got = GAMMA.taylor(x0, 6)
        assert all(abs(a - b) <= 1e-12 * max(1.0, abs(b)) for a, b in zip(got, ref))

    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("x0", [1.0, 2.5, 0.3, -0.6])
    def test_gamma_q_taylor(self, q, x0):
        ref = oracles.mp_taylor(lambda t: oracles.gamma_q_mp(t, q), x0, 6)
        got = q_gamma_fn(q).taylor(x0, 6)
        assert all(abs(a - b) <= 1e-11 * max(1.0, abs(b)) for a, b in zip(got, ref))

    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    def test_t_gamma_q_at_zero(self, q):
        f = lambda t: t * oracles.gamma_q_mp(t, q) if t != 0 else 1 / mp.log(q)
        ref = oracles.mp_taylor(f, 0.0, 6)
        got = t_gamma_q_fn(q).taylor(0.0, 6)
        assert abs(got[0] - 1 / math.log(q)) < 1e-15
        assert all(abs(a - b) <= 1e-11 * max(1.0, abs(b)) for a, b in zip(got, ref))

    def test_gamma_qinv_taylor(self):
        q = 2.0
        f = lambda t: (1 - 1 / mp.mpf(q)) ** (1 - t) * oracles.gamma_q_mp(t, q)
        ref = oracles.mp_taylor(f, 1.3, 5)
        got = gamma_qinv_fn(q).taylor(1.3, 5)
        assert all(abs(a - b) <= 1e-11 * max(1.0, abs(b)) for a, b in zip(got, ref))

    def test_q_power_and_geometric(self):
        q = 2.5
        ref = oracles.mp_taylor(lambda t: mp.mpf(q) ** t, 0.7, 5)
        assert all(abs(a - b) < 1e-13 for a, b in zip(q_power_fn(q).taylor(0.7, 5), ref))
        ref = oracles.mp_taylor(lambda t: 1 / (1 - mp.mpf("0.3") * mp.mpf(q) ** t), 0.2, 5)
        got = inv_one_minus_cq_fn(0.3, q).taylor(0.2, 5)
        assert all(abs(a - b) < 1e-12 * max(1.0, abs(b)) for a, b in zip(got, ref))

    def test_t_gamma_c(self):
        q = 0.5

        def f(t):
            if t == 0:
                return mp.mpf(1)
            return mp.pi * t / mp.sin(mp.pi * t) * mp.qp(mp.mpf(q) ** (1 - t), q) / mp.qp(q, q)

        ref = oracles.mp_taylor(f, 0.0, 5)
        got = t_gamma_c_fn(q).taylor(0.0, 5)
        assert all(abs(a - b) < 1e-11 * max(1.0, abs(b)) for a, b in zip(got, ref))


class TestCharacteristic:
    def test_ch_p2(self):
        alg = build_algebra(P2)
        assert chern_character(alg, (1,)) == alg.from_poly({(0,): 1, (1,): -1, (2,): Fraction(1, 2)})

    def test_ch_inverse_word(self):
        alg = build_algebra(BLP3)
        assert chern_character(alg, (-1, 0)) * chern_character(alg, (1, 0)) == alg.one()

    def test_ch_product_f1(self):
        alg = build_algebra(F1)
        assert chern_character(alg, (1, 1)) == chern_character(alg, (1, 0)) * chern_character(alg, (0, 1))

    def test_todd_p1(self):
        alg = build_algebra(P1)
        assert char_class(alg, "todd") == alg.from_poly({(0,): 1, (1,): 1})

    def test_gamma_hat_p1(self):
        g = char_class(build_algebra(P1), "gamma_hat")
        assert abs(g.coefficient((0,)) - 1) < 1e-15
        assert abs(g.coefficient((1,)) + 2 * GAMMA_E) < 1e-14

    @pytest.mark.parametrize("model", [P1, P2, F1, BLP3, RankTwoModel(2, (1, 0))], ids=str)
    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    def test_q_gamma_degree_zero(self, model, q):
        g = char_class(build_algebra(model), "q_gamma_hat", q)
        assert g.constant == pytest.approx(math.log(q) ** (model.rank - model.n), rel=1e-13)

    def test_q_gamma_limit(self):
        # t gamma_q(t) = (1 - 1/q)^(t - 1) t Gamma_{1/q}(t), and Gamma_{1/q} -> Gamma as q -> 1
        alg = build_algebra(F1, "float")
        target = char_class(alg, "gamma_hat")
        q = 1 + 1e-5
        twist = analytic_apply(EXP, alg.c1() * (-math.log(1 - 1 / q)))
        g = char_class(alg, "q_gamma_hat", q) * twist * math.log(q) ** (F1.n - F1.rank)
        assert close(g, target, 1e-4)

    def test_class_errors(self):
        alg = build_algebra(P1)
        with pytest.raises(ConfigError):
            char_class(alg, "q_gamma_hat", 0.5)
        with pytest.raises(ConfigError):
            char_class(alg, "q_gamma_c_hat", 2.0)
        with pytest.raises(ConfigError):
            char_class(alg, "chern")

    def test_chq_examples(self):
        alg = build_algebra(P1)
        out = chq(alg, 2.0, chern_character(alg, (1,)))
        assert abs(out.coefficient((0,)) - 1) < 1e-15
        assert abs(out.coefficient((1,)) + math.log(2)) < 1e-15
        assert close(chq(alg, 2.0, chern_character(alg, (0,))), alg.one().to_float(), 0)

    def test_chq_additive(self):
        alg = build_algebra(F1)
        E, F = chern_character(alg, (1, -1)), chern_character(alg, (2, 1))
        assert close(chq(alg, 3.0, E + F), chq(alg, 3.0, E) + chq(alg, 3.0, F))

    def test_chq_is_degree_scale(self):
        alg = build_algebra(P2)
        x = alg.from_poly({(0,): 1, (1,): 1, (2,): 1})
        assert degree_scale(3, x) == alg.from_poly({(0,): 1, (1,): 3, (2,): 9})
        assert degree_scale(0, x) == alg.one()


class TestSerialization:
    def test_exact_json(self):
        alg = build_algebra(P2)
        assert chern_character(alg, (1,)).to_json() == {"1": "1", "p": "-1", "p^2": "1/2"}

    def test_float_json(self):
        alg = build_algebra(P1, "float")
        out = (alg.one() * 0.1).to_json()
        assert list(out.values())[0] == [0.1, 0.0]
