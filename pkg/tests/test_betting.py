import itertools
import math

import numpy as np
import pytest

from pde_olo.betting import (
    FLOAT_MAX,
    AdversaryPolicy,
    CoinGameState,
    GameTrajectory,
    PlayerPolicy,
    adversary_coin,
    bet_and_flag,
    erfi_wealth_upper_bound,
    optimality_gap_lower,
    pde_adversary,
    play_game,
    play_games_batch,
    player_bet,
    rademacher_adversary,
    rademacher_coins,
    scripted_adversary,
    tail_bound_check,
    three_phase_sequence,
    verify_value_function_ogd,
    wealth_lower_bound,
    wealth_optimality_bound,
)
from pde_olo.potentials import v_erfi, v_exp, v_linear, v_ogd

SQE = math.sqrt(math.e)


class TestPlayer:
    def test_ogd_bet_is_gradient_step(self):
        for S in (-3.0, 0.0, 2.5, 10.0):
            assert player_bet(v_ogd(1.5), 7, S) == pytest.approx(3.0 * S)

    def test_first_bet_zero_for_even_potentials(self):
        for p in (v_ogd(2), v_exp(2), v_erfi(2)):
            assert player_bet(p, 1, 0.0) == 0.0

    def test_exp_bet(self):
        assert player_bet(v_exp(1), 2, 1.0) == pytest.approx(0.5 / math.sqrt(2) * (math.e - 1), rel=1e-14)

    def test_array_bets_match_scalar(self):
        S = np.linspace(-30, 30, 61)
        x, sat = bet_and_flag(v_erfi(1.0), 40.0, S)
        assert not sat.any()
        np.testing.assert_allclose(x, [player_bet(v_erfi(1.0), 40, s) for s in S], rtol=1e-12)

    def test_saturation_is_flagged(self):
        x, sat = bet_and_flag(v_exp(1.0), 1500, 1499.0)
        assert sat and x == FLOAT_MAX
        x, sat = bet_and_flag(v_erfi(1.0), 1500, -1499.0)
        assert sat and x == -FLOAT_MAX
        x, sat = bet_and_flag(v_erfi(1.0), 1500.0, np.array([0.0, 1499.0]))
        assert list(sat) == [False, True] and x[0] == 0.0

    def test_large_but_finite_bets_use_log_path(self):
        # values overflow but their half difference does not
        x, sat = bet_and_flag(v_erfi(1.0), 1500, 1350.0)
        assert not sat
        assert math.isfinite(x) and x > 1e250


class TestAdversary:
    def test_ties_go_up(self):
        assert adversary_coin(v_erfi(1), 1, 0.0, 0.0) == 1.0
        assert adversary_coin(v_ogd(1), 3, 2.0, 0.0) == 1.0
        assert adversary_coin(v_ogd(1), 3, -2.0, 0.0) == -1.0

    def test_both_coins_optimal_against_own_player(self):
        for p in (v_ogd(1), v_exp(1), v_erfi(1)):
            for t, S in [(1, 0.0), (5, 2.0), (30, -7.0), (100, 20.0)]:
                x = player_bet(p, t, S)
                up = p(t, S + 1) - x
                down = p(t, S - 1) + x
                assert abs(up - down) <= 1e-9 * (1 + abs(up))

    def test_overflowing_comparison(self):
        assert adversary_coin(v_exp(1), 1500, 1499.0, 0.0) == 1.0
        assert adversary_coin(v_exp(1), 1500, -1499.0, 0.0) == -1.0

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            AdversaryPolicy("pde_argmax")
        with pytest.raises(ValueError):
            AdversaryPolicy("scripted")
        with pytest.raises(ValueError):
            AdversaryPolicy("rademacher")
        with pytest.raises(ValueError):
            AdversaryPolicy("coinflip", seed=1)

    def test_pde_adversary_emits_boundary_coins(self):
        tr = play_game(PlayerPolicy(v_erfi(1)), pde_adversary(v_erfi(1)), 50)
        assert set(np.unique(tr.coins)) <= {-1.0, 1.0}


class TestRademacher:
    def test_replay(self):
        a = play_game(PlayerPolicy(v_erfi(1)), rademacher_adversary(5), 200)
        b = play_game(PlayerPolicy(v_erfi(1)), rademacher_adversary(5), 200)
        np.testing.assert_array_equal(a.coins, b.coins)
        np.testing.assert_array_equal(a.wealth, b.wealth)

    def test_prefix_consistency(self):
        np.testing.assert_array_equal(rademacher_coins(9, 1000)[:100], rademacher_coins(9, 100))

    def test_fair(self):
        c = rademacher_coins(2024, 10**6)
        assert set(np.unique(c)) == {-1.0, 1.0}
        assert abs(c.mean()) <= 0.004

    def test_ogd_player_has_zero_mean_wealth(self):
        T, n = 10, 4000
        # exact variance of C((sum c)^2 - T) by enumeration
        vals = [sum(s) ** 2 - T for s in itertools.product((-1, 1), repeat=T)]
        assert np.mean(vals) == 0
        sd = math.sqrt(np.var(vals) / n)
        coins = np.stack([rademacher_coins(s, T) for s in range(n)])
        w = play_games_batch(PlayerPolicy(v_ogd(1.0)), coins).wealth[:, -1]
        assert abs(w.mean()) <= 4 * sd


class TestGame:
    def test_state_record(self):
        st = CoinGameState()
        st.record(2.0, 0.5)
        st.record(-1.0, -1.0)
        assert (st.t, st.coin_sum, st.wealth) == (2, -0.5, 2.0)
        assert st.recomputed_wealth() == st.wealth
        with pytest.raises(ValueError):
            st.record(1.0, 1.5)

    def test_ogd_wealth_exact(self):
        rng = np.random.default_rng(0)
        for C in (1.0, 2.0):
            for _ in range(20):
                T = int(rng.integers(1, 60))
                coins = rng.choice([-1.0, 1.0], T)
                tr = play_game(PlayerPolicy(v_ogd(C)), scripted_adversary(coins), T)
                assert tr.final_wealth == C * (coins.sum() ** 2 - T)

    def test_ogd_wealth_inequality_for_fractional_coins(self):
        coins = np.random.default_rng(1).uniform(-1, 1, 40)
        tr = play_game(PlayerPolicy(v_ogd(1.0)), scripted_adversary(coins), 40)
        assert tr.final_wealth >= coins.sum() ** 2 - 40

    def test_first_round_wealth_zero(self):
        for p in (v_ogd(1), v_exp(1), v_erfi(1)):
            tr = play_game(PlayerPolicy(p), scripted_adversary([0.7]), 1)
            assert tr.final_wealth == 0.0

    def test_erfi_vs_all_heads(self):
        tr = play_game(PlayerPolicy(v_erfi(1)), scripted_adversary([1.0] * 10), 10)
        assert tr.final_wealth >= v_erfi(1)(10, 10)

    def test_short_script_rejected(self):
        with pytest.raises(ValueError):
            play_game(PlayerPolicy(v_erfi(1)), scripted_adversary([1.0]), 3)

    def test_ito_identity_per_round(self):
        for p in (v_ogd(1.0), v_exp(1.0), v_erfi(1.0), v_linear(1.0)):
            coins = rademacher_coins(11, 300)
            tr = play_game(PlayerPolicy(p), scripted_adversary(coins), 300)
            S_prev = 0.0
            for t in range(1, 301):
                S = tr.coin_sums[t - 1]
                lhs = p(t, S) - p(t - 1, S_prev)
                rhs = coins[t - 1] * tr.bets[t - 1] + (0.5 * p(t, S_prev + 1) + 0.5 * p(t, S_prev - 1) - p(t - 1, S_prev))
                assert abs(lhs - rhs) <= 1e-9 * (1 + abs(p(t, S)))
                S_prev = S

    def test_state_sufficiency(self):
        # bets from (t, S) only agree with a history-based recomputation
        coins = rademacher_coins(3, 100)
        tr = play_game(PlayerPolicy(v_erfi(1.0)), scripted_adversary(coins), 100)
        for t in range(1, 101):
            hist = coins[: t - 1]
            assert tr.bets[t - 1] == player_bet(v_erfi(1.0), t, float(sum(hist)))

    def test_batch_matches_single_games(self):
        coins = np.stack([rademacher_coins(s, 150) for s in range(5)])
        b = play_games_batch(PlayerPolicy(v_erfi(1.0)), coins)
        for i in range(5):
            tr = play_game(PlayerPolicy(v_erfi(1.0)), scripted_adversary(coins[i]), 150)
            np.testing.assert_allclose(b.wealth[i], tr.wealth, rtol=1e-12, atol=1e-12)
            np.testing.assert_array_equal(b.coin_sums[i], tr.coin_sums)

    def test_long_one_sided_game_saturates(self):
        tr = play_game(PlayerPolicy(v_erfi(1.0)), scripted_adversary([1.0] * 1500), 1500)
        assert tr.overflow
        assert not np.isnan(tr.bets).any() and not np.isnan(tr.wealth).any()
        assert np.all(np.diff(tr.bets) >= 0)

    def test_csv_round_trip(self, tmp_path):
        coins = rademacher_coins(4, 30)
        tr = play_game(PlayerPolicy(v_exp(1.0)), scripted_adversary(coins), 30)
        path = tr.to_csv(tmp_path / "game.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "t,bet,coin,coin_sum,wealth"
        assert lines[1].startswith("1,")
        back = GameTrajectory.from_csv(path)
        np.testing.assert_array_equal(back.wealth, tr.wealth)
        np.testing.assert_array_equal(back.bets, tr.bets)


class TestThreePhase:
    def test_examples(self):
        np.testing.assert_array_equal(three_phase_sequence(4, 4), [1, 1, 1, 1])
        np.testing.assert_array_equal(three_phase_sequence(2, 0), [-1, 1])

    @pytest.mark.parametrize("T", [1, 2, 3, 10, 11, 50])
    def test_structure(self, T):
        for S in np.concatenate([np.arange(-T, T + 1), np.linspace(-T, T, 37)]):
            c = three_phase_sequence(T, S)
            assert len(c) == T
            assert abs(c.sum() - S) <= 1e-12
            assert abs(c[0]) <= 1 and np.all(np.abs(c[1:]) == 1)
            S_int = S - c[0]
            assert S_int == round(S_int) and abs(S_int) <= T
            assert (abs(S_int) + 1) % 2 == T % 2
            n_alt = T - int(abs(S_int))
            assert np.all(np.abs(np.cumsum(c)[:n_alt]) <= 1 + 1e-12)
            if S_int:
                assert np.all(c[n_alt:] == np.sign(S_int))

    def test_integer_sums_are_exact(self):
        for T in (10, 50, 200):
            for S in range(-T, T + 1):
                assert three_phase_sequence(T, S).sum() == S

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            three_phase_sequence(5, 5.5)


class TestBounds:
    def test_lower_bound_values(self):
        for T in (1, 9, 100):
            assert wealth_lower_bound(v_erfi(1), T, 0) == pytest.approx(-math.sqrt(T))
        assert wealth_lower_bound(v_exp(1), 1, 0) == pytest.approx(1 - SQE)
        assert wealth_lower_bound(v_erfi(1), 8, 4) >= math.sqrt(8) * (8 / 16 * math.e - 1.5)
        with pytest.raises(ValueError):
            wealth_lower_bound(v_ogd(1), 5, 0)

    def test_upper_bound_values(self):
        for T in (1, 16, 100):
            assert erfi_wealth_upper_bound(1.0, T, 0) == pytest.approx(-math.sqrt(T) + 3 / 8 + 2)
        ref = math.exp(2) * 5 * 3 / 8 + 2 + v_erfi(1)(4, 4)
        assert erfi_wealth_upper_bound(1.0, 4, 4) == pytest.approx(ref)

    def test_upper_bound_monotone_in_abs_S(self):
        S = np.linspace(0, 50, 201)
        u = erfi_wealth_upper_bound(1.0, 50.0, S)
        assert np.all(np.diff(u) > 0)

    def test_three_phase_wealth_within_bounds(self):
        p = v_erfi(1.0)
        for T in (10, 50):
            for S in range(-T, T + 1):
                tr = play_game(PlayerPolicy(p), scripted_adversary(three_phase_sequence(T, S)), T)
                assert tr.final_wealth <= erfi_wealth_upper_bound(1.0, T, S) + 1e-7
                assert tr.final_wealth >= p(T, S) - 1e-7

    def test_value_function(self):
        assert verify_value_function_ogd(0, 0) == 0
        assert verify_value_function_ogd(5, 2) == 0
        assert abs(verify_value_function_ogd(100, -7)) <= 1e-9
        assert verify_value_function_ogd(3, 1, C=2.5) == 0


class TestTail:
    def test_trivial(self):
        assert tail_bound_check(1, 0.5)[0] == 1.0

    def test_exact_against_scipy_binomial(self):
        from scipy.stats import binom
        for T, k in [(100, 10), (400, 40), (37, 5.5)]:
            exact, _ = tail_bound_check(T, k)
            j = np.arange(T + 1)
            ref = binom.pmf(j, T, 0.5)[np.abs(2 * j - T) >= k].sum()
            assert exact == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("T", [100, 400, 900])
    @pytest.mark.parametrize("m", [0.5, 1.0, 1.5, 2.0])
    def test_bound_holds(self, T, m):
        exact, bound = tail_bound_check(T, m * math.sqrt(T))
        assert exact >= bound

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            tail_bound_check(0, 1)
        with pytest.raises(ValueError):
            tail_bound_check(10, 0)


class TestOptimality:
    LAM0 = math.exp((math.sqrt(2) + 1) / 2)

    def test_plug_in(self):
        lam = self.LAM0
        T = 8 * math.pi * lam**2 * math.log(lam) + 1
        ref = 2 * math.sqrt(2 * math.pi) * lam * math.sqrt((math.sqrt(2) + 1) / 2) * math.sqrt(T)
        assert wealth_optimality_bound(1.0, lam, T) == pytest.approx(ref)

    def test_domain(self):
        with pytest.raises(ValueError):
            wealth_optimality_bound(1.0, 2.0, 1e6)
        with pytest.raises(ValueError):
            wealth_optimality_bound(1.0, self.LAM0, 10)

    def test_gap_display_and_barrier(self):
        for lam in (self.LAM0, 5.0, 20.0, 100.0):
            Tmin = 8 * math.pi * lam**2 * math.log(lam)
            for T in (math.ceil(Tmin), math.ceil(4 * Tmin)):
                low = optimality_gap_lower(1.0, lam, T)
                assert low <= wealth_optimality_bound(1.0, lam, T)
                barrier = math.sqrt(2 * T * math.log(lam))
                assert barrier <= T
                assert wealth_lower_bound(v_erfi(1.0), T, barrier) >= low
