import numpy as np
import pytest

from passiveglrt.channel import (
    Observations,
    ScenarioConfig,
    TransmitterObservation,
    simulate_observation,
)
from passiveglrt.detectors import (
    DetectorContext,
    DetectorKind,
    FormatContext,
    amr_glrt,
    evaluate_detector,
    mle_b_relaxed,
    mle_mu,
    mle_sigma2,
    pmr_glrt,
    pmr_glrt_k_exact,
    pmr_rglrt_k,
    pmr_rglrt_uk,
    psl_glrt,
    psl_rglrt_k,
    symbol_candidates,
)
from passiveglrt.errors import (
    DegenerateDenominator,
    NegativeResidual,
    SearchSpaceTooLarge,
    ZeroSignal,
)
from passiveglrt.linalg import gen_eig_max
from passiveglrt.waveform import (
    BPSK,
    LinearModFormat,
    OfdmFormat,
    raised_cosine_pulse,
)


def linear_fmt(p=2, l=4, m=2):
    return LinearModFormat(
        pulse=raised_cosine_pulse(0.22, m, p),
        span_symbols=m,
        samples_per_symbol=p,
        symbols=l,
    )


def pmr_setup(n_tx=2, n_rx=2, seed=0, **scen_kw):
    formats = tuple(linear_fmt() for _ in range(n_tx))
    scen = ScenarioConfig(n_tx=n_tx, n_rx=n_rx, snr_db=0.0, dnr_db=0.0, **scen_kw)
    ctx = DetectorContext.from_formats(formats, scen.sigma2)
    obs = simulate_observation(
        scen, formats, np.random.default_rng(seed),
        transmit_matrices=tuple(c.g for c in ctx.contexts),
    )
    return obs, ctx, formats, scen


def profile_value(g, phi, b):
    gb = g @ b
    return float(np.linalg.norm(phi.conj().T @ gb) ** 2 / np.linalg.norm(gb) ** 2)


class TestMleMu:
    def test_noiseless_inversion(self):
        rng = np.random.default_rng(1)
        g = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
        b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        mu = 0.7 - 1.3j
        assert abs(mle_mu(g, b, mu * (g @ b)) - mu) < 1e-12

    def test_orthogonal_gives_zero(self):
        g = np.eye(4, 2, dtype=complex)
        b = np.array([1.0, 0.0], dtype=complex)
        s = np.array([0.0, 0.0, 2.0, -1.0j])  # supported off range(g b)
        assert abs(mle_mu(g, b, s)) == 0.0

    def test_least_squares_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            g = rng.standard_normal((10, 4)) + 1j * rng.standard_normal((10, 4))
            b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            s = rng.standard_normal(10) + 1j * rng.standard_normal(10)
            ref = np.linalg.lstsq((g @ b)[:, None], s, rcond=None)[0][0]
            assert abs(mle_mu(g, b, s) - ref) < 1e-10

    def test_zero_signal(self):
        with pytest.raises(ZeroSignal):
            mle_mu(np.zeros((4, 2), dtype=complex), np.ones(2), np.ones(4))


class TestMleBRelaxed:
    def test_dominant_direction(self):
        rng = np.random.default_rng(3)
        d = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
        phi = np.outer(d, np.array([5.0, 2.0j])) + 1e-4 * (
            rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        )
        b = mle_b_relaxed(np.eye(4, dtype=complex), phi)
        assert abs(abs(np.vdot(b, d)) - 1.0) < 1e-3

    def test_profile_reproduces_top_eigenvalue(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
        phi = rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))
        b = mle_b_relaxed(g, phi)
        gh = g.conj().T
        pencil_a = gh @ phi @ phi.conj().T @ g
        lam = gen_eig_max(0.5 * (pencil_a + pencil_a.conj().T), gh @ g).eigenvalue
        assert abs(profile_value(g, phi, b) - lam) < 1e-10 * max(1.0, lam)

    def test_random_restart_oracle(self):
        rng = np.random.default_rng(7)
        g = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        phi = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        best = profile_value(g, phi, mle_b_relaxed(g, phi))
        probes = rng.standard_normal((2, 10_000)) + 1j * rng.standard_normal((2, 10_000))
        gp = g @ probes
        vals = np.sum(np.abs(phi.conj().T @ gp) ** 2, axis=0) / np.sum(
            np.abs(gp) ** 2, axis=0
        )
        assert float(vals.max()) <= best + 1e-9


class TestMleSigma2:
    def test_formula(self):
        assert mle_sigma2([3.0, 1.0], 8.0) == 0.5

    def test_c1_scaling(self):
        assert mle_sigma2([4.0], 4.0) == 2.0 * mle_sigma2([4.0], 8.0)

    def test_negative_residual(self):
        with pytest.raises(NegativeResidual):
            mle_sigma2([1.0, -1e-6], 4.0)
        with pytest.raises(ValueError):
            mle_sigma2([1.0], 0.0)

    def test_noise_consistency(self):
        # single-channel-block noise: residual sum / (n_rx * n) tracks sigma2
        rng = np.random.default_rng(9)
        sigma2 = 1.7
        n, n_rx = 800, 2
        fmt = linear_fmt(p=40, l=20, m=2)  # symbol space much smaller than n
        ctx = FormatContext.from_format(fmt)
        phi = np.sqrt(sigma2 / 2) * (
            rng.standard_normal((n, n_rx)) + 1j * rng.standard_normal((n, n_rx))
        )
        term = float(np.linalg.norm(phi) ** 2) - ctx.pencil_top(phi)
        est = mle_sigma2([term], n_rx * n)
        assert abs(est - sigma2) < 0.05 * sigma2


class TestAmrGlrt:
    def test_matched_observation(self):
        # surveillance equals the transmitted waveform: statistic is N^2
        fmt = linear_fmt()
        scen = ScenarioConfig(n_tx=1, n_rx=1, snr_db=0.0)
        obs = simulate_observation(
            scen, (fmt,), np.random.default_rng(0),
            channel_coefficients=[(np.array([1.0 + 0.0j]), None)],
            zero_noise=True,
        )
        n = fmt.sample_count
        assert abs(amr_glrt(obs, 1.0) - n * n) < 1e-9 * n * n

    def test_zero_surveillance(self):
        obs, ctx, _, _ = pmr_setup(seed=1)
        quiet = Observations(
            transmitters=tuple(
                TransmitterObservation(
                    surveillance=np.zeros_like(t.surveillance),
                    reference=t.reference,
                    tx_samples=t.tx_samples,
                )
                for t in obs
            )
        )
        assert amr_glrt(quiet, ctx.sigma2) == 0.0

    def test_double_loop_oracle(self):
        obs, ctx, _, _ = pmr_setup(seed=2)
        ref = 0.0
        for tr in obs:
            for j in range(tr.surveillance.shape[1]):
                ref += abs(np.vdot(tr.tx_samples, tr.surveillance[:, j])) ** 2
        ref /= ctx.sigma2
        got = amr_glrt(obs, ctx.sigma2)
        assert abs(got - ref) < 1e-9 * max(1.0, ref)


class TestPmrGlrt:
    def test_nonnegative_and_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            obs, ctx, _, _ = pmr_setup(seed=int(rng.integers(1 << 30)))
            got = pmr_glrt(obs, ctx.sigma2)
            assert got >= -1e-9
            ref = 0.0
            for tr in obs:
                s1 = np.linalg.eigvalsh(tr.stacked @ tr.stacked.conj().T)[-1]
                s0 = np.linalg.eigvalsh(tr.reference @ tr.reference.conj().T)[-1]
                ref += s1 - s0
            ref /= ctx.sigma2
            assert abs(got - ref) < 1e-8 * max(1.0, abs(ref))

    def test_zero_surveillance_scores_zero(self):
        obs, ctx, _, _ = pmr_setup(seed=3)
        quiet = Observations(
            transmitters=tuple(
                TransmitterObservation(
                    surveillance=np.zeros_like(t.surveillance),
                    reference=t.reference,
                    tx_samples=t.tx_samples,
                )
                for t in obs
            )
        )
        scale = sum(t.energy for t in quiet)
        assert abs(pmr_glrt(quiet, ctx.sigma2)) < 1e-10 * scale


class TestPslGlrt:
    def test_single_column(self):
        s = np.array([[1.0 + 1.0j], [2.0], [0.5j]])
        obs = Observations(transmitters=(TransmitterObservation(surveillance=s),))
        want = float(np.linalg.norm(s) ** 2) / 0.5
        assert abs(psl_glrt(obs, 0.5) - want) < 1e-12 * want

    def test_quadratic_scaling(self):
        obs, ctx, _, _ = pmr_setup(seed=4)
        scaled = Observations(
            transmitters=tuple(
                TransmitterObservation(surveillance=3.0 * t.surveillance) for t in obs
            )
        )
        base = psl_glrt(obs, ctx.sigma2)
        assert abs(psl_glrt(scaled, ctx.sigma2) - 9.0 * base) < 1e-9 * max(1.0, base)


class TestPmrRglrtK:
    def test_nonnegative(self):
        for seed in range(8):
            obs, ctx, _, _ = pmr_setup(seed=seed)
            assert pmr_rglrt_k(obs, ctx.contexts, ctx.sigma2) >= -1e-9

    def test_zero_surveillance_scores_zero(self):
        obs, ctx, _, _ = pmr_setup(seed=5)
        quiet = Observations(
            transmitters=tuple(
                TransmitterObservation(
                    surveillance=np.zeros_like(t.surveillance),
                    reference=t.reference,
                    tx_samples=t.tx_samples,
                )
                for t in obs
            )
        )
        scale = sum(t.energy for t in quiet)
        assert abs(pmr_rglrt_k(quiet, ctx.contexts, ctx.sigma2)) < 1e-10 * scale

    def test_gram_side_equivalence(self):
        # the whitened small-side eigenvalue must match the full pencil
        rng = np.random.default_rng(13)
        fmt = linear_fmt()
        ctx = FormatContext.from_format(fmt)
        n = fmt.sample_count
        for _ in range(10):
            phi = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
            a = ctx.gh @ phi @ phi.conj().T @ ctx.g
            ref = gen_eig_max(0.5 * (a + a.conj().T), ctx.gram).eigenvalue
            got = ctx.pencil_top(phi)
            assert abs(got - ref) < 1e-10 * max(1.0, ref)

    def test_orthogonal_format_reduces_to_pmr_glrt(self):
        fmt = OfdmFormat(subcarriers=4, samples_per_symbol=1, symbols=2)
        scen = ScenarioConfig(n_tx=1, n_rx=2, snr_db=0.0, dnr_db=0.0)
        ctx = DetectorContext.from_formats((fmt,), scen.sigma2)
        for seed in range(10):
            obs = simulate_observation(scen, (fmt,), np.random.default_rng(seed))
            a = pmr_rglrt_k(obs, ctx.contexts, ctx.sigma2)
            b = pmr_glrt(obs, ctx.sigma2)
            assert abs(a - b) < 1e-8 * max(1.0, abs(b))


class TestPslRglrtK:
    def test_rank_one_in_range(self):
        fmt = linear_fmt()
        ctx = FormatContext.from_format(fmt)
        rng = np.random.default_rng(17)
        b = rng.standard_normal(fmt.symbol_count) + 1j * rng.standard_normal(
            fmt.symbol_count
        )
        gb = ctx.g @ b
        obs = Observations(
            transmitters=(TransmitterObservation(surveillance=gb[:, None]),)
        )
        want = float(np.linalg.norm(gb) ** 2) / 2.0
        got = psl_rglrt_k(obs, (ctx,), 2.0)
        assert abs(got - want) < 1e-9 * want

    def test_dominated_by_unstructured(self):
        for seed in range(8):
            obs, ctx, _, _ = pmr_setup(seed=seed + 100)
            relaxed = psl_rglrt_k(obs, ctx.contexts, ctx.sigma2)
            free = psl_glrt(obs, ctx.sigma2)
            assert relaxed <= free + 1e-9 * max(1.0, free)


class TestPmrRglrtUk:
    def test_at_least_one(self):
        for seed in range(8):
            obs, ctx, _, _ = pmr_setup(seed=seed + 40)
            assert pmr_rglrt_uk(obs, ctx.contexts) >= 1.0 - 1e-9

    def test_scale_invariant(self):
        obs, ctx, _, _ = pmr_setup(seed=6)
        scaled = Observations(
            transmitters=tuple(
                TransmitterObservation(
                    surveillance=5.0 * t.surveillance,
                    reference=5.0 * t.reference,
                    tx_samples=t.tx_samples,
                )
                for t in obs
            )
        )
        a = pmr_rglrt_uk(obs, ctx.contexts)
        b = pmr_rglrt_uk(scaled, ctx.contexts)
        assert abs(a - b) < 1e-10 * a

    def test_zero_surveillance_scores_one(self):
        obs, ctx, _, _ = pmr_setup(seed=7)
        quiet = Observations(
            transmitters=tuple(
                TransmitterObservation(
                    surveillance=np.zeros_like(t.surveillance),
                    reference=t.reference,
                    tx_samples=t.tx_samples,
                )
                for t in obs
            )
        )
        assert abs(pmr_rglrt_uk(quiet, ctx.contexts) - 1.0) < 1e-9

    def test_degenerate_denominator(self):
        fmt = linear_fmt()
        scen = ScenarioConfig(n_tx=1, n_rx=2, snr_db=0.0, dnr_db=0.0)
        ctx = DetectorContext.from_formats((fmt,), scen.sigma2)
        mu_s = np.array([1.0 + 0.0j, 0.5j])
        mu_r = np.array([0.2, -0.4 + 0.1j])
        obs = simulate_observation(
            scen, (fmt,), np.random.default_rng(8),
            channel_coefficients=[(mu_s, mu_r)],
            zero_noise=True,
        )
        with pytest.raises(DegenerateDenominator):
            pmr_rglrt_uk(obs, ctx.contexts)


class TestExactGlrt:
    def test_candidate_enumeration(self):
        cand = symbol_candidates(BPSK, 8, 1 << 16)
        assert cand.shape == (8, 256)
        assert len({tuple(c) for c in cand.T}) == 256

    def test_cap_enforced(self):
        with pytest.raises(SearchSpaceTooLarge):
            symbol_candidates(BPSK, 17, 1 << 16)

    def test_sign_ambiguity(self):
        rng = np.random.default_rng(19)
        fmt = linear_fmt()
        ctx = FormatContext.from_format(fmt)
        phi = rng.standard_normal((fmt.sample_count, 2)) + 1j * rng.standard_normal(
            (fmt.sample_count, 2)
        )
        b = np.asarray(
            BPSK[rng.integers(0, 2, size=fmt.symbol_count)], dtype=complex
        )
        assert abs(profile_value(ctx.g, phi, b) - profile_value(ctx.g, phi, -b)) < 1e-12

    def test_exact_below_relaxed(self):
        for seed in range(8):
            obs, ctx, _, _ = pmr_setup(seed=seed + 60)
            for tr, fc in zip(obs, ctx.contexts):
                cand = symbol_candidates(fc.constellation, fc.g.shape[1], 1 << 16)
                den = np.einsum("kt,kl,lt->t", cand.conj(), fc.gram, cand).real
                num = np.sum(np.abs(tr.stacked.conj().T @ fc.g @ cand) ** 2, axis=0)
                assert float(np.max(num / den)) <= fc.pencil_top(tr.stacked) + 1e-9

    def test_brute_force_oracle(self):
        # tiny alphabet walk evaluated through the per-channel mu fit
        fmt = linear_fmt(p=2, l=2, m=2)  # 3 symbol columns -> 8 candidates
        scen = ScenarioConfig(n_tx=1, n_rx=2, snr_db=0.0, dnr_db=0.0)
        ctx = DetectorContext.from_formats((fmt,), scen.sigma2)
        obs = simulate_observation(scen, (fmt,), np.random.default_rng(23))
        tr = obs.transmitters[0]

        def best_fit(phi):
            best = -np.inf
            for bits in range(8):
                b = np.array([1.0 if bits >> k & 1 else -1.0 for k in range(3)])
                gb = ctx.contexts[0].g @ b
                fit = 0.0
                for j in range(phi.shape[1]):
                    mu = mle_mu(ctx.contexts[0].g, b, phi[:, j])
                    fit += (
                        np.linalg.norm(phi[:, j]) ** 2
                        - np.linalg.norm(phi[:, j] - mu * gb) ** 2
                    )
                best = max(best, fit)
            return best

        ref = (best_fit(tr.stacked) - best_fit(tr.reference)) / scen.sigma2
        got = pmr_glrt_k_exact(obs, ctx.contexts, scen.sigma2)
        assert abs(got - ref) < 1e-8 * max(1.0, abs(ref))


class TestEvaluateDetector:
    def test_all_kinds_dispatch(self):
        obs, ctx, _, _ = pmr_setup(seed=9)
        for kind in DetectorKind:
            value = evaluate_detector(kind, obs, ctx)
            assert np.isfinite(value)

    def test_reference_required(self):
        fmt = linear_fmt()
        scen = ScenarioConfig(n_tx=1, n_rx=2, include_reference=False)
        ctx = DetectorContext.from_formats((fmt,), scen.sigma2)
        obs = simulate_observation(scen, (fmt,), np.random.default_rng(10))
        for kind in DetectorKind:
            if kind.needs_reference:
                with pytest.raises(ValueError):
                    evaluate_detector(kind, obs, ctx)
            else:
                assert np.isfinite(evaluate_detector(kind, obs, ctx))

    def test_tx_samples_required(self):
        obs, ctx, _, _ = pmr_setup(seed=11)
        stripped = Observations(
            transmitters=tuple(
                TransmitterObservation(surveillance=t.surveillance, reference=t.reference)
                for t in obs
            )
        )
        with pytest.raises(ValueError):
            evaluate_detector(DetectorKind.AMR_GLRT, stripped, ctx)

    def test_transmitter_count_checked(self):
        obs, _, _, scen = pmr_setup(seed=12)
        ctx1 = DetectorContext.from_formats((linear_fmt(),), scen.sigma2)
        with pytest.raises(ValueError):
            evaluate_detector(DetectorKind.PSL_GLRT, obs, ctx1)


class TestStatisticBoundsQuick:
    def test_bounds_on_random_draws(self):
        formats = (linear_fmt(), OfdmFormat(subcarriers=3, samples_per_symbol=2, symbols=1))
        ctx = DetectorContext.from_formats(formats, 1.0)
        mats = tuple(c.g for c in ctx.contexts)
        for seed in range(200):
            scen = ScenarioConfig(
                n_tx=2,
                n_rx=2,
                snr_db=-5.0,
                dnr_db=0.0,
                hypothesis="H0" if seed % 2 else "H1",
            )
            obs = simulate_observation(
                scen, formats, np.random.default_rng(seed), transmit_matrices=mats
            )
            assert pmr_rglrt_k(obs, ctx.contexts, 1.0) >= -1e-9
            assert psl_rglrt_k(obs, ctx.contexts, 1.0) >= -1e-9
            assert pmr_rglrt_uk(obs, ctx.contexts) >= 1.0 - 1e-9
