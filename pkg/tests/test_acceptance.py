"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line; the lines are printed in the
pytest terminal summary, or directly when this file is run as a script.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from caution import (  # noqa: E402
    Binary,
    BinaryNullBoundedSet,
    Existence,
    FiniteDiscrete,
    Gaussian,
    GaussianConjugateSet,
    GaussianMixture,
    HypothesisConfig,
    PValuePair,
    Quadratic,
    UnconstrainedSet,
    WorkingPrior,
    bayes_update_normal,
    blended_posterior,
    contract,
    ellsberg_setting,
    kcg_action_discrete,
    kcg_action_quadratic,
    kl_divergence,
    moderate_action,
    moderate_posterior,
    project_binary,
    project_gaussian,
    self_benchmark_blend,
    two_pvalue_blend,
)
from caution.cli import from_json, parse_config, run_config, to_json  # noqa: E402
from caution.confidence import self_benchmark_projection  # noqa: E402

from oracles import (  # noqa: E402
    binary_grid_argmin,
    binary_kl,
    enumerate_upper_expectation,
    gaussian_grid_argmin,
    quad_kl_gaussian,
)

RESULTS = {}


def record(number, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {name} ({detail})"
    RESULTS[number] = line
    print(line)
    assert ok, line


# ---------------------------------------------------------------- 1


def test_criterion_01_binary_clip_vs_grid():
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        pi_low = rng.uniform(0.01, 0.99)
        w = rng.uniform(pi_low, 1.0)
        kappa = rng.uniform(0.0, 1.0)
        p = rng.uniform(0.0, 1.0)
        cset = contract(BinaryNullBoundedSet(pi_low), Binary(w), kappa)
        got = project_binary(cset, Binary(p))[0].p0
        lo, hi = cset.null_interval
        worst = max(worst, abs(got - binary_grid_argmin(p, lo, hi)))
    elapsed = time.perf_counter() - start
    record(1, "binary clip vs 1e-6 grid", worst <= 2e-6 and elapsed < 30, f"max err {worst:.2e}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 2


def test_criterion_02_binary_case_table():
    cset = contract(BinaryNullBoundedSet(0.1), Binary(0.5), 0.5)
    outs = {p: project_binary(cset, Binary(p)) for p in (0.2, 0.5, 0.9)}
    expected = {0.2: (0.3, "clipped_low"), 0.5: (0.5, "interior"), 0.9: (0.75, "clipped_high")}
    ok = all(
        abs(outs[p][0].p0 - q) <= 1e-12 and outs[p][2].value == flag for p, (q, flag) in expected.items()
    )
    detail = ", ".join(f"p={p}->{outs[p][0].p0:.12g} {outs[p][2].value}" for p in outs)
    record(2, "three-case clip table", ok, detail)


# ---------------------------------------------------------------- 3


def gaussian_full_caution(base, x):
    # at full caution the divergence to N(x, 1) falls with t, so t sits at its upper bound
    t = base.t_bounds[1]
    mu = min(max(x, base.mu_lo), base.mu_hi)
    return Gaussian((1 - t) * mu + t * x if t < 1 else x, t)


def two_pvalue_full_caution(p1, p2, w, pi_low):
    if p2 < pi_low:
        return pi_low
    if p1 < pi_low:
        return p2
    # both absorbed: the one whose divergence from the working posterior is smaller
    d = [float(binary_kl(np.array([w]), p)[0]) for p in (p1, p2)]
    return p1 if d[0] <= d[1] else p2


def test_criterion_03_endpoint_reductions():
    failures = []
    checks = 0

    def check(cond, what):
        nonlocal checks
        checks += 1
        if not cond:
            failures.append(what)

    # gaussian_blend
    for x, mu_dot, s_dot, bounds in [
        (0.0, 2.0, 1.0, {}),
        (1.5, 0.0, 0.8, dict(mu_lo=-1.0, mu_hi=0.5, sigma_lo=0.2, sigma_hi=1.5)),
        (-0.7, 0.3, 1.2, dict(mu_lo=-2.0, mu_hi=2.0, sigma_lo=0.5, sigma_hi=3.0)),
        (2.0, 1.0, 1.0, dict(mu_lo=0.0, mu_hi=1.0)),
    ]:
        base = GaussianConjugateSet(x, **bounds)
        working = bayes_update_normal(WorkingPrior(mu_dot, s_dot), x)
        bench = [Gaussian(x, 1.0)]
        check(moderate_posterior(working, base, bench, 0.0).posterior == working, f"gaussian k=0 x={x}")
        got = moderate_posterior(working, base, bench, 1.0).posterior
        ref = gaussian_full_caution(base, x)
        check(
            abs(got.mean - ref.mean) <= 1e-12 and abs(got.variance - ref.variance) <= 1e-12,
            f"gaussian k=1 x={x}: {got} vs {ref}",
        )
        got_u = moderate_posterior(working, UnconstrainedSet(), bench, 1.0).posterior
        check(got_u == bench[0], f"gaussian unconstrained k=1 x={x}")

    # binary_blend and self_benchmark
    for p, w, pi_low in [(0.2, 0.5, 0.1), (0.03, 0.6, 0.25), (0.7, 0.3, 0.2), (0.25, 0.25, 0.25)]:
        base = BinaryNullBoundedSet(pi_low)
        check(moderate_posterior(Binary(w), base, [Binary(p)], 0.0).posterior == Binary(w), f"binary k=0 p={p}")
        got = moderate_posterior(Binary(w), base, [Binary(p)], 1.0).posterior.p0
        check(abs(got - max(pi_low, p)) <= 1e-12, f"binary k=1 p={p}")
        check(
            abs(blended_posterior(Binary(w), base, [Binary(p)]).posterior.p0 - max(pi_low, p)) <= 1e-12,
            f"blended p={p}",
        )
        check(self_benchmark_blend(p, pi_low, 0.0) == Binary(p), f"self k=0 p={p}")
        check(abs(self_benchmark_blend(p, pi_low, 1.0).p0 - max(pi_low, p)) <= 1e-12, f"self k=1 p={p}")

    # two_pvalue
    for p1, p2, w, pi_low in [
        (0.01, 0.04, 0.5, 0.1),
        (0.04, 0.2, 0.5, 0.1),
        (0.2, 0.4, 0.5, 0.1),
        (0.3, 0.9, 0.6, 0.2),
    ]:
        pair = PValuePair(p1, p2)
        check(
            two_pvalue_blend(pair, HypothesisConfig(0.5, w, 0.0), pi_low=pi_low).posterior == Binary(w),
            f"two-p k=0 {p1},{p2}",
        )
        got = two_pvalue_blend(pair, HypothesisConfig(0.5, w, 1.0), pi_low=pi_low).posterior.p0
        check(abs(got - two_pvalue_full_caution(p1, p2, w, pi_low)) <= 1e-12, f"two-p k=1 {p1},{p2}")

    # ellsberg_kcg: working expected loss at k=0, enumerated upper expectation at k=1
    for setting in (1, 2):
        loss, plausible, working = ellsberg_setting(setting)
        own = [float(np.dot(working.masses, row)) for row in loss.loss]
        upper = [enumerate_upper_expectation(row, plausible.lower, plausible.upper) for row in loss.loss]
        check(abs(kcg_action_discrete(loss, plausible, working, 0.0).objective - min(own)) <= 1e-12, "ellsberg k=0")
        check(abs(kcg_action_discrete(loss, plausible, working, 1.0).objective - min(upper)) <= 1e-9, "ellsberg k=1")

    record(3, "endpoint reductions", not failures, f"{checks - len(failures)}/{checks} checks" + (f"; {failures[:3]}" if failures else ""))


# ---------------------------------------------------------------- 4


def test_criterion_04_unconstrained_absorbs_benchmark():
    rng = np.random.default_rng(4)
    worst = 0.0
    ok = True
    for kappa in list(rng.uniform(1e-6, 1.0, 25)) + [1e-12, 1.0]:
        b = Binary(rng.uniform(0.01, 0.99))
        res = moderate_posterior(Binary(rng.uniform(0.01, 0.99)), UnconstrainedSet(), [b], kappa)
        ok &= res.posterior == b
        worst = max(worst, res.achieved_divergence.value, kl_divergence(res.posterior, b).value)
        g = Gaussian(rng.normal(), rng.uniform(0.2, 3.0))
        working = bayes_update_normal(WorkingPrior(rng.normal(), rng.uniform(0.3, 2.0)), g.mean)
        res = moderate_posterior(working, UnconstrainedSet(), [g], kappa)
        ok &= res.posterior == g
        worst = max(worst, res.achieved_divergence.value, kl_divergence(res.posterior, g).value)
    record(4, "unconstrained base returns benchmark", ok and worst < 1e-9, f"max divergence {worst:.1e}")


# ---------------------------------------------------------------- 5


def two_pvalue_grid_oracle(p1, p2, w, pi_low, kappa):
    lo, hi = kappa * pi_low + (1 - kappa) * w, kappa + (1 - kappa) * w
    qs = [binary_grid_argmin(p, lo, hi) for p in (p1, p2)]
    divs = [float(binary_kl(np.array([q]), p)[0]) for q, p in zip(qs, (p1, p2))]
    tied = [i for i in (0, 1) if divs[i] <= min(divs) + 1e-9]
    if len(tied) == 1:
        return qs[tied[0]]
    closeness = [float(binary_kl(np.array([w]), qs[i])[0]) for i in tied]
    return qs[tied[int(np.argmin(closeness))]]


def test_criterion_05_two_pvalue_regimes():
    # interval [0.3, 0.75) for kappa = 0.5, working 0.5, lower bound 0.1
    fixtures = [
        ("both below", 0.05, 0.2, 0.5, 0.3),
        ("p2 inside", 0.1, 0.4, 0.5, 0.4),
        ("both inside", 0.35, 0.6, 0.5, 0.6),
        ("p1 inside", 0.4, 0.9, 0.5, 0.4),
        ("both above", 0.8, 0.95, 0.5, 0.75),
        ("tie at full caution", 0.2, 0.4, 1.0, 0.4),
    ]
    bad = []
    for name, p1, p2, kappa, printed in fixtures:
        got = two_pvalue_blend(PValuePair(p1, p2), HypothesisConfig(0.5, 0.5, kappa), pi_low=0.1).posterior.p0
        oracle = two_pvalue_grid_oracle(p1, p2, 0.5, 0.1, kappa)
        if abs(got - printed) > 1e-12 or abs(oracle - printed) > 2e-6:
            bad.append(f"{name}: got {got}, oracle {oracle}, case value {printed}")
    record(5, "two-p-value regimes", not bad, f"{len(fixtures) - len(bad)}/{len(fixtures)} fixtures" + (f"; {bad}" if bad else ""))


# ---------------------------------------------------------------- 6


def test_criterion_06_ellsberg():
    cases = [(s, k) for s in (1, 2) for k in (0.1, 0.5, 1.0)]
    start = time.perf_counter()
    results = {}
    for setting, kappa in cases:
        loss, plausible, working = ellsberg_setting(setting)
        results[setting, kappa] = kcg_action_discrete(loss, plausible, working, kappa)
    elapsed = time.perf_counter() - start

    bad = []
    for setting, kappa in cases:
        loss, plausible, working = ellsberg_setting(setting)
        # hand enumeration of both actions' blended objectives
        hand = [
            kappa * enumerate_upper_expectation(row, plausible.lower, plausible.upper)
            + (1 - kappa) * float(np.dot(working.masses, row))
            for row in loss.loss
        ]
        winner, value = ("I", -100.0 / 3.0) if setting == 1 else ("IV", -200.0 / 3.0)
        res = results[setting, kappa]
        if res.action != winner or abs(res.objective - value) > 1e-9 or abs(min(hand) - value) > 1e-9:
            bad.append((setting, kappa, res.action, res.objective, hand))
    record(6, "Ellsberg actions I and IV", not bad and elapsed < 1.0, f"{elapsed * 1e3:.1f}ms" + (f"; {bad}" if bad else ""))


# ---------------------------------------------------------------- 7


def test_criterion_07_example_dichotomy():
    x = 1.3
    working = bayes_update_normal(WorkingPrior(-0.4, 0.9), x)
    bench = Gaussian(x, 1.0)
    exist_ok, worst = True, 0.0
    for kappa in np.linspace(0.05, 1.0, 20):
        for base in (GaussianConjugateSet(x), GaussianConjugateSet(x, mu_lo=-1.0), GaussianConjugateSet(x, mu_hi=3.0)):
            exist_ok &= kcg_action_quadratic(base, working, kappa).existence is Existence.NONEXISTENT
        post = moderate_posterior(working, UnconstrainedSet(), [bench], kappa).posterior
        worst = max(worst, abs(moderate_action(post, Quadratic()).action - x))
    record(7, "kCG nonexistent, moderate action = x", exist_ok and worst <= 1e-6, f"max |a - x| {worst:.1e}")


# ---------------------------------------------------------------- 8


def test_criterion_08_gaussian_vs_grid():
    rng = np.random.default_rng(8)
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        x = rng.uniform(-3, 3)
        mu_lo = rng.uniform(-2, 2)
        mu_hi = mu_lo + rng.uniform(0.0, 0.75)
        s_lo = rng.uniform(0.0, 1.5)
        s_hi = math.inf if i % 5 == 0 else s_lo + rng.uniform(0.05, 2.0)
        base = GaussianConjugateSet(x, mu_lo, mu_hi, s_lo, s_hi)
        s_dot = s_lo + 0.5 if math.isinf(s_hi) else 0.5 * (s_lo + s_hi)
        working = base.posterior(0.5 * (mu_lo + mu_hi), max(s_dot, 1e-3))
        post, _, _ = project_gaussian(contract(base, working, 1.0), Gaussian(x, 1.0))
        t_lo, t_hi = base.t_bounds
        m, t = gaussian_grid_argmin(x, mu_lo, mu_hi, t_lo, t_hi, x, 1.0)
        worst = max(worst, abs(post.mean - m), abs(post.variance - t))
    elapsed = time.perf_counter() - start
    record(8, "Gaussian projection vs 400x400 grid", worst <= 1e-3 and elapsed < 60, f"max err {worst:.1e}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 9


def test_criterion_09_self_benchmark():
    rng = np.random.default_rng(9)
    worst, bypass_ok, bypass_seen = 0.0, True, 0
    for _ in range(10_000):
        p, pi_low, kappa = rng.uniform(0, 1), rng.uniform(0.01, 0.99), rng.uniform(0, 1)
        closed = self_benchmark_blend(p, pi_low, kappa).p0
        worst = max(worst, abs(closed - self_benchmark_projection(p, pi_low, kappa)[0].p0))
        if kappa < 1 and p < pi_low:
            bypass_seen += 1
            bypass_ok &= closed < pi_low
    record(9, "self-benchmark equivalence and bypass", worst <= 1e-12 and bypass_ok and bypass_seen > 0, f"max diff {worst:.1e}, bypass cases {bypass_seen}")


# ---------------------------------------------------------------- 10


def test_criterion_10_kl_correctness():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(1000):
        m1, m2 = rng.uniform(-5, 5, 2)
        v1, v2 = rng.uniform(0.1, 10, 2)
        worst = max(worst, abs(kl_divergence(Gaussian(m1, v1), Gaussian(m2, v2)).value - quad_kl_gaussian(m1, v1, m2, v2)))

    def draws():
        for _ in range(100):
            a, b = rng.uniform(0.01, 0.99, 2)
            yield Binary(a), Binary(b)
            ma, mb = rng.dirichlet(np.ones(4), 2)
            yield FiniteDiscrete(("a", "b", "c", "d"), ma), FiniteDiscrete(("a", "b", "c", "d"), mb)
            yield Gaussian(rng.normal(), rng.uniform(0.1, 4)), Gaussian(rng.normal(), rng.uniform(0.1, 4))
            k = rng.uniform(0.05, 0.95)
            mixture = GaussianMixture((k, 1 - k), (Gaussian(rng.normal(), rng.uniform(0.1, 3)), Gaussian(rng.normal(), rng.uniform(0.1, 3))))
            yield mixture, Gaussian(rng.normal(), rng.uniform(0.1, 4))
            yield mixture, mixture

    nonneg, ident = True, True
    for p, q in draws():
        d = kl_divergence(p, q).value
        nonneg &= d >= 0.0
        ident &= kl_divergence(p, p).value <= 1e-12
        if p is not q:
            # the random draws are distinct almost surely
            ident &= d > 0.0
    record(10, "KL closed form, non-negativity, identity", worst <= 1e-7 and nonneg and ident, f"max |closed - quad| {worst:.1e}")


# ---------------------------------------------------------------- 11

_CLI_CONFIGS = [
    'kind = "gaussian_blend"\n[parameters]\nx = 0.4\nmu_dot = 1.0\nsigma_dot = 0.8\nmu_lo = -1.0\nmu_hi = 2.0\n'
    "sigma_lo = 0.3\nsigma_hi = 2.0\nkappa = [0.0, 0.3, 0.7, 1.0]\n",
    'kind = "binary_blend"\n[parameters]\np = [0.2, 0.9]\nworking_null_prob = 0.5\npi_low = 0.1\nkappa = [0.0, 0.5, 1.0]\n',
    'kind = "two_pvalue"\n[parameters]\np1 = 0.04\np2 = 0.2\nworking_null_prob = 0.5\npi_prior_low = 0.3\nkappa = [0.0, 1.0]\n',
    'kind = "ellsberg_kcg"\n[parameters]\nkappa = [0.1, 0.5, 1.0]\n',
    'kind = "self_benchmark"\n[parameters]\np = 0.05\npi_low = 0.2\nkappa = [0.0, 0.5, 1.0]\n',
]


def _floats(obj):
    if isinstance(obj, float):
        yield obj
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _floats(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _floats(v)


def test_criterion_11_cli_determinism(tmp_path):
    bad = []
    for i, text in enumerate(_CLI_CONFIGS):
        cfg = tmp_path / f"c{i}.toml"
        cfg.write_text(text)
        outputs = []
        for fmt in ("json", "csv"):
            for run in range(2):
                out = tmp_path / f"c{i}_{run}.{fmt}"
                subprocess.run(
                    [sys.executable, "-m", "caution", "run", str(cfg), "--format", fmt, "--out", str(out), "--quiet"],
                    check=True,
                )
                outputs.append(out.read_bytes())
        if outputs[0] != outputs[1] or outputs[2] != outputs[3]:
            bad.append(f"config {i}: bytes differ")
        record_ = run_config(parse_config(_tomllib().loads(text)))
        js = to_json(record_)
        back = from_json(js)
        if back.rows != record_.rows or to_json(back) != js:
            bad.append(f"config {i}: round trip changed values")
        for v in _floats(json.loads(js)):
            if float(format(v, ".17g")) != v:
                bad.append(f"config {i}: {v!r} not exact at 17 digits")
        if js != outputs[0].decode():
            bad.append(f"config {i}: in-memory and CLI JSON differ")
    record(11, "CLI determinism and JSON round trip", not bad, f"{len(_CLI_CONFIGS)} configs" + (f"; {bad}" if bad else ""))


def _tomllib():
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
