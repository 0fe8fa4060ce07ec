"""Runtime invariant battery behind the ``check`` subcommand.

Each entry measures one identity or bound and reports
(name, measured, threshold, passed); the suite passes when every exact
identity holds to 1e-10 and every Monte-Carlo bound holds at its stated
confidence.  The sup-moment constant check never hard-fails: the bound only
guarantees that some constant >= 2 works, so the smallest sufficient value
is reported instead.
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import HWeightConfig, ah_norm, level_h_weights, truncation_tail
from .brownian import TimeGrid, sample_brownian, sample_increments_batch
from .experiments import functional_value_series, word_coordinate_stats
from .models import (
    DelayParams,
    DiracMixture,
    ExpSumKernel,
    VolterraParams,
    delay_domination_witness,
    delay_functional,
    delay_pair,
    volterra_domination_witness,
    volterra_functional,
    volterra_pair,
)
from .signature import expected_signature, signature_stream
from .tensor import (
    TruncatedTensor,
    concat_mul,
    concat_pow,
    dominates,
    project,
    resolvent,
    shuffle_exp,
    shuffle_mul,
    shuffle_pow,
)
from .words import iter_words

EXACT_TOL = 1e-10


def _rel_gap(a: TruncatedTensor, b: TruncatedTensor, top: int | None = None) -> float:
    scale = 1.0 + max(a.max_abs(), b.max_abs())
    cap = a.level_cap if top is None else top
    gap = max(
        float(np.max(np.abs(a.levels[n] - b.levels[n]))) if a.levels[n].size else 0.0
        for n in range(cap + 1)
    )
    return gap / scale


def _random_tensor(rng, d, cap, top=None, scale=1.0):
    out = TruncatedTensor.zeros(d, cap)
    for n in range((cap if top is None else top) + 1):
        out.levels[n][:] = scale * rng.standard_normal(d**n)
    return out


def _entry(name, measured, threshold, passed=None, **extra):
    if passed is None:
        passed = bool(measured <= threshold)
    return {"name": name, "measured": float(measured), "threshold": float(threshold),
            "passed": bool(passed), **extra}


def _generic_volterra() -> VolterraParams:
    return VolterraParams.scalar(
        0.8, 0.6, -0.5, DiracMixture(((0.3, 0.5),)), 1.1, 0.4, DiracMixture(((0.4, 1.2),))
    )


def _fig2_delay() -> list[DelayParams]:
    return [
        DelayParams.scalar(0.0, 1.5, 0.0, ExpSumKernel(((-1.0, -2.0),)),
                           3.0, 0.0, ExpSumKernel(((-2.0, -1.0),))),
        DelayParams.scalar(0.0, -1.0, -2.0, ExpSumKernel(((2.0, -3.0),)),
                           1.0, 1.0, ExpSumKernel(((1.0, -3.0),))),
    ]


def check_exact_algebra(level_cap: int, master_seed: int) -> list[dict]:
    rng = np.random.default_rng(master_seed)
    entries = []

    worst = 0.0
    for d in (2, 3):
        letters = TruncatedTensor.from_letter_coeffs(d, level_cap, rng.standard_normal(d))
        for k in range(min(level_cap, 5) + 1):
            worst = max(worst, _rel_gap(
                shuffle_pow(letters, k), math.factorial(k) * concat_pow(letters, k)
            ))
    entries.append(_entry("shuffle_power_factorial", worst, EXACT_TOL))

    worst = 0.0
    for d in (2, 3):
        unit = TruncatedTensor.unit(d, level_cap)
        for _ in range(50):
            q = _random_tensor(rng, d, level_cap)
            q.levels[0][0] = 0.9 * (2.0 * rng.random() - 1.0)
            r = resolvent(q)
            # backward-style normalization: round-off scales with the size of
            # the resolvent coefficients, which blow up as |scalar| nears 1
            scale = (1.0 + q.max_abs()) * (1.0 + r.max_abs())
            left = concat_mul(unit - q, r) - unit
            right = concat_mul(r, unit - q) - unit
            worst = max(worst, left.max_abs() / scale, right.max_abs() / scale)
    entries.append(_entry("resolvent_two_sided_inverse", worst, EXACT_TOL))

    worst = 0.0
    for d in (2, 3):
        unit = TruncatedTensor.unit(d, level_cap)
        a = TruncatedTensor.from_letter_coeffs(d, level_cap, rng.standard_normal(d))
        b = TruncatedTensor.from_letter_coeffs(d, level_cap, rng.standard_normal(d))
        eb = shuffle_exp(b)
        worst = max(worst, _rel_gap(
            resolvent(concat_mul(a, eb)), concat_mul(unit - b, shuffle_exp(a + b))
        ))
        worst = max(worst, _rel_gap(
            resolvent(concat_mul(eb, a)), concat_mul(shuffle_exp(a + b), unit - b)
        ))
    entries.append(_entry("resolvent_exp_identity", worst, EXACT_TOL))

    worst = 0.0
    p = _random_tensor(rng, 2, level_cap)
    q = _random_tensor(rng, 2, level_cap, scale=0.5)
    q.levels[0][0] = 0.3
    ell = concat_mul(p, resolvent(q))
    for i in (1, 2):
        lhs = project(ell, (i,))
        rhs = (project(p, (i,)) + concat_mul(ell, project(q, (i,)))) * (1.0 / (1.0 - q.scalar))
        worst = max(worst, _rel_gap(lhs, rhs, top=level_cap - 1))
    entries.append(_entry("projection_of_resolvent", worst, EXACT_TOL))

    worst = 0.0
    for d, i in ((2, 1), (2, 2), (3, 3)):
        ell = _random_tensor(rng, d, level_cap, top=level_cap // 2)
        b = TruncatedTensor.from_letter_coeffs(d, level_cap, rng.standard_normal(d))
        letter = TruncatedTensor.from_word(d, level_cap, (i,))
        lhs = concat_mul(concat_mul(ell, letter), shuffle_exp(b))
        rhs = shuffle_mul(
            shuffle_exp(b), concat_mul(shuffle_mul(shuffle_exp(-1.0 * b), ell), letter)
        )
        worst = max(worst, _rel_gap(lhs, rhs))
    entries.append(_entry("exp_transformation", worst, EXACT_TOL))

    rebuilt_worst = 0.0
    for d in (2, 3):
        ell = _random_tensor(rng, d, level_cap)
        rebuilt = ell.scalar * TruncatedTensor.unit(d, level_cap)
        for i in range(1, d + 1):
            rebuilt = rebuilt + concat_mul(
                project(ell, (i,)), TruncatedTensor.from_word(d, level_cap, (i,))
            )
        rebuilt_worst = max(rebuilt_worst, _rel_gap(rebuilt, ell))
    entries.append(_entry("projection_reconstruction", rebuilt_worst, EXACT_TOL))

    params = _generic_volterra()
    p_vol, q_vol = volterra_pair(params, level_cap)
    ell_vol = volterra_functional(params, level_cap)
    unit = TruncatedTensor.unit(2, level_cap)
    worst = _rel_gap(ell_vol, p_vol + concat_mul(ell_vol, q_vol))
    k20 = params.mixtures[1].at_zero()
    base = k20 * (params.a[1] * unit + params.b[1] * ell_vol)
    worst = max(worst, _rel_gap(project(ell_vol, (2,)), base, top=level_cap - 1))
    worst = max(worst, _rel_gap(project(ell_vol, (2, 2)), k20 * params.b[1] * base,
                                top=level_cap - 2))
    entries.append(_entry("volterra_fixed_point", worst, EXACT_TOL))
    ok, violation = dominates(q_vol, volterra_domination_witness(params, level_cap))
    entries.append(_entry("volterra_domination", 0.0 if ok else 1.0, 0.5,
                          violation=str(violation) if violation else None))

    worst = 0.0
    dominated = True
    one = TruncatedTensor.from_word(2, level_cap, (1,))
    for scen in _fig2_delay():
        p_de, q_de = delay_pair(scen, level_cap)
        ell_de = delay_functional(scen, level_cap)
        worst = max(worst, _rel_gap(ell_de, p_de + concat_mul(ell_de, q_de)))
        conv = [TruncatedTensor.zeros(2, level_cap) for _ in range(2)]
        for idx in range(2):
            for c, alpha in scen.kernels[idx].terms:
                conv[idx] = conv[idx] + c * concat_mul(one, shuffle_exp(alpha * one))
        rhs2 = concat_mul(ell_de, scen.b[1] * unit + conv[1]) + scen.a[1] * unit
        worst = max(worst, _rel_gap(project(ell_de, (2,)), rhs2, top=level_cap - 1))
        lhs1 = project(ell_de, (1,)) + 0.5 * project(ell_de, (2, 2))
        rhs1 = concat_mul(ell_de, scen.b[0] * unit + conv[0]) + scen.a[0] * unit
        worst = max(worst, _rel_gap(lhs1, rhs1, top=level_cap - 2))
        ok, _ = dominates(q_de, delay_domination_witness(scen))
        dominated = dominated and ok
    entries.append(_entry("delay_fixed_point", worst, EXACT_TOL))
    entries.append(_entry("delay_domination", 0.0 if dominated else 1.0, 0.5))
    return entries


def check_pathwise(level_cap: int, master_seed: int, n_paths: int) -> list[dict]:
    rng = np.random.default_rng(master_seed + 1)
    entries = []
    grid = TimeGrid(1.0, 500)

    # Chen consistency and exactness of the pure time words on one stream
    path = sample_brownian(grid, 1, master_seed, 0)
    stream = signature_stream(path, min(level_cap, 6))
    cut = grid.steps // 2
    tail_grid = TimeGrid(grid.horizon - grid.times()[cut], grid.steps - cut)
    from .brownian import BrownianPath

    restarted = BrownianPath(tail_grid, path.increments[cut:], master_seed, 0)
    tail = signature_stream(restarted, min(level_cap, 6))
    chen_gap = _rel_gap(
        stream.sigs[-1], concat_mul(stream.sigs[cut], tail.sigs[-1])
    )
    entries.append(_entry("chen_consistency", chen_gap, EXACT_TOL))
    time_err = max(
        abs(stream.sigs[k].coeff((1,) * n) - grid.times()[k] ** n / math.factorial(n))
        for k in (1, grid.steps // 3, grid.steps)
        for n in range(min(level_cap, 6) + 1)
    )
    entries.append(_entry("time_word_exactness", time_err, EXACT_TOL))

    # shuffle identity along streams: random low-level functionals
    cap = min(level_cap, 6)
    n_stream_paths = min(n_paths, 100)
    lows = [_random_tensor(rng, 2, cap, top=min(3, cap // 2)) for _ in range(4)]
    prods = [shuffle_mul(a, b) for a in lows[:2] for b in lows[2:]]
    vals, _ = functional_value_series(
        lows + prods, 2, cap, grid, master_seed, range(n_stream_paths)
    )
    worst = 0.0
    k = 0
    for ai, a in enumerate(lows[:2]):
        for bi, b in enumerate(lows[2:]):
            lhs = vals[ai] * vals[2 + bi]
            worst = max(worst, float(np.max(np.abs(lhs - vals[4 + k]))))
            k += 1
    entries.append(_entry("shuffle_pathwise", worst, EXACT_TOL,
                          max_abs_residual=float(worst)))

    # Ito decomposition residual: order-1/2 scaling in the step count
    cap_ito = min(level_cap, 6)
    rms = {}
    for steps in (250, 1000):
        g = TimeGrid(1.0, steps)
        functionals = []
        for _ in range(10):
            ell = _random_tensor(rng, 2, cap_ito, top=min(4, cap_ito - 2))
            drift = project(ell, (1,)) + 0.5 * project(ell, (2, 2))
            noise = project(ell, (2,))
            functionals.extend([ell, drift, noise])
        p_idx = range(min(n_paths, 8))
        vals, _ = functional_value_series(
            functionals, 2, cap_ito, g, master_seed + steps, p_idx
        )
        incr = sample_increments_batch(g, 1, master_seed + steps, p_idx)[:, :, 0]
        acc = []
        for f in range(10):
            v, dv, nv = vals[3 * f], vals[3 * f + 1], vals[3 * f + 2]
            drift_int = np.concatenate(
                (np.zeros((v.shape[0], 1)), np.cumsum(dv[:, :-1] * g.dt, axis=1)), axis=1
            )
            noise_int = np.concatenate(
                (np.zeros((v.shape[0], 1)), np.cumsum(nv[:, :-1] * incr, axis=1)), axis=1
            )
            res = v - functionals[3 * f].scalar - drift_int - noise_int
            acc.append(np.sqrt(np.mean(res**2)))
        rms[steps] = float(np.mean(acc))
    entries.append(_entry("ito_residual_scaling", rms[1000] / rms[250], 1.0,
                          rms_fine=rms[1000], rms_coarse=rms[250]))
    return entries


def check_moment_bounds(level_cap: int, master_seed: int, n_paths: int) -> list[dict]:
    entries = []
    grid = TimeGrid(1.0, 256)
    cap = min(level_cap, 4)
    words = [w for n in range(cap + 1) for w in iter_words(2, n)]
    terminal, sup_abs = word_coordinate_stats(
        words, 2, cap, grid, master_seed + 7, n_paths
    )
    target = expected_signature(grid.horizon, cap, 2)

    worst = 0.0
    for wi, w in enumerate(words):
        mean = float(np.mean(terminal[wi]))
        se = float(np.std(terminal[wi]) / math.sqrt(n_paths)) + 1e-15
        worst = max(worst, abs(mean - target.coeff(w)) / se)
    entries.append(_entry("fawcett_expected_signature", worst, 4.0))

    from .bounds import l2_bound

    # the bound is attained exactly by pure-noise and pure-time words, so the
    # allowance follows the sampling error of the squared-coordinate mean; the
    # absolute term keeps deterministic (zero-variance) words off the 0/0 edge
    worst = -math.inf
    for wi, w in enumerate(words):
        if w.n == 0:
            continue
        bound = l2_bound(w, grid.horizon)
        squares = terminal[wi] ** 2
        se = float(np.std(squares)) / math.sqrt(n_paths) + 1e-9 * bound
        worst = max(worst, (float(np.mean(squares)) - bound) / se)
    entries.append(_entry("l2_moment_bound", worst, 4.0))

    needed_c = 0.0
    for wi, w in enumerate(words):
        base = level_h_weights(2, w.n, grid.horizon, HWeightConfig(2.0))[w.index(2)] / 2.0
        esup = float(np.mean(sup_abs[wi] ** 2))
        needed_c = max(needed_c, math.sqrt(esup) / base)
    entries.append(_entry("esup_smallest_sufficient_c", needed_c, max(needed_c, 2.0),
                          passed=True, c2_respected=bool(needed_c <= 2.0)))

    rng = np.random.default_rng(master_seed + 11)
    cfg = HWeightConfig(2.0)
    worst = 0.0
    for _ in range(500):
        a = _random_tensor(rng, 2, min(level_cap, 6))
        b = _random_tensor(rng, 2, min(level_cap, 6))
        prod_norm = ah_norm(concat_mul(a, b), 1.0, cfg)
        worst = max(worst, prod_norm / (ah_norm(a, 1.0, cfg) * ah_norm(b, 1.0, cfg)))
    entries.append(_entry("ah_submultiplicative", worst, 1.0 + 1e-12))

    # truncation tail bound against the measured sup gap on simulated paths
    tail_cap = max(level_cap, 10)
    scenario = _fig2_delay()[0]
    ell = delay_functional(scenario, tail_cap)
    bound = truncation_tail(ell, 8, grid.horizon, cfg)
    low = ell.copy()
    for n in range(9, tail_cap + 1):
        low.levels[n][:] = 0.0
    vals, _ = functional_value_series(
        [ell, low], 2, tail_cap, grid, master_seed + 13, range(min(n_paths, 64))
    )
    measured = float(np.mean(np.max(np.abs(vals[0] - vals[1]), axis=1)))
    entries.append(_entry("truncation_tail_bound", measured / bound, 1.0,
                          bound=bound, measured_sup_gap=measured))
    return entries


def run_check_suite(level_cap: int, master_seed: int, n_paths: int) -> dict:
    if level_cap < 1:
        raise ValueError(f"level cap must be >= 1, got {level_cap}")
    if n_paths < 1:
        raise ValueError(f"need at least one path, got {n_paths}")
    invariants = (
        check_exact_algebra(level_cap, master_seed)
        + check_pathwise(level_cap, master_seed, n_paths)
        + check_moment_bounds(level_cap, master_seed, n_paths)
    )
    return {
        "config": {"level": level_cap, "seed": master_seed, "paths": n_paths},
        "invariants": invariants,
        "passed": all(e["passed"] for e in invariants),
    }
