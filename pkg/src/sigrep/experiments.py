"""Monte-Carlo experiments: batched evaluation, MSE tables, diagnostics.

All reductions over paths run in fixed path-index order, and every path is a
pure function of (master seed, path index), so results are byte-identical
for any batch size or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from . import _stepper
from .brownian import TimeGrid, sample_increments_batch
from .models import (
    DelayParams,
    DiracMixture,
    VolterraParams,
    delay_functional,
    riemann_liouville_coeffs,
    riemann_liouville_kernel,
    shifted_kernel,
    volterra_functional,
)
from .signature import flatten_tensor
from .simulate import (
    closed_form_gbm_batch,
    euler_delay_batch,
    euler_volterra_batch,
    gv_quadrature_batch,
    heun_delay_batch,
)
from .tensor import TruncatedTensor
from .words import Word

DEFAULT_BATCH = 512
DELAY_REFERENCE_SCHEMES = {"heun": heun_delay_batch, "euler": euler_delay_batch}


def _flat_functionals(functionals: Sequence[TruncatedTensor], d: int, cap: int) -> list[np.ndarray]:
    out = []
    for f in functionals:
        if f.d != d or f.level_cap > cap:
            raise ValueError("functional does not fit the run alphabet/cap")
        out.append(flatten_tensor(f))
    return out


def functional_value_series(
    functionals: Sequence[TruncatedTensor],
    d: int,
    level_cap: int,
    grid: TimeGrid,
    master_seed: int,
    path_indices: Sequence[int],
    time_varying: Sequence = (),
    batch_size: int = DEFAULT_BATCH,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate functionals along batched signature streams.

    Returns (constant_values, time_varying_values) with shapes
    (len(functionals), P, steps+1) and (len(time_varying), P, steps+1).
    Constant functionals may carry a smaller level cap than the run; they are
    paired against the matching prefix of the flat signature, which is exact
    because signature levels do not depend on the cap above them.
    """
    flats = _flat_functionals(functionals, d, level_cap)
    n_paths = len(path_indices)
    steps = grid.steps
    const_vals = np.empty((len(flats), n_paths, steps + 1))
    tv_vals = np.empty((len(time_varying), n_paths, steps + 1))
    times = grid.times()
    tv_flat = [
        np.stack([flatten_tensor(tv.at(t)) for t in times]) for tv in time_varying
    ]
    start = 0
    while start < n_paths:
        stop = min(start + batch_size, n_paths)
        incr = sample_increments_batch(grid, d - 1, master_seed, list(path_indices[start:stop]))
        rows = slice(start, stop)

        def record(k: int, flat: np.ndarray) -> None:
            for fi, lf in enumerate(flats):
                const_vals[fi, rows, k] = flat[:, : lf.size] @ lf
            for gi, tf in enumerate(tv_flat):
                const = tf[k]
                tv_vals[gi, rows, k] = flat[:, : const.size] @ const

        _stepper.run_batch(incr, grid.dt, d, level_cap, record)
        start = stop
    return const_vals, tv_vals


def word_coordinate_stats(
    word_list: Sequence[Word],
    d: int,
    level_cap: int,
    grid: TimeGrid,
    master_seed: int,
    n_paths: int,
    batch_size: int = DEFAULT_BATCH,
) -> tuple[np.ndarray, np.ndarray]:
    """Terminal values and running sup of |coordinate| for selected words.

    Returns (terminal, sup_abs), both shaped (len(word_list), n_paths).
    """
    offsets = _stepper.level_offsets(d, level_cap)
    cols = np.array([offsets[w.n] + w.index(d) for w in word_list])
    terminal = np.empty((len(word_list), n_paths))
    sup_abs = np.zeros((len(word_list), n_paths))
    start = 0
    while start < n_paths:
        stop = min(start + batch_size, n_paths)
        incr = sample_increments_batch(grid, d - 1, master_seed, range(start, stop))
        rows = slice(start, stop)

        def record(k: int, flat: np.ndarray) -> None:
            coords = flat[:, cols]
            np.maximum(sup_abs[:, rows], np.abs(coords.T), out=sup_abs[:, rows])
            if k == grid.steps:
                terminal[:, rows] = coords.T

        _stepper.run_batch(incr, grid.dt, d, level_cap, record)
        start = stop
    return terminal, sup_abs


# -- fast path for the power-law moving average --------------------------------


def time_noise_word_values(
    level_cap: int, grid: TimeGrid, increments: np.ndarray, coeff_at
) -> np.ndarray:
    """Series sum_n coeff_at(t)[n] * <time^n noise, sig_t> for a batch of paths.

    The coordinates on the words (time^n, noise) close under the stepping
    update: the only prefixes of time^n noise are pure time words, whose
    coordinates are t^j/j!.  This evaluates time-dependent functionals
    supported on those words in O(level_cap^2) per step without forming the
    full signature; coordinates agree exactly with the dense stream.
    """
    n_paths, steps = increments.shape
    dt = grid.dt
    times = grid.times()
    inv_fact = _stepper.inverse_factorials(level_cap + 1)
    state = np.zeros((n_paths, level_cap))
    out = np.empty((n_paths, steps + 1))
    out[:, 0] = state @ coeff_at(times[0])
    dt_pows = dt ** np.arange(level_cap)
    for k in range(steps):
        t = times[k]
        t_pows = t ** np.arange(level_cap)
        # g[n] = sum_j t^j/j! * dt^(n-j)/(n-j+1)!
        g = np.array(
            [
                sum(
                    t_pows[j] * inv_fact[j] * dt_pows[n - j] * inv_fact[n - j + 1]
                    for j in range(n + 1)
                )
                for n in range(level_cap)
            ]
        )
        state += np.outer(increments[:, k], g)
        out[:, k + 1] = state @ coeff_at(times[k + 1])
    return out


def rl_value_series(
    hurst: float, eps: float, level_cap: int, grid: TimeGrid, increments: np.ndarray
) -> np.ndarray:
    """Truncated evaluation of the shifted power-law moving average."""
    return time_noise_word_values(
        level_cap,
        grid,
        increments,
        lambda t: riemann_liouville_coeffs(hurst, eps, t, level_cap),
    )


# -- MSE tables -----------------------------------------------------------------


@dataclass(frozen=True)
class MseTable:
    truncations: tuple[int, ...]
    scenarios: tuple[str, ...]
    cells: np.ndarray  # (len(truncations), len(scenarios))


def _paths_for_cap(cap: int, n_paths: int, n_paths_deep: int) -> int:
    return n_paths if cap <= 8 else n_paths_deep


def rl_mse_table(
    hursts: Sequence[float],
    truncations: Sequence[int],
    grid: TimeGrid,
    eps: float,
    n_paths: int,
    n_paths_deep: int,
    master_seed: int,
    batch_size: int = 2048,
) -> MseTable:
    """MSE between the shifted power-law quadrature reference and its
    truncated signature evaluation, averaged over paths and grid points."""
    cells = np.zeros((len(truncations), len(hursts)))
    counts = np.zeros(len(truncations))
    max_paths = max(_paths_for_cap(cap, n_paths, n_paths_deep) for cap in truncations)
    start = 0
    while start < max_paths:
        stop = min(start + batch_size, max_paths)
        incr3 = sample_increments_batch(grid, 1, master_seed, range(start, stop))
        incr = incr3[:, :, 0]
        for hi, hurst in enumerate(hursts):
            kernel = shifted_kernel(riemann_liouville_kernel(hurst), eps)
            ref = gv_quadrature_batch(kernel, 0.0, grid, incr)
            for mi, cap in enumerate(truncations):
                rows = _paths_for_cap(cap, n_paths, n_paths_deep) - start
                if rows <= 0:
                    continue
                rows = min(rows, stop - start)
                values = rl_value_series(hurst, eps, cap, grid, incr[:rows])
                cells[mi, hi] += np.sum((ref[:rows] - values) ** 2)
                if hi == 0:
                    counts[mi] += rows * (grid.steps + 1)
        start = stop
    cells /= counts[:, None]
    return MseTable(tuple(truncations), tuple(f"H={h:g}" for h in hursts), cells)


def delay_mse_table(
    scenarios: Sequence[tuple[str, DelayParams]],
    truncations: Sequence[int],
    grid: TimeGrid,
    n_paths: int,
    n_paths_deep: int,
    master_seed: int,
    batch_size: int = 512,
    scheme: str = "heun",
) -> MseTable:
    """MSE between the discretized delay equation and its truncated
    signature evaluations, one stream pass per path budget.

    The predictor-corrector reference is the default: its discretization
    floor sits well below the deep-truncation cells, which a left-point
    Euler reference would swamp."""
    reference = DELAY_REFERENCE_SCHEMES[scheme]
    truncations = list(truncations)
    cells = np.zeros((len(truncations), len(scenarios)))
    shallow = sorted(cap for cap in truncations if cap <= 8)
    deep = sorted(cap for cap in truncations if cap > 8)
    groups = []
    if shallow:
        groups.append((max(shallow), shallow, n_paths))
    if deep:
        groups.append((max(deep), deep, n_paths_deep))
    for run_cap, caps_here, budget in groups:
        functionals = {
            (si, cap): flatten_tensor(delay_functional(params, cap))
            for si, (_, params) in enumerate(scenarios)
            for cap in caps_here
        }
        sse = {key: 0.0 for key in functionals}
        start = 0
        while start < budget:
            stop = min(start + batch_size, budget)
            incr3 = sample_increments_batch(grid, 1, master_seed, range(start, stop))
            incr = incr3[:, :, 0]
            refs = [reference(params, grid, incr) for _, params in scenarios]

            def record(k: int, flat: np.ndarray) -> None:
                for (si, cap), lf in functionals.items():
                    vals = flat[:, : lf.size] @ lf
                    sse[(si, cap)] += float(np.sum((refs[si][:, k] - vals) ** 2))

            _stepper.run_batch(incr3, grid.dt, 2, run_cap, record)
            start = stop
        denom = budget * (grid.steps + 1)
        for (si, cap), value in sse.items():
            cells[truncations.index(cap), si] = value / denom
    return MseTable(tuple(truncations), tuple(name for name, _ in scenarios), cells)


# -- kernel approximation --------------------------------------------------------


def rl_kernel_l2_error(mixture: DiracMixture, hurst: float, horizon: float) -> float:
    """Exact L2([0, horizon]) distance between an exponential-atom mixture and
    the power-law kernel t^(H-1/2)/Gamma(H+1/2), via incomplete-gamma closed
    forms (no quadrature near the singularity)."""
    alpha = hurst + 0.5
    sq = 0.0
    for ci, xi in mixture.atoms:
        for cj, xj in mixture.atoms:
            rate = xi + xj
            sq += ci * cj * (horizon if rate == 0.0 else (1.0 - math.exp(-rate * horizon)) / rate)
    target_sq = horizon ** (2.0 * hurst) / (2.0 * hurst * math.gamma(alpha) ** 2)
    cross = 0.0
    for c, x in mixture.atoms:
        if x == 0.0:
            cross += c * horizon**alpha / (alpha * math.gamma(alpha))
        else:
            cross += c * x ** (-alpha) * float(special.gammainc(alpha, x * horizon))
    return sq - 2.0 * cross + target_sq


def mixture_volterra_vs_shifted_rl_mse(
    mixture: DiracMixture,
    hurst: float,
    eps: float,
    level_cap: int,
    grid: TimeGrid,
    n_paths: int,
    master_seed: int,
    batch_size: int = 2048,
) -> float:
    """MSE between the signature evaluation of the Gaussian Volterra process
    with the eps-damped mixture kernel and the shifted power-law quadrature
    reference, pathwise on shared noise."""
    damped = mixture.shifted(eps)
    params = VolterraParams.scalar(
        0.0, 0.0, 0.0, DiracMixture.point(0.0), 1.0, 0.0, damped
    )
    functional = volterra_functional(params, level_cap)
    flat = flatten_tensor(functional)
    kernel = shifted_kernel(riemann_liouville_kernel(hurst), eps)
    sse = 0.0
    start = 0
    while start < n_paths:
        stop = min(start + batch_size, n_paths)
        incr3 = sample_increments_batch(grid, 1, master_seed, range(start, stop))
        incr = incr3[:, :, 0]
        ref = gv_quadrature_batch(kernel, 0.0, grid, incr)
        acc = np.zeros((stop - start, grid.steps + 1))

        def record(k: int, sig: np.ndarray) -> None:
            acc[:, k] = sig @ flat

        _stepper.run_batch(incr3, grid.dt, 2, level_cap, record)
        sse += float(np.sum((ref - acc) ** 2))
        start = stop
    return sse / (n_paths * (grid.steps + 1))


# -- trajectory frames ------------------------------------------------------------


def rl_trajectories(
    hurst: float,
    eps: float,
    truncations: Sequence[int],
    grid: TimeGrid,
    master_seed: int,
    n_paths: int,
) -> dict[str, np.ndarray]:
    """Reference and truncated series, keyed by series name, each (P, steps+1)."""
    incr3 = sample_increments_batch(grid, 1, master_seed, range(n_paths))
    incr = incr3[:, :, 0]
    kernel = shifted_kernel(riemann_liouville_kernel(hurst), eps)
    out = {"ref": gv_quadrature_batch(kernel, 0.0, grid, incr)}
    for cap in truncations:
        out[f"sig_M{cap}"] = rl_value_series(hurst, eps, cap, grid, incr)
    return out


def delay_trajectories(
    params: DelayParams,
    truncations: Sequence[int],
    grid: TimeGrid,
    master_seed: int,
    n_paths: int,
    scheme: str = "heun",
) -> dict[str, np.ndarray]:
    incr3 = sample_increments_batch(grid, 1, master_seed, range(n_paths))
    incr = incr3[:, :, 0]
    out = {"ref": DELAY_REFERENCE_SCHEMES[scheme](params, grid, incr)}
    run_cap = max(truncations)
    flats = {cap: flatten_tensor(delay_functional(params, cap)) for cap in truncations}
    values = {cap: np.empty((n_paths, grid.steps + 1)) for cap in truncations}

    def record(k: int, sig: np.ndarray) -> None:
        for cap, lf in flats.items():
            values[cap][:, k] = sig[:, : lf.size] @ lf

    _stepper.run_batch(incr3, grid.dt, 2, run_cap, record)
    for cap in truncations:
        out[f"sig_M{cap}"] = values[cap]
    return out


def volterra_trajectories(
    params: VolterraParams,
    truncations: Sequence[int],
    grid: TimeGrid,
    master_seed: int,
    n_paths: int,
) -> dict[str, np.ndarray]:
    incr3 = sample_increments_batch(grid, 1, master_seed, range(n_paths))
    incr = incr3[:, :, 0]
    out = {
        "ref": euler_volterra_batch(
            params, params.mixtures[0], params.mixtures[1], grid, incr
        )
    }
    run_cap = max(truncations)
    flats = {cap: flatten_tensor(volterra_functional(params, cap)) for cap in truncations}
    values = {cap: np.empty((n_paths, grid.steps + 1)) for cap in truncations}

    def record(k: int, sig: np.ndarray) -> None:
        for cap, lf in flats.items():
            values[cap][:, k] = sig[:, : lf.size] @ lf

    _stepper.run_batch(incr3, grid.dt, 2, run_cap, record)
    for cap in truncations:
        out[f"sig_M{cap}"] = values[cap]
    return out


def ou_trajectories(
    kappa: float,
    truncations: Sequence[int],
    grid: TimeGrid,
    master_seed: int,
    n_paths: int,
) -> dict[str, np.ndarray]:
    """Exponential moving average: exponential-integrator reference against
    the time-dependent coefficients, which live on the same (time^n, noise)
    words as the power-law model."""
    from .simulate import closed_form_ou_batch

    incr3 = sample_increments_batch(grid, 1, master_seed, range(n_paths))
    incr = incr3[:, :, 0]
    out = {"ref": closed_form_ou_batch(kappa, grid, incr)}
    for cap in truncations:
        def coeff_at(t, cap=cap):
            return math.exp(-kappa * t) * kappa ** np.arange(cap)

        out[f"sig_M{cap}"] = time_noise_word_values(cap, grid, incr, coeff_at)
    return out


def gbm_truncation_mse(
    y: float,
    b1: float,
    b2: float,
    truncations: Sequence[int],
    grid: TimeGrid,
    master_seed: int,
    n_paths: int,
) -> dict[int, float]:
    """MSE of the flat-kernel signature evaluation against the exact
    exponential solution, per truncation level."""
    dirac0 = DiracMixture.point(0.0)
    params = VolterraParams.scalar(y, 0.0, b1, dirac0, 0.0, b2, dirac0)
    incr3 = sample_increments_batch(grid, 1, master_seed, range(n_paths))
    incr = incr3[:, :, 0]
    ref = closed_form_gbm_batch(y, b1, b2, grid, incr)
    run_cap = max(truncations)
    flats = {cap: flatten_tensor(volterra_functional(params, cap)) for cap in truncations}
    sse = {cap: 0.0 for cap in truncations}

    def record(k: int, sig: np.ndarray) -> None:
        for cap, lf in flats.items():
            vals = sig[:, : lf.size] @ lf
            sse[cap] += float(np.sum((ref[:, k] - vals) ** 2))

    _stepper.run_batch(incr3, grid.dt, 2, run_cap, record)
    denom = n_paths * (grid.steps + 1)
    return {cap: sse[cap] / denom for cap in truncations}
