"""Truncated signature streams of time-augmented Brownian paths.

The stream is the signature of the piecewise-linear interpolation of
(t, W_t): each grid step multiplies on the right by the tensor exponential
of the level-1 segment (dt, dW).  That is the Stratonovich object: linear
interpolation is the Wong-Zakai limit, and iterated integrals of the
interpolated path converge to Stratonovich iterated integrals.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from . import _stepper
from .brownian import BrownianPath, TimeGrid
from .errors import DimensionMismatchError
from .tensor import TruncatedTensor, concat_mul, pair, project
from .words import Word


@runtime_checkable
class TimeVarying(Protocol):
    """Anything evaluating to a coefficient tensor at a given time."""

    def at(self, t: float) -> TruncatedTensor: ...


@dataclass(frozen=True)
class SignatureStream:
    """Per-grid-point truncated signatures of one sampled path."""

    grid: TimeGrid
    sigs: list[TruncatedTensor]
    path: BrownianPath

    @property
    def level_cap(self) -> int:
        return self.sigs[0].level_cap

    @property
    def d(self) -> int:
        return self.sigs[0].d


def tensor_from_flat(flat: np.ndarray, d: int, level_cap: int) -> TruncatedTensor:
    offsets = _stepper.level_offsets(d, level_cap)
    levels = [flat[offsets[n] : offsets[n + 1]].copy() for n in range(level_cap + 1)]
    return TruncatedTensor(d, level_cap, levels)


def flatten_tensor(t: TruncatedTensor) -> np.ndarray:
    return np.concatenate(t.levels)


def segment_exponential(d: int, level_cap: int, dt: float, dw: np.ndarray) -> TruncatedTensor:
    """Tensor exponential of the level-1 element (dt, dw_2, ..., dw_d)."""
    e = np.concatenate(([dt], np.asarray(dw, dtype=float)))
    if e.size != d:
        raise DimensionMismatchError(f"segment has {e.size} components, alphabet wants {d}")
    out = TruncatedTensor.zeros(d, level_cap)
    level = np.array([1.0])
    out.levels[0][0] = 1.0
    for n in range(1, level_cap + 1):
        level = np.multiply.outer(level, e).ravel() / n
        out.levels[n][:] = level
    return out


def signature_stream(path: BrownianPath, level_cap: int) -> SignatureStream:
    """Signatures of (t, W_t) at every grid point, truncated at level_cap."""
    if level_cap < 1:
        raise ValueError(f"level cap must be >= 1, got {level_cap}")
    d = path.dims + 1
    sigs: list[TruncatedTensor] = []

    def keep(_k: int, flat: np.ndarray) -> None:
        sigs.append(tensor_from_flat(flat[0], d, level_cap))

    _stepper.run_batch(path.increments[None, :, :], path.grid.dt, d, level_cap, keep)
    return SignatureStream(path.grid, sigs, path)


def evaluate(functional, stream: SignatureStream) -> np.ndarray:
    """Time series <functional, sig_t> along the stream.

    Accepts a constant TruncatedTensor or any object with an ``at(t)``
    coefficient map, evaluated at each grid time.
    """
    times = stream.grid.times()
    out = np.empty(times.size)
    if isinstance(functional, TruncatedTensor):
        for k, sig in enumerate(stream.sigs):
            out[k] = pair(functional, sig)
    else:
        for k, sig in enumerate(stream.sigs):
            out[k] = pair(functional.at(times[k]), sig)
    return out


def expected_signature(t: float, level_cap: int, d: int) -> TruncatedTensor:
    """Analytic expectation of the signature of (t, W) at time t.

    E[sig_t] = sum_m t^m/m! (letter1 + 1/2 sum_j jj)^(x) m, the closed form
    obtained from the independence and stationarity of the increments.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    gen = TruncatedTensor.zeros(d, level_cap)
    if level_cap >= 1:
        gen.levels[1][0] = 1.0
    if level_cap >= 2:
        for j in range(2, d + 1):
            gen.levels[2][Word((j, j)).index(d)] = 0.5
    acc = TruncatedTensor.unit(d, level_cap)
    term = TruncatedTensor.unit(d, level_cap)
    for m in range(1, level_cap + 1):
        term = concat_mul(term, gen) * (t / m)
        if term.max_abs() == 0.0:
            break
        acc = acc + term
    return acc


def _top_nonzero_level(t: TruncatedTensor) -> int:
    for n in range(t.level_cap, -1, -1):
        if t.levels[n].any():
            return n
    return 0


def ito_residual(functional: TruncatedTensor, stream: SignatureStream) -> np.ndarray:
    """Pathwise defect of the Ito decomposition of <l, sig_t>.

    residual_t = <l,sig_t> - l_scalar - int <l|_1 + 1/2 sum_j l|_jj, sig> ds
                 - sum_j int <l|_j, sig> dW^j,
    with left-point discretization of both integrals.  Vanishes at rate
    O(sqrt(dt)) in RMS.  Requires the functional's top level <= cap - 2 so
    the projections are exact.
    """
    cap = stream.level_cap
    if _top_nonzero_level(functional) > cap - 2:
        raise ValueError("functional level must be <= stream cap - 2 for exact projections")
    d = stream.d
    drift = project(functional, (1,))
    for j in range(2, d + 1):
        drift = drift + project(functional, (j, j)) * 0.5
    values = evaluate(functional, stream)
    drift_vals = evaluate(drift, stream)
    dt = stream.grid.dt
    residual = values - functional.scalar
    integral = np.concatenate(([0.0], np.cumsum(drift_vals[:-1] * dt)))
    residual -= integral
    for j in range(2, d + 1):
        wvals = evaluate(project(functional, (j,)), stream)
        incr = stream.path.increments[:, j - 2]
        residual -= np.concatenate(([0.0], np.cumsum(wvals[:-1] * incr)))
    return residual


# -- optional binary dump for debugging --------------------------------------

_HEADER = struct.Struct("<qqqdqq")  # d, M, K, T, master_seed, path_index


def dump_stream(stream: SignatureStream, filename: str) -> None:
    """Binary dump: header then float64 little-endian, level-major/time-major."""
    path = stream.path
    with open(filename, "wb") as fh:
        fh.write(
            _HEADER.pack(
                stream.d,
                stream.level_cap,
                stream.grid.steps,
                stream.grid.horizon,
                path.master_seed,
                path.path_index,
            )
        )
        for n in range(stream.level_cap + 1):
            block = np.stack([sig.levels[n] for sig in stream.sigs])
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def read_stream_dump(filename: str) -> tuple[dict, list[np.ndarray]]:
    """Read a dump back as (header dict, per-level (K+1, d**n) arrays)."""
    with open(filename, "rb") as fh:
        d, cap, steps, horizon, seed, path_index = _HEADER.unpack(fh.read(_HEADER.size))
        header = {
            "d": d,
            "M": cap,
            "K": steps,
            "T": horizon,
            "master_seed": seed,
            "path_index": path_index,
        }
        levels = []
        for n in range(cap + 1):
            raw = np.frombuffer(fh.read(8 * (steps + 1) * d**n), dtype="<f8")
            levels.append(raw.reshape(steps + 1, d**n).copy())
    return header, levels
