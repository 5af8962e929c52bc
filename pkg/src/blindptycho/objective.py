"""Amplitude loss, Wirtinger gradients, and step-size bound constants.

The data term compares smoothed amplitudes against the measurements,

    L_eps(z, v) = sum_{r,k} [ sqrt(|dft(z * S_r v)[k]|^2 + eps)
                              - sqrt(y[r,k] + eps) ]^2,

and the full objective adds Tikhonov terms,

    J(z, v) = L_eps(z, v) + alpha ||z||^2 + beta ||v||^2.

Gradients follow the Wirtinger convention for real-valued functions of
complex vectors: component j of grad_z f is (df/dRe + i df/dIm)/2.  With
D the diagonal of sqrt(y + eps) / sqrt(|spectrum|^2 + eps),

    grad_z J = sum_r conj(S_r v) * F^*(I - D) F(z * S_r v) + alpha z,
    grad_v J = sum_r S_{-r}[ conj(z) * F^*(I - D) F(z * S_r v) ] + beta v.

When eps = 0 and a spectral coefficient vanishes, the ratio term is set to
zero (coefficients below 1e-300 in magnitude are treated as zero to avoid
overflow).

Region reductions always run over rows in the listed (ascending) offset
order, so the decomposition identities are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import dft, neg_shift_stack, shift, shift_stack, unshift_sum
from .model import Problem

_TINY = 1e-300


@dataclass(frozen=True)
class GradientPair:
    """Object- and window-direction gradients of equal length."""

    z: np.ndarray
    v: np.ndarray

    def norms(self) -> tuple[float, float]:
        return float(np.linalg.norm(self.z)), float(np.linalg.norm(self.v))

    def stacked_norm_sq(self) -> float:
        gz, gv = self.norms()
        return gz * gz + gv * gv


def _as_iterate(problem: Problem, z, v):
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if z.shape != (problem.d,) or v.shape != (problem.d,):
        raise ValueError("z and v must be 1-d arrays of length d")
    return z, v


def _conj_transform(rows: np.ndarray) -> np.ndarray:
    # F^* X without the 1/d factor of the inverse transform.
    return np.conj(dft(np.conj(rows)))


def _residual_spectrum(problem: Problem, spectrum: np.ndarray) -> np.ndarray:
    """(I - D) applied to the spectra, with the eps = 0 zero convention."""
    denom = np.sqrt(np.abs(spectrum) ** 2 + problem.epsilon)
    ratio = np.divide(np.sqrt(problem.y + problem.epsilon), denom,
                      out=np.zeros_like(denom), where=denom > _TINY)
    return (1.0 - ratio) * spectrum


def loss(problem: Problem, z, v) -> tuple[float, float]:
    """Evaluate the objective; returns (J, L_eps)."""
    z, v = _as_iterate(problem, z, v)
    spectrum = dft(z[np.newaxis, :] * shift_stack(v, problem.shifts))
    amp = np.sqrt(np.abs(spectrum) ** 2 + problem.epsilon)
    data = float(np.sum((amp - np.sqrt(problem.y + problem.epsilon)) ** 2))
    total = data + problem.alpha * float(np.vdot(z, z).real) \
        + problem.beta * float(np.vdot(v, v).real)
    return total, data


def loss_region(problem: Problem, z, v, r: int) -> float:
    """Data misfit of the single region with offset r (no Tikhonov part)."""
    z, v = _as_iterate(problem, z, v)
    row = problem.offset_row[r]
    spectrum = dft(z * shift(v, r, problem.shifts.mode))
    amp = np.sqrt(np.abs(spectrum) ** 2 + problem.epsilon)
    return float(np.sum((amp - np.sqrt(problem.y[row] + problem.epsilon)) ** 2))


def gradient(problem: Problem, z, v) -> GradientPair:
    """Wirtinger gradient of J, all regions reduced in listed order."""
    z, v = _as_iterate(problem, z, v)
    windows = shift_stack(v, problem.shifts)
    spectrum = dft(z[np.newaxis, :] * windows)
    back = _conj_transform(_residual_spectrum(problem, spectrum))
    g_z = np.sum(np.conj(windows) * back, axis=0) + problem.alpha * z
    g_v = unshift_sum(np.conj(z)[np.newaxis, :] * back, problem.shifts) \
        + problem.beta * v
    return GradientPair(g_z, g_v)


def loss_and_gradient(problem: Problem, z, v) -> tuple[float, float, GradientPair]:
    """Fused evaluation sharing one forward transform; returns (J, L_eps, grad)."""
    z, v = _as_iterate(problem, z, v)
    windows = shift_stack(v, problem.shifts)
    spectrum = dft(z[np.newaxis, :] * windows)
    amp = np.sqrt(np.abs(spectrum) ** 2 + problem.epsilon)
    data = float(np.sum((amp - np.sqrt(problem.y + problem.epsilon)) ** 2))
    total = data + problem.alpha * float(np.vdot(z, z).real) \
        + problem.beta * float(np.vdot(v, v).real)
    back = _conj_transform(_residual_spectrum(problem, spectrum))
    g_z = np.sum(np.conj(windows) * back, axis=0) + problem.alpha * z
    g_v = unshift_sum(np.conj(z)[np.newaxis, :] * back, problem.shifts) \
        + problem.beta * v
    return total, data, GradientPair(g_z, g_v)


def gradient_region(problem: Problem, z, v, r: int) -> GradientPair:
    """Gradient of the single-region objective J_r.

    J_r carries the region's data misfit plus its p_r share of the Tikhonov
    terms, so the full gradient is recovered exactly by summing over all
    regions in listed order.
    """
    z, v = _as_iterate(problem, z, v)
    row = problem.offset_row[r]
    mode = problem.shifts.mode
    sv = shift(v, r, mode)
    spectrum = dft(z * sv)
    denom = np.sqrt(np.abs(spectrum) ** 2 + problem.epsilon)
    ratio = np.divide(np.sqrt(problem.y[row] + problem.epsilon), denom,
                      out=np.zeros_like(denom), where=denom > _TINY)
    back = np.conj(dft(np.conj((1.0 - ratio) * spectrum)))
    share = float(problem.p[row])
    g_z = np.conj(sv) * back + problem.alpha * share * z
    g_v = shift(np.conj(z) * back, -r, mode) + problem.beta * share * v
    return GradientPair(g_z, g_v)


# ---------------------------------------------------------------------------
# bound constants feeding the step-size rules

def step_curvature_bound(problem: Problem, z, v) -> float:
    """Uniform curvature bound for joint descent steps.

    3 d [ (10/3)(||z||^2 + ||v||^2) + sqrt(||y||_1 / d) ] + 3 max(alpha, beta);
    its reciprocal is the norm-independent branch of the step-size rule.
    """
    z, v = _as_iterate(problem, z, v)
    nz2 = float(np.vdot(z, z).real)
    nv2 = float(np.vdot(v, v).real)
    d = problem.d
    return 3.0 * d * ((10.0 / 3.0) * (nz2 + nv2) + np.sqrt(problem.y_total / d)) \
        + 3.0 * max(problem.alpha, problem.beta)


def stochastic_gradient_bounds(problem: Problem, z, v) -> tuple[float, float]:
    """Deterministic envelopes (b_z, b_v) for the sampled gradients.

    Whatever indices are drawn, (15 d / 4) ||g_z||^2 <= b_z^2 and likewise
    for the window part, which makes the SGD step rule measurable without
    looking at the sample.
    """
    z, v = _as_iterate(problem, z, v)
    d = problem.d
    nz = float(np.linalg.norm(z))
    nv = float(np.linalg.norm(v))
    scale = np.sqrt(15.0 * d / 4.0)
    pmin = float(np.min(problem.p))
    shared = (nz * nv + np.sqrt(problem.y_total / d)) \
        / (np.sqrt(problem.batch_size) * pmin)
    b_z = scale * (d * nv * shared + problem.alpha * nz)
    b_v = scale * (d * nz * shared + problem.beta * nv)
    return float(b_z), float(b_v)


def partial_lipschitz(problem: Problem, z, v) -> tuple[float, float]:
    """Curvature constants for the single-variable updates.

    Returns (object_step, window_step): the object update divides its
    gradient by d max_j sum_r |(S_r v)_j|^2 + alpha, the window update by
    d max_j sum_r |(S_{-r} z)_j|^2 + beta.  Both are at most
    d ||.||^2 + weight since each coordinate collects at most the full
    energy of the shifted vector.
    """
    z, v = _as_iterate(problem, z, v)
    d = problem.d
    win_energy = np.sum(np.abs(shift_stack(v, problem.shifts)) ** 2, axis=0)
    obj_energy = np.sum(np.abs(neg_shift_stack(z, problem.shifts)) ** 2, axis=0)
    object_step = d * float(np.max(win_energy)) + problem.alpha
    window_step = d * float(np.max(obj_energy)) + problem.beta
    return object_step, window_step
