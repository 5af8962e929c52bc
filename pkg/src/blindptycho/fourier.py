"""1-D discrete Fourier transform, shift operators and the bilinear form.

Conventions used throughout the package:

* forward transform, unnormalized:  X_j = sum_k exp(-2 pi i j k / d) x_k,
  so Parseval reads ||X||^2 = d ||x||^2;
* inverse transform: conjugate-transpose transform divided by d;
* circular shift:    (S_r v)_j = v_{(j - r) mod d};
* zero-padded shift: (S_r v)_j = v_{j - r} when the index stays in [0, d),
  otherwise 0.

In both shift flavours the transpose of S_r is S_{-r}, which the gradient
code relies on.

The main transform path is a hand-rolled iterative radix-2 FFT (used when d
is a power of two, falling back to the direct transform otherwise);
``dft_direct`` is the O(d^2) summation kept as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

CIRCULAR = "circular"
ZERO_PADDED = "zero-padded"
MODES = (CIRCULAR, ZERO_PADDED)


# ---------------------------------------------------------------------------
# transforms

_radix2_plans: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}
_direct_matrices: dict[int, np.ndarray] = {}


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _radix2_plan(d: int):
    plan = _radix2_plans.get(d)
    if plan is not None:
        return plan
    bits = d.bit_length() - 1
    rev = np.zeros(d, dtype=np.intp)
    for i in range(d):
        r = 0
        x = i
        for _ in range(bits):
            r = (r << 1) | (x & 1)
            x >>= 1
        rev[i] = r
    twiddles = []
    m = 2
    while m <= d:
        twiddles.append(np.exp(-2j * np.pi * np.arange(m // 2) / m))
        m *= 2
    _radix2_plans[d] = (rev, twiddles)
    return rev, twiddles


def dft(x: np.ndarray) -> np.ndarray:
    """Forward transform along the last axis."""
    x = np.asarray(x, dtype=np.complex128)
    d = x.shape[-1]
    if not _is_pow2(d):
        return dft_direct(x)
    rev, twiddles = _radix2_plan(d)
    out = np.ascontiguousarray(x[..., rev])
    m = 2
    for tw in twiddles:
        half = m // 2
        blocks = out.reshape(*out.shape[:-1], -1, m)
        even = blocks[..., :half]
        odd = blocks[..., half:] * tw
        upper = even + odd
        lower = even - odd
        blocks[..., :half] = upper
        blocks[..., half:] = lower
        m *= 2
    return out


def dft_direct(x: np.ndarray) -> np.ndarray:
    """O(d^2) transform straight from the definition; the testing oracle."""
    x = np.asarray(x, dtype=np.complex128)
    d = x.shape[-1]
    w = _direct_matrices.get(d)
    if w is None:
        jk = np.outer(np.arange(d), np.arange(d))
        w = np.exp(-2j * np.pi * jk / d)
        w.setflags(write=False)
        _direct_matrices[d] = w
    # w is symmetric, so x @ w sums exp(-2 pi i j k / d) x_k over k.
    return x @ w


def idft(X: np.ndarray) -> np.ndarray:
    """Inverse transform: (1/d) times the conjugate-transpose transform."""
    X = np.asarray(X, dtype=np.complex128)
    return np.conj(dft(np.conj(X))) / X.shape[-1]


# ---------------------------------------------------------------------------
# shifts

def shift(v: np.ndarray, r: int, mode: str = CIRCULAR) -> np.ndarray:
    """Apply the shift operator S_r to a vector."""
    v = np.asarray(v)
    d = v.shape[-1]
    if mode == CIRCULAR:
        return np.roll(v, r, axis=-1)
    if mode != ZERO_PADDED:
        raise ValueError(f"unknown shift mode: {mode!r}")
    out = np.zeros_like(v)
    if r >= d or r <= -d:
        return out
    if r >= 0:
        out[..., r:] = v[..., : d - r]
    else:
        out[..., : d + r] = v[..., -r:]
    return out


@dataclass(frozen=True)
class ShiftSet:
    """A finite family of shifts, all circular or all zero-padded."""

    offsets: tuple[int, ...]
    mode: str = CIRCULAR

    def __post_init__(self):
        offsets = tuple(int(o) for o in self.offsets)
        object.__setattr__(self, "offsets", offsets)
        if len(offsets) == 0:
            raise ValueError("offsets must contain at least one shift")
        if len(set(offsets)) != len(offsets):
            raise ValueError("offsets must be distinct")
        if self.mode not in MODES:
            raise ValueError(f"unknown shift mode: {self.mode!r}")

    def __len__(self) -> int:
        return len(self.offsets)

    def validate_for_dim(self, d: int) -> None:
        if self.mode == CIRCULAR:
            reduced = {o % d for o in self.offsets}
            if len(reduced) != len(self.offsets):
                raise ValueError("circular offsets must be distinct modulo d")

    @staticmethod
    def all_shifts(d: int, mode: str = CIRCULAR) -> "ShiftSet":
        return ShiftSet(tuple(range(d)), mode)


@lru_cache(maxsize=None)
def _gather_plan(offsets: tuple[int, ...], d: int, mode: str, sign: int):
    """Index matrix such that row i of v[idx] is S_{sign*offsets[i]} v."""
    offs = np.asarray(offsets, dtype=np.intp).reshape(-1, 1)
    pos = np.arange(d, dtype=np.intp).reshape(1, -1)
    src = pos - sign * offs
    if mode == CIRCULAR:
        idx = np.mod(src, d)
        idx.setflags(write=False)
        return idx, None
    valid = (src >= 0) & (src < d)
    idx = np.clip(src, 0, d - 1)
    idx.setflags(write=False)
    valid.setflags(write=False)
    return idx, valid


def shift_stack(v: np.ndarray, shifts: ShiftSet) -> np.ndarray:
    """Stack whose rows are S_r v for each offset, in listed order."""
    v = np.asarray(v)
    idx, valid = _gather_plan(shifts.offsets, v.shape[-1], shifts.mode, 1)
    rows = v[idx]
    if valid is not None:
        rows = np.where(valid, rows, 0)
    return rows


def neg_shift_stack(v: np.ndarray, shifts: ShiftSet) -> np.ndarray:
    """Stack whose rows are S_{-r} v for each offset, in listed order."""
    v = np.asarray(v)
    idx, valid = _gather_plan(shifts.offsets, v.shape[-1], shifts.mode, -1)
    rows = v[idx]
    if valid is not None:
        rows = np.where(valid, rows, 0)
    return rows


def unshift_sum(rows: np.ndarray, shifts: ShiftSet) -> np.ndarray:
    """Sum of S_{-r} applied to the matching row of ``rows``.

    This is the adjoint reduction used by the window gradient: entry j of
    the result collects rows[i, j + r_i] subject to the mode's boundary
    rule.
    """
    rows = np.asarray(rows)
    d = rows.shape[-1]
    idx, valid = _gather_plan(shifts.offsets, d, shifts.mode, -1)
    gathered = np.take_along_axis(rows, idx, axis=-1)
    if valid is not None:
        gathered = np.where(valid, gathered, 0)
    return gathered.sum(axis=0)


# ---------------------------------------------------------------------------
# bilinear form

def q_apply(z: np.ndarray, v: np.ndarray, r: int, k: int,
            mode: str = CIRCULAR) -> complex:
    """Entrywise evaluation of sum_j z_j exp(-2 pi i k j / d) (S_r v)_j.

    Equals dft(z * shift(v, r))[k] but never runs a transform, so it serves
    as an independent check of the transform path.
    """
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if z.shape != v.shape:
        raise ValueError("z and v must have the same length")
    d = z.shape[-1]
    if not 0 <= k < d:
        raise ValueError("frequency index k must lie in [0, d)")
    phase = np.exp(-2j * np.pi * k * np.arange(d) / d)
    return complex(np.sum(z * phase * shift(v, r, mode)))
