"""Differentiation drivers: derivatives, chunked gradients, Jacobians,
Hessians and third-order tensors, plus the threaded chunk scheduler.

The gradient of f at a point of dimension k is computed in ceil(k / N)
passes through f, where N is the chunk size.  Pass p seeds components
p*N .. min(p*N + N, k) - 1 with orthogonal unit lanes and leaves every
other component as a plain value; the output lanes of that pass are the
partial derivatives of the seeded components.  A trailing chunk narrower
than N seeds only the remaining components.  Lanes propagate independently,
so the assembled gradient is identical, bit for bit, for every chunk size.

Higher-order drivers nest duals: the Hessian runs the gradient machinery
over inputs that are themselves duals (forward-over-forward), filling a
k x k matrix in ceil(k/M) * ceil(k/N) passes, and the third-order tensor
adds one more nesting level.

All drivers require a pure target function: same input, same output.  The
threaded scheduler additionally requires f to be safely callable from
several threads at once; each worker owns a disjoint slice of the output,
so no locking is needed on the hot path.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .dual import Dual, Partials, base_value
from .vector import DualVector

__all__ = [
    "ChunkConfig",
    "GradientResult",
    "JacobianResult",
    "HessianResult",
    "EvalCounter",
    "default_chunk",
    "derivative",
    "second_derivative",
    "gradient",
    "gradient_threaded",
    "jacobian",
    "hessian",
    "third_order_tensor",
]

# Gains from wider chunks flatten after a handful of lanes while the
# per-dual footprint keeps growing, so the default stays small.
DEFAULT_CHUNK_LIMIT = 8


def default_chunk(k):
    """Chunk size used when the caller does not pick one: min(k, 8)."""
    return min(k, DEFAULT_CHUNK_LIMIT)


@dataclass(frozen=True)
class ChunkConfig:
    """Runtime tuning for gradient passes.

    chunk_size: lanes per pass (None picks ``default_chunk``); clamped to
    the input dimension when it is larger.
    threads: worker count for the chunk scheduler; 1 means serial.
    """

    chunk_size: int | None = None
    threads: int = 1

    def __post_init__(self):
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    def resolve(self, k):
        n = self.chunk_size if self.chunk_size is not None else default_chunk(k)
        return min(n, k)


@dataclass(frozen=True)
class GradientResult:
    """Dense gradient plus f(x), which the value channel yields for free."""

    values: np.ndarray
    f_value: float


@dataclass(frozen=True)
class JacobianResult:
    """Dense m x k Jacobian; entry (i, j) is df_i/dx_j."""

    entries: np.ndarray
    f_value: np.ndarray


@dataclass(frozen=True)
class HessianResult:
    """Dense k x k Hessian with the gradient and value from the same passes."""

    entries: np.ndarray
    gradient: np.ndarray
    f_value: float


class EvalCounter:
    """Wrapper counting evaluations of a target function (thread-safe).

    Lets tests and the verifier confirm the ceil(k / N) pass accounting of
    the chunked drivers.
    """

    def __init__(self, f):
        self.f = f
        self.count = 0
        self._lock = threading.Lock()

    def __call__(self, x):
        with self._lock:
            self.count += 1
        return self.f(x)

    def reset(self):
        with self._lock:
            self.count = 0


# ----------------------------------------------------------------------
# scalar drivers
# ----------------------------------------------------------------------


def derivative(f, x):
    """First derivative of a scalar function at x via a single-lane dual."""
    y = f(Dual(x, (1.0,)))
    if isinstance(y, Dual):
        return float(base_value(y.partials[0]))
    return 0.0


def second_derivative(f, x):
    """Exact second derivative via one nested (hyper-dual) evaluation.

    Seeds inner and outer unit lanes with a zero cross seed, then reads the
    partial-of-partial of the result.
    """
    d = Dual(Dual(x, (1.0,)), (Dual(1.0, (0.0,)),))
    y = f(d)
    return float(base_value(_lane(_lane(y, 0), 0)))


def _lane(v, i):
    """Lane i of a dual; anything constant contributes a zero lane."""
    if isinstance(v, Dual):
        return v.partials[i]
    return 0.0


# ----------------------------------------------------------------------
# chunked gradient core
# ----------------------------------------------------------------------


def _seeded(x, lo, hi):
    """Input batch for one pass: unit lanes on [lo, hi), zeros elsewhere."""
    width = hi - lo
    if x.dtype == object:
        lanes = np.zeros((width, x.shape[0]), dtype=object)
    else:
        lanes = np.zeros((width, x.shape[0]))
    for j in range(width):
        lanes[j, lo + j] = 1.0
    return DualVector(x, lanes)


def _scalar_output(y, width):
    """(value, lane sequence) of a scalar target-function result."""
    if isinstance(y, Dual):
        if len(y.partials) != width:
            raise ValueError(
                f"target function returned {len(y.partials)} lanes, expected {width}"
            )
        return y.value, y.partials
    if isinstance(y, DualVector):
        raise TypeError("gradient target must return a scalar, got a vector")
    return y, (0.0,) * width


def _same_value(a, b):
    a, b = base_value(a), base_value(b)
    return a == b or (a != a and b != b)


def _gradient_passes(f, x, chunk):
    """Chunked passes over a 1-D input of any element kind.

    Returns (per-component lane coefficients, f value, pass count).  The
    coefficients have the input's element kind: floats for a float64 input,
    duals when the input components are duals (nested differentiation).
    """
    k = x.shape[0]
    out = np.empty(k, dtype=x.dtype)
    f_value = None
    passes = 0
    for lo in range(0, k, chunk):
        hi = min(lo + chunk, k)
        value, lanes = _scalar_output(f(_seeded(x, lo, hi)), hi - lo)
        passes += 1
        if f_value is None:
            f_value = value
        else:
            assert _same_value(value, f_value), (
                "target function is impure: value channel changed between passes"
            )
        out[lo:hi] = lanes[: hi - lo]
    return out, f_value, passes


def _as_input_vector(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"input must be 1-D, got shape {x.shape}")
    if x.shape[0] == 0:
        raise ValueError("empty input: gradients need at least one component")
    return x


def gradient(f, x, cfg=None):
    """Gradient of scalar f at x in ceil(k / N) passes.

    f receives a DualVector (a sequence of k duals) and must return a
    scalar; x is any 1-D float vector.  With cfg.threads > 1 the passes are
    distributed across the threaded scheduler, which produces bitwise
    identical results.
    """
    cfg = cfg if cfg is not None else ChunkConfig()
    if cfg.threads > 1:
        return gradient_threaded(f, x, cfg)
    x = _as_input_vector(x)
    values, f_value, _ = _gradient_passes(f, x, cfg.resolve(x.shape[0]))
    return GradientResult(values.astype(np.float64, copy=False), float(f_value))


def gradient_threaded(f, x, cfg=None):
    """Gradient with chunk passes split across cfg.threads workers.

    Passes are statically assigned in contiguous blocks, one block per
    worker; every pass writes a disjoint slice of the output, and a join
    barrier collects the workers.  Because lanes are computed independently
    per chunk, the result equals the serial gradient bitwise.  The target
    function must tolerate concurrent calls.
    """
    cfg = cfg if cfg is not None else ChunkConfig()
    x = _as_input_vector(x)
    k = x.shape[0]
    n = cfg.resolve(k)
    starts = list(range(0, k, n))
    n_workers = max(1, min(cfg.threads, len(starts)))
    out = np.empty(k)
    f_values = [None] * len(starts)
    failures = []

    def run_block(block):
        try:
            for p in block:
                lo = starts[p]
                hi = min(lo + n, k)
                value, lanes = _scalar_output(f(_seeded(x, lo, hi)), hi - lo)
                out[lo:hi] = lanes[: hi - lo]
                f_values[p] = value
        except BaseException as exc:  # surfaced after the join barrier
            failures.append(exc)

    blocks = [list(b) for b in np.array_split(range(len(starts)), n_workers)]
    workers = [
        threading.Thread(target=run_block, args=(block,)) for block in blocks[1:]
    ]
    for w in workers:
        w.start()
    run_block(blocks[0])
    for w in workers:
        w.join()
    if failures:
        raise failures[0]

    assert all(_same_value(v, f_values[0]) for v in f_values), (
        "target function is impure: value channel changed between passes"
    )
    return GradientResult(out, float(f_values[0]))


# ----------------------------------------------------------------------
# Jacobian
# ----------------------------------------------------------------------


def _vector_output(y, width):
    """(values, lane rows) of a vector-valued target-function result."""
    if isinstance(y, DualVector):
        return np.asarray(y.values, dtype=np.float64), np.asarray(
            y.partials, dtype=np.float64
        )
    comps = list(y)
    values = np.array([float(base_value(c)) for c in comps])
    lanes = np.zeros((width, len(comps)))
    for i, c in enumerate(comps):
        if isinstance(c, Dual):
            lanes[:, i] = np.asarray(c.partials, dtype=np.float64)
    return values, lanes


def jacobian(f, x, cfg=None):
    """m x k Jacobian of a vector-valued f, one column block per chunk."""
    cfg = cfg if cfg is not None else ChunkConfig()
    x = _as_input_vector(x)
    k = x.shape[0]
    n = cfg.resolve(k)
    entries = None
    f_value = None
    for lo in range(0, k, n):
        hi = min(lo + n, k)
        values, lanes = _vector_output(f(_seeded(x, lo, hi)), hi - lo)
        if entries is None:
            entries = np.empty((values.shape[0], k))
            f_value = values
        elif values.shape[0] != entries.shape[0]:
            raise ValueError(
                f"target function changed output length between passes: "
                f"{entries.shape[0]} then {values.shape[0]}"
            )
        entries[:, lo:hi] = lanes[: hi - lo].T
    return JacobianResult(entries, f_value)


# ----------------------------------------------------------------------
# higher-order drivers
# ----------------------------------------------------------------------


def hessian(f, x, outer_chunk=None, inner_chunk=None):
    """Dense Hessian by forward-over-forward differentiation.

    The components are lifted to duals carrying M outer lanes and the
    gradient machinery runs over those dual inputs with inner chunk N,
    filling the k x k matrix in ceil(k/M) * ceil(k/N) passes through f.
    The first-order gradient and f(x) come from the same evaluations.
    """
    x = _as_input_vector(x)
    k = x.shape[0]
    m = min(outer_chunk if outer_chunk is not None else default_chunk(k), k)
    n = min(inner_chunk if inner_chunk is not None else default_chunk(k), k)
    if m < 1 or n < 1:
        raise ValueError("chunk sizes must be >= 1")

    entries = np.empty((k, k))
    grad = None
    f_value = None
    for olo in range(0, k, m):
        ohi = min(olo + m, k)
        width = ohi - olo
        lifted = np.empty(k, dtype=object)
        for c in range(k):
            lanes = [0.0] * width
            if olo <= c < ohi:
                lanes[c - olo] = 1.0
            lifted[c] = Dual(float(x[c]), Partials(lanes))
        inner, inner_f, _ = _gradient_passes(f, lifted, n)
        for j in range(k):
            g = inner[j]
            for i in range(width):
                entries[olo + i, j] = float(base_value(_lane(g, i)))
        if grad is None:
            grad = np.array([float(base_value(g)) for g in inner])
            f_value = float(base_value(inner_f))
    return HessianResult(entries, grad, f_value)


THIRD_ORDER_DIM_LIMIT = 8


def third_order_tensor(f, x, chunks=None, dim_limit=THIRD_ORDER_DIM_LIMIT):
    """k x k x k tensor of third partial derivatives via triple nesting.

    Dense third-order storage grows as k**3, so the dimension is capped at
    ``dim_limit`` (default 8); differentiate blockwise with repeated calls
    on slices if a larger problem is unavoidable.  chunks, when given, is
    the lane width per nesting level as a (first, second, third) triple.
    """
    x = _as_input_vector(x)
    k = x.shape[0]
    if k > dim_limit:
        raise ValueError(
            f"third_order_tensor is capped at {dim_limit} components (got {k}); "
            "batch larger problems into repeated smaller calls"
        )
    if chunks is None:
        chunks = (k, k, k)
    ca, cb, cc = (min(max(int(c), 1), k) for c in chunks)

    tensor = np.empty((k, k, k))
    for alo in range(0, k, ca):
        ahi = min(alo + ca, k)
        aw = ahi - alo
        for blo in range(0, k, cb):
            bhi = min(blo + cb, k)
            bw = bhi - blo
            lifted = np.empty(k, dtype=object)
            for c in range(k):
                a_lanes = [0.0] * aw
                if alo <= c < ahi:
                    a_lanes[c - alo] = 1.0
                b_lanes = [0.0] * bw
                if blo <= c < bhi:
                    b_lanes[c - blo] = 1.0
                lifted[c] = Dual(Dual(float(x[c]), Partials(a_lanes)), Partials(b_lanes))
            inner, _, _ = _gradient_passes(f, lifted, cc)
            for j in range(k):
                g = inner[j]
                for b in range(bw):
                    gb = _lane(g, b)
                    for a in range(aw):
                        tensor[alo + a, blo + b, j] = float(base_value(_lane(gb, a)))
    return tensor
