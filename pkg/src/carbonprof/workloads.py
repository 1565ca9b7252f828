"""Built-in strain workloads: four window-rotation benchmarks.

Every variant starts from a 100-element window holding 0..99 and then, per
iteration i, drops the last element and prepends i+window. The final state is
identical across variants; what differs is the data-structure strategy and
therefore the work done per iteration:

- vector: growable sequence, head insertion and tail deletion through the
  container's own primitives (the reallocation/shift cost is hidden inside
  the container; this is the inefficient usage under test).
- raw: growable sequence, but every element is shifted backward one slot by
  hand before the head is overwritten.
- array: same manual shift over a fixed-capacity buffer of exactly
  `window` slots.
- list: doubly-linked ring; the rotation just moves the head/tail cursors
  and overwrites one node, no per-iteration allocation or shifting.

The raw/array/list loops are JIT-compiled (int64, nogil) so their cost
reflects the memory traffic of the strategy rather than interpreter
overhead; a sampler thread can observe power while they run. Checksums are
always computed and returned so no loop can be optimized away.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .errors import ChecksumOverflowError, WorkloadError

INT64_MAX = 2**63 - 1

#: Largest supported iteration budget (64-bit arithmetic headroom).
MAX_ITER_CAP = 10**10

DEFAULT_WINDOW = 100


class Variant(Enum):
    VECTOR = "vector"
    RAW = "raw"
    ARRAY = "array"
    LIST = "list"

    @classmethod
    def parse(cls, name: str) -> "Variant":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise WorkloadError(
                f"unknown workload {name!r}; expected one of "
                f"{', '.join(v.value for v in cls)}"
            ) from None


@dataclass(frozen=True)
class WorkloadSpec:
    """Which benchmark variant to run and its iteration budget."""

    variant: Variant
    max_iter: int
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant.parse(str(self.variant)))
        if self.max_iter < 0:
            raise WorkloadError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.max_iter > MAX_ITER_CAP:
            raise WorkloadError(
                f"max_iter {self.max_iter} exceeds the supported cap {MAX_ITER_CAP}"
            )
        if self.window < 1:
            raise WorkloadError(f"window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class WorkloadResult:
    checksum: int
    head_value: int
    wall_time: float  # seconds


def oracle_rotate(max_iter: int, window: int = DEFAULT_WINDOW) -> int:
    """Independent brute-force checksum oracle.

    Simulates the rotation semantics directly on a plain Python list (start
    with [0..window-1]; per iteration i drop the last element and prepend
    i+window) and returns the sum of the final elements. Deliberately shares
    no mechanism with any workload variant.
    """
    if max_iter < 0:
        raise WorkloadError(f"max_iter must be >= 0, got {max_iter}")
    if window < 1:
        raise WorkloadError(f"window must be >= 1, got {window}")
    buf = list(range(window))
    for i in range(max_iter):
        buf = [i + window] + buf[:-1]
    return sum(buf)


def expected_checksum(max_iter: int, window: int = DEFAULT_WINDOW) -> int:
    """Closed-form checksum, exact for any (max_iter, window).

    For max_iter >= window the window holds the consecutive descending run
    [max_iter+window-1 .. max_iter], giving window*max_iter +
    window*(window-1)/2. Below that, max_iter inserted values plus the
    surviving prefix of the initial 0..window-1 fill the window.
    """
    m, w = max_iter, window
    if m >= w:
        return w * m + w * (w - 1) // 2
    return m * w + m * (m - 1) // 2 + (w - m - 1) * (w - m) // 2


def expected_head(max_iter: int, window: int = DEFAULT_WINDOW) -> int:
    """Value of the first window element after the run."""
    return max_iter - 1 + window if max_iter >= 1 else 0


# Per-iteration work of the manual strategies happens in these kernels.
# int64 throughout; nogil so power sampling threads keep running.

@njit(cache=True, nogil=True)
def _raw_kernel(max_iter, window):
    # growable buffer: push-back with capacity doubling, then manual
    # element-by-element backward shift each iteration
    cap = 4
    vec = np.empty(cap, dtype=np.int64)
    n = 0
    for i in range(window):
        if n == cap:
            cap *= 2
            grown = np.empty(cap, dtype=np.int64)
            grown[:n] = vec[:n]
            vec = grown
        vec[n] = i
        n += 1
    for i in range(max_iter):
        for j in range(n - 1, 0, -1):
            vec[j] = vec[j - 1]
        vec[0] = i + window
    total = np.int64(0)
    for j in range(n):
        total += vec[j]
    return total, vec[0]


@njit(cache=True, nogil=True)
def _array_kernel(max_iter, window):
    # fixed-capacity buffer of exactly `window` slots, manual shift
    vec = np.empty(window, dtype=np.int64)
    for i in range(window):
        vec[i] = i
    for i in range(max_iter):
        for j in range(window - 1, 0, -1):
            vec[j] = vec[j - 1]
        vec[0] = i + window
    total = np.int64(0)
    for j in range(window):
        total += vec[j]
    return total, vec[0]


@njit(cache=True, nogil=True)
def _list_kernel(max_iter, window):
    # doubly-linked ring in index form: num/prv/nxt are the node fields.
    # Rotation overwrites the tail node and walks the cursors backward.
    num = np.empty(window, dtype=np.int64)
    prv = np.empty(window, dtype=np.int64)
    nxt = np.empty(window, dtype=np.int64)
    for j in range(window):
        num[j] = j
        prv[j] = j - 1 if j > 0 else window - 1
        nxt[j] = j + 1 if j < window - 1 else 0
    first = 0
    last = window - 1
    for i in range(max_iter):
        num[last] = i + window
        first = last
        last = prv[last]
    total = np.int64(0)
    node = first
    for _ in range(window):
        total += num[node]
        node = nxt[node]
    return total, num[first]


def _run_vector(max_iter: int, window: int):
    # the container-primitives variant: pop from the tail, insert at the head
    vec = list(range(window))
    for i in range(max_iter):
        vec.pop()
        vec.insert(0, i + window)
    return sum(vec), vec[0]


_KERNELS = {
    Variant.RAW: _raw_kernel,
    Variant.ARRAY: _array_kernel,
    Variant.LIST: _list_kernel,
}

_warmed: set[Variant] = set()


def _warm(variant: Variant) -> None:
    # compile the kernel outside the timed region
    kernel = _KERNELS.get(variant)
    if kernel is not None and variant not in _warmed:
        kernel(0, 2)
        _warmed.add(variant)


def run_workload(spec: WorkloadSpec) -> WorkloadResult:
    """Run one benchmark variant and return its checksum, head value and
    wall time.

    Raises ChecksumOverflowError if the final checksum cannot fit a signed
    64-bit integer (max_iter too large for the integer width).
    """
    bound = expected_checksum(spec.max_iter, spec.window)
    if bound > INT64_MAX:
        raise ChecksumOverflowError(
            f"checksum {bound} for max_iter={spec.max_iter}, window={spec.window} "
            f"exceeds the signed 64-bit range"
        )

    _warm(spec.variant)
    start = time.perf_counter()
    if spec.variant is Variant.VECTOR:
        checksum, head = _run_vector(spec.max_iter, spec.window)
    else:
        checksum, head = _KERNELS[spec.variant](spec.max_iter, spec.window)
    wall = time.perf_counter() - start
    return WorkloadResult(checksum=int(checksum), head_value=int(head), wall_time=wall)
