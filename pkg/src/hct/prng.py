"""Counter-based, splittable random streams (Philox4x32-10).

A stream is identified by 128 bits: a 64-bit Philox key and a 64-bit nonce
that occupies the upper half of the counter.  Block ``b`` of a stream is
``philox(counter=(b_lo, b_hi, nonce_lo, nonce_hi), key)``, so every draw is
addressable without fast-forwarding and two streams only share output if
their 128-bit identities coincide.

Child identities are derived by running Philox under a domain-separated key
with the label in the counter.  The same derivation is available inside
numba kernels (:func:`child_ident`), which is how per-replicate and
per-feature streams are addressed in the Monte Carlo loops without any
Python-side bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .normal import _ppnd16

_MASK = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_S32 = np.uint64(32)
# key whitening for child derivation; keeps derivation blocks disjoint from output blocks
_D0 = np.uint64(0x243F6A88)
_D1 = np.uint64(0x85A308D3)
# root identity for master seeds
_R0 = np.uint64(0x13198A2E)
_R1 = np.uint64(0x03707344)
_R2 = np.uint64(0xA4093822)
_R3 = np.uint64(0x299F31D0)

_TWO_M53 = 1.0 / 9007199254740992.0
_TWO_26 = 67108864.0

# RNG helpers take the state array but never allocate, so they are compiled
# without reference counting; with it every call pays ~20 ns in atomics.
# state layout: k0 k1 n0 n1 | next block | buffer pos | buffered words
BUFFER_WORDS = 256
_BLOCKS = BUFFER_WORDS // 4
_HEAD = 6
STATE_SIZE = _HEAD + BUFFER_WORDS


@njit(cache=True, nogil=True, _nrt=False)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten rounds of Philox4x32; every argument holds a 32-bit value in a uint64."""
    c0 = np.uint64(c0)
    c1 = np.uint64(c1)
    c2 = np.uint64(c2)
    c3 = np.uint64(c3)
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        n0 = (p1 >> _S32) ^ c1 ^ k0
        n1 = p1 & _MASK
        n2 = (p0 >> _S32) ^ c3 ^ k1
        n3 = p0 & _MASK
        c0, c1, c2, c3 = n0, n1, n2, n3
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


_W0_32 = np.uint32(0x9E3779B9)
_W1_32 = np.uint32(0xBB67AE85)


@njit(cache=True, nogil=True, _nrt=False)
def _refill(st):
    """Refill the word buffer with the next BUFFER_WORDS // 4 blocks.

    Written in 32-bit arithmetic so LLVM vectorises across blocks; output
    equals repeated :func:`philox4x32` calls on consecutive counters.
    """
    ctr0 = st[4]
    n0 = np.uint32(st[2])
    n1 = np.uint32(st[3])
    k0 = np.uint32(st[0])
    k1 = np.uint32(st[1])
    for b in range(_BLOCKS):
        c = ctr0 + np.uint64(b)
        c0 = np.uint32(c & _MASK)
        c1 = np.uint32(c >> _S32)
        c2 = n0
        c3 = n1
        kk0 = k0
        kk1 = k1
        for _ in range(10):
            p0 = _M0 * np.uint64(c0)
            p1 = _M1 * np.uint64(c2)
            t0 = np.uint32(np.uint32(p1 >> _S32) ^ c1 ^ kk0)
            t2 = np.uint32(np.uint32(p0 >> _S32) ^ c3 ^ kk1)
            c1 = np.uint32(p1)
            c3 = np.uint32(p0)
            c0 = t0
            c2 = t2
            kk0 = np.uint32(kk0 + _W0_32)
            kk1 = np.uint32(kk1 + _W1_32)
        o = _HEAD + 4 * b
        st[o] = c0
        st[o + 1] = c1
        st[o + 2] = c2
        st[o + 3] = c3
    st[4] = ctr0 + np.uint64(_BLOCKS)
    st[5] = 0


@njit(cache=True, nogil=True)
def child_ident(ident, label):
    """Identity of the child stream ``label`` (a uint64) of ``ident`` (uint64[4])."""
    lab = np.uint64(label)
    out = np.empty(4, dtype=np.uint64)
    r0, r1, r2, r3 = philox4x32(
        lab & _MASK, lab >> _S32, ident[2], ident[3], ident[0] ^ _D0, ident[1] ^ _D1
    )
    out[0] = r0
    out[1] = r1
    out[2] = r2
    out[3] = r3
    return out


@njit(cache=True, nogil=True)
def root_ident(seed):
    s = np.uint64(seed)
    out = np.empty(4, dtype=np.uint64)
    r0, r1, r2, r3 = philox4x32(s & _MASK, s >> _S32, _R2, _R3, _R0, _R1)
    out[0] = r0
    out[1] = r1
    out[2] = r2
    out[3] = r3
    return out


@njit(cache=True, nogil=True, _nrt=False)
def seed_child_state(st, parent, label):
    """Point ``st`` at the start of child ``label`` of ``parent`` without allocating."""
    lab = np.uint64(label)
    r0, r1, r2, r3 = philox4x32(
        lab & _MASK, lab >> _S32, parent[2], parent[3], parent[0] ^ _D0, parent[1] ^ _D1
    )
    st[0] = r0
    st[1] = r1
    st[2] = r2
    st[3] = r3
    st[4] = 0
    st[5] = BUFFER_WORDS


@njit(cache=True, nogil=True)
def new_state(ident):
    st = np.zeros(STATE_SIZE, dtype=np.uint64)
    st[0] = ident[0]
    st[1] = ident[1]
    st[2] = ident[2]
    st[3] = ident[3]
    st[5] = BUFFER_WORDS
    return st


@njit(cache=True, nogil=True, _nrt=False)
def next_u32(st):
    if st[5] >= BUFFER_WORDS:
        _refill(st)
    pos = st[5]
    st[5] = pos + np.uint64(1)
    return st[_HEAD + pos]


@njit(cache=True, nogil=True, _nrt=False)
def next_uniform(st):
    """Uniform on [0, 1) with 53 random bits."""
    a = next_u32(st) >> np.uint64(5)
    b = next_u32(st) >> np.uint64(6)
    return (float(a) * _TWO_26 + float(b)) * _TWO_M53


@njit(cache=True, nogil=True, _nrt=False)
def next_open_uniform(st):
    """Uniform on the open interval (0, 1); safe for inverse-cdf transforms."""
    a = next_u32(st) >> np.uint64(5)
    b = next_u32(st) >> np.uint64(6)
    return (float(a) * _TWO_26 + float(b) + 0.5) * _TWO_M53


@njit(cache=True, nogil=True, _nrt=False)
def next_normal(st):
    return _ppnd16(next_open_uniform(st))


@njit(cache=True, nogil=True, _nrt=False)
def next_index(st, n):
    """Integer in [0, n) by multiply-shift; bias below n / 2**32."""
    return np.int64((next_u32(st) * np.uint64(n)) >> _S32)


@njit(cache=True, nogil=True)
def _fill_uniform(st, out):
    for i in range(out.size):
        out[i] = next_uniform(st)


@njit(cache=True, nogil=True)
def _fill_normal(st, out):
    for i in range(out.size):
        out[i] = next_normal(st)


@njit(cache=True, nogil=True)
def _fill_index(st, n, out):
    for i in range(out.size):
        out[i] = next_index(st, n)


def _as_u64(v: int) -> np.uint64:
    v = int(v)
    if not 0 <= v < 2**64:
        raise ValueError(f"stream labels and seeds must be unsigned 64-bit, got {v}")
    return np.uint64(v)


@dataclass(frozen=True)
class StreamKey:
    """Address of a random stream: a master seed plus a path of labels."""

    master_seed: int
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        _as_u64(self.master_seed)
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))
        for v in self.labels:
            _as_u64(v)

    def child(self, *labels: int) -> "StreamKey":
        return StreamKey(self.master_seed, self.labels + tuple(labels))

    def ident(self) -> np.ndarray:
        ident = root_ident(_as_u64(self.master_seed))
        for v in self.labels:
            ident = child_ident(ident, _as_u64(v))
        return ident


@dataclass
class Stream:
    """A cursor over one Philox stream.

    Confine each instance to one task; derive siblings with :meth:`spawn`
    rather than sharing.
    """

    ident: np.ndarray
    _state: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.ident = np.asarray(self.ident, dtype=np.uint64).copy()
        self._state = new_state(self.ident)

    @property
    def state(self) -> np.ndarray:
        """Mutable kernel state; kernels advance it in place."""
        return self._state

    def spawn(self, *labels: int) -> "Stream":
        ident = self.ident
        for v in labels:
            ident = child_ident(ident, _as_u64(v))
        return Stream(ident)

    def uniform01(self, size=None):
        out = np.empty(1 if size is None else size, dtype=np.float64)
        _fill_uniform(self._state, out.reshape(-1))
        return float(out[0]) if size is None else out

    def standard_normal(self, size=None):
        out = np.empty(1 if size is None else size, dtype=np.float64)
        _fill_normal(self._state, out.reshape(-1))
        return float(out[0]) if size is None else out

    def integers(self, high: int, size=None):
        if high < 1 or high > 2**32:
            raise ValueError("high must lie in [1, 2**32]")
        out = np.empty(1 if size is None else size, dtype=np.int64)
        _fill_index(self._state, high, out.reshape(-1))
        return int(out[0]) if size is None else out


def derive_stream(key: StreamKey) -> Stream:
    """Fresh stream for ``key``; output depends on the key alone."""
    return Stream(key.ident())


def uniform01(g: Stream, size=None):
    return g.uniform01(size)
