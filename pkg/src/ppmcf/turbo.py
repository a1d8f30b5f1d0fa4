"""Rate-1/3 turbo codec with 8-state RSC constituents, BPSK/AWGN channel and
iterative log-MAP decoding.

Conventions
-----------
* LLRs are ``log P(bit=0) / P(bit=1)``; BPSK maps 0 -> +1 and 1 -> -1.
* The second encoder sees ``c'[k] = c[pi(k)]``.
* Each constituent is terminated by feeding its feedback value for
  ``memory`` steps. The flat transmitted frame is::

      systematic[N] | parity1[N] | parity2[N]
      | tail1_sys[m] | tail1_par[m] | tail2_sys[m] | tail2_par[m]

  giving ``3N + 4m`` bits (``3N + 12`` for the 3GPP code).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .ppcore import DomainError, Interleaver

EXTRINSIC_CLIP = 50.0
NOISELESS_LLR = 50.0
_NEG = -1.0e30


# ---------------------------------------------------------------------------
# Constituent code
# ---------------------------------------------------------------------------

def _taps(poly: int, memory: int) -> list[int]:
    # octal masks are written MSB-first: bit `memory` is D^0
    return [(poly >> (memory - i)) & 1 for i in range(memory + 1)]


@dataclass(frozen=True)
class RscSpec:
    """Recursive systematic convolutional code, default 3GPP 13/15 (octal)."""

    memory: int = 3
    feedback: int = 0o13
    feedforward: int = 0o15
    next_state: np.ndarray = field(init=False, repr=False, compare=False)
    parity: np.ndarray = field(init=False, repr=False, compare=False)
    tail_input: np.ndarray = field(init=False, repr=False, compare=False)
    prev_state: np.ndarray = field(init=False, repr=False, compare=False)
    prev_input: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = self.memory
        if m < 1:
            raise DomainError("memory must be >= 1")
        fb = _taps(self.feedback, m)
        ff = _taps(self.feedforward, m)
        if fb[0] != 1 or fb[m] != 1:
            raise DomainError("feedback polynomial must have degree == memory and a unit constant term")
        S = 1 << m
        nxt = np.zeros((S, 2), dtype=np.int64)
        par = np.zeros((S, 2), dtype=np.int64)
        tail = np.zeros(S, dtype=np.int64)
        for s in range(S):
            # register bit i-1 of the state holds a[k-i]
            regs = [(s >> (i - 1)) & 1 for i in range(1, m + 1)]
            fbv = 0
            for i in range(1, m + 1):
                fbv ^= fb[i] & regs[i - 1]
            tail[s] = fbv
            for u in (0, 1):
                a = u ^ fbv
                p = ff[0] & a
                for i in range(1, m + 1):
                    p ^= ff[i] & regs[i - 1]
                nxt[s, u] = ((s << 1) | a) & (S - 1)
                par[s, u] = p
        # every state of a recursive code has exactly two predecessors
        prev_s = np.zeros((S, 2), dtype=np.int64)
        prev_u = np.zeros((S, 2), dtype=np.int64)
        fill = np.zeros(S, dtype=np.int64)
        for s in range(S):
            for u in (0, 1):
                t = nxt[s, u]
                prev_s[t, fill[t]] = s
                prev_u[t, fill[t]] = u
                fill[t] += 1
        if not np.all(fill == 2):
            raise DomainError("trellis does not have two predecessors per state")
        for name, arr in (("next_state", nxt), ("parity", par), ("tail_input", tail),
                          ("prev_state", prev_s), ("prev_input", prev_u)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_states(self) -> int:
        return 1 << self.memory


DEFAULT_RSC = RscSpec()


@njit(cache=True, nogil=True)
def _rsc_encode(bits, next_state, parity, tail_input, memory):
    n = bits.size
    par = np.empty(n, dtype=np.int8)
    tsys = np.empty(memory, dtype=np.int8)
    tpar = np.empty(memory, dtype=np.int8)
    s = 0
    for k in range(n):
        u = bits[k]
        par[k] = parity[s, u]
        s = next_state[s, u]
    for k in range(memory):
        u = tail_input[s]
        tsys[k] = u
        tpar[k] = parity[s, u]
        s = next_state[s, u]
    return par, tsys, tpar, s


def rsc_encode(bits, spec: RscSpec = DEFAULT_RSC):
    """Parity stream, tail systematic bits, tail parity bits and final state."""
    bits = np.ascontiguousarray(bits, dtype=np.int64)
    par, tsys, tpar, s = _rsc_encode(bits, spec.next_state, spec.parity, spec.tail_input, spec.memory)
    return par, tsys, tpar, int(s)


@dataclass
class CodeFrame:
    info: np.ndarray
    systematic: np.ndarray
    parity1: np.ndarray
    parity2: np.ndarray
    tail1_sys: np.ndarray
    tail1_par: np.ndarray
    tail2_sys: np.ndarray
    tail2_par: np.ndarray
    final_states: tuple[int, int] = (0, 0)

    @property
    def N(self) -> int:
        return int(self.info.size)

    @property
    def termination_bits(self) -> int:
        return int(self.tail1_sys.size + self.tail1_par.size + self.tail2_sys.size + self.tail2_par.size)

    @property
    def coded_length(self) -> int:
        return 3 * self.N + self.termination_bits

    @property
    def rate(self) -> float:
        return self.N / self.coded_length

    def bits(self) -> np.ndarray:
        return np.concatenate([
            self.systematic, self.parity1, self.parity2,
            self.tail1_sys, self.tail1_par, self.tail2_sys, self.tail2_par,
        ]).astype(np.int8)


def code_rate(N: int, spec: RscSpec = DEFAULT_RSC) -> float:
    return N / (3 * N + 4 * spec.memory)


def encode(info, pi: Interleaver, spec: RscSpec = DEFAULT_RSC) -> CodeFrame:
    info = np.asarray(info, dtype=np.int8)
    if info.size != pi.N:
        raise DomainError(f"info length {info.size} != interleaver length {pi.N}")
    if info.size and (info.min() < 0 or info.max() > 1):
        raise DomainError("info must be a 0/1 sequence")
    p1, t1s, t1p, s1 = rsc_encode(info, spec)
    p2, t2s, t2p, s2 = rsc_encode(pi.interleave(info), spec)
    return CodeFrame(info.copy(), info.copy(), p1, p2, t1s, t1p, t2s, t2p, (s1, s2))


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------

def noise_variance(ebn0_db: float, rate: float) -> float:
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def awgn_channel(frame, ebn0_db: float, rate: float | None = None, rng=None) -> np.ndarray:
    """BPSK over AWGN; returns channel LLRs ``2y / sigma^2``.

    `frame` is a :class:`CodeFrame` or a flat bit array. ``ebn0_db=inf``
    skips the noise and returns ``+-NOISELESS_LLR``.
    """
    if isinstance(frame, CodeFrame):
        bits = frame.bits()
        if rate is None:
            rate = frame.rate
    else:
        bits = np.asarray(frame, dtype=np.int8)
        if rate is None:
            raise DomainError("rate is required for a flat bit array")
    x = 1.0 - 2.0 * bits.astype(np.float64)
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return NOISELESS_LLR * x
    sigma2 = noise_variance(ebn0_db, rate)
    y = x + math.sqrt(sigma2) * _as_rng(rng).standard_normal(bits.size)
    return 2.0 * y / sigma2


@dataclass
class ChannelStreams:
    """Channel LLRs split per constituent decoder (tails appended)."""

    sys1: np.ndarray
    par1: np.ndarray
    sys2: np.ndarray
    par2: np.ndarray
    N: int


def split_llrs(llrs, pi: Interleaver, spec: RscSpec = DEFAULT_RSC) -> ChannelStreams:
    llrs = np.asarray(llrs, dtype=np.float64)
    N, m = pi.N, spec.memory
    if llrs.size != 3 * N + 4 * m:
        raise DomainError(f"expected {3 * N + 4 * m} LLRs for N={N}, got {llrs.size}")
    if not np.all(np.isfinite(llrs)):
        raise FloatingPointError("channel LLRs must be finite")
    sys, p1, p2 = llrs[:N], llrs[N:2 * N], llrs[2 * N:3 * N]
    t = llrs[3 * N:]
    t1s, t1p, t2s, t2p = t[:m], t[m:2 * m], t[2 * m:3 * m], t[3 * m:]
    return ChannelStreams(
        sys1=np.concatenate([sys, t1s]),
        par1=np.concatenate([p1, t1p]),
        sys2=np.concatenate([pi.interleave(sys), t2s]),
        par2=np.concatenate([p2, t2p]),
        N=N,
    )


# ---------------------------------------------------------------------------
# SISO (BCJR in the log domain)
# ---------------------------------------------------------------------------

@njit(inline="always")
def _maxstar(a, b, exact):
    if a > b:
        return a + math.log1p(math.exp(b - a)) if exact else a
    return b + math.log1p(math.exp(a - b)) if exact else b


@njit(inline="always")
def _lse8(x, n, exact):
    # n-ary max*: max plus log of the summed exponentials
    m = x[0]
    for i in range(1, n):
        if x[i] > m:
            m = x[i]
    if not exact:
        return m
    acc = 0.0
    for i in range(n):
        acc += math.exp(x[i] - m)
    return m + math.log(acc)


@njit(cache=True, nogil=True)
def _bcjr(sys, par, apri, prev_state, prev_input, next_state, parity, tail_input,
          n_info, exact, lse0, lse1, norms):
    """Forward-backward over the terminated trellis.

    Fills lse0/lse1 (length n_info) with the log-sum of normalised path
    metrics for input 0/1, and norms[0..2L) with the per-step alpha
    normalisers followed by the beta normalisers, so callers can rebuild
    un-normalised values. Returns the log of the total path metric.
    """
    L = sys.size
    S = next_state.shape[0]
    alpha = np.full((L + 1, S), _NEG)
    alpha[0, 0] = 0.0
    gam = np.empty(4)  # index 2*u + p
    log_z = 0.0
    for k in range(L):
        a_prev = alpha[k]
        a_next = alpha[k + 1]
        ls = 0.5 * (sys[k] + (apri[k] if k < n_info else 0.0))
        lp = 0.5 * par[k]
        gam[0] = ls + lp
        gam[1] = ls - lp
        gam[2] = -ls + lp
        gam[3] = -ls - lp
        if k < n_info:
            for t in range(S):
                s0 = prev_state[t, 0]
                u0 = prev_input[t, 0]
                s1 = prev_state[t, 1]
                u1 = prev_input[t, 1]
                a_next[t] = _maxstar(a_prev[s0] + gam[2 * u0 + parity[s0, u0]],
                                     a_prev[s1] + gam[2 * u1 + parity[s1, u1]], exact)
        else:
            for s in range(S):
                u = tail_input[s]
                t = next_state[s, u]
                a_next[t] = _maxstar(a_next[t], a_prev[s] + gam[2 * u + parity[s, u]], exact)
        mx = a_next[0]
        for s in range(1, S):
            if a_next[s] > mx:
                mx = a_next[s]
        for s in range(S):
            a_next[s] -= mx
        norms[k] = mx
        log_z += mx
    log_z += alpha[L, 0]

    beta = np.full(S, _NEG)
    beta[0] = 0.0
    b_prev = np.empty(S)
    t0 = np.empty(S)
    t1 = np.empty(S)
    f0 = np.empty(S)
    f1 = np.empty(S)
    cs = np.empty(S)
    for k in range(L - 1, -1, -1):
        ls = 0.5 * (sys[k] + (apri[k] if k < n_info else 0.0))
        lp = 0.5 * par[k]
        gam[0] = ls + lp
        gam[1] = ls - lp
        gam[2] = -ls + lp
        gam[3] = -ls - lp
        if k < n_info:
            a_k = alpha[k]
            cmax = _NEG
            for s in range(S):
                g0 = gam[parity[s, 0]] + beta[next_state[s, 0]]
                g1 = gam[2 + parity[s, 1]] + beta[next_state[s, 1]]
                t0[s] = a_k[s] + g0
                t1[s] = a_k[s] + g1
                if exact:
                    # the correction term exp(-|g0 - g1|) is reused for the APP sums
                    if g0 >= g1:
                        e = math.exp(g1 - g0)
                        b_prev[s] = g0 + math.log1p(e)
                        c = t0[s]
                        f0[s] = 1.0
                        f1[s] = e
                    else:
                        e = math.exp(g0 - g1)
                        b_prev[s] = g1 + math.log1p(e)
                        c = t1[s]
                        f0[s] = e
                        f1[s] = 1.0
                    cs[s] = c
                    if c > cmax:
                        cmax = c
                else:
                    b_prev[s] = g0 if g0 > g1 else g1
            if exact:
                s0 = 0.0
                s1 = 0.0
                for s in range(S):
                    w = math.exp(cs[s] - cmax)
                    s0 += w * f0[s]
                    s1 += w * f1[s]
                if s0 > 0.0 and s1 > 0.0:
                    lse0[k] = cmax + math.log(s0)
                    lse1[k] = cmax + math.log(s1)
                else:
                    lse0[k] = _lse8(t0, S, True)
                    lse1[k] = _lse8(t1, S, True)
            else:
                lse0[k] = _lse8(t0, S, False)
                lse1[k] = _lse8(t1, S, False)
        else:
            for s in range(S):
                u = tail_input[s]
                b_prev[s] = gam[2 * u + parity[s, u]] + beta[next_state[s, u]]
        mx = b_prev[0]
        for s in range(1, S):
            if b_prev[s] > mx:
                mx = b_prev[s]
        for s in range(S):
            beta[s] = b_prev[s] - mx
        norms[L + k] = mx
    return log_z


@dataclass
class SisoResult:
    extrinsic: np.ndarray
    app: np.ndarray


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("SISO inputs must be finite")


def _run_bcjr(sys, par, apriori, spec, algorithm):
    if algorithm not in ("logmap", "maxlog"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    sys = np.ascontiguousarray(sys, dtype=np.float64)
    par = np.ascontiguousarray(par, dtype=np.float64)
    apriori = np.ascontiguousarray(apriori, dtype=np.float64)
    n_info = apriori.size
    if sys.size != par.size or sys.size != n_info + spec.memory:
        raise DomainError(
            f"trellis length mismatch: sys={sys.size}, par={par.size}, apriori={n_info}, memory={spec.memory}"
        )
    lse0 = np.empty(n_info)
    lse1 = np.empty(n_info)
    norms = np.empty(2 * sys.size)
    log_z = _bcjr(sys, par, apriori, spec.prev_state, spec.prev_input, spec.next_state,
                  spec.parity, spec.tail_input, n_info, algorithm == "logmap", lse0, lse1, norms)
    return lse0, lse1, norms, log_z


def siso_decode(sys, par, apriori, spec: RscSpec = DEFAULT_RSC, algorithm: str = "logmap",
                clip: float = EXTRINSIC_CLIP) -> SisoResult:
    """One constituent SISO pass.

    `sys` and `par` cover the info positions followed by the ``memory``
    tail positions; `apriori` covers the info positions only.
    """
    _check_finite(sys, par, apriori)
    lse0, lse1, _, _ = _run_bcjr(sys, par, apriori, spec, algorithm)
    app = lse0 - lse1
    n = app.size
    ext = app - np.asarray(apriori, dtype=np.float64) - np.asarray(sys, dtype=np.float64)[:n]
    np.clip(ext, -clip, clip, out=ext)
    return SisoResult(ext, app)


def siso_app_probabilities(sys, par, apriori, spec: RscSpec = DEFAULT_RSC,
                           algorithm: str = "logmap") -> tuple[np.ndarray, np.ndarray]:
    """Per-position ``(P(u=0 | y), P(u=1 | y))``.

    Each probability divides a per-position path sum by the total path
    metric from the forward recursion alone, so the pair only sums to
    one when the forward and backward recursions agree.
    """
    _check_finite(sys, par, apriori)
    lse0, lse1, norms, log_z = _run_bcjr(sys, par, apriori, spec, algorithm)
    L = np.asarray(sys).size
    n = lse0.size
    # un-normalise: alpha_k carries sum(norms[:k]); beta_{k+1} carries sum(norms[L+k+1:])
    fwd = np.concatenate([[0.0], np.cumsum(norms[:L])])[:n]
    bwd_tail = np.cumsum(norms[L:][::-1])[::-1]
    bwd = np.concatenate([bwd_tail[1:], [0.0]])[:n]
    offset = fwd + bwd - log_z
    return np.exp(lse0 + offset), np.exp(lse1 + offset)


# ---------------------------------------------------------------------------
# Iterative decoding
# ---------------------------------------------------------------------------

@dataclass
class TurboResult:
    bits: np.ndarray
    app: np.ndarray
    extrinsic1: list[np.ndarray]
    extrinsic2: list[np.ndarray]

    @property
    def iterations(self) -> int:
        return len(self.extrinsic1)


Exchange = Callable[[np.ndarray, int], np.ndarray]


def turbo_decode(llrs, pi: Interleaver, iterations: int = 8, spec: RscSpec = DEFAULT_RSC,
                 algorithm: str = "logmap", interleave: Exchange | None = None,
                 deinterleave: Exchange | None = None) -> TurboResult:
    """Iterative decoding with extrinsic exchange between the two SISOs.

    `interleave` and `deinterleave` move extrinsic arrays between the
    decoders; they receive the array and the iteration index and default
    to direct permutation indexing.
    """
    if iterations < 1:
        raise DomainError("iterations must be >= 1")
    ch = split_llrs(llrs, pi, spec)
    N = ch.N
    if interleave is None:
        interleave = lambda e, it: pi.interleave(e)  # noqa: E731
    if deinterleave is None:
        deinterleave = lambda e, it: pi.deinterleave(e)  # noqa: E731
    la1 = np.zeros(N)
    ext1: list[np.ndarray] = []
    ext2: list[np.ndarray] = []
    for it in range(iterations):
        e1 = siso_decode(ch.sys1, ch.par1, la1, spec, algorithm).extrinsic
        la2 = interleave(e1, it)
        e2 = siso_decode(ch.sys2, ch.par2, la2, spec, algorithm).extrinsic
        la1 = deinterleave(e2, it)
        ext1.append(e1)
        ext2.append(e2)
    app = ch.sys1[:N] + ext1[-1] + la1
    bits = (app < 0).astype(np.int8)
    return TurboResult(bits, app, ext1, ext2)


# ---------------------------------------------------------------------------
# Monte-Carlo FER
# ---------------------------------------------------------------------------

@dataclass
class SimConfig:
    interleaver: Interleaver
    ebn0_db: Sequence[float]
    max_frames: int
    target_errors: int = 100
    iterations: int = 8
    seed: int = 0
    spec: RscSpec = DEFAULT_RSC
    algorithm: str = "logmap"
    noiseless: bool = False
    threads: int = 1
    batch: int = 64

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if self.target_errors < 1:
            raise DomainError("target_errors must be >= 1")
        if self.max_frames < 1:
            raise DomainError("max_frames must be >= 1")
        self.ebn0_db = tuple(float(v) for v in self.ebn0_db)

    @property
    def rate(self) -> float:
        return code_rate(self.interleaver.N, self.spec)


@dataclass(frozen=True)
class FERResult:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    info_bits: int

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.info_bits) if self.frames else 0.0

    @property
    def ci95(self) -> float:
        """Half-width of the normal-approximation 95% interval on FER."""
        if not self.frames:
            return 0.0
        p = self.fer
        return 1.96 * math.sqrt(p * (1.0 - p) / self.frames)


def frame_rng(seed: int, snr_index: int, frame: int) -> np.random.Generator:
    """Independent generator per (seed, SNR point, frame)."""
    return np.random.default_rng([seed, snr_index, frame])


def simulate_frame(config: SimConfig, snr_index: int, frame: int) -> int:
    """Number of info-bit errors in one frame."""
    pi = config.interleaver
    rng = frame_rng(config.seed, snr_index, frame)
    info = rng.integers(0, 2, pi.N, dtype=np.int8)
    cw = encode(info, pi, config.spec)
    ebn0 = math.inf if config.noiseless else config.ebn0_db[snr_index]
    llrs = awgn_channel(cw, ebn0, config.rate, rng)
    dec = turbo_decode(llrs, pi, config.iterations, config.spec, config.algorithm)
    return int(np.count_nonzero(dec.bits != info))


def run_fer(config: SimConfig, progress: Callable[[FERResult], None] | None = None) -> list[FERResult]:
    """Simulate every Eb/N0 point until `target_errors` frame errors or
    `max_frames` frames.

    Frames are scored in index order, so the stopping frame, and hence
    every tally, is the same for any thread count.
    """
    results = []
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for si, ebn0 in enumerate(config.ebn0_db):
            frames = frame_errors = bit_errors = 0
            while frames < config.max_frames and frame_errors < config.target_errors:
                idx = range(frames, min(frames + config.batch, config.max_frames))
                if pool is None:
                    errs = (simulate_frame(config, si, f) for f in idx)
                else:
                    errs = pool.map(lambda f: simulate_frame(config, si, f), idx)
                for e in errs:
                    frames += 1
                    bit_errors += e
                    frame_errors += e > 0
                    if frame_errors >= config.target_errors:
                        break
            res = FERResult(ebn0, frames, frame_errors, bit_errors, config.interleaver.N)
            results.append(res)
            if progress is not None:
                progress(res)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return results


FER_COLUMNS = ("ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber", "ci95")


def fer_rows(results: Sequence[FERResult]) -> list[dict]:
    return [
        {"ebn0_db": r.ebn0_db, "frames": r.frames, "frame_errors": r.frame_errors,
         "bit_errors": r.bit_errors, "fer": r.fer, "ber": r.ber, "ci95": r.ci95}
        for r in results
    ]


# ---------------------------------------------------------------------------
# Minimum-distance upper bound by low-weight input enumeration
# ---------------------------------------------------------------------------

def _zero_input_tables(spec: RscSpec, N: int):
    """Parity weight and end state after L zero-input steps from each state."""
    S = spec.n_states
    weight = np.zeros((S, N + 1), dtype=np.int64)
    state = np.zeros((S, N + 1), dtype=np.int64)
    for s0 in range(S):
        s, w = s0, 0
        state[s0, 0] = s
        for L in range(1, N + 1):
            w += spec.parity[s, 0]
            s = spec.next_state[s, 0]
            weight[s0, L] = w
            state[s0, L] = s
    term = np.zeros(S, dtype=np.int64)
    for s0 in range(S):
        s, w = s0, 0
        for _ in range(spec.memory):
            u = spec.tail_input[s]
            w += u + spec.parity[s, u]
            s = spec.next_state[s, u]
        term[s0] = w
    return weight, state, term


@njit(cache=True, nogil=True, inline="always")
def _encoder_weight(positions, w, N, zw, zs, term, next_state, parity):
    # positions[:w] sorted ascending
    s = 0
    pos = 0
    total = 0
    for i in range(w):
        q = positions[i]
        gap = q - pos
        total += zw[s, gap]
        s = zs[s, gap]
        total += parity[s, 1]
        s = next_state[s, 1]
        pos = q + 1
    gap = N - pos
    total += zw[s, gap]
    s = zs[s, gap]
    return total + term[s]


@njit(cache=True, nogil=True)
def _sort_small(a, w):
    for i in range(1, w):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


@njit(cache=True, nogil=True)
def _codeword_weight(p, w, inv, N, zw, zs, term, next_state, parity, buf):
    total = w + _encoder_weight(p, w, N, zw, zs, term, next_state, parity)
    for i in range(w):
        buf[i] = inv[p[i]]
    _sort_small(buf, w)
    return total + _encoder_weight(buf, w, N, zw, zs, term, next_state, parity)


@njit(cache=True, nogil=True)
def _enumerate_min_weight(inv, max_w, zw, zs, term, next_state, parity):
    N = inv.size
    best = 1 << 62
    p = np.zeros(4, dtype=np.int64)
    buf = np.zeros(4, dtype=np.int64)
    for a in range(N):
        p[0] = a
        c = _codeword_weight(p, 1, inv, N, zw, zs, term, next_state, parity, buf)
        if c < best:
            best = c
        if max_w < 2:
            continue
        for b in range(a + 1, N):
            p[1] = b
            c = _codeword_weight(p, 2, inv, N, zw, zs, term, next_state, parity, buf)
            if c < best:
                best = c
            if max_w < 3:
                continue
            for d in range(b + 1, N):
                p[2] = d
                c = _codeword_weight(p, 3, inv, N, zw, zs, term, next_state, parity, buf)
                if c < best:
                    best = c
                if max_w < 4:
                    continue
                for e in range(d + 1, N):
                    p[3] = e
                    c = _codeword_weight(p, 4, inv, N, zw, zs, term, next_state, parity, buf)
                    if c < best:
                        best = c
    return best


def codeword_weight(info_positions, pi: Interleaver, spec: RscSpec = DEFAULT_RSC) -> int:
    """Hamming weight of the terminated codeword for an info word given by
    the positions of its ones (table-driven, no full encode)."""
    p = np.sort(np.asarray(info_positions, dtype=np.int64))
    if p.size > 4:
        raise DomainError("table-driven weight supports at most 4 ones")
    zw, zs, term = _zero_input_tables(spec, pi.N)
    inv = pi.inverse().mapping
    buf = np.zeros(4, dtype=np.int64)
    pp = np.zeros(4, dtype=np.int64)
    pp[:p.size] = p
    return int(_codeword_weight(pp, p.size, inv, pi.N, zw, zs, term, spec.next_state, spec.parity, buf))


def dmin_upper_bound(pi: Interleaver, spec: RscSpec = DEFAULT_RSC, max_input_weight: int = 3) -> int:
    """Smallest codeword weight over all nonzero info words of weight
    <= `max_input_weight`; an upper bound on the true minimum distance."""
    if max_input_weight not in (1, 2, 3, 4):
        raise DomainError("max_input_weight must be between 1 and 4")
    zw, zs, term = _zero_input_tables(spec, pi.N)
    inv = np.ascontiguousarray(pi.inverse().mapping)
    return int(_enumerate_min_weight(inv, max_input_weight, zw, zs, term, spec.next_state, spec.parity))
