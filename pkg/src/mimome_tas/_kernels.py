"""Monte Carlo hot loops.

Two interchangeable back ends produce the same numbers up to floating-point
round-off:

* ``run_block_numba``: one compiled loop over trials (needs numba);
* ``run_block_numpy``: the same pipeline vectorized over a block of trials.

Randomness is counter based. Every complex entry ``(row, col)`` of a channel
matrix is a pure function of ``(seed, trial, stream, col * rows + row)``, so
trials can be evaluated in any order, and the eavesdropper matrix can be
drawn for the selected columns only.
"""
import numpy as np

from ._jit import HAS_NUMBA, njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_GOLDEN2 = np.uint64(0xD1B54A32D192ED03)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi
_LN2 = np.log(2.0)

MAIN_STREAM = 0
EAVES_STREAM = 1


def mix64_py(z):
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = (z ^ (z >> _SH30)) * _MUL1
    z = (z ^ (z >> _SH27)) * _MUL2
    return z ^ (z >> _SH31)


mix64 = njit(cache=True, inline="always")(mix64_py)


@njit(cache=True)
def stream_key(seed, trial, stream):
    k = mix64(seed ^ _MUL1)
    k = mix64(k + (trial + _ONE) * _GOLDEN)
    return mix64(k + (stream + _ONE) * _GOLDEN2)


@njit(cache=True, inline="always")
def _uniform(key, counter):
    # in (0, 1], so log() below is finite
    z = mix64(key + (counter + _ONE) * _GOLDEN)
    return (np.float64(z >> _SH11) + 1.0) * _INV53


def as_seed(seed):
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


# ---------------------------------------------------------------- numpy path

def gaussian_entries_numpy(keys, flat_index):
    """Complex unit-variance entries for ``keys[..., None]`` and flat indices.

    ``keys`` has shape ``(T,)``; ``flat_index`` broadcasts against ``(T, K)``.
    """
    keys = keys.reshape(-1, 1)
    j = np.asarray(flat_index, dtype=np.uint64)
    u1 = _uniform_array(keys, _TWO * j)
    u2 = _uniform_array(keys, _TWO * j + _ONE)
    r = np.sqrt(-np.log(u1))
    theta = _TWO_PI * u2
    return r * np.cos(theta) + 1j * (r * np.sin(theta))


def _uniform_array(keys, counters):
    z = mix64_py(keys + (counters + _ONE) * _GOLDEN)
    return ((z >> _SH11).astype(np.float64) + 1.0) * _INV53


def keys_numpy(seed, trials, stream):
    trials = np.asarray(trials, dtype=np.uint64)
    k = mix64_py(np.full(trials.shape, seed, dtype=np.uint64) ^ _MUL1)
    k = mix64_py(k + (trials + _ONE) * _GOLDEN)
    s = np.full(trials.shape, stream, dtype=np.uint64)
    return mix64_py(k + (s + _ONE) * _GOLDEN2)


def _logdet2_batch(H, rho):
    """``log2 det(I + rho H^H H)`` for a stack ``H`` of shape ``(T, N, L)``."""
    T, N, L = H.shape
    if rho == 0:
        return np.zeros(T)
    if N <= L:
        G = np.einsum("tnl,tml->tnm", H, H.conj())
        n = N
    else:
        G = np.einsum("tnl,tnm->tlm", H.conj(), H)
        n = L
    G = rho * G
    G[:, np.arange(n), np.arange(n)] += 1.0
    C = np.linalg.cholesky(G)
    diag = np.real(C[:, np.arange(n), np.arange(n)])
    return 2.0 * np.log(diag).sum(axis=1) / _LN2


def run_block_numpy(seed, first_trial, n_trials, M, L, N_r, N_e, rho_m, rho_e):
    trials = np.arange(first_trial, first_trial + n_trials, dtype=np.uint64)
    km = keys_numpy(seed, trials, MAIN_STREAM)
    ke = keys_numpy(seed, trials, EAVES_STREAM)

    # column-major flat index j = col * rows + row, laid out as (row, col)
    idx_m = (np.arange(M)[None, :] * N_r + np.arange(N_r)[:, None]).ravel()
    Hm = gaussian_entries_numpy(km, idx_m).reshape(n_trials, N_r, M)
    norms = (Hm.real ** 2 + Hm.imag ** 2).sum(axis=1)
    sel = np.argsort(-norms, axis=1, kind="stable")[:, :L]
    trace = np.take_along_axis(norms, sel, axis=1).sum(axis=1)
    Hm_sel = np.take_along_axis(Hm, sel[:, None, :], axis=2)

    idx_e = sel[:, None, :].astype(np.int64) * N_e + np.arange(N_e)[None, :, None]
    He_sel = gaussian_entries_numpy(ke, idx_e.reshape(n_trials, -1)).reshape(n_trials, N_e, L)

    R_m = _logdet2_batch(Hm_sel, rho_m)
    R_e = _logdet2_batch(He_sel, rho_e)
    return R_m, R_e, trace


# ---------------------------------------------------------------- numba path

@njit(cache=True)
def _fill_columns(key, rows, cols_idx, out):
    for c in range(cols_idx.shape[0]):
        col = np.uint64(cols_idx[c])
        for r in range(rows):
            j = col * np.uint64(rows) + np.uint64(r)
            u1 = _uniform(key, _TWO * j)
            u2 = _uniform(key, _TWO * j + _ONE)
            rad = np.sqrt(-np.log(u1))
            th = _TWO_PI * u2
            out[r, c] = complex(rad * np.cos(th), rad * np.sin(th))


@njit(cache=True)
def _logdet2(H, rho):
    N, L = H.shape
    if rho == 0.0:
        return 0.0
    if N <= L:
        n = N
        G = np.empty((n, n), dtype=np.complex128)
        for a in range(n):
            for b in range(a + 1):
                s = 0j
                for k in range(L):
                    s += H[a, k] * np.conj(H[b, k])
                G[a, b] = rho * s
    else:
        n = L
        G = np.empty((n, n), dtype=np.complex128)
        for a in range(n):
            for b in range(a + 1):
                s = 0j
                for k in range(N):
                    s += np.conj(H[k, a]) * H[k, b]
                G[a, b] = rho * s
    for a in range(n):
        G[a, a] += 1.0
    # in-place lower Cholesky; only the lower triangle is referenced
    acc = 0.0
    for j in range(n):
        d = G[j, j].real
        for k in range(j):
            d -= G[j, k].real ** 2 + G[j, k].imag ** 2
        d = np.sqrt(d)
        G[j, j] = d
        acc += np.log(d)
        for i in range(j + 1, n):
            s = G[i, j]
            for k in range(j):
                s -= G[i, k] * np.conj(G[j, k])
            G[i, j] = s / d
    return 2.0 * acc / _LN2


@njit(cache=True, nogil=True)
def _run_block_jit(seed, first_trial, n_trials, M, L, N_r, N_e, rho_m, rho_e,
                   out_rm, out_re, out_trace):
    all_cols = np.arange(M)
    Hm = np.empty((N_r, M), dtype=np.complex128)
    Hm_sel = np.empty((N_r, L), dtype=np.complex128)
    He_sel = np.empty((N_e, L), dtype=np.complex128)
    norms = np.empty(M)
    for t in range(n_trials):
        trial = np.uint64(first_trial + t)
        _fill_columns(stream_key(seed, trial, np.uint64(0)), N_r, all_cols, Hm)
        for c in range(M):
            s = 0.0
            for r in range(N_r):
                s += Hm[r, c].real ** 2 + Hm[r, c].imag ** 2
            norms[c] = s
        sel = np.argsort(-norms, kind="mergesort")[:L]
        tr = 0.0
        for c in range(L):
            tr += norms[sel[c]]
            for r in range(N_r):
                Hm_sel[r, c] = Hm[r, sel[c]]
        _fill_columns(stream_key(seed, trial, np.uint64(1)), N_e, sel, He_sel)
        out_rm[t] = _logdet2(Hm_sel, rho_m)
        out_re[t] = _logdet2(He_sel, rho_e)
        out_trace[t] = tr


def run_block_numba(seed, first_trial, n_trials, M, L, N_r, N_e, rho_m, rho_e):
    if not HAS_NUMBA:
        raise RuntimeError("numba back end requested but numba is unavailable")
    R_m = np.empty(n_trials)
    R_e = np.empty(n_trials)
    trace = np.empty(n_trials)
    _run_block_jit(seed, int(first_trial), int(n_trials), int(M), int(L), int(N_r), int(N_e),
                   float(rho_m), float(rho_e), R_m, R_e, trace)
    return R_m, R_e, trace
