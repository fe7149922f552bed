# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: strict/mild walk phases and the Metropolis chain.

Must stay in lockstep with ``_kernels_py`` draw for draw; the pure module
is the readable reference, this one is the fast path.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int32_t, int64_t, uint64_t
from numpy.random cimport bitgen_t

BACKEND = "cython"

PHASE_REACHED = 0
PHASE_STUCK = 1
PHASE_LIMIT = 2

MODE_STRICT = 0
MODE_MILD = 1

cdef const char *_CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_rng_ptr(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, _CAPSULE_NAME):
        raise TypeError("expected a numpy BitGenerator")
    return <bitgen_t *>PyCapsule_GetPointer(capsule, _CAPSULE_NAME)


cdef inline uint64_t _next64(bitgen_t *rng) noexcept nogil:
    return rng.next_uint64(rng.state)


cdef inline uint64_t _below(bitgen_t *rng, uint64_t bound) noexcept nogil:
    # masked rejection; must match RawBits.below draw for draw
    cdef uint64_t mask = bound - 1
    cdef uint64_t r
    mask |= mask >> 1
    mask |= mask >> 2
    mask |= mask >> 4
    mask |= mask >> 8
    mask |= mask >> 16
    mask |= mask >> 32
    while True:
        r = _next64(rng) & mask
        if r < bound:
            return r


cdef inline double _unit(bitgen_t *rng) noexcept nogil:
    return (_next64(rng) >> 11) * (1.0 / 9007199254740992.0)


def fill_random_colors(int32_t[::1] colors, int ncolors, object bit_generator):
    """Overwrite ``colors`` with independent uniform draws from 1..ncolors."""
    cdef bitgen_t *rng = _rng_ptr(bit_generator)
    cdef Py_ssize_t e
    for e in range(colors.shape[0]):
        colors[e] = 1 + <int32_t>_below(rng, ncolors)


def walk_phase(int32_t[::1] colors, int32_t[:, ::1] counts,
               int32_t[::1] edge_u, int32_t[::1] edge_v,
               long long psi, int mode, long long max_steps,
               object bit_generator, object trace=None):
    """Descend by single-edge recolorings until an OF, a dead end, or the cap.

    Same contract as the pure twin: each step takes a uniformly random
    strictly improving pair (capped rejection, then enumeration); mild mode
    falls back to a uniformly random psi-preserving pair when no improving
    one exists.  Returns (steps, psi, status).
    """
    cdef bitgen_t *rng = _rng_ptr(bit_generator)
    cdef Py_ssize_t n_edges = colors.shape[0]
    cdef int ncolors = <int>counts.shape[1] - 1
    # same cap as the pure twin: one enumeration costs n_edges*(ncolors-1)
    # delta evaluations and draws from the same distribution, so long
    # rejection streaks are pure waste
    cdef long long attempt_cap = <long long>n_edges * (ncolors - 1) // 4 + 16
    cdef long long steps = 0, att
    cdef int status = PHASE_LIMIT
    cdef bint found, has_trace = trace is not None
    cdef int64_t[:, ::1] tr
    cdef int32_t[::1] qe = None, qc = None
    cdef Py_ssize_t e = 0, cap = 0, m, lv, pick
    cdef int u = 0, v = 0, c = 0, j = 0, d = 0, t, base
    if has_trace:
        tr = trace

    while steps < max_steps:
        if psi == 0:
            status = PHASE_REACHED
            break
        found = False
        for att in range(attempt_cap):
            e = <Py_ssize_t>_below(rng, n_edges)
            u = edge_u[e]
            v = edge_v[e]
            c = colors[e]
            t = 1 + <int>_below(rng, ncolors - 1)
            j = t if t < c else t + 1
            d = counts[u, j] + counts[v, j] - counts[u, c] - counts[v, c] + 2
            if d < 0:
                found = True
                break
        if not found:
            if qe is None:
                cap = n_edges * (ncolors - 1)
                qe = np.empty(cap, dtype=np.int32)
                qc = np.empty(cap, dtype=np.int32)
            # improving pairs fill from the bottom, psi-preserving ones from
            # the top (mild only); k-th preserving pair sits at cap - 1 - k
            m = 0
            lv = 0
            for e in range(n_edges):
                u = edge_u[e]
                v = edge_v[e]
                c = colors[e]
                base = counts[u, c] + counts[v, c]
                for j in range(1, ncolors + 1):
                    if j == c:
                        continue
                    d = counts[u, j] + counts[v, j] + 2 - base
                    if d < 0:
                        qe[m] = <int32_t>e
                        qc[m] = j
                        m += 1
                    elif d == 0 and mode == MODE_MILD:
                        lv += 1
                        qe[cap - lv] = <int32_t>e
                        qc[cap - lv] = j
            if m > 0:
                pick = <Py_ssize_t>_below(rng, m)
            elif lv > 0:
                pick = cap - 1 - <Py_ssize_t>_below(rng, lv)
            else:
                status = PHASE_STUCK
                break
            e = qe[pick]
            j = qc[pick]
            u = edge_u[e]
            v = edge_v[e]
            c = colors[e]
            d = counts[u, j] + counts[v, j] - counts[u, c] - counts[v, c] + 2
        colors[e] = j
        counts[u, c] -= 1
        counts[u, j] += 1
        counts[v, c] -= 1
        counts[v, j] += 1
        psi += d
        if has_trace:
            tr[steps, 0] = e
            tr[steps, 1] = c
            tr[steps, 2] = j
            tr[steps, 3] = psi
        steps += 1

    if psi == 0:
        status = PHASE_REACHED
    return steps, psi, status


def metropolis_phase(int32_t[::1] colors, int32_t[:, ::1] counts,
                     int32_t[::1] edge_u, int32_t[::1] edge_v,
                     long long psi, double epsilon, long long max_steps,
                     object bit_generator, bint stop_at_of=False,
                     object occupancy=None, object state_weights=None,
                     long long state_index=0, object snaps=None,
                     object snap_steps=None, object trace=None):
    """Fixed-temperature chain; see the pure twin for the full contract."""
    cdef bitgen_t *rng = _rng_ptr(bit_generator)
    cdef Py_ssize_t n_edges = colors.shape[0]
    cdef int ncolors = <int>counts.shape[1] - 1
    cdef long long steps = 0, of_steps = 0, accepts = 0, was
    cdef Py_ssize_t entries = 0
    cdef int status
    cdef bint accepted
    cdef bint has_occ = occupancy is not None
    cdef bint has_snaps = snaps is not None
    cdef bint has_trace = trace is not None
    cdef int64_t[::1] occ, weights, snap_at
    cdef int32_t[:, ::1] snap_rows
    cdef int64_t[:, ::1] tr
    cdef Py_ssize_t e
    cdef int u, v, c, j, d, t, k
    cdef double[::1] eps_pow = np.empty(2 * ncolors + 3, dtype=np.float64)
    for k in range(eps_pow.shape[0]):
        eps_pow[k] = epsilon ** k
    if has_occ:
        occ = occupancy
        weights = state_weights
    if has_snaps:
        snap_rows = snaps
        snap_at = snap_steps
    if has_trace:
        tr = trace

    if stop_at_of and psi == 0:
        return 0, psi, 0, 0, 0, state_index

    while steps < max_steps:
        e = <Py_ssize_t>_below(rng, n_edges)
        u = edge_u[e]
        v = edge_v[e]
        c = colors[e]
        t = 1 + <int>_below(rng, ncolors - 1)
        j = t if t < c else t + 1
        d = counts[u, j] + counts[v, j] - counts[u, c] - counts[v, c] + 2
        if d <= 0:
            accepted = True
        else:
            accepted = _unit(rng) < eps_pow[d]
        if accepted:
            colors[e] = j
            counts[u, c] -= 1
            counts[u, j] += 1
            counts[v, c] -= 1
            counts[v, j] += 1
            if has_occ:
                state_index += (j - c) * weights[e]
            was = psi
            psi += d
            accepts += 1
            if psi == 0 and was != 0:
                if has_snaps and entries < snap_rows.shape[0]:
                    snap_rows[entries, :] = colors
                    snap_at[entries] = steps
                entries += 1
        if has_trace:
            tr[steps, 0] = e
            tr[steps, 1] = c
            tr[steps, 2] = j
            tr[steps, 3] = 1 if accepted else 0
            tr[steps, 4] = psi
        if has_occ:
            occ[state_index] += 1
        if psi == 0:
            of_steps += 1
        steps += 1
        if stop_at_of and psi == 0:
            break

    return steps, psi, of_steps, accepts, entries, state_index
