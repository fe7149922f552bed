"""Pure-Python inner loops; reference twin of the compiled kernels.

Same draw discipline as ``_kernels.pyx`` (one raw 64-bit word per masked
rejection attempt, floats via the 53-bit shift), so both backends walk
identical trajectories from identical generator states.  Slow, but it
keeps the package importable without a compiler.
"""

from __future__ import annotations

from ._rng import RawBits

BACKEND = "python"

PHASE_REACHED = 0
PHASE_STUCK = 1
PHASE_LIMIT = 2

MODE_STRICT = 0
MODE_MILD = 1


def fill_random_colors(colors, ncolors, bit_generator):
    """Overwrite ``colors`` with independent uniform draws from 1..ncolors."""
    raw = RawBits(bit_generator)
    for e in range(colors.shape[0]):
        colors[e] = 1 + raw.below(ncolors)


def walk_phase(colors, counts, edge_u, edge_v, psi, mode, max_steps,
               bit_generator, trace=None):
    """Descend by single-edge recolorings until an OF, a dead end, or the cap.

    Mutates ``colors`` and ``counts`` in place.  Each step moves to a
    uniformly random strictly improving (edge, color) pair; in mild mode a
    step with no improving pair falls back to a uniformly random
    psi-preserving one instead of stopping.  Improving moves are found by
    rejection sampling with a capped number of attempts, then by full
    enumeration.  Returns (steps taken, final psi, status).
    """
    raw = RawBits(bit_generator)
    n_edges = colors.shape[0]
    ncolors = counts.shape[1] - 1
    # rejection and enumeration pick from the same uniform-over-qualifying
    # distribution, so the cap is purely a time trade: burning more than a
    # fraction of one enumeration's work on rejected draws never pays
    attempt_cap = n_edges * (ncolors - 1) // 4 + 16
    psi = int(psi)
    steps = 0
    status = PHASE_LIMIT

    while steps < max_steps:
        if psi == 0:
            status = PHASE_REACHED
            break
        e = u = v = c = j = d = -1
        found = False
        for _ in range(attempt_cap):
            e = raw.below(n_edges)
            u = edge_u[e]
            v = edge_v[e]
            c = int(colors[e])
            t = 1 + raw.below(ncolors - 1)
            j = t if t < c else t + 1
            d = int(counts[u, j]) + int(counts[v, j]) \
                - int(counts[u, c]) - int(counts[v, c]) + 2
            if d < 0:
                found = True
                break
        if not found:
            imp_e = []
            imp_c = []
            lev_e = []
            lev_c = []
            for e in range(n_edges):
                u = edge_u[e]
                v = edge_v[e]
                c = int(colors[e])
                base = int(counts[u, c]) + int(counts[v, c])
                for j in range(1, ncolors + 1):
                    if j == c:
                        continue
                    d = int(counts[u, j]) + int(counts[v, j]) + 2 - base
                    if d < 0:
                        imp_e.append(e)
                        imp_c.append(j)
                    elif d == 0 and mode == MODE_MILD:
                        lev_e.append(e)
                        lev_c.append(j)
            if imp_e:
                pick = raw.below(len(imp_e))
                e = imp_e[pick]
                j = imp_c[pick]
            elif lev_e:
                pick = raw.below(len(lev_e))
                e = lev_e[pick]
                j = lev_c[pick]
            else:
                status = PHASE_STUCK
                break
            u = edge_u[e]
            v = edge_v[e]
            c = int(colors[e])
            d = int(counts[u, j]) + int(counts[v, j]) \
                - int(counts[u, c]) - int(counts[v, c]) + 2
        colors[e] = j
        counts[u, c] -= 1
        counts[u, j] += 1
        counts[v, c] -= 1
        counts[v, j] += 1
        psi += d
        if trace is not None:
            trace[steps, 0] = e
            trace[steps, 1] = c
            trace[steps, 2] = j
            trace[steps, 3] = psi
        steps += 1

    if psi == 0:
        status = PHASE_REACHED
    return steps, psi, status


def metropolis_phase(colors, counts, edge_u, edge_v, psi, epsilon, max_steps,
                     bit_generator, stop_at_of=False, occupancy=None,
                     state_weights=None, state_index=0, snaps=None,
                     snap_steps=None, trace=None):
    """Run the fixed-temperature chain for up to ``max_steps`` proposals.

    Each step proposes a uniform (edge, new color) pair and accepts with
    probability min(1, epsilon**delta).  Occupancy (per encoded state) is
    tallied after every step when requested; entries into the psi == 0 set
    are counted and snapshotted while room remains.  Returns
    (steps, psi, of_steps, accepts, entries, state_index).
    """
    raw = RawBits(bit_generator)
    n_edges = colors.shape[0]
    ncolors = counts.shape[1] - 1
    psi = int(psi)
    state_index = int(state_index)
    eps_pow = [float(epsilon) ** k for k in range(2 * ncolors + 3)]
    steps = 0
    of_steps = 0
    accepts = 0
    entries = 0

    if stop_at_of and psi == 0:
        return 0, psi, 0, 0, 0, state_index

    while steps < max_steps:
        e = raw.below(n_edges)
        u = edge_u[e]
        v = edge_v[e]
        c = int(colors[e])
        t = 1 + raw.below(ncolors - 1)
        j = t if t < c else t + 1
        d = int(counts[u, j]) + int(counts[v, j]) \
            - int(counts[u, c]) - int(counts[v, c]) + 2
        if d <= 0:
            accepted = True
        else:
            accepted = raw.unit() < eps_pow[d]
        if accepted:
            colors[e] = j
            counts[u, c] -= 1
            counts[u, j] += 1
            counts[v, c] -= 1
            counts[v, j] += 1
            if state_weights is not None:
                state_index += (j - c) * int(state_weights[e])
            was = psi
            psi += d
            accepts += 1
            if psi == 0 and was != 0:
                if snaps is not None and entries < snaps.shape[0]:
                    snaps[entries, :] = colors
                    snap_steps[entries] = steps
                entries += 1
        if trace is not None:
            trace[steps, 0] = e
            trace[steps, 1] = c
            trace[steps, 2] = j
            trace[steps, 3] = 1 if accepted else 0
            trace[steps, 4] = psi
        if occupancy is not None:
            occupancy[state_index] += 1
        if psi == 0:
            of_steps += 1
        steps += 1
        if stop_at_of and psi == 0:
            break

    return steps, psi, of_steps, accepts, entries, state_index
