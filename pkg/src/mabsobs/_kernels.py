"""Compiled per-agent loops.

The simulation is scheduled agent by agent, the way agent platforms do it:
each agent moves, updates the environment trace if one is kept, and then
evaluates its own membership rules. Observers that scan agents do so in a
separate pass.
"""

import numpy as np
from numba import njit

# Moore neighbourhood without "stay", indexed by direction code 0..7.
MOORE_DX = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)
MOORE_DY = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)


def _make_mover(track: bool, membership: bool):
    # flags are closure constants, so numba drops the unused branches
    @njit(cache=True)
    def mover(x, y, directions, dx, dy, width, height, occupancy, zone_flat,
              zone_occupancy, member, group_size):
        for i in range(x.shape[0]):
            d = directions[i]
            ox = x[i]
            oy = y[i]
            nx = ox + dx[d]
            if nx < 0:
                nx += width
            elif nx >= width:
                nx -= width
            ny = oy + dy[d]
            if ny < 0:
                ny += height
            elif ny >= height:
                ny -= height
            x[i] = nx
            y[i] = ny
            if track:
                old_cell = ox * height + oy
                new_cell = nx * height + ny
                occupancy[old_cell] -= 1
                occupancy[new_cell] += 1
                zone_occupancy += np.int64(zone_flat[new_cell]) - np.int64(zone_flat[old_cell])
            if membership:
                # join if inside and not a member, leave if outside and a member;
                # written as the net effect to keep the loop branch-free
                inside = zone_flat[nx * height + ny]
                group_size += np.int64(inside) - np.int64(member[i])
                member[i] = inside
        return zone_occupancy, group_size

    return mover


MOVERS = {(t, m): _make_mover(t, m) for t in (False, True) for m in (False, True)}


@njit(cache=True)
def scan_count(x, y, zone_flat, height):
    """Probe every agent and count those standing in the zone."""
    count = 0
    for i in range(x.shape[0]):
        if zone_flat[x[i] * height + y[i]]:
            count += 1
    return count


@njit(cache=True)
def sum_cells(occupancy, cells):
    total = 0
    for k in range(cells.shape[0]):
        total += occupancy[cells[k]]
    return total


@njit(cache=True)
def partial_shuffle_uniform(buffer, u):
    """Partial Fisher-Yates driven by uniforms ``u`` in [0, 1).

    Swap ``i`` picks ``j = i + floor(u[i] * (len(buffer) - i))``; with
    53-bit uniforms the deviation from exact uniformity over ``[i, N)`` is
    below ``N / 2**53``.
    """
    size = buffer.shape[0]
    for i in range(u.shape[0]):
        j = i + np.int64(u[i] * (size - i))
        if j >= size:
            j = size - 1
        tmp = buffer[i]
        buffer[i] = buffer[j]
        buffer[j] = tmp


@njit(cache=True)
def sample_hits(buffer, u, x, y, zone_flat, height):
    """Draw ``len(u)`` ids as in :func:`partial_shuffle_uniform` and count
    how many of them stand in the zone, in one pass."""
    size = buffer.shape[0]
    hits = 0
    for i in range(u.shape[0]):
        j = i + np.int64(u[i] * (size - i))
        if j >= size:
            j = size - 1
        picked = buffer[j]
        buffer[j] = buffer[i]
        buffer[i] = picked
        if zone_flat[x[picked] * height + y[picked]]:
            hits += 1
    return hits
