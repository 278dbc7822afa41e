"""Numba kernels for the Monte Carlo estimators and the frozen dynamics.

Everything here works on flat arrays and evaluates activation times
lazily through the same SplitMix64 chain as `rng.tau_value`, so a kernel
only ever touches the part of the plane its flood fill actually visits.
Visited bookkeeping uses stamp arrays (no per-sample clearing).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# dx, dy neighbor offsets, counter-clockwise
_OFF = np.array([[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]], dtype=np.int64)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = z + _GAMMA
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


@njit(cache=True, nogil=True, inline="always")
def _tau(seed, x, y):
    h = _mix64(seed)
    h = _mix64(h ^ np.uint64(x))
    h = _mix64(h ^ np.uint64(y))
    return (np.float64(h >> np.uint64(11)) + 0.5) * 2.0**-53


@njit(cache=True, nogil=True, inline="always")
def _colored(seed, x, y, p, want_black):
    t = _tau(seed, x, y)
    if want_black:
        return t <= p
    return t > p


# ---------------------------------------------------------------------------
# rectangle crossings
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def crossing_one(seed, x0, y0, w, h, p, horizontal, want_black):
    """Colored path joining the two opposite sides of the rectangle.

    horizontal: connect the x = x0 column to the x = x0 + w - 1 column;
    otherwise the two rows.  Path confined to the rectangle.
    """
    n = w * h
    visited = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    qn = 0
    if horizontal:
        for i in range(h):
            if _colored(seed, x0, y0 + i, p, want_black):
                visited[i * w] = 1
                queue[qn] = i * w
                qn += 1
        if w == 1:
            return qn > 0
    else:
        for j in range(w):
            if _colored(seed, x0 + j, y0, p, want_black):
                visited[j] = 1
                queue[qn] = j
                qn += 1
        if h == 1:
            return qn > 0
    head = 0
    while head < qn:
        f = queue[head]
        head += 1
        i = f // w
        j = f - i * w
        for k in range(6):
            jj = j + _OFF[k, 0]
            ii = i + _OFF[k, 1]
            if jj < 0 or jj >= w or ii < 0 or ii >= h:
                continue
            g = ii * w + jj
            if visited[g]:
                continue
            visited[g] = 1
            if _colored(seed, x0 + jj, y0 + ii, p, want_black):
                if horizontal and jj == w - 1:
                    return True
                if (not horizontal) and ii == h - 1:
                    return True
                queue[qn] = g
                qn += 1
    return False


@njit(cache=True, nogil=True)
def crossing_many(seeds, x0, y0, w, h, p, horizontal, want_black):
    """Per-sample crossing indicators over independent replica seeds."""
    out = np.zeros(seeds.size, dtype=np.uint8)
    for s in range(seeds.size):
        if crossing_one(seeds[s], x0, y0, w, h, p, horizontal, want_black):
            out[s] = 1
    return out


@njit(cache=True, nogil=True)
def mask_crossing(mask, horizontal):
    """Crossing of an explicit boolean (h, w) mask, True sites passable."""
    h, w = mask.shape
    n = w * h
    visited = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    qn = 0
    if horizontal:
        for i in range(h):
            if mask[i, 0]:
                visited[i * w] = 1
                queue[qn] = i * w
                qn += 1
                if w == 1:
                    return True
    else:
        for j in range(w):
            if mask[0, j]:
                visited[j] = 1
                queue[qn] = j
                qn += 1
                if h == 1:
                    return True
    head = 0
    while head < qn:
        f = queue[head]
        head += 1
        i = f // w
        j = f - i * w
        for k in range(6):
            jj = j + _OFF[k, 0]
            ii = i + _OFF[k, 1]
            if jj < 0 or jj >= w or ii < 0 or ii >= h:
                continue
            g = ii * w + jj
            if visited[g]:
                continue
            visited[g] = 1
            if mask[ii, jj]:
                if horizontal and jj == w - 1:
                    return True
                if (not horizontal) and ii == h - 1:
                    return True
                queue[qn] = g
                qn += 1
    return False


# ---------------------------------------------------------------------------
# arm events and boundary connections
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def arm_staged(seeds, p, radii, want_black):
    """One-arm indicators from the origin's neighborhood, at several radii.

    For each replica, floods the colored cluster of the sites adjacent to
    the origin with a growing confinement ball: a success at radius r
    requires a path inside Ball_r reaching distance exactly r.  Sites
    discovered beyond the current radius are parked until the bound
    grows.  Since any path to distance r' > r passes through distance r
    inside Ball_r first, a failed stage implies failure of all later
    stages.  Returns a (len(radii), nsamples) uint8 array.
    """
    rmax = radii[-1]
    side = 2 * rmax + 1
    n = side * side
    stamp = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    parked = np.empty(n, dtype=np.int64)
    out = np.zeros((radii.size, seeds.size), dtype=np.uint8)
    for s in range(seeds.size):
        seed = seeds[s]
        tag = np.int64(s + 1)
        qn = 0
        head = 0
        pn = 0
        # entry sites: the 6 neighbors of the origin (the distance-1 ring
        # minus its two non-adjacent diagonal corners)
        for k in range(6):
            x = _OFF[k, 0]
            y = _OFF[k, 1]
            f = (y + rmax) * side + (x + rmax)
            if stamp[f] != tag:
                stamp[f] = tag
                if _colored(seed, x, y, p, want_black):
                    queue[qn] = f
                    qn += 1
        for stage in range(radii.size):
            bound = radii[stage]
            last = stage == radii.size - 1
            reached = False
            # re-admit parked sites that the larger bound now allows
            keep = 0
            for q in range(pn):
                f = parked[q]
                i = f // side
                j = f - i * side
                if max(abs(j - rmax), abs(i - rmax)) <= bound:
                    queue[qn] = f
                    qn += 1
                else:
                    parked[keep] = f
                    keep += 1
            pn = keep
            while head < qn:
                f = queue[head]
                head += 1
                i = f // side
                j = f - i * side
                x = j - rmax
                y = i - rmax
                if max(abs(x), abs(y)) == bound:
                    reached = True
                    if last:
                        break
                for k in range(6):
                    xx = x + _OFF[k, 0]
                    yy = y + _OFF[k, 1]
                    d = max(abs(xx), abs(yy))
                    if d > rmax:
                        continue
                    g = (yy + rmax) * side + (xx + rmax)
                    if stamp[g] == tag:
                        continue
                    stamp[g] = tag
                    if _colored(seed, xx, yy, p, want_black):
                        if d > bound:
                            parked[pn] = g
                            pn += 1
                        else:
                            queue[qn] = g
                            qn += 1
            if reached:
                out[stage, s] = 1
            else:
                break  # queue exhausted below this radius: no larger one succeeds
    return out


@njit(cache=True, nogil=True)
def arm_annulus(seeds, p, m, n, want_black):
    """Colored connection from around Ball_m to distance n inside the annulus.

    The path lives in Ann_{m,n} = {m < d <= n} and starts on a site
    adjacent to Ball_m.  Returns per-sample uint8 indicators.
    """
    side = 2 * n + 1
    sz = side * side
    stamp = np.zeros(sz, dtype=np.int64)
    queue = np.empty(sz, dtype=np.int64)
    out = np.zeros(seeds.size, dtype=np.uint8)
    for s in range(seeds.size):
        seed = seeds[s]
        tag = np.int64(s + 1)
        qn = 0
        head = 0
        done = False
        # seed sites: distance m+1, adjacent to Ball_m
        d0 = m + 1
        for t in range(-d0, d0 + 1):
            for c in range(4):
                if c == 0:
                    x, y = d0, t
                elif c == 1:
                    x, y = -d0, t
                elif c == 2:
                    x, y = t, d0
                else:
                    x, y = t, -d0
                if max(abs(x), abs(y)) != d0:
                    continue
                # adjacency to Ball_m: some neighbor at distance <= m
                adj = False
                for k in range(6):
                    if max(abs(x + _OFF[k, 0]), abs(y + _OFF[k, 1])) <= m:
                        adj = True
                        break
                if not adj:
                    continue
                f = (y + n) * side + (x + n)
                if stamp[f] == tag:
                    continue
                stamp[f] = tag
                if _colored(seed, x, y, p, want_black):
                    if d0 == n:
                        done = True
                        break
                    queue[qn] = f
                    qn += 1
            if done:
                break
        while head < qn and not done:
            f = queue[head]
            head += 1
            i = f // side
            j = f - i * side
            x = j - n
            y = i - n
            for k in range(6):
                xx = x + _OFF[k, 0]
                yy = y + _OFF[k, 1]
                d = max(abs(xx), abs(yy))
                if d <= m or d > n:
                    continue
                g = (yy + n) * side + (xx + n)
                if stamp[g] == tag:
                    continue
                stamp[g] = tag
                if _colored(seed, xx, yy, p, want_black):
                    if d == n:
                        done = True
                        break
                    queue[qn] = g
                    qn += 1
        if done:
            out[s] = 1
    return out


@njit(cache=True, nogil=True)
def theta_hits(seeds, p, R):
    """Origin black and black-connected to distance R inside Ball_R."""
    side = 2 * R + 1
    sz = side * side
    stamp = np.zeros(sz, dtype=np.int64)
    queue = np.empty(sz, dtype=np.int64)
    out = np.zeros(seeds.size, dtype=np.uint8)
    for s in range(seeds.size):
        seed = seeds[s]
        if not _colored(seed, 0, 0, p, True):
            continue
        tag = np.int64(s + 1)
        qn = 0
        head = 0
        f0 = R * side + R
        stamp[f0] = tag
        queue[qn] = f0
        qn += 1
        done = False
        while head < qn and not done:
            f = queue[head]
            head += 1
            i = f // side
            j = f - i * side
            x = j - R
            y = i - R
            for k in range(6):
                xx = x + _OFF[k, 0]
                yy = y + _OFF[k, 1]
                d = max(abs(xx), abs(yy))
                if d > R:
                    continue
                g = (yy + R) * side + (xx + R)
                if stamp[g] == tag:
                    continue
                stamp[g] = tag
                if _colored(seed, xx, yy, p, True):
                    if d == R:
                        done = True
                        break
                    queue[qn] = g
                    qn += 1
        if done:
            out[s] = 1
    return out


@njit(cache=True, nogil=True)
def pivotal_hits(seeds, p, n):
    """Center site pivotal for the black horizontal crossing of Ball_n."""
    out = np.zeros(seeds.size, dtype=np.uint8)
    side = 2 * n + 1
    for s in range(seeds.size):
        seed = seeds[s]
        with_black = _crossing_forced(seed, p, n, side, True)
        if with_black:
            if not _crossing_forced(seed, p, n, side, False):
                out[s] = 1
        # if no crossing even with a black center, flipping cannot help
    return out


@njit(cache=True, nogil=True)
def _crossing_forced(seed, p, n, side, center_black):
    """Horizontal black crossing of Ball_n with the center color forced."""
    sz = side * side
    visited = np.zeros(sz, dtype=np.uint8)
    queue = np.empty(sz, dtype=np.int64)
    qn = 0
    for i in range(side):
        y = i - n
        x = -n
        black = _tau(seed, x, y) <= p
        if x == 0 and y == 0:
            black = center_black
        if black:
            f = i * side
            visited[f] = 1
            queue[qn] = f
            qn += 1
    head = 0
    while head < qn:
        f = queue[head]
        head += 1
        i = f // side
        j = f - i * side
        x = j - n
        y = i - n
        for k in range(6):
            xx = x + _OFF[k, 0]
            yy = y + _OFF[k, 1]
            if abs(xx) > n or abs(yy) > n:
                continue
            g = (yy + n) * side + (xx + n)
            if visited[g]:
                continue
            visited[g] = 1
            if xx == 0 and yy == 0:
                black = center_black
            else:
                black = _tau(seed, xx, yy) <= p
            if black:
                if xx == n:
                    return True
                queue[qn] = g
                qn += 1
    return False


@njit(cache=True, nogil=True)
def count_connected_to_boundary(seed, p, n, cx, cy):
    """|{v in Ball_n(c) : v black-connected to distance 2n from c}|."""
    R = 2 * n
    side = 2 * R + 1
    sz = side * side
    visited = np.zeros(sz, dtype=np.uint8)
    queue = np.empty(sz, dtype=np.int64)
    qn = 0
    # flood inward from the colored ring at distance exactly 2n
    for t in range(-R, R + 1):
        for c in range(4):
            if c == 0:
                x, y = R, t
            elif c == 1:
                x, y = -R, t
            elif c == 2:
                x, y = t, R
            else:
                x, y = t, -R
            if max(abs(x), abs(y)) != R:
                continue
            f = (y + R) * side + (x + R)
            if visited[f]:
                continue
            visited[f] = 1
            if _tau(seed, cx + x, cy + y) <= p:
                queue[qn] = f
                qn += 1
    head = 0
    count = 0
    while head < qn:
        f = queue[head]
        head += 1
        i = f // side
        j = f - i * side
        x = j - R
        y = i - R
        if max(abs(x), abs(y)) <= n:
            count += 1
        for k in range(6):
            xx = x + _OFF[k, 0]
            yy = y + _OFF[k, 1]
            if abs(xx) > R or abs(yy) > R:
                continue
            g = (yy + R) * side + (xx + R)
            if visited[g]:
                continue
            visited[g] = 1
            if _tau(seed, cx + xx, cy + yy) <= p:
                queue[qn] = g
                qn += 1
    return count


@njit(cache=True, nogil=True)
def hole_volumes(seeds, p, R):
    """Volume of the origin's hole in the boundary-cluster proxy, batched.

    For each replica: the unbounded-cluster proxy is the union of black
    clusters touching the window edge; the hole is the origin's component
    after removing that union and its white rim.  Encoding per sample:
    >= 0 hole volume (0 when the origin sits in the removed set),
    -1 the origin's component escapes to the window edge (no surrounding
    cluster; low confidence), -2 no boundary-touching black cluster.
    """
    side = 2 * R + 1
    sz = side * side
    black = np.zeros(sz, dtype=np.uint8)
    giant = np.zeros(sz, dtype=np.uint8)
    seen = np.zeros(sz, dtype=np.uint8)
    queue = np.empty(sz, dtype=np.int64)
    out = np.empty(seeds.size, dtype=np.int64)
    center = R * side + R
    for s in range(seeds.size):
        seed = seeds[s]
        for f in range(sz):
            i = f // side
            j = f - i * side
            black[f] = 1 if _tau(seed, j - R, i - R) <= p else 0
            giant[f] = 0
            seen[f] = 0
        # flood the boundary-touching black clusters
        qn = 0
        for t in range(side):
            for f in (t, (side - 1) * side + t, t * side, t * side + side - 1):
                if black[f] and not giant[f]:
                    giant[f] = 1
                    queue[qn] = f
                    qn += 1
        if qn == 0:
            out[s] = -2
            continue
        head = 0
        while head < qn:
            f = queue[head]
            head += 1
            i = f // side
            j = f - i * side
            for k in range(6):
                jj = j + _OFF[k, 0]
                ii = i + _OFF[k, 1]
                if jj < 0 or jj >= side or ii < 0 or ii >= side:
                    continue
                g = ii * side + jj
                if black[g] and not giant[g]:
                    giant[g] = 1
                    queue[qn] = g
                    qn += 1
        # origin in the removed set?
        if giant[center]:
            out[s] = 0
            continue
        if not black[center]:
            adjacent = False
            for k in range(6):
                jj = R + _OFF[k, 0]
                ii = R + _OFF[k, 1]
                if 0 <= jj < side and 0 <= ii < side and giant[ii * side + jj]:
                    adjacent = True
                    break
            if adjacent:
                out[s] = 0
                continue
        # flood the origin's free component
        qn = 0
        head = 0
        seen[center] = 1
        queue[qn] = center
        qn += 1
        count = 0
        escaped = False
        while head < qn:
            f = queue[head]
            head += 1
            i = f // side
            j = f - i * side
            # removed: in the giant, or white with a giant neighbor
            if giant[f]:
                continue
            if not black[f]:
                rim = False
                for k in range(6):
                    jj = j + _OFF[k, 0]
                    ii = i + _OFF[k, 1]
                    if 0 <= jj < side and 0 <= ii < side and giant[ii * side + jj]:
                        rim = True
                        break
                if rim:
                    continue
            if i == 0 or i == side - 1 or j == 0 or j == side - 1:
                escaped = True
                break
            count += 1
            for k in range(6):
                jj = j + _OFF[k, 0]
                ii = i + _OFF[k, 1]
                g = ii * side + jj
                if not seen[g]:
                    seen[g] = 1
                    queue[qn] = g
                    qn += 1
        out[s] = -1 if escaped else count
    return out


# ---------------------------------------------------------------------------
# frozen dynamics
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, inline="always")
def _find(parent, v):
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:
        nxt = parent[v]
        parent[v] = root
        v = nxt
    return root


@njit(cache=True, nogil=True)
def frozen_lattice(mask_flat, tau_flat, order, W, H, N,
                   ev_times, ev_roots, ev_vols):
    """Event-driven run on a lattice domain given as a W x H bitmap.

    Vertices activate in the given order (sorted by activation time);
    an activation is blocked exactly when some adjacent black cluster is
    frozen; otherwise the vertex joins/merges clusters, and a merged
    cluster of volume >= N freezes on the spot.

    Returns (state, labels, frozen_root_flags, n_events) with
    state: 0 untouched, 1 black, 2 permanently white;
    labels: final cluster root per black cell (-1 elsewhere).
    """
    sz = W * H
    parent = np.full(sz, -1, dtype=np.int64)
    vol = np.zeros(sz, dtype=np.int64)
    frozen = np.zeros(sz, dtype=np.uint8)
    state = np.zeros(sz, dtype=np.uint8)
    roots = np.empty(6, dtype=np.int64)
    n_ev = 0
    for t in range(order.size):
        f = order[t]
        i = f // W
        j = f - i * W
        blocked = False
        nr = 0
        for k in range(6):
            jj = j + _OFF[k, 0]
            ii = i + _OFF[k, 1]
            if jj < 0 or jj >= W or ii < 0 or ii >= H:
                continue
            g = ii * W + jj
            if state[g] != 1:
                continue
            r = _find(parent, g)
            if frozen[r]:
                blocked = True
                break
            fresh = True
            for q in range(nr):
                if roots[q] == r:
                    fresh = False
                    break
            if fresh:
                roots[nr] = r
                nr += 1
        if blocked:
            state[f] = 2
            continue
        state[f] = 1
        parent[f] = f
        vol[f] = 1
        big = f
        for q in range(nr):
            r = roots[q]
            # union by size
            if vol[r] >= vol[big]:
                parent[big] = r
                vol[r] += vol[big]
                big = r
            else:
                parent[r] = big
                vol[big] += vol[r]
        if vol[big] >= N:
            frozen[big] = 1
            ev_times[n_ev] = tau_flat[f]
            ev_roots[n_ev] = big
            ev_vols[n_ev] = vol[big]
            n_ev += 1
    labels = np.full(sz, -1, dtype=np.int64)
    for f in range(sz):
        if state[f] == 1:
            labels[f] = _find(parent, f)
    return state, labels, frozen, n_ev


@njit(cache=True, nogil=True)
def frozen_graph_runs(indptr, indices, taus, N):
    """Final states of seeded runs on an abstract graph (CSR adjacency).

    taus has shape (runs, nvertices); returns (runs, nvertices) uint8
    states, 1 = black, 2 = permanently white.  Activation order is by
    increasing tau with ties broken by vertex index.
    """
    runs, nv = taus.shape
    out = np.zeros((runs, nv), dtype=np.uint8)
    parent = np.empty(nv, dtype=np.int64)
    vol = np.empty(nv, dtype=np.int64)
    frozen = np.empty(nv, dtype=np.uint8)
    order = np.empty(nv, dtype=np.int64)
    roots = np.empty(16, dtype=np.int64)
    for r in range(runs):
        for v in range(nv):
            order[v] = v
        # insertion sort by (tau, index)
        for a in range(1, nv):
            key = order[a]
            kt = taus[r, key]
            b = a - 1
            while b >= 0 and (taus[r, order[b]] > kt or
                              (taus[r, order[b]] == kt and order[b] > key)):
                order[b + 1] = order[b]
                b -= 1
            order[b + 1] = key
        for v in range(nv):
            parent[v] = -1
            vol[v] = 0
            frozen[v] = 0
        state = out[r]
        for t in range(nv):
            v = order[t]
            blocked = False
            nr = 0
            for q in range(indptr[v], indptr[v + 1]):
                u = indices[q]
                if state[u] != 1:
                    continue
                root = _find(parent, u)
                if frozen[root]:
                    blocked = True
                    break
                fresh = True
                for z in range(nr):
                    if roots[z] == root:
                        fresh = False
                        break
                if fresh:
                    roots[nr] = root
                    nr += 1
            if blocked:
                state[v] = 2
                continue
            state[v] = 1
            parent[v] = v
            vol[v] = 1
            big = v
            for z in range(nr):
                root = roots[z]
                if vol[root] >= vol[big]:
                    parent[big] = root
                    vol[root] += vol[big]
                    big = root
                else:
                    parent[root] = big
                    vol[big] += vol[root]
            if vol[big] >= N:
                frozen[big] = 1
    return out
