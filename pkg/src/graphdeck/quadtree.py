"""Barnes-Hut quadtree for aggregate repulsion.

Flat-array quadtree rebuilt per layout iteration. Leaves hold one body
(linked lists past the depth limit, for near-coincident points). A cell
is treated as an aggregate when d > side/theta + delta (center-of-mass
offset rule); cells containing the query point are always opened.

The pairwise kernel delta * k^2/d^2 is the conjugate field of the
complex sum S(z) = sum_j 1/(z - y_j), so each cell carries a truncated
Laurent expansion around its center of mass (dipole vanishes there):

    S(z) ~= m/w + sum_{p=2..P} M_p / w^(p+1),   w = z - com,
    M_p = sum_j (y_j - com)^p

which keeps the worst-case per-node error well under the acceptance
threshold at theta = 0.8, including nodes whose net force nearly
cancels.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_DEPTH = 48
MULTIPOLE_ORDER = 6  # highest complex moment kept per cell


@njit(cache=True)
def build(px, py):
    n = px.size
    cap = 8 * n + 64
    child = np.full((cap, 4), -1, dtype=np.int64)
    cx = np.zeros(cap)
    cy = np.zeros(cap)
    half = np.zeros(cap)
    count = np.zeros(cap, dtype=np.int64)
    comx = np.zeros(cap)
    comy = np.zeros(cap)
    body = np.full(cap, -1, dtype=np.int64)  # >=0 leaf head, -1 empty, -2 internal
    nextb = np.full(n, -1, dtype=np.int64)

    minx = px[0]
    maxx = px[0]
    miny = py[0]
    maxy = py[0]
    for i in range(1, n):
        if px[i] < minx:
            minx = px[i]
        if px[i] > maxx:
            maxx = px[i]
        if py[i] < miny:
            miny = py[i]
        if py[i] > maxy:
            maxy = py[i]
    side = maxx - minx
    if maxy - miny > side:
        side = maxy - miny
    if side <= 0.0:
        side = 1.0
    h0 = 0.5 * side * (1.0 + 1e-9) + 1e-12
    cx[0] = 0.5 * (minx + maxx)
    cy[0] = 0.5 * (miny + maxy)
    half[0] = h0
    used = 1

    for b in range(n):
        x = px[b]
        y = py[b]
        node = 0
        depth = 0
        while True:
            if body[node] == -1 and child[node, 0] == -1 and child[node, 1] == -1 \
                    and child[node, 2] == -1 and child[node, 3] == -1:
                body[node] = b
                nextb[b] = -1
                break
            if body[node] >= 0:
                if depth >= MAX_DEPTH:
                    nextb[b] = body[node]
                    body[node] = b
                    break
                # Split: push the resident body one level down.
                ob = body[node]
                body[node] = -2
                q = 0
                if px[ob] >= cx[node]:
                    q += 1
                if py[ob] >= cy[node]:
                    q += 2
                ch = used
                used += 1
                h = half[node] * 0.5
                child[node, q] = ch
                cx[ch] = cx[node] + (h if (q & 1) else -h)
                cy[ch] = cy[node] + (h if (q & 2) else -h)
                half[ch] = h
                body[ch] = ob
                nextb[ob] = -1
            # Descend into this body's quadrant, creating it if missing.
            q = 0
            if x >= cx[node]:
                q += 1
            if y >= cy[node]:
                q += 2
            ch = child[node, q]
            if ch == -1:
                ch = used
                used += 1
                h = half[node] * 0.5
                child[node, q] = ch
                cx[ch] = cx[node] + (h if (q & 1) else -h)
                cy[ch] = cy[node] + (h if (q & 2) else -h)
                half[ch] = h
            node = ch
            depth += 1

    # Counts and centers of mass; children were created after their
    # parent, so a reverse sweep sees children first.
    delta = np.zeros(used)  # cell center to center-of-mass offset
    for node in range(used - 1, -1, -1):
        if body[node] >= 0:
            c = 0
            sx = 0.0
            sy = 0.0
            bb = body[node]
            while bb != -1:
                c += 1
                sx += px[bb]
                sy += py[bb]
                bb = nextb[bb]
            count[node] = c
            comx[node] = sx / c
            comy[node] = sy / c
        elif body[node] == -2:
            c = 0
            sx = 0.0
            sy = 0.0
            for q in range(4):
                ch = child[node, q]
                if ch != -1:
                    c += count[ch]
                    sx += comx[ch] * count[ch]
                    sy += comy[ch] * count[ch]
            count[node] = c
            comx[node] = sx / c
            comy[node] = sy / c
        ddx = comx[node] - cx[node]
        ddy = comy[node] - cy[node]
        delta[node] = (ddx * ddx + ddy * ddy) ** 0.5

    # Complex moments M_2..M_P around each cell's center of mass, by
    # walking every body down its root-to-leaf path.
    nmom = MULTIPOLE_ORDER - 1
    moments = np.zeros((used, nmom), dtype=np.complex128)
    for b in range(n):
        z = complex(px[b], py[b])
        node = 0
        while True:
            dz = z - complex(comx[node], comy[node])
            t = dz
            for p in range(nmom):
                t *= dz
                moments[node, p] += t
            if body[node] != -2:
                break
            q = 0
            if px[b] >= cx[node]:
                q += 1
            if py[b] >= cy[node]:
                q += 2
            node = child[node, q]
    return child[:used], cx[:used], cy[:used], half[:used], count[:used], \
        comx[:used], comy[:used], body[:used], nextb, delta, moments


@njit(cache=True)
def repulsion(px, py, child, cx, cy, half, count, comx, comy, body, nextb,
              delta, moments, k, theta, eps, out):
    """Approximate aggregate repulsive displacement for every body."""
    n = px.size
    k2 = k * k
    eps2 = eps * eps
    inv_theta = 1.0 / theta
    nmom = moments.shape[1]
    stack = np.empty(4 * MAX_DEPTH + 8, dtype=np.int64)
    for i in range(n):
        x = px[i]
        y = py[i]
        fx = 0.0
        fy = 0.0
        sp = 0
        stack[sp] = 0
        sp += 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            if count[node] == 0:
                continue
            if body[node] != -2:
                bb = body[node]
                while bb != -1:
                    if bb != i:
                        dx = x - px[bb]
                        dy = y - py[bb]
                        d2 = dx * dx + dy * dy
                        if d2 < eps2:
                            d2 = eps2
                        w = k2 / d2
                        fx += dx * w
                        fy += dy * w
                    bb = nextb[bb]
                continue
            dx = x - comx[node]
            dy = y - comy[node]
            d2 = dx * dx + dy * dy
            accept_at = 2.0 * half[node] * inv_theta + delta[node]
            inside = abs(x - cx[node]) <= half[node] and abs(y - cy[node]) <= half[node]
            if not inside and d2 > accept_at * accept_at:
                w = complex(dx, dy)
                invw = 1.0 / w
                s = count[node] * invw
                pw = invw * invw * invw  # 1/w^3 pairs with M_2
                for p in range(nmom):
                    s += moments[node, p] * pw
                    pw *= invw
                fx += k2 * s.real
                fy -= k2 * s.imag
            else:
                for q in range(4):
                    ch = child[node, q]
                    if ch != -1:
                        stack[sp] = ch
                        sp += 1
        out[i, 0] = fx
        out[i, 1] = fy


def repulsion_forces(positions: np.ndarray, k: float, theta: float, eps: float) -> np.ndarray:
    """Barnes-Hut approximate repulsion for every node, as an (n,2) array."""
    px = np.ascontiguousarray(positions[:, 0])
    py = np.ascontiguousarray(positions[:, 1])
    tree = build(px, py)
    out = np.empty((px.size, 2))
    repulsion(px, py, *tree, k, theta, eps, out)
    return out
