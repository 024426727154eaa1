"""Compiled inner loops for split search, tree routing and distances.

The split-search kernels process one tree level at a time: every live node
is a "slot", and a single pass over each feature's presorted row order
updates the running class tallies of whichever slot each row belongs to.
Sorting therefore happens once per fitted dataset, not once per node.

Layout conventions:
  XT        (F, n) float64, feature-major copy of the training matrix
  orders    (F, n) int32, orders[f] lists row ids sorted by feature f
  node_of_pos (n,) int32, slot id of each row, -1 when the row's node is
              finished (or the row is outside the current sample)

Candidate thresholds sit halfway between consecutive distinct values of a
feature within a node; a candidate is valid when both children keep at
least ``min_leaf`` rows.  Scanning features in ascending index order and
accepting only strictly better gains breaks ties toward the lower feature
index and lower threshold.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def level_scan_cls(
    XT,
    orders,
    y,
    w,
    rcount,
    node_of_pos,
    feat_ok,
    feat_any,
    tot,
    wsum,
    rows,
    parent_imp,
    scan_slot,
    min_leaf,
    use_entropy,
    best_gain,
    best_feat,
    best_thr,
    best_rows_left,
):
    S, K = tot.shape
    F, n = orders.shape
    left = np.zeros((S, K))
    sl = np.zeros(S)
    sr = np.zeros(S)
    wl = np.zeros(S)
    rl = np.zeros(S)
    prev = np.zeros(S)
    seen = np.zeros(S, np.uint8)
    for s in range(S):
        best_gain[s] = -1.0
        best_feat[s] = -1
        best_thr[s] = 0.0
        best_rows_left[s] = 0.0
    for f in range(F):
        if feat_any[f] == 0:
            continue
        for s in range(S):
            if scan_slot[s] == 0 or feat_ok[s, f] == 0:
                continue
            wl[s] = 0.0
            rl[s] = 0.0
            seen[s] = 0
            sl[s] = 0.0
            acc = 0.0
            if use_entropy:
                # right side starts holding the whole node: sum of c*log2(c)
                for k in range(K):
                    c = tot[s, k]
                    left[s, k] = 0.0
                    if c > 0.0:
                        acc += c * np.log2(c)
            else:
                # right side starts holding the whole node: sum of c^2
                for k in range(K):
                    c = tot[s, k]
                    left[s, k] = 0.0
                    acc += c * c
            sr[s] = acc
        row = orders[f]
        for i in range(n):
            p = row[i]
            s = node_of_pos[p]
            if s < 0:
                continue
            if scan_slot[s] == 0 or feat_ok[s, f] == 0:
                continue
            x = XT[f, p]
            if seen[s] == 1 and x > prev[s]:
                nl = rl[s]
                nr = rows[s] - nl
                if nl >= min_leaf and nr >= min_leaf:
                    W = wsum[s]
                    WL = wl[s]
                    WR = W - WL
                    if use_entropy:
                        el = 0.0
                        if WL > 0.0:
                            el = np.log2(WL) - sl[s] / WL
                        er = 0.0
                        if WR > 0.0:
                            er = np.log2(WR) - sr[s] / WR
                        child = (WL * el + WR * er) / W
                    else:
                        a = 0.0
                        if WL > 0.0:
                            a = sl[s] / WL
                        b = 0.0
                        if WR > 0.0:
                            b = sr[s] / WR
                        child = 1.0 - (a + b) / W
                    gain = parent_imp[s] - child
                    if gain > best_gain[s]:
                        best_gain[s] = gain
                        best_feat[s] = f
                        best_thr[s] = 0.5 * (prev[s] + x)
                        best_rows_left[s] = nl
            k = y[p]
            wi = w[p]
            cl = left[s, k]
            cr = tot[s, k] - cl
            if wi > 0.0:
                if use_entropy:
                    nlv = cl + wi
                    dl = nlv * np.log2(nlv)
                    if cl > 0.0:
                        dl -= cl * np.log2(cl)
                    sl[s] += dl
                    nrv = cr - wi
                    dr = 0.0
                    if nrv > 0.0:
                        dr = nrv * np.log2(nrv)
                    if cr > 0.0:
                        dr -= cr * np.log2(cr)
                    sr[s] += dr
                else:
                    sl[s] += 2.0 * cl * wi + wi * wi
                    sr[s] += -2.0 * cr * wi + wi * wi
                left[s, k] = cl + wi
                wl[s] += wi
            rl[s] += rcount[p]
            prev[s] = x
            seen[s] = 1


@njit(cache=True, nogil=True)
def apply_splits_cls(
    XT,
    y,
    w,
    rcount,
    node_of_pos,
    split_feat,
    split_thr,
    left_slot,
    right_slot,
    out_tot,
    out_wsum,
    out_rows,
):
    n = node_of_pos.shape[0]
    for p in range(n):
        s = node_of_pos[p]
        if s < 0:
            continue
        f = split_feat[s]
        if f < 0:
            node_of_pos[p] = -1
            continue
        if XT[f, p] <= split_thr[s]:
            ns = left_slot[s]
        else:
            ns = right_slot[s]
        node_of_pos[p] = ns
        out_tot[ns, y[p]] += w[p]
        out_wsum[ns] += w[p]
        out_rows[ns] += rcount[p]


@njit(cache=True, nogil=True)
def level_scan_reg(
    XT,
    orders,
    target,
    node_of_pos,
    scan_slot,
    tsum,
    rows,
    min_leaf,
    best_gain,
    best_feat,
    best_thr,
    best_rows_left,
):
    F, n = orders.shape
    S = tsum.shape[0]
    sl = np.zeros(S)
    rl = np.zeros(S)
    prev = np.zeros(S)
    seen = np.zeros(S, np.uint8)
    for s in range(S):
        best_gain[s] = -1.0
        best_feat[s] = -1
        best_thr[s] = 0.0
        best_rows_left[s] = 0.0
    for f in range(F):
        for s in range(S):
            sl[s] = 0.0
            rl[s] = 0.0
            seen[s] = 0
        row = orders[f]
        for i in range(n):
            p = row[i]
            s = node_of_pos[p]
            if s < 0:
                continue
            if scan_slot[s] == 0:
                continue
            x = XT[f, p]
            if seen[s] == 1 and x > prev[s]:
                nl = rl[s]
                nr = rows[s] - nl
                if nl >= min_leaf and nr >= min_leaf:
                    Sl = sl[s]
                    Sr = tsum[s] - Sl
                    ntot = rows[s]
                    gain = (Sl * Sl / nl + Sr * Sr / nr - tsum[s] * tsum[s] / ntot) / ntot
                    # regression splits must strictly reduce squared error
                    if gain > 0.0 and gain > best_gain[s]:
                        best_gain[s] = gain
                        best_feat[s] = f
                        best_thr[s] = 0.5 * (prev[s] + x)
                        best_rows_left[s] = nl
            sl[s] += target[p]
            rl[s] += 1.0
            prev[s] = x
            seen[s] = 1


@njit(cache=True, nogil=True)
def apply_splits_reg(
    XT,
    target,
    node_of_pos,
    split_feat,
    split_thr,
    left_slot,
    right_slot,
    leaf_node_id,
    leaf_of_pos,
    out_sum,
    out_rows,
):
    n = node_of_pos.shape[0]
    for p in range(n):
        s = node_of_pos[p]
        if s < 0:
            continue
        f = split_feat[s]
        if f < 0:
            leaf_of_pos[p] = leaf_node_id[s]
            node_of_pos[p] = -1
            continue
        if XT[f, p] <= split_thr[s]:
            ns = left_slot[s]
        else:
            ns = right_slot[s]
        node_of_pos[p] = ns
        out_sum[ns] += target[p]
        out_rows[ns] += 1.0


@njit(cache=True, nogil=True)
def newton_leaf_sums(leaf_of_pos, target, num, den):
    for p in range(leaf_of_pos.shape[0]):
        leaf = leaf_of_pos[p]
        if leaf < 0:
            continue
        r = target[p]
        num[leaf] += r
        a = abs(r)
        den[leaf] += a * (1.0 - a)


@njit(cache=True, nogil=True)
def route_rows(X, feat, thr, left, right):
    n = X.shape[0]
    out = np.empty(n, np.int32)
    for i in range(n):
        nd = 0
        while feat[nd] >= 0:
            if X[i, feat[nd]] <= thr[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        out[i] = nd
    return out


@njit(cache=True, nogil=True)
def l1_cross(Q, R):
    """Pairwise Manhattan distances, returned as (n_ref, n_query)."""
    nq, F = Q.shape
    nr = R.shape[0]
    out = np.empty((nr, nq))
    for j in range(nr):
        for i in range(nq):
            s = 0.0
            for f in range(F):
                d = Q[i, f] - R[j, f]
                if d < 0.0:
                    d = -d
                s += d
            out[j, i] = s
    return out
