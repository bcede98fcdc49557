"""Bit-packed GF(2) kernels for the stabilizer engine.

All kernels operate on uint64 word arrays.  A generator row occupies
``2*W`` words: the X block at ``[0, W)`` and the Z block at ``[W, 2W)``,
where ``W = ceil(n/64)``.  Per-row word ranges (``lo``/``hi``, in word
units over sites) bound each row's support so that short operators only
touch the words they overlap.

Sign bits use 0 for +1 and 1 for -1.  Phase bookkeeping accumulates the
exponent of i modulo 4; row products inside the engine are always between
commuting rows, so the accumulated exponent is even and folds into the
sign bit.
"""

import numpy as np
from numba import njit

U64 = np.uint64
_PC1 = U64(0x5555555555555555)
_PC2 = U64(0x3333333333333333)
_PC4 = U64(0x0F0F0F0F0F0F0F0F)
_PCM = U64(0x0101010101010101)
ONE = U64(1)
ZERO = U64(0)


@njit(cache=True, inline="always")
def popcount(v):
    v = v - ((v >> ONE) & _PC1)
    v = (v & _PC2) + ((v >> U64(2)) & _PC2)
    v = (v + (v >> U64(4))) & _PC4
    return (v * _PCM) >> U64(56)


@njit(cache=True, inline="always")
def _ctz(v):
    # v != 0 assumed
    return popcount((v & (~v + ONE)) - ONE)


# ---------------------------------------------------------------------------
# row algebra


@njit(cache=True, inline="always")
def _row_mult(gen, sgn, glo, ghi, i, k, W):
    """gen[i] <- gen[i] * gen[k] with sign tracking (rows must commute)."""
    lo = min(glo[i], glo[k])
    hi = max(ghi[i], ghi[k])
    acc = ZERO
    for w in range(lo, hi):
        ax = gen[i, w]
        az = gen[i, W + w]
        bx = gen[k, w]
        bz = gen[k, W + w]
        cx = ax ^ bx
        cz = az ^ bz
        acc += popcount(ax & az) + popcount(bx & bz) - popcount(cx & cz)
        acc += popcount(az & bx) << ONE
        gen[i, w] = cx
        gen[i, W + w] = cz
    sgn[i] ^= sgn[k] ^ np.uint8((acc >> ONE) & ONE)
    glo[i] = lo
    ghi[i] = hi


@njit(cache=True, inline="always")
def _anticommutes(row, rlo, rhi, op, olo, ohi, W):
    """Symplectic product bit between a generator row and an op row."""
    lo = max(rlo, olo)
    hi = min(rhi, ohi)
    acc = ZERO
    for w in range(lo, hi):
        acc ^= (row[w] & op[W + w]) ^ (row[W + w] & op[w])
    acc ^= acc >> U64(32)
    acc ^= acc >> U64(16)
    acc ^= acc >> U64(8)
    acc ^= acc >> U64(4)
    acc ^= acc >> U64(2)
    acc ^= acc >> ONE
    return acc & ONE


@njit(cache=True)
def build_op(opbuf, n, W, pat_x, pat_z, r, pos, periodic):
    """Place an r-site pattern at ``pos`` into the 2W-word op buffer.

    Returns the (word_lo, word_hi) support range.  The buffer must come in
    zeroed over its previously used range; this function re-zeroes nothing.
    """
    wlo = W
    whi = 0
    for k in range(r):
        xb = (pat_x >> U64(k)) & ONE
        zb = (pat_z >> U64(k)) & ONE
        if xb == ZERO and zb == ZERO:
            continue
        site = pos + k
        if periodic:
            site = site % n
        w = site >> 6
        b = U64(site & 63)
        opbuf[w] |= xb << b
        opbuf[W + w] |= zb << b
        if w < wlo:
            wlo = w
        if w + 1 > whi:
            whi = w + 1
    return wlo, whi


@njit(cache=True, inline="always")
def _clear_row(row, lo, hi, W):
    for w in range(lo, hi):
        row[w] = ZERO
        row[W + w] = ZERO


# ---------------------------------------------------------------------------
# measurement

CASE_RANDOM = 1      # anticommuted with >= 1 generator
CASE_NEW_GEN = 2     # commuted with all, independent: generator added
CASE_DETERMINISTIC = 3  # commuted with all, dependent: state unchanged


@njit(cache=True)
def measure_op(gen, sgn, glo, ghi, g, logw, llo, lhi, nlog, W,
               opbuf, owl, owh, opsign, rand_bit, idxbuf):
    """Measure the operator in ``opbuf`` on the packed tableau.

    Returns (case, g, nlog, outcome_sign_bit).  For the deterministic case
    the outcome bit is not computed here (callers recover it with
    ``membership_sign`` when they need the value).
    """
    na = 0
    for i in range(g):
        if ghi[i] <= owl or glo[i] >= owh:
            continue
        if _anticommutes(gen[i], glo[i], ghi[i], opbuf, owl, owh, W) != ZERO:
            idxbuf[na] = i
            na += 1
    if na > 0:
        f = idxbuf[0]
        for j in range(1, na):
            _row_mult(gen, sgn, glo, ghi, idxbuf[j], f, W)
        # logical rows anticommuting with the op absorb the old pivot row
        for t in range(nlog):
            if lhi[t] <= owl or llo[t] >= owh:
                continue
            if _anticommutes(logw[t], llo[t], lhi[t], opbuf, owl, owh, W) != ZERO:
                for w in range(glo[f], ghi[f]):
                    logw[t, w] ^= gen[f, w]
                    logw[t, W + w] ^= gen[f, W + w]
                if glo[f] < llo[t]:
                    llo[t] = glo[f]
                if ghi[f] > lhi[t]:
                    lhi[t] = ghi[f]
        _clear_row(gen[f], glo[f], ghi[f], W)
        for w in range(owl, owh):
            gen[f, w] = opbuf[w]
            gen[f, W + w] = opbuf[W + w]
        glo[f] = owl
        ghi[f] = owh
        sgn[f] = rand_bit ^ opsign
        return CASE_RANDOM, g, nlog, rand_bit

    # all generators commute: logical content decides dependence
    na = 0
    for t in range(nlog):
        if lhi[t] <= owl or llo[t] >= owh:
            continue
        if _anticommutes(logw[t], llo[t], lhi[t], opbuf, owl, owh, W) != ZERO:
            idxbuf[na] = t
            na += 1
    if na == 0:
        return CASE_DETERMINISTIC, g, nlog, 0

    # new generator; retire one logical pair
    J = idxbuf[0] >> 1
    wrow = 2 * J
    if na > 1 and idxbuf[1] == 2 * J + 1:
        wrow = 2 * J + 1
    elif idxbuf[0] == 2 * J + 1:
        wrow = 2 * J + 1
    for j in range(na):
        t = idxbuf[j]
        if t == wrow:
            continue
        for w in range(llo[wrow], lhi[wrow]):
            logw[t, w] ^= logw[wrow, w]
            logw[t, W + w] ^= logw[wrow, W + w]
        if llo[wrow] < llo[t]:
            llo[t] = llo[wrow]
        if lhi[wrow] > lhi[t]:
            lhi[t] = lhi[wrow]
    # drop pair J by moving the last pair into its slot
    last = (nlog >> 1) - 1
    if J != last:
        for w in range(2 * W):
            logw[2 * J, w] = logw[2 * last, w]
            logw[2 * J + 1, w] = logw[2 * last + 1, w]
        llo[2 * J] = llo[2 * last]
        lhi[2 * J] = lhi[2 * last]
        llo[2 * J + 1] = llo[2 * last + 1]
        lhi[2 * J + 1] = lhi[2 * last + 1]
    nlog -= 2
    for w in range(owl, owh):
        gen[g, w] = opbuf[w]
        gen[g, W + w] = opbuf[W + w]
    glo[g] = owl
    ghi[g] = owh
    sgn[g] = rand_bit ^ opsign
    g += 1
    return CASE_NEW_GEN, g, nlog, rand_bit


@njit(cache=True)
def measure_block(gen, sgn, glo, ghi, g, logw, llo, lhi, nlog, W, n, periodic,
                  sp_x, sp_z, sp_r, species, positions, outbits, m0, m1,
                  opbuf, idxbuf):
    """Run measurements [m0, m1) from pre-drawn species/position/outcome arrays."""
    for m in range(m0, m1):
        a = species[m]
        owl, owh = build_op(opbuf, n, W, sp_x[a], sp_z[a], sp_r[a], positions[m], periodic)
        case, g, nlog, _ = measure_op(gen, sgn, glo, ghi, g, logw, llo, lhi,
                                      nlog, W, opbuf, owl, owh, 0, outbits[m], idxbuf)
        _clear_row(opbuf, owl, owh, W)
    return g, nlog


# ---------------------------------------------------------------------------
# membership / deterministic outcome sign


@njit(cache=True)
def membership_sign(gen, sgn, g, W, opbuf, opsign):
    """Resolve a commuting op against the generator span.

    Returns (in_span, sign_bit): when the op is a product of generators the
    sign bit gives the deterministic measurement outcome (0 -> +1).
    """
    ech = np.empty((g + 1, 2 * W), dtype=np.uint64)
    esg = np.empty(g + 1, dtype=np.uint8)
    elo = np.empty(g + 1, dtype=np.int64)
    ehi = np.empty(g + 1, dtype=np.int64)
    pw = np.empty(g, dtype=np.int64)
    pb = np.empty(g, dtype=np.uint64)
    nech = 0
    for r in range(g + 1):
        if r < g:
            for w in range(2 * W):
                ech[nech, w] = gen[r, w]
            esg[nech] = sgn[r]
        else:
            for w in range(2 * W):
                ech[nech, w] = opbuf[w]
            esg[nech] = opsign
        elo[nech] = 0
        ehi[nech] = W
        # reduce against existing pivots
        for p in range(nech):
            if (ech[nech, pw[p]] & pb[p]) != ZERO:
                _row_mult(ech, esg, elo, ehi, nech, p, W)
        if r == g:
            for w in range(2 * W):
                if ech[nech, w] != ZERO:
                    return False, np.uint8(0)
            return True, esg[nech]
        # find leading bit
        lead_w = -1
        for w in range(2 * W):
            if ech[nech, w] != ZERO:
                lead_w = w
                break
        if lead_w >= 0:
            pw[nech] = lead_w
            v = ech[nech, lead_w]
            pb[nech] = v & (~v + ONE)
            nech += 1
    return False, np.uint8(0)


# ---------------------------------------------------------------------------
# ranks and entropies


@njit(cache=True)
def rank_masked(gen, g, W2, mask):
    """GF(2) rank of the g x (2W) row block restricted to masked columns."""
    scratch = np.empty((g, W2), dtype=np.uint64)
    pw = np.empty(g, dtype=np.int64)
    pb = np.empty(g, dtype=np.uint64)
    npiv = 0
    for r in range(g):
        for w in range(W2):
            scratch[npiv, w] = gen[r, w] & mask[w]
        for p in range(npiv):
            if (scratch[npiv, pw[p]] & pb[p]) != ZERO:
                for w in range(W2):
                    scratch[npiv, w] ^= scratch[p, w]
        lead_w = -1
        for w in range(W2):
            if scratch[npiv, w] != ZERO:
                lead_w = w
                break
        if lead_w >= 0:
            pw[npiv] = lead_w
            v = scratch[npiv, lead_w]
            pb[npiv] = v & (~v + ONE)
            npiv += 1
    return npiv


@njit(cache=True)
def rank_profile(gen, g, W, col_order, checkpoints, out):
    """Ranks of the restriction to growing column prefixes of ``col_order``.

    ``col_order`` holds symplectic column ids (site s -> x column 2s,
    z column 2s+1).  ``out[i]`` receives the rank after the first
    ``checkpoints[i]`` columns have been adjoined.
    """
    scratch = gen[:g].copy()
    is_piv = np.zeros(g, dtype=np.uint8)
    rank = 0
    ci = 0
    while ci < checkpoints.shape[0] and checkpoints[ci] == 0:
        out[ci] = 0
        ci += 1
    ncols = col_order.shape[0]
    for mcol in range(ncols):
        c = col_order[mcol]
        s = c >> 1
        w = (s >> 6) + W * (c & 1)
        bit = ONE << U64(s & 63)
        pr = -1
        for r in range(g):
            if is_piv[r] == 0 and (scratch[r, w] & bit) != ZERO:
                pr = r
                break
        if pr >= 0:
            is_piv[pr] = 1
            rank += 1
            for r in range(g):
                if is_piv[r] == 0 and (scratch[r, w] & bit) != ZERO:
                    for ww in range(2 * W):
                        scratch[r, ww] ^= scratch[pr, ww]
        while ci < checkpoints.shape[0] and checkpoints[ci] == mcol + 1:
            out[ci] = rank
            ci += 1
    while ci < checkpoints.shape[0]:
        out[ci] = rank
        ci += 1


# ---------------------------------------------------------------------------
# clipped gauge


@njit(cache=True, inline="always")
def _left_site(row, W, n):
    for w in range(W):
        v = row[w] | row[W + w]
        if v != ZERO:
            return (w << 6) + int(_ctz(v))
    return -1


@njit(cache=True, inline="always")
def _right_site(row, W, n):
    for w in range(W - 1, -1, -1):
        v = row[w] | row[W + w]
        if v != ZERO:
            v |= v >> ONE
            v |= v >> U64(2)
            v |= v >> U64(4)
            v |= v >> U64(8)
            v |= v >> U64(16)
            v |= v >> U64(32)
            return (w << 6) + int(popcount(v)) - 1
    return -1


@njit(cache=True)
def clip_gauge(gen, sgn, g, W, n, left, right):
    """Bring a generator block to the clipped gauge, in place.

    Returns 0 on success, 1 if the endpoint-count postcondition fails.
    ``left``/``right`` receive per-row endpoint sites.
    """
    glo = np.zeros(g, dtype=np.int64)
    ghi = np.full(g, W, dtype=np.int64)
    # pass 1: reduced echelon with column order x_0, z_0, x_1, z_1, ...
    pr = 0
    for c in range(2 * n):
        s = c >> 1
        w = (s >> 6) + W * (c & 1)
        bit = ONE << U64(s & 63)
        hit = -1
        for r in range(pr, g):
            if (gen[r, w] & bit) != ZERO:
                hit = r
                break
        if hit < 0:
            continue
        if hit != pr:
            for ww in range(2 * W):
                tmp = gen[pr, ww]
                gen[pr, ww] = gen[hit, ww]
                gen[hit, ww] = tmp
            ts = sgn[pr]
            sgn[pr] = sgn[hit]
            sgn[hit] = ts
        for r in range(g):
            if r != pr and (gen[r, w] & bit) != ZERO:
                _row_mult(gen, sgn, glo, ghi, r, pr, W)
        pr += 1
        if pr == g:
            break

    for r in range(g):
        left[r] = _left_site(gen[r], W, n)
        right[r] = _right_site(gen[r], W, n)

    # pass 2: sweep right to left, keeping at most two rows ending per site
    keep = np.empty(2, dtype=np.int64)
    keep_letter = np.empty(2, dtype=np.int64)
    order = np.empty(g, dtype=np.int64)
    for s in range(n - 1, -1, -1):
        cnt = 0
        for r in range(g):
            if right[r] == s:
                order[cnt] = r
                cnt += 1
        if cnt <= 1:
            continue
        # sort candidates by left endpoint, descending (insertion sort)
        for a in range(1, cnt):
            key = order[a]
            b = a - 1
            while b >= 0 and left[order[b]] < left[key]:
                order[b + 1] = order[b]
                b -= 1
            order[b + 1] = key
        nkeep = 0
        sw = s >> 6
        sb = U64(s & 63)
        for a in range(cnt):
            r = order[a]
            letter = np.int64((gen[r, sw] >> sb) & ONE) + 2 * np.int64((gen[r, W + sw] >> sb) & ONE)
            for k in range(nkeep):
                pivbit = keep_letter[k] & (-keep_letter[k])
                if letter & pivbit:
                    _row_mult(gen, sgn, glo, ghi, r, keep[k], W)
                    letter ^= keep_letter[k]
            if letter != 0:
                keep[nkeep] = r
                keep_letter[nkeep] = letter
                nkeep += 1
            else:
                right[r] = _right_site(gen[r], W, n)
                left[r] = _left_site(gen[r], W, n)

    ends = np.zeros(n, dtype=np.int64)
    for r in range(g):
        left[r] = _left_site(gen[r], W, n)
        right[r] = _right_site(gen[r], W, n)
        if left[r] < 0:
            return 1
        ends[left[r]] += 1
        ends[right[r]] += 1
    if g == n:
        for s in range(n):
            if ends[s] != 2:
                return 1
    return 0


# ---------------------------------------------------------------------------
# contiguous code distance


@njit(cache=True, inline="always")
def _window_admits(gen, g, W, maskA, maskB, sizeA):
    rA = rank_masked(gen, g, 2 * W, maskA)
    rB = rank_masked(gen, g, 2 * W, maskB)
    return 2 * sizeA - rA > g - rB


@njit(cache=True, inline="always")
def _mask_site(mask, s, W, on):
    w = s >> 6
    bit = ONE << U64(s & 63)
    if on:
        mask[w] |= bit
        mask[W + w] |= bit
    else:
        mask[w] &= ~bit
        mask[W + w] &= ~bit


@njit(cache=True)
def contiguous_distance(gen, g, W, n, periodic, lx):
    """Per-site contiguous code distance for a mixed tableau (g < n).

    Uses a two-pointer sweep over window starts: if a window admits a
    logical operator then so does every contiguous superset, so the minimal
    admitting end offset is nondecreasing in the start position.
    """
    maskA = np.zeros(2 * W, dtype=np.uint64)
    maskB = np.zeros(2 * W, dtype=np.uint64)
    for s in range(n):
        _mask_site(maskB, s, W, True)
    ends = np.full(n, -1, dtype=np.int64)  # inclusive end offset per start
    e = -1
    for s in range(n):
        if s > 0:
            _mask_site(maskA, (s - 1) % n, W, False)
            _mask_site(maskB, (s - 1) % n, W, True)
        ok = False
        while True:
            size = e - s + 1
            if size >= 1 and _window_admits(gen, g, W, maskA, maskB, size):
                ok = True
                break
            if periodic:
                if size >= n:
                    break
            else:
                if e + 1 >= n:
                    break
            e += 1
            _mask_site(maskA, e % n, W, True)
            _mask_site(maskB, e % n, W, False)
        if not ok:
            break  # no admitting window from this start onward (open chain)
        ends[s] = e
    # minimal admitting window containing each site
    for x in range(n):
        best = n + 1
        for s in range(n):
            if ends[s] < 0:
                continue
            length = ends[s] - s + 1
            if periodic:
                d = (x - s) % n
                cand = length if d + 1 <= length else d + 1
            else:
                if x >= s:
                    cand = length if x <= ends[s] else x - s + 1
                else:
                    continue
            if cand < best:
                best = cand
        lx[x] = best if best <= n else 0
    return 0


# ---------------------------------------------------------------------------
# l-bit circuit layer


@njit(cache=True)
def lbit_layer(gen, sgn, glo, ghi, g, W, n, p_sites, cz_pairs, periodic):
    """Apply one layer of sampled phase and controlled-Z gates.

    ``p_sites`` lists the sites receiving a phase gate; ``cz_pairs`` is an
    (m, 2) array of site pairs.  Conjugation acts on every generator row.
    """
    for t in range(p_sites.shape[0]):
        i = p_sites[t]
        w = i >> 6
        bit = ONE << U64(i & 63)
        for r in range(g):
            if (gen[r, w] & bit) != ZERO:
                if (gen[r, W + w] & bit) != ZERO:
                    sgn[r] ^= 1
                gen[r, W + w] ^= bit
    for t in range(cz_pairs.shape[0]):
        i = cz_pairs[t, 0]
        j = cz_pairs[t, 1]
        wi = i >> 6
        bi = ONE << U64(i & 63)
        wj = j >> 6
        bj = ONE << U64(j & 63)
        for r in range(g):
            xi = (gen[r, wi] & bi) != ZERO
            xj = (gen[r, wj] & bj) != ZERO
            if not (xi or xj):
                continue
            zi = (gen[r, W + wi] & bi) != ZERO
            zj = (gen[r, W + wj] & bj) != ZERO
            if xi and xj and (zi != zj):
                sgn[r] ^= 1
            if xi:
                gen[r, W + wj] ^= bj
                if wj < glo[r]:
                    glo[r] = wj
                if wj + 1 > ghi[r]:
                    ghi[r] = wj + 1
            if xj:
                gen[r, W + wi] ^= bi
                if wi < glo[r]:
                    glo[r] = wi
                if wi + 1 > ghi[r]:
                    ghi[r] = wi + 1


# ---------------------------------------------------------------------------
# generic packed RREF (for symmetry search and friends)


@njit(cache=True)
def rref_packed(mat, nrows, ncols):
    """In-place reduced row echelon form; returns pivot column array."""
    pivots = np.empty(min(nrows, ncols), dtype=np.int64)
    npiv = 0
    for c in range(ncols):
        w = c >> 6
        bit = ONE << U64(c & 63)
        hit = -1
        for r in range(npiv, nrows):
            if (mat[r, w] & bit) != ZERO:
                hit = r
                break
        if hit < 0:
            continue
        if hit != npiv:
            for ww in range(mat.shape[1]):
                tmp = mat[npiv, ww]
                mat[npiv, ww] = mat[hit, ww]
                mat[hit, ww] = tmp
        for r in range(nrows):
            if r != npiv and (mat[r, w] & bit) != ZERO:
                for ww in range(mat.shape[1]):
                    mat[r, ww] ^= mat[npiv, ww]
        pivots[npiv] = c
        npiv += 1
        if npiv == nrows:
            break
    return pivots[:npiv]
