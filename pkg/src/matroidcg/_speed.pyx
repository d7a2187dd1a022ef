# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled profile sweep.

Enumerates all strategy profiles with an odometer (player 1 most
significant, matching itertools.product) while maintaining per-resource
congestion bitmasks incrementally, and keeps the profiles where no player
has a strictly cheaper unilateral deviation.  All cost arithmetic runs on
pre-scaled 64-bit integers, so every comparison is exact and agrees with
the rational evaluation of the pure path (matroidcg.backend packs the
tables and checks the overflow bounds before dispatching here).
"""


cdef inline long long ipow(long long v, int p) noexcept:
    cdef long long acc = 1
    cdef int j
    for j in range(p):
        acc *= v
    return acc


cdef long long gamma_eval(int i, long long gid, int m, long long mask_space,
                          long long* masks,
                          long long[:] sptr, long long[:] slen, long long[:] sres,
                          int mixed, int op, int p,
                          long long[:] ctab, int ps,
                          long long[:] gidx, long long[:] agg_out, int grid_size,
                          long long[:] lat, long long[:] bot,
                          long long[:] anum, long long[:] arest) noexcept:
    cdef long long acc = 0, v, sl = 0, mb = 0, fidx = 0
    cdef long long k, e
    cdef long long row = i if ps else 0
    if not mixed:
        if op == 0:  # sum
            for k in range(sptr[gid], sptr[gid] + slen[gid]):
                e = sres[k]
                acc += ctab[(row * m + e) * mask_space + masks[e]]
            return acc
        if op == 1:  # max (values are nonnegative)
            for k in range(sptr[gid], sptr[gid] + slen[gid]):
                e = sres[k]
                v = ctab[(row * m + e) * mask_space + masks[e]]
                if v > acc:
                    acc = v
            return acc
        if op == 2:  # p-th power sum
            for k in range(sptr[gid], sptr[gid] + slen[gid]):
                e = sres[k]
                acc += ipow(ctab[(row * m + e) * mask_space + masks[e]], p)
            return acc
        # op == 3: table aggregation by dense grid-index lookup
        for k in range(sptr[gid], sptr[gid] + slen[gid]):
            e = sres[k]
            fidx = fidx * grid_size + gidx[e * mask_space + masks[e]]
        return agg_out[fidx]
    # mixed: alpha-blend of latency sum and bottleneck max
    for k in range(sptr[gid], sptr[gid] + slen[gid]):
        e = sres[k]
        sl += lat[(row * m + e) * mask_space + masks[e]]
        v = bot[(row * m + e) * mask_space + masks[e]]
        if v > mb:
            mb = v
    return anum[i] * sl + arest[i] * mb


def sweep_pne(int n, int m, long long[:] counts,
              long long[:] sptr, long long[:] slen, long long[:] sres,
              int mixed, int op, int p, long long mask_space,
              long long[:] ctab, int ps,
              long long[:] gidx, long long[:] agg_out, int grid_size, int r,
              long long[:] lat, long long[:] bot,
              long long[:] anum, long long[:] arest):
    """Flat indices (canonical enumeration order) of the PNE profiles."""
    cdef long long masks[64]
    cdef long long idx[16]
    cdef long long gbase[17]
    cdef long long bit, cur_key, alt_key, flat, gid_cur, gid_alt, gid_old
    cdef long long k
    cdef int i, j, e, pne, s, old
    if n > 16 or m > 64:
        raise ValueError("kernel limits exceeded")

    gbase[0] = 0
    for i in range(n):
        gbase[i + 1] = gbase[i] + counts[i]
        idx[i] = 0
    for e in range(m):
        masks[e] = 0
    for i in range(n):
        gid_cur = gbase[i]
        for k in range(sptr[gid_cur], sptr[gid_cur] + slen[gid_cur]):
            masks[sres[k]] |= (<long long> 1) << i

    result = []
    flat = 0
    while True:
        pne = 1
        for i in range(n):
            bit = (<long long> 1) << i
            gid_cur = gbase[i] + idx[i]
            cur_key = gamma_eval(i, gid_cur, m, mask_space, masks,
                                 sptr, slen, sres, mixed, op, p, ctab, ps,
                                 gidx, agg_out, grid_size, lat, bot, anum, arest)
            for s in range(counts[i]):
                if s == idx[i]:
                    continue
                gid_alt = gbase[i] + s
                for k in range(sptr[gid_cur], sptr[gid_cur] + slen[gid_cur]):
                    masks[sres[k]] &= ~bit
                for k in range(sptr[gid_alt], sptr[gid_alt] + slen[gid_alt]):
                    masks[sres[k]] |= bit
                alt_key = gamma_eval(i, gid_alt, m, mask_space, masks,
                                     sptr, slen, sres, mixed, op, p, ctab, ps,
                                     gidx, agg_out, grid_size, lat, bot, anum, arest)
                for k in range(sptr[gid_alt], sptr[gid_alt] + slen[gid_alt]):
                    masks[sres[k]] &= ~bit
                for k in range(sptr[gid_cur], sptr[gid_cur] + slen[gid_cur]):
                    masks[sres[k]] |= bit
                if alt_key < cur_key:
                    pne = 0
                    break
            if not pne:
                break
        if pne:
            result.append(flat)

        # odometer: advance the last player, carrying leftwards
        j = n - 1
        while j >= 0:
            bit = (<long long> 1) << j
            old = <int> idx[j]
            gid_old = gbase[j] + old
            if idx[j] + 1 < counts[j]:
                idx[j] += 1
            else:
                idx[j] = 0
            gid_cur = gbase[j] + idx[j]
            for k in range(sptr[gid_old], sptr[gid_old] + slen[gid_old]):
                masks[sres[k]] &= ~bit
            for k in range(sptr[gid_cur], sptr[gid_cur] + slen[gid_cur]):
                masks[sres[k]] |= bit
            if idx[j] != 0:
                break
            j -= 1
        if j < 0:
            break
        flat += 1
    return result
