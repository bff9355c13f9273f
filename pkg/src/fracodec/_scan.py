"""Compiled candidate-scan kernel shared by both search modes.

Candidate order is (domain entry, isometry, s index) with the s index moving
fastest; the kernel keeps the first strict minimum, so results are the
lexicographically-first argmin and independent of the worker count (each
range block is scanned serially by one worker).
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def scan_candidates(ranges, rmeans, q, dmeans, svals, baseline, out_err, out_idx):
    """Exhaustive scan of quantized reconstructions against range tiles.

    ranges: int16 [M, n] flattened range tiles
    rmeans: float64 [M] exact range means
    q:      int16 [E*8*S, n] per-candidate rint(s*d) (baseline) or
            rint(s*(d - dmean)) (proposed), isometry-applied, flattened
    dmeans: float64 [E] decimated-domain means
    svals:  float64 [S] active s set
    baseline: True -> offset clip(round(rmean - s*dmean)), recon clip(q + o)
              False -> offset round(rmean), recon clip(q + o)
    """
    M, n = ranges.shape
    E = dmeans.shape[0]
    S = svals.shape[0]
    for m in prange(M):
        r = ranges[m]
        best = np.int64(1) << 62
        bestc = np.int64(-1)
        o_prop = int(round(rmeans[m]))
        c = 0
        for e in range(E):
            for i in range(8):
                for si in range(S):
                    if baseline:
                        o = int(round(rmeans[m] - svals[si] * dmeans[e]))
                        if o < 0:
                            o = 0
                        elif o > 255:
                            o = 255
                    else:
                        o = o_prop
                    row = q[c]
                    err = np.int64(0)
                    for k in range(n):
                        v = row[k] + o
                        if v < 0:
                            v = 0
                        elif v > 255:
                            v = 255
                        d = v - r[k]
                        err += d * d
                        if err > best:
                            break
                    if err < best:
                        best = err
                        bestc = c
                    c += 1
        out_err[m] = best
        out_idx[m] = bestc
