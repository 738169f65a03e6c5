"""Pure-Python fallback for the compiled term-merging kernel."""

import numpy as np


def cluster_sum(fre, fim, coeffs, eps):
    """Merge terms whose frequencies lie within ``eps`` of a cluster head.

    Same contract as the compiled version: inputs sorted by (fre, fim).
    """
    heads_re = []
    heads_im = []
    labels = np.empty(len(fre), dtype=np.intp)
    start = 0
    for i, (x, y) in enumerate(zip(fre.tolist(), fim.tolist())):
        while start < len(heads_re) and heads_re[start] < x - eps:
            start += 1
        hit = -1
        for c in range(start, len(heads_re)):
            if np.hypot(heads_re[c] - x, heads_im[c] - y) <= eps:
                hit = c
                break
        if hit < 0:
            hit = len(heads_re)
            heads_re.append(x)
            heads_im.append(y)
        labels[i] = hit
    out = np.zeros((len(heads_re), coeffs.shape[1]), dtype=np.complex128)
    np.add.at(out, labels, coeffs)
    return np.array(heads_re), np.array(heads_im), out
