"""Compiled evaluators for every problem kind.

A problem is described by an integer ``kind`` and three flat arrays:
``ip`` (integer parameters), ``fp`` (float tables) and ``pos`` (index
tables). :func:`evaluate_kernel` dispatches on ``kind`` so the engine
compiles exactly once for the whole suite.

Kernel layouts
--------------
WMODEL   ip = [base, neutrality, epistasis, ruggedness, has_dummy]
         pos = retained positions (sorted) when has_dummy
         fp = ruggedness-3 lookup table of length m+1 (m = reduced length)
TRAP     ip = [k]
NK       ip = [k]; pos = n*k neighbour indices; fp = n * 2**(k+1) table
"""

import numba as nb
import numpy as np

ONEMAX = 1
LEADINGONES = 2
LINEAR = 3
WMODEL = 4
LABS = 5
ISING_RING = 6
ISING_TORUS = 7
ISING_TRIANGULAR = 8
MIVS = 9
NQUEENS = 10
TRAP = 11
NK = 12

# Ruggedness variants of the W-model, numbered as in the IOHprofiler suite.
RUGGED_NONE = 0
RUGGED_1 = 1
RUGGED_2 = 2
RUGGED_3 = 3


@nb.njit(cache=True)
def onemax(x, m):
    total = 0
    for i in range(m):
        total += x[i]
    return total


@nb.njit(cache=True)
def leading_ones(x, m):
    for i in range(m):
        if x[i] == 0:
            return i
    return m


@nb.njit(cache=True)
def linear(x):
    total = 0
    for i in range(x.size):
        if x[i]:
            total += i + 1
    return total


@nb.njit(cache=True)
def labs_merit(x):
    n = x.size
    energy = 0
    for k in range(1, n):
        c = 0
        for i in range(n - k):
            # (2a-1)(2b-1) is +1 iff the bits agree
            c += 1 if x[i] == x[i + k] else -1
        energy += c * c
    return n * n / (2.0 * energy)


@nb.njit(cache=True)
def ising_ring(x):
    n = x.size
    total = 0
    for i in range(n):
        if x[i] == x[(i + 1) % n]:
            total += 1
    return total


@nb.njit(cache=True)
def _side(n):
    side = int(np.sqrt(n) + 0.5)
    return side


@nb.njit(cache=True)
def ising_torus(x, triangular):
    side = _side(x.size)
    total = 0
    for r in range(side):
        rn = (r + 1) % side
        for c in range(side):
            cn = (c + 1) % side
            v = x[r * side + c]
            if v == x[r * side + cn]:
                total += 1
            if v == x[rn * side + c]:
                total += 1
            if triangular and v == x[rn * side + cn]:
                total += 1
    return total


@nb.njit(cache=True)
def _mivs_edge(i, j, size):
    # 1-based vertex labels, i < j; two paths of size/2 with cross links
    half = size // 2
    if i != half and j == i + 1:
        return True
    if i <= half - 1 and j == i + half + 1:
        return True
    if 2 <= i <= half and j == i + half - 1:
        return True
    return False


@nb.njit(cache=True)
def mivs(x):
    size = x.size - x.size % 2
    ones = np.empty(size, dtype=np.int64)
    count = 0
    for i in range(size):
        if x[i]:
            ones[count] = i + 1
            count += 1
    inner = 0
    for a in range(count):
        for b in range(a + 1, count):
            if _mivs_edge(ones[a], ones[b], size):
                inner += 1
    return count - size * inner


@nb.njit(cache=True)
def nqueens(x):
    side = _side(x.size)
    queens = 0
    for i in range(x.size):
        queens += x[i]
    penalty = 0
    for r in range(side):
        s = 0
        for c in range(side):
            s += x[r * side + c]
        penalty += max(0, s - 1)
    for c in range(side):
        s = 0
        for r in range(side):
            s += x[r * side + c]
        penalty += max(0, s - 1)
    # diagonals c - r = d and anti-diagonals r + c = d, length >= 2
    for d in range(-(side - 2), side - 1):
        s = 0
        for r in range(side):
            c = r + d
            if 0 <= c < side:
                s += x[r * side + c]
        penalty += max(0, s - 1)
    for d in range(1, 2 * side - 2):
        s = 0
        for r in range(side):
            c = d - r
            if 0 <= c < side:
                s += x[r * side + c]
        penalty += max(0, s - 1)
    return queens - side * penalty


@nb.njit(cache=True)
def concatenated_trap(x, k):
    total = 0.0
    for start in range(0, x.size, k):
        u = 0
        for i in range(start, start + k):
            u += x[i]
        if u == k:
            total += 1.0
        else:
            total += (k - 1 - u) / k
    return total


@nb.njit(cache=True)
def nk_eval(x, k, neighbors, tables):
    n = x.size
    width = 1 << (k + 1)
    total = 0.0
    for i in range(n):
        # own bit is the least significant bit of the table index
        index = np.int64(x[i])
        for j in range(k):
            index += np.int64(x[neighbors[i * k + j]]) << (j + 1)
        total += tables[i * width + index]
    return total / n


@nb.njit(cache=True)
def ruggedness_1(y, m):
    if y == m:
        return np.ceil(y / 2.0) + 1.0
    if m % 2 == 0:
        return np.floor(y / 2.0) + 1.0
    return np.ceil(y / 2.0) + 1.0


@nb.njit(cache=True)
def ruggedness_2(y, m):
    t = int(y + 0.5)
    if t == m:
        return y
    if (t % 2 == 0) == (m % 2 == 0):
        return y + 1.0
    return max(y - 1.0, 0.0)


def ruggedness_3_table(m: int) -> np.ndarray:
    """Lookup table for the third ruggedness mapping over values 0..m."""
    table = np.zeros(m + 1)
    for j in range(1, m // 5 + 1):
        for k in range(5):
            table[m - 5 * j + k] = m - 5 * j + (4 - k)
    rest = m - (m // 5) * 5
    for k in range(rest):
        table[k] = rest - 1 - k
    table[m] = m
    return table


# Period of the skipped-input rule in the reference suite's epistasis layer.
EPISTASIS_PERIOD = 4


@nb.njit(cache=True)
def _epistasis_block(src, dst, start, size):
    # Counting positions from the block end (r = size - 1 - i), output r is
    # the XOR of the block without input (r - 1) mod 4, where the modulo
    # keeps the sign of C's % operator: output r = 0 skips nothing.
    parity = 0
    for j in range(start, start + size):
        parity ^= src[j]
    for i in range(size):
        r = size - 1 - i
        if r == 0:
            dst[start + i] = parity
        else:
            skip = size - 1 - (r - 1) % EPISTASIS_PERIOD
            dst[start + i] = parity ^ src[start + skip]


@nb.njit(cache=True)
def wmodel(x, ip, fp, pos, scratch):
    base = ip[0]
    neutrality = ip[1]
    epistasis = ip[2]
    rugged = ip[3]
    n = x.size
    a = scratch[:n]
    b = scratch[n:2 * n]
    if ip[4]:
        m = pos.size
        for i in range(m):
            a[i] = x[pos[i]]
    else:
        m = n
        a[:n] = x
    if neutrality > 1:
        m_new = m // neutrality
        for blk in range(m_new):
            ones = 0
            for j in range(blk * neutrality, (blk + 1) * neutrality):
                ones += a[j]
            b[blk] = 1 if 2 * ones >= neutrality else 0
        m = m_new
        a[:m] = b[:m]
    if epistasis > 1:
        start = 0
        while start < m:
            size = min(epistasis, m - start)
            _epistasis_block(a, b, start, size)
            start += size
        a[:m] = b[:m]
    if base == LEADINGONES:
        y = np.float64(leading_ones(a, m))
    else:
        y = np.float64(onemax(a, m))
    if rugged == RUGGED_1:
        return ruggedness_1(y, m)
    if rugged == RUGGED_2:
        return ruggedness_2(y, m)
    if rugged == RUGGED_3:
        return fp[int(y)]
    return y


@nb.njit(cache=True)
def evaluate_kernel(kind, ip, fp, pos, x, scratch):
    """Fitness of ``x`` for the problem described by ``(kind, ip, fp, pos)``."""
    if kind == ONEMAX:
        return np.float64(onemax(x, x.size))
    if kind == LEADINGONES:
        return np.float64(leading_ones(x, x.size))
    if kind == LINEAR:
        return np.float64(linear(x))
    if kind == WMODEL:
        return wmodel(x, ip, fp, pos, scratch)
    if kind == LABS:
        return labs_merit(x)
    if kind == ISING_RING:
        return np.float64(ising_ring(x))
    if kind == ISING_TORUS:
        return np.float64(ising_torus(x, False))
    if kind == ISING_TRIANGULAR:
        return np.float64(ising_torus(x, True))
    if kind == MIVS:
        return np.float64(mivs(x))
    if kind == NQUEENS:
        return np.float64(nqueens(x))
    if kind == TRAP:
        return concatenated_trap(x, ip[0])
    if kind == NK:
        return nk_eval(x, ip[0], pos, fp)
    return np.nan
