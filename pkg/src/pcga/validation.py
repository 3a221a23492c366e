"""Straight-line reference evaluators and the problem self-test suite.

The functions here are deliberately naive pure-Python re-implementations
that share no code with the compiled kernels. :func:`run_self_tests`
compares the two on random points, confirms optima by exhaustive
enumeration at small n, and checks the catalog's reference targets against
the known optima at n = 100.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError
from .problems import catalog_entry, check_dimension, make_problem, reference_target
from .problems.catalog import NkLandscape, _layers, load_catalog
from .rng import RngStream

# -- reference evaluators -------------------------------------------------


def ref_onemax(x) -> int:
    return sum(int(b) for b in x)


def ref_leading_ones(x) -> int:
    count = 0
    for b in x:
        if not b:
            break
        count += 1
    return count


def ref_linear(x) -> int:
    return sum((i + 1) * int(b) for i, b in enumerate(x))


def ref_labs(x) -> float:
    s = [2 * int(b) - 1 for b in x]
    n = len(s)
    energy = sum(sum(s[i] * s[i + k] for i in range(n - k)) ** 2 for k in range(1, n))
    return n * n / (2 * energy)


def _lattice_edges(side: int, triangular: bool) -> list:
    edges = []
    for r in range(side):
        for c in range(side):
            u = r * side + c
            edges.append((u, r * side + (c + 1) % side))
            edges.append((u, ((r + 1) % side) * side + c))
            if triangular:
                edges.append((u, ((r + 1) % side) * side + (c + 1) % side))
    return edges


def ref_ising_ring(x) -> int:
    n = len(x)
    return sum(x[i] == x[(i + 1) % n] for i in range(n))


def ref_ising_lattice(x, triangular: bool = False) -> int:
    side = math.isqrt(len(x))
    return sum(x[u] == x[v] for u, v in _lattice_edges(side, triangular))


def mivs_graph(size: int) -> set:
    """Two paths 1..h and h+1..2h joined by crossing links (1-based labels)."""
    h = size // 2
    edges = set()
    for i in range(1, h):
        edges.add((i, i + 1))
        edges.add((h + i, h + i + 1))
    for i in range(1, h):
        edges.add((i, i + h + 1))
    for i in range(2, h + 1):
        edges.add((i, i + h - 1))
    return edges


def ref_mivs(x) -> int:
    size = len(x) - len(x) % 2
    chosen = {i + 1 for i in range(size) if x[i]}
    inside = sum(1 for u, v in mivs_graph(size) if u in chosen and v in chosen)
    return len(chosen) - size * inside


def ref_nqueens(x) -> int:
    side = math.isqrt(len(x))
    queens = [(i // side, i % side) for i in range(len(x)) if x[i]]
    lines = Counter()
    for r, c in queens:
        lines[("row", r)] += 1
        lines[("col", c)] += 1
        lines[("diag", r - c)] += 1
        lines[("anti", r + c)] += 1
    return len(queens) - side * sum(cnt - 1 for cnt in lines.values())


def ref_trap(x, k: int = 5) -> float:
    total = 0.0
    for start in range(0, len(x), k):
        u = sum(int(b) for b in x[start:start + k])
        total += 1.0 if u == k else (k - 1 - u) / k
    return total


def ref_nk(x, inst: NkLandscape) -> float:
    total = 0.0
    for i in range(inst.n):
        bits = [int(x[i])] + [int(x[j]) for j in inst.neighbors[i]]
        index = sum(b << pos for pos, b in enumerate(bits))
        total += inst.tables[i][index]
    return total / inst.n


def ref_rugged_1(y: float, m: int) -> float:
    if y == m:
        return math.ceil(y / 2) + 1
    if m % 2 == 0:
        return math.floor(y / 2) + 1
    return math.ceil(y / 2) + 1


def ref_rugged_2(y: float, m: int) -> float:
    y = int(y)
    if y == m:
        return y
    if y % 2 == 0 and m % 2 == 0:
        return y + 1
    if y % 2 == 0:
        return max(y - 1, 0)
    if m % 2 == 0:
        return max(y - 1, 0)
    return y + 1


def ref_rugged_3(y: float, m: int) -> float:
    y = int(y)
    if y == m:
        return m
    if y >= m - 5 * (m // 5):
        j = -(-(m - y) // 5)
        return 2 * (m - 5 * j) + 4 - y
    return (m % 5) - 1 - y


def ref_wmodel(x, dummy_positions, neutrality, epistasis, rugged, base) -> float:
    bits = [int(x[p]) for p in dummy_positions] if len(dummy_positions) else [int(b) for b in x]
    if neutrality and neutrality > 1:
        bits = [
            int(2 * sum(bits[i:i + neutrality]) >= neutrality)
            for i in range(0, len(bits) - neutrality + 1, neutrality)
        ]
    if epistasis and epistasis > 1:
        out = []
        for start in range(0, len(bits), epistasis):
            block = bits[start:start + epistasis]
            s = len(block)
            for i in range(s):
                # C-style remainder: int(math.fmod(-1, 4)) == -1 matches no input
                skip = int(math.fmod((s - i - 1) - 1, 4))
                out.append(sum(block[j] for j in range(s) if s - j - 1 != skip) % 2)
        bits = out
    m = len(bits)
    y = ref_leading_ones(bits) if base == "leadingones" else ref_onemax(bits)
    if rugged == 1:
        return ref_rugged_1(y, m)
    if rugged == 2:
        return ref_rugged_2(y, m)
    if rugged == 3:
        return ref_rugged_3(y, m)
    return y


def reference_evaluator(fid: int, n: int):
    """Pure-Python fitness function for catalog problem F-``fid`` at dimension n."""
    entry = catalog_entry(fid)
    kind = entry["kind"]
    if kind == "onemax":
        return ref_onemax
    if kind == "leadingones":
        return ref_leading_ones
    if kind == "linear":
        return ref_linear
    if kind == "labs":
        return ref_labs
    if kind == "ising_ring":
        return ref_ising_ring
    if kind == "ising_torus":
        return lambda x: ref_ising_lattice(x, False)
    if kind == "ising_triangular":
        return lambda x: ref_ising_lattice(x, True)
    if kind == "mivs":
        return ref_mivs
    if kind == "nqueens":
        return ref_nqueens
    if kind == "trap":
        k = int((entry.get("params") or {}).get("k", 5))
        return lambda x: ref_trap(x, k)
    if kind == "nk":
        inst = NkLandscape.generate(n, int((entry.get("params") or {}).get("k", 1)), int(load_catalog()["instance_seed"]))
        return lambda x: ref_nk(x, inst)
    if kind == "wmodel":
        layers = _layers(entry, n)
        pos = layers.dummy_positions(n)
        return lambda x: ref_wmodel(x, pos, layers.neutrality_mu, layers.epistasis_nu, layers.ruggedness_gamma, entry["base"])
    raise ValueError(f"no reference evaluator for kind {kind!r}")


# -- self-test suite ------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _spot_dims(fid: int) -> tuple:
    cons = catalog_entry(fid).get("constraint") or {}
    if cons.get("square"):
        return (4, 9, 16, 25)
    if "divisible" in cons:
        return (5, 10, 20)
    dims = []
    for n in (2, 7, 12, 33):
        try:
            check_dimension(fid, n)
        except ConfigurationError:
            continue
        dims.append(n)
    return tuple(dims)


def brute_force_max(problem) -> tuple[float, np.ndarray]:
    best, arg = -math.inf, None
    for bits in itertools.product((0, 1), repeat=problem.n):
        x = np.array(bits, dtype=np.uint8)
        f = problem.evaluate(x)
        if f > best:
            best, arg = f, x
    return best, arg


# dimensions used for exhaustive optimum checks (all n <= 16)
EXHAUSTIVE = {1: 12, 2: 12, 3: 12, 4: 12, 5: 10, 19: 12, 23: 16, 24: 10}


def run_self_tests(samples: int = 200, seed: int = 7, exhaustive: bool = True) -> list:
    rng = RngStream(seed)
    checks = []
    for fid in range(1, 26):
        for n in _spot_dims(fid):
            problem = make_problem(fid, n)
            ref = reference_evaluator(fid, n)
            bad = None
            for _ in range(samples):
                x = np.array([rng.integers(2) for _ in range(n)], dtype=np.uint8)
                got, want = problem.evaluate(x), ref(x)
                if not math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-12):
                    bad = f"x={''.join(map(str, x))}: kernel {got} vs reference {want}"
                    break
            checks.append(Check(f"F{fid} n={n} kernel matches reference", bad is None, bad or ""))
    if exhaustive:
        for fid, n in EXHAUSTIVE.items():
            problem = make_problem(fid, n)
            best, arg = brute_force_max(problem)
            ok = best == problem.optimum
            checks.append(Check(
                f"F{fid} n={n} exhaustive maximum equals catalog optimum",
                ok, f"maximum {best} at {''.join(map(str, arg))}, catalog optimum {problem.optimum}",
            ))
    for fid in range(1, 26):
        problem = make_problem(fid, 100)
        target = reference_target(fid)
        if catalog_entry(fid)["kind"] == "nk":
            target = -target  # the reference table lists NK values negated
        bound = problem.optimum
        if bound is None:
            bound = _optimum_bound(fid, problem)
        checks.append(Check(f"F{fid} reference target {target} <= optimum bound {bound:g}", target <= bound))
    return checks


def _optimum_bound(fid: int, problem) -> float:
    kind = catalog_entry(fid)["kind"]
    if kind == "nk":
        # each sub-function contributes at most its table maximum
        inst = NkLandscape.generate(problem.n, int(problem.iparams[0]), int(load_catalog()["instance_seed"]))
        return float(inst.tables.max(axis=1).mean())
    if kind == "mivs":
        # each of the two paths of n/2 vertices holds at most ceil(n/4) of them
        return 2 * math.ceil(problem.n / 4)
    if kind == "labs":
        return math.inf
    raise ValueError(f"no optimum bound for F{fid}")
