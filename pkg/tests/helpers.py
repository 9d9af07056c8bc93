"""Independent reference implementations used to cross-check the package.

Everything here recomputes results straight from the definitions
(explicit cell enumeration, rational elimination, permutation sums) and
deliberately shares no code with the construction paths it checks.
"""

import itertools
from fractions import Fraction

from posetiles.weights import multiplicity, permute_mask


def gauss_solve(rows, rhs):
    """Solve A x = b over the rationals; one solution or None."""
    m = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    n_rows = len(m)
    n_cols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for i in range(r, n_rows):
        if m[i][n_cols] != 0:
            return None
    solution = [Fraction(0)] * n_cols
    for row_idx, c in enumerate(pivots):
        solution[c] = m[row_idx][n_cols]
    return solution


def tile_cell_set(cert):
    """All covered cells recomputed tile by tile; asserts disjointness."""
    seen = {}
    for idx, tile in enumerate(cert.tiles):
        for cell in tile.cells(cert.member_set(tile.member)):
            assert cell not in seen, f"tiles {seen[cell]} and {idx} overlap at {cell}"
            seen[cell] = idx
    return set(seen)


def region_cell_set(cert):
    cells = set()
    for box in cert.region:
        for cell in box.cells():
            assert cell not in cells, f"region boxes overlap at {cell}"
            cells.add(cell)
    return cells


def assert_exact_cover(cert):
    assert tile_cell_set(cert) == region_cell_set(cert)


def in_corner(inst, cell, i):
    """Membership of a U^d cell in corner i, straight from the definition."""
    return all(
        (v in inst.bc) if (pos == i) else (v in inst.ac)
        for pos, v in enumerate(cell, start=1)
    )


def onecorner_expected(inst, k, i):
    u = sorted(inst.u_set)
    return {
        cell
        for cell in itertools.product(u, repeat=k)
        if not in_corner(inst, cell, i)
    }


def changes_expected(inst, k, l, iset, jset):
    u = sorted(inst.u_set)
    out = set()
    for cell in itertools.product(u, repeat=k + l):
        low = all(v in inst.ac for v in cell[k:])
        in_y = (
            low or any(in_corner(inst, cell, j) for j in jset)
        ) and not any(in_corner(inst, cell, i) for i in iset)
        if not in_y:
            out.add(cell)
    return out


def fillin_expected(inst, member_ids):
    t = len(member_ids)
    u = sorted(inst.u_set)
    out = set()
    for s in sorted(inst.s_set):
        for ucell in itertools.product(u, repeat=t):
            in_q0 = all(v in inst.ac for v in ucell)
            in_qi = any(
                s in inst.family[mid] and in_corner(inst, ucell, idx)
                for idx, mid in enumerate(member_ids, start=1)
            )
            if not (in_q0 or in_qi):
                out.add((s,) + ucell)
    return out


def manychoices_expected(inst, l, jset):
    u = sorted(inst.u_set)
    out = set()
    for s in sorted(inst.s_set):
        for ucell in itertools.product(u, repeat=l):
            if not any(in_corner(inst, ucell, j) for j in jset):
                out.add((s,) + ucell)
    return out


def main_expected(inst, n):
    u = sorted(inst.u_set)
    s = sorted(inst.s_set)
    return {
        (s1, s2) + ucell
        for s1 in s
        for s2 in s
        for ucell in itertools.product(u, repeat=n)
    }


def averaged_multiplicity(w, n, x):
    """Multiplicity of x under the explicit average over all n!
    coordinate permutations, computed as a permutation sum."""
    total = Fraction(0)
    count = 0
    for perm in itertools.permutations(range(1, n + 1)):
        total += multiplicity(w, permute_mask(x, perm))
        count += 1
    return total / count
