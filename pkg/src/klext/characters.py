"""Weyl characters, signed KL character combinations, decomposition matrices,
and complex tensor-product decomposition.

Characters are stored on dominant orbit representatives only (the full
W-symmetric expansion is materialized lazily); multiplicities are plain
integers, negative values allowed for virtual characters.

Dominant multiplicities are computed by the Freudenthal recursion, which
at the level of the formula

    ((lam+rho,lam+rho) - (mu+rho,mu+rho)) m_mu = 2 sum_{a>0} sum_{k>=1} m_{mu+ka} (mu+ka, a)

is all-integer: the left factor equals (lam+mu+2rho, lam-mu) with lam-mu
in the root lattice, and (wt, root) pairings are integral. The classical
alternating-sum definition (Weyl's quotient) is kept as an independent
verification oracle: cross-multiplied, chi(lam) * A(rho) = A(lam+rho),
plus the per-weight alternating Kostant count.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _iproduct

from .errors import InvalidSystemError, InvariantViolation, SliceCoverageError
from .klpoly import KLTable
from .rootsys import (
    RootSystemData,
    Weight,
    classify_weight,
    dominance_leq,
    is_dominant,
    kostant_partition,
)
from .weylaffine import (
    dot_action,
    factorize_weight,
    generators,
    _matvec,
)


@dataclass
class Character:
    """W-invariant (virtual) character, stored on dominant representatives."""

    rs: RootSystemData
    dom: dict[Weight, int]
    w_invariant: bool = True

    def dimension(self) -> int:
        return sum(m * len(weyl_orbit(self.rs, wt)) for wt, m in self.dom.items())

    def multiplicity(self, wt) -> int:
        return self.dom.get(dominant_representative(self.rs, tuple(wt)), 0)


# -- orbits -------------------------------------------------------------------


_domrep_cache: dict[RootSystemData, dict[Weight, Weight]] = {}


def dominant_representative(rs: RootSystemData, wt: Weight) -> Weight:
    """The dominant weight in the W-orbit, by sorting with simple reflections."""
    cache = _domrep_cache.setdefault(rs, {})
    got = cache.get(wt)
    if got is not None:
        return got
    v = list(wt)
    while True:
        for i in range(rs.rank):
            if v[i] < 0:
                coeff = v[i]
                for j in range(rs.rank):
                    v[j] -= coeff * rs.cartan[i][j]
                break
        else:
            out = tuple(v)
            cache[wt] = out
            return out


def weyl_orbit(rs: RootSystemData, wt: Weight) -> frozenset:
    cache = _orbit_cache.setdefault(rs, {})
    wt = dominant_representative(rs, tuple(wt))
    got = cache.get(wt)
    if got is not None:
        return got
    seen = {wt}
    stack = [wt]
    while stack:
        v = stack.pop()
        for i in range(rs.rank):
            if v[i] != 0:
                img = tuple(
                    v[j] - v[i] * rs.cartan[i][j] for j in range(rs.rank)
                )
                if img not in seen:
                    seen.add(img)
                    stack.append(img)
    out = frozenset(seen)
    cache[wt] = out
    return out


_orbit_cache: dict[RootSystemData, dict] = {}


def full_expansion(char: Character) -> dict[Weight, int]:
    out: dict[Weight, int] = {}
    for wt, m in char.dom.items():
        for v in weyl_orbit(char.rs, wt):
            out[v] = out.get(v, 0) + m
    return out


_full_cache: dict[tuple, dict] = {}


def full_simple_expansion(rs: RootSystemData, lam: Weight) -> dict[Weight, int]:
    """Cached full weight expansion of the irreducible with highest weight lam."""
    key = (rs.type_label, rs.rank, tuple(lam))
    got = _full_cache.get(key)
    if got is None:
        got = full_expansion(weyl_character(rs, lam))
        _full_cache[key] = got
    return got


# -- dominant weights below a bound ---------------------------------------------


def dominant_weights_below(rs: RootSystemData, bound: Weight) -> list[Weight]:
    """All dominant mu <= bound (integral dominance order)."""
    if not is_dominant(bound):
        raise InvalidSystemError("bound weight must be dominant")
    caps = []
    for c in rs.wt_to_rt(bound):
        if c < 0:
            return []
        caps.append(int(c))  # Fraction floor toward zero is fine: c >= 0
    out = []
    for beta in _iproduct(*(range(cap + 1) for cap in caps)):
        wt = tuple(b - r for b, r in zip(bound, rs.rt_to_wt(beta)))
        if is_dominant(wt):
            out.append(wt)
    out.sort()
    return out


# -- Weyl characters -------------------------------------------------------------


def _pair_wt_rt(rs: RootSystemData, wt, rt) -> int:
    """Integral bilinear form value (wt, sum_j rt_j alpha_j)."""
    return sum(rt[j] * rs.symmetrizers[j] * wt[j] for j in range(rs.rank))


_char_cache: dict[tuple, Character] = {}


def weyl_character(rs: RootSystemData, lam: Weight) -> Character:
    """Character of the complex irreducible with highest weight lam."""
    lam = tuple(lam)
    if not is_dominant(lam):
        raise InvalidSystemError(f"highest weight must be dominant, got {lam}")
    key = (rs.type_label, rs.rank, lam)
    got = _char_cache.get(key)
    if got is not None:
        return got

    candidates = dominant_weights_below(rs, lam)
    # order by distance below lam (height of lam - mu, rational but orderable)
    def depth(mu):
        return sum(rs.wt_to_rt(tuple(a - b for a, b in zip(lam, mu))))

    candidates.sort(key=lambda mu: (depth(mu), mu))
    mults: dict[Weight, int] = {lam: 1}
    # (mu + k*alpha, alpha) walks an arithmetic progression with step (alpha, alpha)
    root_steps = [
        (rs.pos_roots_wt[a], rs.positive_roots[a], 2 * rs._half_norms[a])
        for a in range(rs.num_positive)
    ]
    domrep = dominant_representative
    for mu in candidates:
        if mu == lam:
            continue
        diff_rt = rs.wt_to_rt(tuple(a - b for a, b in zip(lam, mu)))
        diff_rt = tuple(int(c) for c in diff_rt)
        denom = _pair_wt_rt(rs, tuple(a + b + 2 for a, b in zip(lam, mu)), diff_rt)
        acc = 0
        for root_wt, root_rt, step in root_steps:
            val = _pair_wt_rt(rs, mu, root_rt)
            cur = mu
            while True:
                cur = tuple(c + r for c, r in zip(cur, root_wt))
                val += step
                m = mults.get(cur, 0)
                if m == 0 and any(c < 0 for c in cur):
                    m = mults.get(domrep(rs, cur), 0)
                if m == 0:
                    break
                acc += m * val
        num = 2 * acc
        assert num % denom == 0, "Freudenthal division is not exact"
        m_mu = num // denom
        assert m_mu > 0, "dominant weight below lam with zero multiplicity"
        mults[mu] = m_mu
    char = Character(rs, mults)
    _char_cache[key] = char
    return char


def weyl_dimension(rs: RootSystemData, lam: Weight) -> int:
    """dim of the irreducible with highest weight lam (Weyl's product formula)."""
    num = Fraction(1)
    lam_rho = tuple(x + 1 for x in lam)
    for a in range(rs.num_positive):
        rt = rs.positive_roots[a]
        num *= Fraction(_pair_wt_rt(rs, lam_rho, rt), _pair_wt_rt(rs, rs.rho, rt))
    assert num.denominator == 1
    return int(num)


# -- alternating-sum oracle -------------------------------------------------------


def weyl_group_elements(rs: RootSystemData):
    """All of W as weight-coordinate matrices with lengths (small rank only)."""
    cache = _weyl_cache.get(rs)
    if cache is not None:
        return cache
    gens = [g.wmat for g in generators(rs, affine=False)]
    eye = tuple(tuple(int(i == j) for j in range(rs.rank)) for i in range(rs.rank))
    seen = {eye: 0}
    shell = [eye]
    ln = 0
    while shell:
        ln += 1
        nxt = []
        for m in shell:
            for g in gens:
                prod = tuple(
                    tuple(sum(m[i][k] * g[k][j] for k in range(rs.rank)) for j in range(rs.rank))
                    for i in range(rs.rank)
                )
                if prod not in seen:
                    seen[prod] = ln
                    nxt.append(prod)
        shell = nxt
    out = sorted(seen.items(), key=lambda kv: (kv[1], kv[0]))
    _weyl_cache[rs] = out
    return out


_weyl_cache: dict[RootSystemData, list] = {}


def kostant_multiplicity(rs: RootSystemData, lam: Weight, mu: Weight) -> int:
    """Alternating-sum weight multiplicity: sum_w (-1)^l(w) P(w(lam+rho)-(mu+rho))."""
    total = 0
    lam_rho = tuple(x + 1 for x in lam)
    mu_rho = tuple(x + 1 for x in mu)
    for wmat, ln in weyl_group_elements(rs):
        arg = tuple(a - b for a, b in zip(_matvec(wmat, lam_rho), mu_rho))
        coords = rs.wt_to_rt(arg)
        if any(c.denominator != 1 or c < 0 for c in coords):
            continue
        val = kostant_partition(rs, tuple(int(c) for c in coords))
        total += val if ln % 2 == 0 else -val
    return total


def skew_orbit_sum(rs: RootSystemData, wt: Weight) -> dict[Weight, int]:
    """The signed orbit sum A(wt) = sum_w (-1)^l(w) e(w(wt))."""
    out: dict[Weight, int] = {}
    for wmat, ln in weyl_group_elements(rs):
        img = _matvec(wmat, wt)
        out[img] = out.get(img, 0) + (1 if ln % 2 == 0 else -1)
    return {k: v for k, v in out.items() if v}


def convolve(a: dict[Weight, int], b: dict[Weight, int]) -> dict[Weight, int]:
    out: dict[Weight, int] = {}
    for u, mu_ in a.items():
        for v, mv in b.items():
            key = tuple(x + y for x, y in zip(u, v))
            s = out.get(key, 0) + mu_ * mv
            if s:
                out[key] = s
            elif key in out:
                del out[key]
    return out


def alternating_sum_check(rs: RootSystemData, lam: Weight) -> bool:
    """chi(lam) * A(rho) == A(lam+rho), elementwise in the group algebra."""
    char = full_expansion(weyl_character(rs, lam))
    lhs = convolve(char, skew_orbit_sum(rs, rs.rho))
    rhs = skew_orbit_sum(rs, tuple(x + 1 for x in lam))
    return lhs == rhs


# -- signed KL character combinations ----------------------------------------------


@dataclass
class KLCharacter:
    """chi-combination sum_y (-1)^(l(w)-l(y)) P_{y,w}(1) chi(y . lam_minus)."""

    rs: RootSystemData
    l: int
    lam: Weight
    lam_minus: Weight
    w_index: int
    terms: list[tuple[Weight, int]]  # (dominant weight, signed coefficient)

    def expand(self) -> Character:
        dom: dict[Weight, int] = {}
        for wt, coeff in self.terms:
            for v, m in weyl_character(self.rs, wt).dom.items():
                s = dom.get(v, 0) + coeff * m
                if s:
                    dom[v] = s
                elif v in dom:
                    del dom[v]
        return Character(self.rs, dom)


def chi_kl(rs: RootSystemData, lam: Weight, l: int, table: KLTable) -> KLCharacter:
    """Signed Weyl-character combination attached to a regular dominant weight."""
    lam = tuple(lam)
    if not is_dominant(lam):
        raise InvalidSystemError("chi_kl requires a dominant weight")
    if not classify_weight(rs, lam, l)["regular_l"]:
        raise InvalidSystemError(
            f"{lam} is l-singular at l={l}; singular data is reached via "
            "translation (see extbounds.singular_ext1_report)"
        )
    g, lam_minus = factorize_weight(rs, lam, l)
    sl = table.slice
    w = sl.element_index(g)
    if sl.length[w] > table.filled:
        raise SliceCoverageError(
            f"KL table filled to length {table.filled}, element has length "
            f"{sl.length[w]}; enlarge cutoff/fill"
        )
    lw = sl.length[w]
    terms = []
    for y, pol in sorted(table.rows_for(w).items()):
        if not sl.dominant[y]:
            continue
        sign = 1 if (lw - sl.length[y]) % 2 == 0 else -1
        wt = dot_action(rs, sl.elements[y], lam_minus, l)
        assert is_dominant(wt)
        terms.append((wt, sign * pol.eval_one()))
    terms.sort()
    return KLCharacter(rs, l, lam, lam_minus, w, terms)


# -- decomposition matrices ----------------------------------------------------------


@dataclass
class DecompositionMatrix:
    """Signed-KL change of basis on one linkage block and its exact inverse.

    ``weights`` is ordered by element length then normal form. Column j of
    A expands the simple of highest weight weights[j] in Weyl characters:
    A[i][j] = (-1)^(l_j - l_i) P_{i,j}(1). D = A^(-1) is integral,
    unitriangular and entrywise nonnegative; [Delta(nu) : L(mu)] is
    D[row index of mu][column index of nu].
    """

    rs: RootSystemData
    l: int
    lam_minus: Weight
    weights: list[Weight]
    element_indices: list[int]
    a_matrix: tuple[tuple[int, ...], ...]
    d_matrix: tuple[tuple[int, ...], ...]

    def index_of(self, wt) -> int:
        return self.weights.index(tuple(wt))

    def decomposition_number(self, nu, mu) -> int:
        """[Delta(nu) : L(mu)] for block members nu, mu."""
        return self.d_matrix[self.index_of(mu)][self.index_of(nu)]

    def standard_length(self, nu) -> int:
        """Number of simple composition factors of Delta(nu), with multiplicity."""
        j = self.index_of(nu)
        return sum(row[j] for row in self.d_matrix)

    def simple_character(self, mu) -> Character:
        """ch L(mu) expanded from column index_of(mu) of A."""
        j = self.index_of(mu)
        dom: dict[Weight, int] = {}
        for i, wt in enumerate(self.weights):
            coeff = self.a_matrix[i][j]
            if coeff == 0:
                continue
            for v, m in weyl_character(self.rs, wt).dom.items():
                s = dom.get(v, 0) + coeff * m
                if s:
                    dom[v] = s
                elif v in dom:
                    del dom[v]
        return Character(self.rs, dom)


def linkage_block(rs: RootSystemData, seed: Weight, l: int, bound: Weight,
                  table: KLTable):
    """Dominant weights linked to seed inside the ideal {nu <= bound}, with
    their group elements, ordered by (length, normal form)."""
    _, lam_minus = factorize_weight(rs, seed, l)
    sl = table.slice
    members = []
    for mu in dominant_weights_below(rs, bound):
        g, lm = factorize_weight(rs, mu, l)
        if lm != lam_minus:
            continue
        idx = sl.element_index(g)
        if sl.length[idx] > table.filled:
            raise SliceCoverageError(
                f"block member {mu} needs table filled to length {sl.length[idx]}"
            )
        members.append((sl.length[idx], sl.elements[idx].key(), mu, idx))
    members.sort()
    return lam_minus, [(mu, idx) for _, _, mu, idx in members]


def decomposition_matrix(rs: RootSystemData, seed: Weight, l: int,
                         bound: Weight | None = None,
                         table: KLTable | None = None) -> DecompositionMatrix:
    """Exact unitriangular inversion of the signed P(1) matrix on a block."""
    seed = tuple(seed)
    if bound is None:
        bound = seed
    bound = tuple(bound)
    if not dominance_leq(rs, seed, bound):
        raise InvalidSystemError("bound must dominate the seed weight (ideal cutoff)")
    if not classify_weight(rs, seed, l)["regular_l"]:
        raise InvalidSystemError(f"decomposition matrix needs a regular seed, got {seed}")
    lam_minus, members = linkage_block(rs, seed, l, bound, table)
    sl = table.slice
    n = len(members)
    weights = [mu for mu, _ in members]
    indices = [idx for _, idx in members]
    a = [[0] * n for _ in range(n)]
    for j in range(n):
        row_j = table.rows_for(indices[j])
        lj = sl.length[indices[j]]
        for i in range(n):
            pol = row_j.get(indices[i])
            if pol is None:
                continue
            sign = 1 if (lj - sl.length[indices[i]]) % 2 == 0 else -1
            a[i][j] = sign * pol.eval_one()
    # back-substitution inverse of a unitriangular integer matrix
    d = [[int(i == j) for j in range(n)] for i in range(n)]
    for j in range(n):
        for i in range(j - 1, -1, -1):
            s = sum(a[i][k] * d[k][j] for k in range(i + 1, j + 1))
            d[i][j] = -s
    # exactness and positivity are hard guarantees; fail loudly
    for i in range(n):
        for j in range(n):
            chk = sum(a[i][k] * d[k][j] for k in range(n))
            if chk != int(i == j):
                raise InvariantViolation("A*D != I in decomposition matrix")
            if d[i][j] < 0:
                raise InvariantViolation(
                    f"negative decomposition number D[{i}][{j}] = {d[i][j]}"
                )
    return DecompositionMatrix(
        rs, l, lam_minus, weights, indices,
        tuple(tuple(r) for r in a), tuple(tuple(r) for r in d),
    )


def resubstitution_check(dm: DecompositionMatrix) -> bool:
    """chi(nu) == sum_mu [Delta(nu):L(mu)] ch L(mu), fully expanded."""
    for j, nu in enumerate(dm.weights):
        acc: dict[Weight, int] = {}
        for i, mu in enumerate(dm.weights):
            coeff = dm.d_matrix[i][j]
            if coeff == 0:
                continue
            for v, m in dm.simple_character(mu).dom.items():
                s = acc.get(v, 0) + coeff * m
                if s:
                    acc[v] = s
                elif v in acc:
                    del acc[v]
        if acc != weyl_character(dm.rs, nu).dom:
            return False
    return True


# -- tensor products ------------------------------------------------------------------


def tensor_decompose(rs: RootSystemData, lam: Weight, nu: Weight) -> dict[Weight, int]:
    """Multiplicities of each simple in L(lam) (x) L(nu), by exact character
    multiplication and iterated extraction of maximal weights."""
    work = convolve(
        full_simple_expansion(rs, tuple(lam)),
        full_simple_expansion(rs, tuple(nu)),
    )
    # height in the root basis orders the support compatibly with dominance
    heights: dict[Weight, object] = {}

    def height(wt):
        got = heights.get(wt)
        if got is None:
            got = heights[wt] = sum(rs.wt_to_rt(wt))
        return got

    out: dict[Weight, int] = {}
    while work:
        tau = max(work, key=lambda wt: (height(wt), wt))
        m = work[tau]
        assert is_dominant(tau) and m > 0, "tensor extraction lost dominance"
        out[tau] = m
        for v, mult in full_simple_expansion(rs, tau).items():
            s = work.get(v, 0) - m * mult
            if s:
                work[v] = s
            elif v in work:
                del work[v]
    return dict(sorted(out.items()))
