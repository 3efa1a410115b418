"""Finite and affine Weyl groups in normal form, with alcove geometry.

Group elements are pairs (w, mu) in W x Q acting on the Euclidean space by
u |-> w(u) + mu in the rho-shifted coordinates (so the "dot" action
w.x = w(x+rho) - rho becomes linear). The finite part w is stored as two
integer matrices: its action on fundamental-weight coordinates and on
simple-root coordinates. Composition is (g*h)(u) = g(h(u)), giving the
semidirect-product law (w1, m1)(w2, m2) = (w1 w2, m1 + w1(m2)).

Lengths are computed by the hyperplane-separation count between the
fundamental alcove and its image, entirely in integer arithmetic: the
fundamental alcove (for the dot action) is the one bounded by the walls
(u, alpha_i^vee) = 0 and (u, alpha_0^vee) = -1, with interior point
-rho/h.

Level-l data never enters the group structure: scaling s_{alpha,n} to
s_{alpha,nl} is the isomorphism applied pointwise in ``dot_action``, so a
GroupSlice is reusable for every l.
"""

from __future__ import annotations

import struct
from fractions import Fraction

from . import binio
from .errors import (
    CacheFormatError,
    InvalidSystemError,
    ResourceCapError,
    SliceCoverageError,
)
from .rootsys import RootSystemData, build_root_system

IntMatrix = tuple[tuple[int, ...], ...]


def _identity_matrix(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _matvec(m: IntMatrix, v) -> tuple[int, ...]:
    return tuple(sum(row[k] * v[k] for k in range(len(v))) for row in m)


def _matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    n = len(a)
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(arow[k] * bcol[k] for k in range(n)) for bcol in bt) for arow in a
    )


def _mat_inverse_int(m: IntMatrix) -> IntMatrix:
    n = len(m)
    aug = [
        [Fraction(m[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
        for i in range(n)
    ]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    out = []
    for row in aug:
        vals = row[n:]
        assert all(x.denominator == 1 for x in vals), "matrix is not invertible over Z"
        out.append(tuple(int(x) for x in vals))
    return tuple(out)


class AffineElement:
    """Normal form (finite part, root-lattice translation) with cached length."""

    __slots__ = ("wmat", "rmat", "mu", "length")

    def __init__(self, wmat: IntMatrix, rmat: IntMatrix, mu: tuple[int, ...], length: int):
        self.wmat = wmat
        self.rmat = rmat
        self.mu = mu
        self.length = length

    def key(self):
        """Canonical sort/identity key: the normal form itself."""
        return (self.wmat, self.mu)

    def __eq__(self, other):
        return isinstance(other, AffineElement) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"AffineElement(mu={self.mu}, len={self.length})"


def element_length(rs: RootSystemData, wmat: IntMatrix, mu) -> int:
    """Separating-hyperplane count between the fundamental alcove and its image."""
    h = rs.coxeter_number
    wrho = tuple(sum(row) for row in wmat)  # w(rho): rho is the all-ones vector
    total = 0
    for a in range(rs.num_positive):
        avee_r = rs.avee_rt[a]
        avee_w = rs.avee_wt[a]
        num = h * sum(avee_r[j] * mu[j] for j in range(rs.rank)) - sum(
            avee_w[k] * wrho[k] for k in range(rs.rank)
        )
        # the image of the interior point -rho/h never sits on a wall
        assert num % h != 0, "interior point landed on a hyperplane"
        total += abs(num // h + 1)
    return total


def make_element(rs: RootSystemData, wmat: IntMatrix, rmat: IntMatrix, mu) -> AffineElement:
    mu = tuple(mu)
    return AffineElement(wmat, rmat, mu, element_length(rs, wmat, mu))


def identity(rs: RootSystemData) -> AffineElement:
    eye = _identity_matrix(rs.rank)
    return AffineElement(eye, eye, (0,) * rs.rank, 0)


def reflection(rs: RootSystemData, rt, n: int = 0) -> AffineElement:
    """The affine reflection in the hyperplane (u, alpha^vee) = n."""
    idx, sign = rs.root_index(rt)
    root_rt = rs.positive_roots[idx]
    root_wt = rs.pos_roots_wt[idx]
    avee_w = rs.avee_wt[idx]
    avee_r = rs.avee_rt[idx]
    r = rs.rank
    wmat = tuple(
        tuple(int(j == k) - root_wt[j] * avee_w[k] for k in range(r)) for j in range(r)
    )
    rmat = tuple(
        tuple(int(j == k) - root_rt[j] * avee_r[k] for k in range(r)) for j in range(r)
    )
    mu = tuple(n * sign * c for c in root_rt)
    return make_element(rs, wmat, rmat, mu)


def generators(rs: RootSystemData, affine: bool = True) -> list[AffineElement]:
    """Simple reflections, plus s_{alpha_0,-1} when affine."""
    simple = [
        tuple(int(i == j) for j in range(rs.rank)) for i in range(rs.rank)
    ]
    gens = [reflection(rs, rt, 0) for rt in simple]
    if affine:
        gens.append(reflection(rs, rs.max_short_root, -1))
    return gens


def multiply(rs: RootSystemData, g: AffineElement, h: AffineElement) -> AffineElement:
    mu = tuple(a + b for a, b in zip(g.mu, _matvec(g.rmat, h.mu)))
    return make_element(rs, _matmul(g.wmat, h.wmat), _matmul(g.rmat, h.rmat), mu)


def inverse(rs: RootSystemData, g: AffineElement) -> AffineElement:
    winv = _mat_inverse_int(g.wmat)
    rinv = _mat_inverse_int(g.rmat)
    mu = tuple(-x for x in _matvec(rinv, g.mu))
    return make_element(rs, winv, rinv, mu)


def dot_action(rs: RootSystemData, g: AffineElement, x, l: int = 1) -> tuple[int, ...]:
    """g . x at level l: scale s_{alpha,n} to s_{alpha,nl}, then w(x+rho)-rho."""
    if l < 1:
        raise InvalidSystemError("level l must be a positive integer")
    shifted = tuple(xi + 1 for xi in x)
    img = _matvec(g.wmat, shifted)
    mu_wt = rs.rt_to_wt(g.mu)
    return tuple(img[i] + l * mu_wt[i] - 1 for i in range(rs.rank))


def is_dominant_element(rs: RootSystemData, g: AffineElement) -> bool:
    """Whether g . C^- + rho lies in the dominant cone (independent of level)."""
    h = rs.coxeter_number
    wrho = tuple(sum(row) for row in g.wmat)
    mu_wt = rs.rt_to_wt(g.mu)
    for i in range(rs.rank):
        val = h * mu_wt[i] - wrho[i]
        assert val != 0, "alcove interior point on a chamber wall"
        if val < 0:
            return False
    return True


def longest_finite_element(rs: RootSystemData) -> AffineElement:
    """w_0, built by sorting rho into the antidominant chamber."""
    gens = generators(rs, affine=False)
    v = list(rs.rho)
    out = identity(rs)
    while True:
        for i in range(rs.rank):
            if v[i] > 0:
                v = list(_matvec(gens[i].wmat, v))
                out = multiply(rs, out, gens[i])
                break
        else:
            return out


# -- bounded-length enumeration ---------------------------------------------


class GroupSlice:
    """All elements of length <= cutoff, indexed deterministically.

    Index order is by length shell, then by the lexicographic normal form
    (finite-part matrix, translation); index 0 is the identity. The
    right-multiplication table maps (element, generator) -> index, with -1
    for products that leave the slice.
    """

    def __init__(self, rs: RootSystemData, cutoff: int, affine: bool,
                 elements: list[AffineElement]):
        self.rs = rs
        self.cutoff = cutoff
        self.affine = affine
        self.gens = generators(rs, affine)
        self.elements = elements
        self.index = {g.key(): i for i, g in enumerate(elements)}
        self.length = [g.length for g in elements]
        self.right = [
            [self.index.get(multiply(rs, g, s).key(), -1) for s in self.gens]
            for g in elements
        ]
        self.dominant = [is_dominant_element(rs, g) for g in elements]
        self._bruhat: dict[tuple[int, int], bool] = {}

    def __len__(self):
        return len(self.elements)

    def element_index(self, g: AffineElement) -> int:
        try:
            return self.index[g.key()]
        except KeyError:
            raise SliceCoverageError(
                f"element of length {g.length} outside slice; "
                f"enlarge cutoff to at least {g.length}"
            )

    def shell(self, n: int) -> list[int]:
        return [i for i, ln in enumerate(self.length) if ln == n]

    def right_descents(self, i: int) -> list[int]:
        out = []
        for t, j in enumerate(self.right[i]):
            if j != -1 and self.length[j] < self.length[i]:
                out.append(t)
        return out

    def bruhat_leq(self, i: int, j: int) -> bool:
        """Bruhat-Chevalley order, by descent recursion over the slice."""
        if i == j:
            return True
        if self.length[i] >= self.length[j]:
            return False
        key = (i, j)
        cached = self._bruhat.get(key)
        if cached is not None:
            return cached
        s = self.right_descents(j)[0]
        js = self.right[j][s]
        is_ = self.right[i][s]
        assert is_ != -1, "descent step left the slice"
        if self.length[is_] < self.length[i]:
            res = self.bruhat_leq(is_, js)
        else:
            res = self.bruhat_leq(i, js)
        self._bruhat[key] = res
        return res

    def reduced_word(self, i: int) -> list[int]:
        word = []
        while self.length[i] > 0:
            s = self.right_descents(i)[0]
            word.append(s)
            i = self.right[i][s]
        word.reverse()
        return word

    def dominant_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.dominant) if f]


def enumerate_slice(rs: RootSystemData, cutoff: int, affine: bool = True,
                    max_elements: int | None = None) -> GroupSlice:
    """Breadth-first enumeration up to the length cutoff.

    Raises ResourceCapError (never truncates silently) if the configured
    element cap is exceeded.
    """
    if cutoff < 0:
        raise InvalidSystemError("length cutoff must be nonnegative")
    gens = generators(rs, affine)
    ident = identity(rs)
    elements = [ident]
    shell = [ident]
    seen = {ident.key()}
    for level in range(1, cutoff + 1):
        grown = {}
        for g in shell:
            for s in gens:
                p = multiply(rs, g, s)
                if p.length == level and p.key() not in seen:
                    grown.setdefault(p.key(), p)
        shell = [grown[k] for k in sorted(grown)]
        for g in shell:
            seen.add(g.key())
        elements.extend(shell)
        if max_elements is not None and len(elements) > max_elements:
            raise ResourceCapError(
                f"slice exceeded the configured cap of {max_elements} elements "
                f"at length {level}"
            )
        if not shell:
            break  # finite group exhausted
    return GroupSlice(rs, cutoff, affine, elements)


# -- point stabilizers --------------------------------------------------------


def _reflection_subgroup_order(rs: RootSystemData, psi_indices: list[int]) -> int:
    """Order of the reflection group generated by a self-closed set of roots."""
    if not psi_indices:
        return 1
    psi_rts = [rs.positive_roots[a] for a in psi_indices]
    psi_set = set(psi_rts)

    def reflect(gamma, beta_idx):
        beta = rs.positive_roots[beta_idx]
        pair = sum(rs.avee_rt[beta_idx][j] * gamma[j] for j in range(rs.rank))
        return tuple(g - pair * b for g, b in zip(gamma, beta))

    # simple system: beta whose reflection permutes the other positives
    simples = []
    for a in psi_indices:
        beta = rs.positive_roots[a]
        ok = True
        for gamma in psi_rts:
            if gamma == beta:
                continue
            img = reflect(gamma, a)
            if any(c < 0 for c in img):
                ok = False
                break
            assert img in psi_set, "root set not closed under its reflections"
        if ok:
            simples.append(a)

    # split into irreducible components by Cartan coupling
    k = len(simples)
    coupling = [
        [
            sum(rs.avee_rt[simples[j]][t] * rs.positive_roots[simples[i]][t]
                for t in range(rs.rank))
            for j in range(k)
        ]
        for i in range(k)
    ]
    comp_of = [-1] * k
    ncomp = 0
    for i in range(k):
        if comp_of[i] != -1:
            continue
        stack = [i]
        comp_of[i] = ncomp
        while stack:
            a = stack.pop()
            for b in range(k):
                if comp_of[b] == -1 and coupling[a][b] != 0:
                    comp_of[b] = ncomp
                    stack.append(b)
        ncomp += 1

    order = 1
    from math import factorial as _fact

    for comp in range(ncomp):
        members = [i for i in range(k) if comp_of[i] == comp]
        basis = [rs.positive_roots[simples[i]] for i in members]
        cartan_sub = [[coupling[i][j] for j in members] for i in members]
        # expand each subsystem root in the component basis; the highest one
        # (max coefficient sum) plays the role of the highest root
        best = None
        for gamma in psi_rts:
            coeffs = _expand_exact(basis, gamma)
            if coeffs is None:
                continue
            if any(c < 0 for c in coeffs):
                continue
            if best is None or sum(coeffs) > sum(best):
                best = coeffs
        assert best is not None
        from .rootsys import _int_det  # fraction-free determinant

        det = _int_det(cartan_sub)
        prod = 1
        for c in best:
            assert c.denominator == 1
            prod *= int(c)
        order *= det * _fact(len(members)) * prod
    return order


def _expand_exact(basis, target):
    """Exact rational coefficients of target in the given root-vector basis."""
    n = len(target)
    k = len(basis)
    aug = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    piv_rows = []
    row = 0
    for col in range(k):
        piv = next((r for r in range(row, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for r in range(n):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        piv_rows.append(row)
        row += 1
    for r in range(row, n):
        if aug[r][k] != 0:
            return None  # inconsistent: target outside the span
    return [aug[piv_rows[c]][k] for c in range(k)]


def stabilizer_order(rs: RootSystemData, x, l: int = 1) -> int:
    """Order of the dot-action point stabilizer of x in the level-l group.

    x may have Fraction or integer coordinates (fundamental basis). The
    stabilizer is the reflection group generated by the affine reflections
    through x, read off from the pairings (x+rho, alpha^vee) mod l.
    """
    if l < 1:
        raise InvalidSystemError("level l must be a positive integer")
    v = tuple(Fraction(c) + 1 for c in x)
    psi = []
    for a in range(rs.num_positive):
        val = sum(Fraction(rs.avee_wt[a][kk]) * v[kk] for kk in range(rs.rank))
        if val.denominator == 1 and int(val) % l == 0:
            psi.append(a)
    return _reflection_subgroup_order(rs, psi)


def facet_generators(rs: RootSystemData, lam_minus, l: int) -> list[int]:
    """Indices of the fundamental-alcove generators fixing lam_minus (dot, level l)."""
    v = tuple(c + 1 for c in lam_minus)
    out = [i for i in range(rs.rank) if v[i] == 0]
    a0 = rs._max_short_index
    if sum(rs.avee_wt[a0][k] * v[k] for k in range(rs.rank)) == -l:
        out.append(rs.rank)
    return out


def in_closure_fundamental(rs: RootSystemData, lam, l: int) -> bool:
    """Whether lam lies in the closure of the fundamental (antidominant) alcove."""
    v = tuple(c + 1 for c in lam)
    if any(c > 0 for c in v):
        return False
    a0 = rs._max_short_index
    return sum(rs.avee_wt[a0][k] * v[k] for k in range(rs.rank)) >= -l


def is_interior_fundamental(rs: RootSystemData, lam, l: int) -> bool:
    v = tuple(c + 1 for c in lam)
    if any(c >= 0 for c in v):
        return False
    a0 = rs._max_short_index
    return sum(rs.avee_wt[a0][k] * v[k] for k in range(rs.rank)) > -l


def factorize_weight(rs: RootSystemData, lam, l: int):
    """Unique (g, lam_minus) with g ._l lam_minus = lam, lam_minus in the
    closed fundamental alcove, and g of maximal length in g * Stab(lam_minus).

    The maximal-length convention makes g the dominant-coset representative
    whenever lam is dominant, so factorization is compatible with indexing
    regular dominant weights by dominant group elements.
    """
    if l < 1:
        raise InvalidSystemError("level l must be a positive integer")
    gens = generators(rs, affine=True)
    a0 = rs._max_short_index
    v = [c + 1 for c in lam]
    g = identity(rs)
    guard = 0
    while True:
        guard += 1
        assert guard < 100000, "alcove reduction failed to terminate"
        for i in range(rs.rank):
            if v[i] > 0:
                v = list(_matvec(gens[i].wmat, v))
                g = multiply(rs, g, gens[i])
                break
        else:
            pair0 = sum(rs.avee_wt[a0][k] * v[k] for k in range(rs.rank))
            if pair0 < -l:
                # apply the level-scaled affine generator s_{alpha_0,-l}
                shift = pair0 + l
                root_wt = rs.pos_roots_wt[a0]
                v = [v[k] - shift * root_wt[k] for k in range(rs.rank)]
                g = multiply(rs, g, gens[rs.rank])
            else:
                break
    lam_minus = tuple(c - 1 for c in v)

    fixing = facet_generators(rs, lam_minus, l)
    if fixing:
        sub = [gens[t] for t in fixing]
        # minimal coset representative, then append the longest parabolic element
        changed = True
        while changed:
            changed = False
            for s in sub:
                cand = multiply(rs, g, s)
                if cand.length < g.length:
                    g = cand
                    changed = True
        w_long = identity(rs)
        changed = True
        while changed:
            changed = False
            for s in sub:
                cand = multiply(rs, w_long, s)
                if cand.length > w_long.length:
                    w_long = cand
                    changed = True
        g = multiply(rs, g, w_long)
    return g, lam_minus


# -- slice persistence --------------------------------------------------------

_SLICE_MAGIC = b"KLXSLICE"
_SLICE_VERSION = 1


def save_slice(sl: GroupSlice, path) -> None:
    rs = sl.rs
    wmats = []
    windex = {}
    for g in sl.elements:
        if g.wmat not in windex:
            windex[g.wmat] = len(wmats)
            wmats.append(g.wmat)
    parts = [
        struct.pack(
            ">cHBIII",
            rs.type_label.encode(),
            rs.rank,
            1 if sl.affine else 0,
            sl.cutoff,
            len(wmats),
            len(sl.elements),
        )
    ]
    for m in wmats:
        for row in m:
            parts.append(struct.pack(f">{rs.rank}i", *row))
    for g in sl.elements:
        parts.append(struct.pack(">I", windex[g.wmat]))
        parts.append(struct.pack(f">{rs.rank}i", *g.mu))
        parts.append(struct.pack(">I", g.length))
    binio.write_frame(path, _SLICE_MAGIC, _SLICE_VERSION, b"".join(parts))


def load_slice(path) -> GroupSlice:
    buf = binio.read_frame(path, _SLICE_MAGIC, _SLICE_VERSION)
    off = 0
    lab, rank, aff, cutoff, n_w, n_el = struct.unpack_from(">cHBIII", buf, off)
    off += struct.calcsize(">cHBIII")
    rs = build_root_system(lab.decode(), rank)
    wmats = []
    for _ in range(n_w):
        rows = []
        for _ in range(rank):
            rows.append(struct.unpack_from(f">{rank}i", buf, off))
            off += 4 * rank
        wmats.append(tuple(rows))
    # root-coordinate matrices are recomputed exactly: R = B^-1 W B with
    # B = cartan^T the basis change from root to weight coordinates
    b_mat = tuple(tuple(rs.cartan[i][j] for i in range(rank)) for j in range(rank))
    rmats = []
    binv = [[Fraction(x) for x in row] for row in _fraction_inv_rows(b_mat)]
    for m in wmats:
        prod = _fraction_matmul(binv, _fraction_matmul(m, b_mat))
        rmats.append(
            tuple(tuple(_as_int(x) for x in row) for row in prod)
        )
    elements = []
    for _ in range(n_el):
        (wi,) = struct.unpack_from(">I", buf, off)
        off += 4
        mu = struct.unpack_from(f">{rank}i", buf, off)
        off += 4 * rank
        (ln,) = struct.unpack_from(">I", buf, off)
        off += 4
        g = AffineElement(wmats[wi], rmats[wi], tuple(mu), ln)
        if element_length(rs, g.wmat, g.mu) != ln:
            raise CacheFormatError(f"{path}: stored length disagrees with geometry")
        elements.append(g)
    return GroupSlice(rs, cutoff, bool(aff), elements)


def _fraction_inv_rows(m):
    n = len(m)
    return _fraction_inverse_list([[Fraction(m[i][j]) for j in range(n)] for i in range(n)])


def _fraction_inverse_list(m):
    n = len(m)
    aug = [list(m[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _fraction_matmul(a, b):
    n = len(a)
    cols = len(b[0])
    inner = len(b)
    return [
        [sum(Fraction(a[i][k]) * b[k][j] for k in range(inner)) for j in range(cols)]
        for i in range(n)
    ]


def _as_int(x):
    f = Fraction(x)
    assert f.denominator == 1
    return int(f)


def slice_to_json(sl: GroupSlice) -> dict:
    """Debug-friendly JSON export of a slice."""
    return {
        "type": sl.rs.type_label,
        "rank": sl.rs.rank,
        "affine": sl.affine,
        "cutoff": sl.cutoff,
        "element_count": len(sl.elements),
        "elements": [
            {
                "index": i,
                "wmat": [list(r) for r in g.wmat],
                "mu": list(g.mu),
                "length": g.length,
                "dominant": sl.dominant[i],
            }
            for i, g in enumerate(sl.elements)
        ],
    }
