"""Long-range spin-chain Hamiltonians as explicit interaction-term lists.

Builds named Hamiltonian families (power-law transverse Ising, long-range
fermionic hopping chains in their spin representation), extracts block-block
interactions, and provides the algebraic decay envelopes (g0, abar) that
every downstream truncation/filter bound is measured against.

Site indices are 1-based throughout the public API; distances are
r_ij = |i - j|.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

HERMITICITY_ATOL = 1e-12
DEFAULT_DIM_CEILING = 16384
DIM_CEILING_ENV = "AGSPLAB_DIM_CEILING"

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # (sigma_x + i sigma_y)/2


class DimensionCeilingError(ValueError):
    """Requested Hilbert-space dimension exceeds the configured desk-scale ceiling."""


def dim_ceiling() -> int:
    """Active Hilbert-space dimension ceiling (env override wins)."""
    raw = os.environ.get(DIM_CEILING_ENV)
    return int(raw) if raw else DEFAULT_DIM_CEILING


def spectral_norm(matrix: np.ndarray) -> float:
    """Operator 2-norm of a Hermitian matrix via dense eigensolve."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(matrix))))


def is_hermitian(matrix: np.ndarray, atol: float = HERMITICITY_ATOL) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T)) <= atol)


@dataclass(frozen=True)
class LatticeSpec:
    """Open 1D chain of n sites with local dimension d."""

    n: int
    d: int = 2
    boundary: str = "open"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one site, got n={self.n}")
        if self.d < 2:
            raise ValueError(f"local dimension must be >= 2, got d={self.d}")
        if self.boundary != "open":
            raise ValueError(f"only open boundaries are supported, got {self.boundary!r}")
        if self.dim > dim_ceiling():
            raise DimensionCeilingError(
                f"d^n = {self.d}**{self.n} = {self.dim} exceeds ceiling {dim_ceiling()}"
            )

    @property
    def dim(self) -> int:
        return self.d**self.n

    @property
    def sites(self) -> range:
        return range(1, self.n + 1)


@dataclass(frozen=True)
class InteractionTerm:
    """One Hermitian interaction on an explicit support set of sites."""

    support: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        if list(support) != sorted(set(support)):
            raise ValueError(f"support must be sorted and distinct, got {support}")
        object.__setattr__(self, "support", support)
        m = np.asarray(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"term matrix must be square, got shape {m.shape}")
        if not is_hermitian(m):
            raise ValueError("term matrix is not Hermitian to 1e-12")

    @property
    def diameter(self) -> int:
        return self.support[-1] - self.support[0]

    @property
    def norm(self) -> float:
        return spectral_norm(self.matrix)


@dataclass(frozen=True)
class PowerLawMetadata:
    """Parameters of a named power-law family.

    `coupling` is the per-pair envelope: every two-site term obeys
    ||h_{i,j}|| <= coupling / r_ij^alpha.  `field` bounds single-site terms.
    """

    family: str
    alpha: float
    coupling: float
    field: float


@dataclass(frozen=True)
class DecayEnvelope:
    """Uniform bound ||V_{X,Y}|| <= g0 * r^(-alpha_bar) for concatenated X, Y."""

    g0: float
    alpha_bar: float

    def __post_init__(self):
        if self.g0 < 1.0:
            raise ValueError(f"g0 must be >= 1, got {self.g0}")
        if self.alpha_bar <= 0.0:
            raise ValueError(f"alpha_bar must be positive, got {self.alpha_bar}")

    def bound(self, r: float) -> float:
        return self.g0 * float(r) ** (-self.alpha_bar)


@dataclass
class Hamiltonian:
    """Sum of local terms on a chain, with optional power-law metadata."""

    lattice: LatticeSpec
    terms: list[InteractionTerm]
    k: int = 2
    metadata: PowerLawMetadata | None = None
    _norms: dict[int, float] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = self.lattice.n
        for term in self.terms:
            if term.support[0] < 1 or term.support[-1] > n:
                raise ValueError(f"term support {term.support} outside [1, {n}]")
            if len(term.support) > self.k:
                raise ValueError(
                    f"term on {term.support} exceeds locality k={self.k}"
                )
            expected = self.lattice.d ** len(term.support)
            if term.matrix.shape[0] != expected:
                raise ValueError(
                    f"term on {term.support} has dimension {term.matrix.shape[0]}, "
                    f"expected {expected}"
                )

    def term_norm(self, idx: int) -> float:
        if idx not in self._norms:
            self._norms[idx] = self.terms[idx].norm
        return self._norms[idx]


def _embed_indexing(lattice: LatticeSpec, support: tuple[int, ...]):
    """Index arithmetic for embedding a support-local matrix into d^n.

    Returns (base, offsets): `base` enumerates all configurations of the
    complement sites (support digits frozen at zero) and `offsets[a]` is the
    index shift realizing local configuration `a` on the support.
    """
    n, d = lattice.n, lattice.d
    dim = lattice.dim
    places = np.array([d ** (n - s) for s in support], dtype=np.int64)
    idx = np.arange(dim, dtype=np.int64)
    on_support = np.zeros(dim, dtype=bool)
    for p in places:
        on_support |= (idx // p) % d != 0
    base = idx[~on_support]
    ds = d ** len(support)
    local = np.arange(ds, dtype=np.int64)
    offsets = np.zeros(ds, dtype=np.int64)
    for axis, p in enumerate(places):
        digit = (local // d ** (len(support) - 1 - axis)) % d
        offsets += digit * p
    return base, offsets


def assemble_dense(H: Hamiltonian) -> np.ndarray:
    """Dense d^n x d^n matrix of the Hamiltonian (identity-padded terms).

    Real output whenever every term matrix is real; Hermitian to 1e-12 by
    construction.
    """
    lattice = H.lattice
    dim = lattice.dim
    if dim > dim_ceiling():
        raise DimensionCeilingError(f"dimension {dim} exceeds ceiling {dim_ceiling()}")
    dtype = np.complex128 if any(np.iscomplexobj(t.matrix) for t in H.terms) else np.float64
    out = np.zeros((dim, dim), dtype=dtype)
    for term in H.terms:
        base, offsets = _embed_indexing(lattice, term.support)
        m = term.matrix
        for a in range(m.shape[0]):
            rows = base + offsets[a]
            for b in range(m.shape[1]):
                if m[a, b] != 0:
                    out[rows, base + offsets[b]] += m[a, b]
    return out


def embed_operator(lattice: LatticeSpec, support: tuple[int, ...], matrix: np.ndarray) -> np.ndarray:
    """Embed a support-local operator into the full d^n space by identity padding.

    An empty support embeds a 1x1 matrix as a multiple of the identity.
    """
    dim = lattice.dim
    if dim > dim_ceiling():
        raise DimensionCeilingError(f"dimension {dim} exceeds ceiling {dim_ceiling()}")
    matrix = np.asarray(matrix)
    dtype = np.complex128 if np.iscomplexobj(matrix) else np.float64
    out = np.zeros((dim, dim), dtype=dtype)
    base, offsets = _embed_indexing(lattice, tuple(support))
    for a in range(matrix.shape[0]):
        rows = base + offsets[a]
        for b in range(matrix.shape[1]):
            if matrix[a, b] != 0:
                out[rows, base + offsets[b]] += matrix[a, b]
    return out


def _kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def build_long_range_ising(n: int, alpha: float, J: float, B: float) -> Hamiltonian:
    """Transverse-field Ising chain with power-law XX couplings.

    H = sum_{i<j} (J / r_ij^alpha) X_i X_j + B * sum_i Z_i; zero-coefficient
    terms are omitted.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    lattice = LatticeSpec(n=n, d=2)
    xx = np.kron(SIGMA_X, SIGMA_X)
    terms = []
    if J != 0.0:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                coeff = J / float(j - i) ** alpha
                terms.append(InteractionTerm((i, j), coeff * xx))
    if B != 0.0:
        for i in range(1, n + 1):
            terms.append(InteractionTerm((i,), B * SIGMA_Z))
    meta = PowerLawMetadata("long_range_ising", alpha, abs(J), abs(B))
    return Hamiltonian(lattice, terms, k=2, metadata=meta)


def _window_annihilators(w: int) -> tuple[np.ndarray, np.ndarray]:
    """Jordan-Wigner annihilation operators at the two ends of a w-site window.

    Convention a_i -> (prod_{j<i} Z_j)(X_i + iY_i)/2; the Z strings of a pair
    term cancel outside the window, so window-local operators generate the
    full-chain pair term exactly.
    """
    eye = np.eye(2)
    a_left = _kron_all([SIGMA_PLUS] + [eye] * (w - 1))
    a_right = _kron_all([SIGMA_Z] * (w - 1) + [SIGMA_PLUS])
    return a_left, a_right


def build_long_range_fermion_chain(
    n: int,
    alpha: float,
    A_couplings,
    B_couplings,
    local_terms: list[InteractionTerm] | None = None,
) -> Hamiltonian:
    """Spin representation of the long-range fermionic hopping/pairing chain.

    H = sum_{i<j} r_ij^(-alpha) (A_ij a_i a_j^dag + B_ij a_i a_j + h.c.) + V,
    mapped through the Jordan-Wigner string; each pair term is recorded with
    its full support {i, ..., j}.  Scalars are broadcast to uniform coupling
    tables.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    lattice = LatticeSpec(n=n, d=2)
    A = np.asarray(A_couplings, dtype=float)
    Bp = np.asarray(B_couplings, dtype=float)
    if A.ndim == 0:
        A = np.full((n, n), float(A))
    if Bp.ndim == 0:
        Bp = np.full((n, n), float(Bp))
    if A.shape != (n, n) or Bp.shape != (n, n):
        raise ValueError(
            f"coupling tables must be scalars or ({n},{n}) arrays, "
            f"got {A.shape} and {Bp.shape}"
        )
    terms = list(local_terms or [])
    max_support = max((len(t.support) for t in terms), default=2)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            a, b = A[i - 1, j - 1], Bp[i - 1, j - 1]
            if a == 0.0 and b == 0.0:
                continue
            w = j - i + 1
            a_i, a_j = _window_annihilators(w)
            hop = a * (a_i @ a_j.conj().T)
            pair = b * (a_i @ a_j)
            m = (hop + pair + hop.conj().T + pair.conj().T) / float(j - i) ** alpha
            terms.append(InteractionTerm(tuple(range(i, j + 1)), m))
            max_support = max(max_support, w)
    j_tilde = max(np.max(np.abs(A)), np.max(np.abs(Bp)))
    field_bound = max((t.norm for t in terms if len(t.support) == 1), default=0.0)
    meta = PowerLawMetadata("long_range_fermion", alpha, float(j_tilde), field_bound)
    return Hamiltonian(lattice, terms, k=max_support, metadata=meta)


def block_interaction(
    H: Hamiltonian,
    X: set[int] | tuple[int, ...],
    Y: set[int] | tuple[int, ...],
    Lambda0: set[int] | tuple[int, ...] | None = None,
) -> tuple[np.ndarray, float]:
    """Interaction operator between site sets X and Y, restricted to Lambda0.

    Sums exactly the terms h_Z with Z inside Lambda0 touching both X and Y;
    returns the operator embedded on the sites of Lambda0 together with its
    operator norm (dense eigensolve).  For 2-local Hamiltonians the result is
    independent of Lambda0.
    """
    X, Y = set(X), set(Y)
    if X & Y:
        raise ValueError(f"X and Y overlap: {sorted(X & Y)}")
    Lambda0 = set(Lambda0) if Lambda0 is not None else X | Y
    if not (X | Y) <= Lambda0:
        raise ValueError("Lambda0 must contain X and Y")
    region = tuple(sorted(Lambda0))
    sub_lattice = LatticeSpec(n=len(region), d=H.lattice.d)
    pos = {site: p + 1 for p, site in enumerate(region)}
    dim = sub_lattice.dim
    picked = [
        t
        for t in H.terms
        if set(t.support) <= Lambda0 and set(t.support) & X and set(t.support) & Y
    ]
    dtype = np.complex128 if any(np.iscomplexobj(t.matrix) for t in picked) else np.float64
    out = np.zeros((dim, dim), dtype=dtype)
    for t in picked:
        local_support = tuple(pos[s] for s in t.support)
        out += embed_operator(sub_lattice, local_support, t.matrix)
    return out, spectral_norm(out)


def decay_envelope(H: Hamiltonian) -> DecayEnvelope:
    """Analytic (g0, alpha_bar) for the named family, with g0 clamped to >= 1.

    Generic power-law couplings give g0 = alpha*J/(alpha-2), abar = alpha-2
    (requires alpha > 2); the quadratic fermionic family decays with
    abar = alpha - 3/2 (requires alpha > 3/2).
    """
    meta = H.metadata
    if meta is None:
        raise ValueError("Hamiltonian has no power-law metadata")
    alpha, J = meta.alpha, meta.coupling
    if meta.family == "long_range_fermion":
        if alpha <= 1.5:
            raise ValueError(
                f"fermionic envelope needs alpha > 3/2, got alpha={alpha}"
            )
        g0 = 4.0 * J * np.sqrt(2 * alpha / (2 * alpha - 1)) * (2 * alpha - 1) / (2 * alpha - 3)
        abar = alpha - 1.5
    else:
        if alpha <= 2.0:
            raise ValueError(
                f"generic envelope needs alpha > 2, got alpha={alpha}"
            )
        g0 = alpha * J / (alpha - 2.0)
        abar = alpha - 2.0
    return DecayEnvelope(g0=max(float(g0), 1.0), alpha_bar=float(abar))


@dataclass(frozen=True)
class EnvelopeSample:
    """One measured ||V_{X,Y}|| against its g0 * r^(-abar) budget."""

    X: tuple[int, ...]
    Y: tuple[int, ...]
    r: int
    norm: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.norm

    @property
    def holds(self) -> bool:
        return self.norm <= self.bound + 1e-9


def pair_distance(X, Y) -> int:
    return min(abs(i - j) for i in X for j in Y)


def contiguous_pair_samples(n: int, max_pairs: int | None = None):
    """Deterministic list of concatenated (X, Y) pairs covering all distances.

    Exhausts every (left prefix-segment, right suffix-segment) split; for
    larger n, callers may cap the count (earliest pairs keep r small, where
    the envelope is tightest).
    """
    pairs = []
    for r in range(1, n - 1):
        for a in range(1, n - r + 1):
            for b in range(a + r, n + 1):
                X = tuple(range(1, a + 1))
                Y = tuple(range(a + r, b + 1))
                pairs.append((X, Y))
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    return pairs


def verify_assumption1(
    H: Hamiltonian,
    envelope: DecayEnvelope,
    sample_pairs,
) -> list[EnvelopeSample]:
    """Measure ||V_{X,Y}|| <= g0 * r^(-abar) on each sampled pair.

    Violations are flagged in the returned samples, never raised; the caller
    decides fatality.
    """
    report = []
    for X, Y in sample_pairs:
        r = pair_distance(X, Y)
        if r < 1:
            raise ValueError(f"pair {X}, {Y} is not separated")
        _, norm = block_interaction(H, X, Y)
        report.append(
            EnvelopeSample(tuple(X), tuple(Y), r, norm, envelope.bound(r))
        )
    return report


def local_energy_g(H: Hamiltonian) -> float:
    """One-site energy scale g = max_i sum_{Z containing i} ||h_Z||."""
    per_site = np.zeros(H.lattice.n + 1)
    for idx, term in enumerate(H.terms):
        nrm = H.term_norm(idx)
        for s in term.support:
            per_site[s] += nrm
    return float(per_site.max())


def power_law_profile(H: Hamiltonian) -> dict[int, float]:
    """max_i sum_{Z containing i, diam(Z)=r} ||h_Z|| for each diameter r >= 1."""
    n = H.lattice.n
    sums: dict[int, np.ndarray] = {}
    for idx, term in enumerate(H.terms):
        r = term.diameter
        if r == 0:
            continue
        acc = sums.setdefault(r, np.zeros(n + 1))
        nrm = H.term_norm(idx)
        for s in term.support:
            acc[s] += nrm
    return {r: float(acc.max()) for r, acc in sorted(sums.items())}


def spin_flip_parity_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Basis indices of the even/odd global spin-flip parity sectors (d=2).

    XX couplings flip spins in pairs and diagonal fields flip none, so the
    Ising family is block-diagonal in these sectors; solving them separately
    costs an eighth of the flops of the full solve.
    """
    idx = np.arange(2**n, dtype=np.int64)
    pop = np.zeros(2**n, dtype=np.int64)
    tmp = idx.copy()
    for _ in range(n):
        pop += tmp & 1
        tmp >>= 1
    even = idx[pop % 2 == 0]
    return even, idx[pop % 2 == 1]


def verify_power_law(H: Hamiltonian, atol: float = 1e-9) -> bool:
    """Check the per-pair metadata envelope ||h_Z|| <= J/diam(Z)^alpha, ||h_i|| <= B."""
    meta = H.metadata
    if meta is None:
        raise ValueError("Hamiltonian has no power-law metadata")
    for idx, term in enumerate(H.terms):
        nrm = H.term_norm(idx)
        if term.diameter == 0:
            if nrm > meta.field + atol:
                return False
        elif nrm > meta.coupling / term.diameter**meta.alpha + atol:
            return False
    return True
