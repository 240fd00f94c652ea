"""Multi-energy cut-off effective Hamiltonians and their spectral guarantees.

Each block Hamiltonian h_s is clamped at tau_s = E_{s,0} + tau (eigenbasis
untouched, eigenvalues min(E, tau_s)); bond terms pass through.  The checks
here measure the gap-preservation theorem for the clamped operator, the
energy-distribution bounds for block projectors against low-energy
projectors of the full (and clamped) operator, the norm of the clamping
error restricted to low energies, and the exponential filter inequalities
they all rest on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import spectral_norm
from .spectral import SpectralData, eigendecompose, lowest_eigenpairs
from .truncation import TruncatedHamiltonian, align_phase

E_DIST_PREFACTOR = 4.0 * math.e**1.5 / (math.e - 1.0)  # ~10.43


def apply_on_block(lattice, block_sites: tuple[int, ...], op: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Apply a contiguous-block operator to full-space column vectors."""
    if len(block_sites) == 0:
        return op[0, 0] * vecs
    d, n = lattice.d, lattice.n
    a, b = block_sites[0], block_sites[-1]
    dL, ds, dR = d ** (a - 1), d ** (b - a + 1), d ** (n - b)
    cols = vecs.shape[1] if vecs.ndim == 2 else 1
    resh = vecs.reshape(dL, ds, dR * cols) if vecs.ndim == 2 else vecs.reshape(dL, ds, dR)
    out = np.einsum("ij,ajb->aib", op, resh)
    return out.reshape(vecs.shape)


@dataclass
class EffectiveHamiltonian:
    """Truncated Hamiltonian with per-block spectra clamped at tau_s."""

    base: TruncatedHamiltonian
    tau: float
    tau_s: list[float]
    internal_eff: list[np.ndarray]
    _spectral: SpectralData | None = field(default=None, repr=False)
    _dense: np.ndarray | None = field(default=None, repr=False)

    @property
    def lambdas(self) -> tuple[float, float]:
        """Decay rates (lambda, lambda') of the filter inequalities.

        lambda = 1/(12 g k^2 + 4 g0), lambda' = min(1/(112 g0), 1/(12 g k^2)),
        with g the measured one-site energy of the source Hamiltonian.
        """
        g = self.base.local_g
        k = self.base.k
        g0 = self.base.envelope.g0
        lam = 1.0 / (12.0 * g * k**2 + 4.0 * g0)
        lam_p = min(1.0 / (112.0 * g0), 1.0 / (12.0 * g * k**2))
        return lam, lam_p

    def assemble_dense(self) -> np.ndarray:
        if self._dense is None:
            out = self.base.embed_block_operator(0, self.internal_eff[0])
            for s in range(1, self.base.q + 2):
                out += self.base.embed_block_operator(s, self.internal_eff[s])
            for s in range(self.base.q + 1):
                out += _embed_bond(self.base, s)
            self._dense = out
        return self._dense

    def spectral(self) -> SpectralData:
        if self._spectral is None:
            self._spectral = eigendecompose(self.assemble_dense(), check=False)
        return self._spectral

    def norm_budget(self) -> float:
        """Analytic cap (q+2)*(tau + 2*g0) on ||H_eff|| after block balancing."""
        return (self.base.q + 2) * (self.tau + 2.0 * self.base.envelope.g0)


def _embed_bond(T: TruncatedHamiltonian, s: int) -> np.ndarray:
    from .hamiltonian import embed_operator

    return embed_operator(T.lattice, T.bond_support(s), T.bonds[s])


def energy_cutoff(h_s: np.ndarray, tau_s: float, spectrum: SpectralData | None = None) -> np.ndarray:
    """Clamp the spectrum of a block Hamiltonian at tau_s.

    Eigenvectors are untouched, eigenvalues become min(E, tau_s), so the
    result commutes with the input exactly.
    """
    sp = spectrum or eigendecompose(h_s)
    return sp.apply_function(lambda w: min(w, tau_s))


def build_effective(T: TruncatedHamiltonian, tau: float) -> EffectiveHamiltonian:
    """Apply the per-block cut-off at tau_s = E_{s,0} + tau.

    Requires balanced block origins (|E_{s,0}| <= g0, see
    shift_block_energies); the analytic norm cap (q+2)(tau + 2 g0) is
    verified on the result.
    """
    if tau <= 0:
        raise ValueError(f"cut-off offset must be positive, got tau={tau}")
    if T.envelope is None:
        raise ValueError("truncated Hamiltonian carries no decay envelope")
    g0 = T.envelope.g0
    energies = T.block_ground_energies()
    if np.max(np.abs(energies)) > g0 + 1e-9:
        raise ValueError(
            "block ground energies exceed g0; run shift_block_energies first"
        )
    tau_s = [float(e) + tau for e in energies]
    internal_eff = [
        energy_cutoff(h, ts, spectrum=sp)
        for h, ts, sp in zip(T.internal, tau_s, T.block_spectra())
    ]
    eff = EffectiveHamiltonian(base=T, tau=tau, tau_s=tau_s, internal_eff=internal_eff)
    norm = spectral_norm(eff.assemble_dense())
    if norm > eff.norm_budget() + 1e-9:
        raise AssertionError(
            f"||H_eff|| = {norm:.6g} exceeds analytic cap {eff.norm_budget():.6g}"
        )
    return eff


def theorem5_precondition_tau(T: TruncatedHamiltonian, gap_t: float, lambdas) -> float:
    """Smallest tau admitted by the gap-preservation theorem's hypothesis."""
    g0 = T.envelope.g0
    q = T.q
    lam, lam_p = lambdas
    first = 8.0 * g0 + math.log(88.0 * g0 * (q + 1) * (q + 2) / gap_t) / lam_p
    second = 4.0 * g0 + math.log(432.0 * (q + 2) / (lam * gap_t)) / lam
    return max(first, second)


@dataclass
class Theorem5Diagnostics:
    """Measured gap/overlap/leakage data for one cut-off value."""

    tau: float
    gap_t: float
    gap_eff: float
    overlap_distance: float
    overlap_bound: float
    kappa: float
    kappa_bound: float
    e_bot: float
    precondition_met: bool

    @property
    def gap_ratio(self) -> float:
        return self.gap_eff / self.gap_t

    @property
    def gap_holds(self) -> bool:
        return (not self.precondition_met) or self.gap_eff >= 0.5 * self.gap_t - 1e-9

    @property
    def overlap_holds(self) -> bool:
        return (not self.precondition_met) or self.overlap_distance <= self.overlap_bound + 1e-9

    @property
    def kappa_holds(self) -> bool:
        return self.kappa <= self.kappa_bound + 1e-9


def theorem5_check(
    T: TruncatedHamiltonian,
    tau_grid,
    spec_t: SpectralData | None = None,
) -> list[Theorem5Diagnostics]:
    """Gap preservation and ground-state drift of the clamp, per tau.

    Wherever the theorem's tau hypothesis is met, asserts gap_eff >= gap_t/2
    and the exponential overlap bound; raw distances are always recorded so
    decay can be read off by slope even when the hypothesis is vacuous at
    desk scale.  The leakage kappa and its unconditional bound
    11(q+2)exp(-lambda'(tau - 8 g0)) are measured at every point.
    """
    taus = sorted(float(t) for t in tau_grid)
    if not taus or taus[0] <= 0:
        raise ValueError("tau grid must be ascending positives")
    if spec_t is None:
        w_t, v_t = lowest_eigenpairs(T.assemble_dense(), count=2)
    else:
        w_t, v_t = spec_t.eigenvalues[:2], spec_t.eigenvectors[:, :2]
    gap_t = float(w_t[1] - w_t[0])
    gs_t = v_t[:, 0]
    g0 = T.envelope.g0
    q = T.q
    block_specs = T.block_spectra()
    bond_part = _embed_bond(T, 0)
    for s in range(1, q + 1):
        bond_part += _embed_bond(T, s)
    out = []
    for tau in taus:
        energies = T.block_ground_energies()
        tau_s = [float(e) + tau for e in energies]
        internal_eff = [
            energy_cutoff(h, ts, spectrum=sp)
            for h, ts, sp in zip(T.internal, tau_s, block_specs)
        ]
        dense_eff = bond_part.copy()
        for s, h in enumerate(internal_eff):
            dense_eff += T.embed_block_operator(s, h)
        eff = EffectiveHamiltonian(T, tau, tau_s, internal_eff, _dense=dense_eff)
        lam, lam_p = eff.lambdas
        w_e, v_e = lowest_eigenpairs(dense_eff, count=2)
        gap_eff = float(w_e[1] - w_e[0])
        gs_eff = align_phase(gs_t, v_e[:, 0])
        dist = float(np.linalg.norm(gs_eff - gs_t))
        kappa = 0.0
        for s, sp in enumerate(block_specs):
            high = sp.eigenvectors[:, sp.eigenvalues > tau_s[s]]
            if high.size == 0:
                continue
            proj = high @ high.conj().T
            leak = apply_on_block(T.lattice, T.blocks.blocks[s], proj, v_e)
            kappa += float(np.linalg.norm(leak, 2))
        kappa_bound = 11.0 * (q + 2) * math.exp(-lam_p * (tau - 8.0 * g0))
        e_bot = gap_t * (1.0 - kappa) ** 2 - 2.0 * g0 * kappa * (1.0 + kappa) * (q + 1)
        tau_min = theorem5_precondition_tau(T, gap_t, (lam, lam_p))
        overlap_bound = 54.0 * (q + 2) / (lam * gap_t) * math.exp(-lam * (tau - 4.0 * g0))
        out.append(
            Theorem5Diagnostics(
                tau=tau,
                gap_t=gap_t,
                gap_eff=gap_eff,
                overlap_distance=dist,
                overlap_bound=overlap_bound,
                kappa=kappa,
                kappa_bound=kappa_bound,
                e_bot=e_bot,
                precondition_met=tau >= tau_min,
            )
        )
    return out


def fit_log_slope(taus, distances, floor: float = 1e-12):
    """Least-squares slope and R^2 of log(distance) against tau.

    Points at or below `floor` (numerically saturated) are dropped.
    """
    taus = np.asarray(taus, dtype=float)
    distances = np.asarray(distances, dtype=float)
    keep = distances > floor
    if keep.sum() < 2:
        raise ValueError("not enough unsaturated points for a slope fit")
    x, y = taus[keep], np.log(distances[keep])
    coeffs = np.polyfit(x, y, 1)
    pred = np.polyval(coeffs, x)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coeffs[0]), r2, int(keep.sum())


@dataclass
class GridBoundRecord:
    """One measured inequality instance on a parameter grid."""

    label: str
    context: dict
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def _block_overlap_matrix(T: TruncatedHamiltonian, s: int, basis: np.ndarray) -> np.ndarray:
    """Rows: product basis labelled by block-s eigenvalues; cols: given basis."""
    sp = T.block_spectra()[s]
    rotated = apply_on_block(
        T.lattice, T.blocks.blocks[s], sp.eigenvectors.conj().T, basis
    )
    return rotated


def _block_row_labels(T: TruncatedHamiltonian, s: int) -> np.ndarray:
    """Block-s eigenvalue attached to each product-basis row index."""
    d, n = T.lattice.d, T.lattice.n
    block = T.blocks.blocks[s]
    if len(block) == 0:
        scalar = float(T.block_spectra()[s].eigenvalues[0])
        return np.full(T.lattice.dim, scalar)
    a, b = block[0], block[-1]
    dL, ds, dR = d ** (a - 1), d ** (b - a + 1), d ** (n - b)
    w = T.block_spectra()[s].eigenvalues
    return np.repeat(np.tile(w, dL), dR)


def energy_distribution_check(
    eff: EffectiveHamiltonian,
    E_prime_grid,
    E_grid,
    spec_t: SpectralData | None = None,
) -> list[GridBoundRecord]:
    """Block high-energy leakage of low-energy projectors, plain and clamped.

    For every block s and grid pair: ||P^(s)_{>E'} P_{<=E}|| against
    C*exp(-lambda*(E' - E_{s,0} - (E - E_t0) - 4 g0)) and the clamped
    analogue ||P^(s)_{>E'} P_eff_{<=E}|| against
    C*exp(-lambda'*(min(E', tau_s) - E_{s,0} - (E - E_eff0) - 4 g0)), with
    C = 4 e^{3/2} / (e - 1).
    """
    T = eff.base
    lam, lam_p = eff.lambdas
    g0 = T.envelope.g0
    spec_t = spec_t or eigendecompose(T.assemble_dense(), check=False)
    spec_e = eff.spectral()
    e_t0 = spec_t.ground_energy
    e_eff0 = spec_e.ground_energy
    block_e0 = T.block_ground_energies()
    records = []
    for s in range(T.q + 2):
        labels = _block_row_labels(T, s)
        M_plain = _block_overlap_matrix(T, s, spec_t.eigenvectors)
        M_eff = _block_overlap_matrix(T, s, spec_e.eigenvectors)
        for E_prime in E_prime_grid:
            rows = labels > E_prime
            for E in E_grid:
                cols_plain = spec_t.eigenvalues <= E
                sub = M_plain[np.ix_(rows, cols_plain)]
                lhs = float(np.linalg.svd(sub, compute_uv=False)[0]) if sub.size else 0.0
                expo = lam * ((E_prime - block_e0[s]) - (E - e_t0) - 4.0 * g0)
                records.append(
                    GridBoundRecord(
                        "energy-dist",
                        {"s": s, "E_prime": float(E_prime), "E": float(E)},
                        lhs,
                        E_DIST_PREFACTOR * math.exp(-expo),
                    )
                )
                cols_eff = spec_e.eigenvalues <= E
                sub = M_eff[np.ix_(rows, cols_eff)]
                lhs = float(np.linalg.svd(sub, compute_uv=False)[0]) if sub.size else 0.0
                expo = lam_p * (
                    min(E_prime, eff.tau_s[s]) - block_e0[s] - (E - e_eff0) - 4.0 * g0
                )
                records.append(
                    GridBoundRecord(
                        "energy-dist-eff",
                        {"s": s, "E_prime": float(E_prime), "E": float(E)},
                        lhs,
                        E_DIST_PREFACTOR * math.exp(-expo),
                    )
                )
    return records


def effective_difference_check(
    T: TruncatedHamiltonian,
    eff: EffectiveHamiltonian,
    E_grid,
    spec_t: SpectralData | None = None,
) -> list[GridBoundRecord]:
    """Norm of the clamping error on low-energy states.

    ||(H_t - H_eff) P_{<=E}|| <= (27(q+2)/lambda) exp(-lambda(tau - dE - 4g0))
    per grid energy; at E = E_t0 this bounds ||H_eff |0_t>||.
    """
    lam, _ = eff.lambdas
    g0 = T.envelope.g0
    dense_t = T.assemble_dense()
    spec_t = spec_t or eigendecompose(dense_t, check=False)
    diff = dense_t - eff.assemble_dense()
    e_t0 = spec_t.ground_energy
    records = []
    for E in E_grid:
        basis = spec_t.eigenvectors[:, spec_t.eigenvalues <= E]
        lhs = float(np.linalg.norm(diff @ basis, 2)) if basis.size else 0.0
        rhs = (
            27.0
            * (T.q + 2)
            / lam
            * math.exp(-lam * (eff.tau - (E - e_t0) - 4.0 * g0))
        )
        records.append(GridBoundRecord("eff-diff", {"E": float(E)}, lhs, rhs))
    return records


def exponential_filter_check(
    T: TruncatedHamiltonian,
    s: int,
    O_s: np.ndarray,
    E: float,
    E_prime: float,
    spec_t: SpectralData | None = None,
    eff: EffectiveHamiltonian | None = None,
) -> list[GridBoundRecord]:
    """Exponential suppression of block operators between energy sectors.

    For a block-s operator commuting with h_s:
    ||P_{>=E'} O_s P_{<=E}|| <= 4 ||O_s|| exp(-lambda (E' - E)); when `eff`
    is supplied, the clamped analogue with lambda' is measured as well.
    """
    h_s = T.internal[s]
    comm = O_s @ h_s - h_s @ O_s
    scale = max(spectral_norm(h_s), 1.0) * max(np.max(np.abs(O_s)), 1e-30)
    if np.max(np.abs(comm)) > 1e-10 * scale:
        raise ValueError("operator does not commute with its block Hamiltonian")
    g0 = T.envelope.g0
    lam = 1.0 / (12.0 * T.local_g * T.k**2 + 4.0 * g0)
    spec_t = spec_t or eigendecompose(T.assemble_dense(), check=False)
    norm_O = float(np.linalg.norm(O_s, 2))
    records = []
    embedded = T.embed_block_operator(s, O_s)
    rot = spec_t.eigenvectors.conj().T @ embedded @ spec_t.eigenvectors
    rows = spec_t.eigenvalues >= E_prime
    cols = spec_t.eigenvalues <= E
    sub = rot[np.ix_(rows, cols)]
    lhs = float(np.linalg.svd(sub, compute_uv=False)[0]) if sub.size else 0.0
    records.append(
        GridBoundRecord(
            "filter",
            {"s": s, "E_prime": float(E_prime), "E": float(E)},
            lhs,
            4.0 * norm_O * math.exp(-lam * (E_prime - E)),
        )
    )
    if eff is not None:
        _, lam_p = eff.lambdas
        spec_e = eff.spectral()
        rot = spec_e.eigenvectors.conj().T @ embedded @ spec_e.eigenvectors
        rows = spec_e.eigenvalues >= E_prime
        cols = spec_e.eigenvalues <= E
        sub = rot[np.ix_(rows, cols)]
        lhs = float(np.linalg.svd(sub, compute_uv=False)[0]) if sub.size else 0.0
        records.append(
            GridBoundRecord(
                "filter-eff",
                {"s": s, "E_prime": float(E_prime), "E": float(E)},
                lhs,
                4.0 * norm_O * math.exp(-lam_p * (E_prime - E)),
            )
        )
    return records


def commutator_bound_check(T: TruncatedHamiltonian) -> list[GridBoundRecord]:
    """Commutator growth of each bond term against the k-local budget.

    ||[H_t, h_{s,s+1}]|| <= 6 g k q ||h_{s,s+1}|| with q = 2k (a bond term
    spans sites drawn from two blocks).
    """
    dense = T.assemble_dense()
    records = []
    for s in range(T.q + 1):
        emb = _embed_bond(T, s)
        comm = dense @ emb - emb @ dense
        lhs = spectral_norm(1j * comm) if np.iscomplexobj(comm) else float(np.linalg.norm(comm, 2))
        rhs = 6.0 * T.local_g * T.k * (2 * T.k) * spectral_norm(T.bonds[s])
        records.append(GridBoundRecord("commutator", {"s": s}, lhs, rhs))
    return records
