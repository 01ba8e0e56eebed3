"""Quantum-jump Monte Carlo of conditional pure states.

Piecewise-deterministic sampling with full and coarse-grained emission
records, record weights, ensemble statistics, and two-sample symmetry
hypothesis tests.  Between jumps the unnormalized state evolves with the
(constant) effective Hamiltonian, so deterministic segments use the
exact propagator; waiting times come from the norm-decay threshold
method with bisection at the crossing.  Randomness is drawn from
counter-based per-trajectory streams keyed by (master seed, trajectory
index), so ensembles are reproducible independent of batching.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import linalg
from .lindblad import Representation, effective_hamiltonian
from .linalg import dag, frob
from .sjed import SjedPartition, build_sjeds

TIME_TOL_FACTOR = 1e-9


class StiffnessError(RuntimeError):
    pass


class MissingPermutation(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementRecord:
    """Ordered emission events (time, label) up to a horizon."""

    events: tuple
    horizon: float
    granularity: str = "full"  # "full" | "coarse"

    def __post_init__(self):
        last = 0.0
        for t, _ in self.events:
            if t < last or t >= self.horizon:
                raise ValueError("event times must be ordered within the horizon")
            last = t

    def counts(self, nlabels: int) -> np.ndarray:
        out = np.zeros(nlabels, dtype=int)
        for _, j in self.events:
            out[j] += 1
        return out


@dataclass(frozen=True)
class Trajectory:
    initial_state: np.ndarray
    record: MeasurementRecord
    checkpoints: tuple  # ((t, pure density matrix), ...)


@dataclass
class TrajectoryEnsemble:
    """Sampled trajectories with vectorized per-time state storage."""

    records: list                  # list of event lists [(t, label), ...]
    states: dict                   # time -> (n, d) array of normalized vectors
    horizon: float
    seed: int
    rep_fingerprint: str
    coarse_labels: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.records)

    def count_vectors(self, nlabels: int) -> np.ndarray:
        out = np.zeros((self.size, nlabels), dtype=int)
        for i, rec in enumerate(self.records):
            for _, j in rec:
                out[i, j] += 1
        return out

    def coarse_count_vectors(self, nsets: int) -> np.ndarray:
        if self.coarse_labels is None:
            raise ValueError("ensemble carries no SJED label map")
        out = np.zeros((self.size, nsets), dtype=int)
        for i, rec in enumerate(self.records):
            for _, j in rec:
                out[i, self.coarse_labels[j]] += 1
        return out


def state_vector(psi, tol: float = 1e-8) -> np.ndarray:
    """Unit vector of a pure density matrix (or pass a vector through)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        return psi / np.linalg.norm(psi)
    w, v = linalg.hermitian_eigendecomposition(psi, 1e-6)
    if w[-1] < 1.0 - tol * max(1.0, abs(w[-1])) - tol:
        raise ValueError(f"state is not pure: largest eigenvalue {w[-1]}")
    return v[:, -1]


def drift(rep: Representation, psi) -> np.ndarray:
    """Deterministic flow of the conditional state between jumps.

    B(psi) = -i H_eff psi + i psi H_eff† - psi Tr(...), traceless by
    construction.
    """
    psi = np.asarray(psi, dtype=complex)
    heff = effective_hamiltonian(rep)
    raw = -1j * (heff @ psi) + 1j * (psi @ dag(heff))
    return raw - psi * np.trace(raw)


def jump_rates(rep: Representation, psi, tol: float = 1e-12):
    """Per-jump rates Tr[J psi J†] with normalized destinations.

    Destinations are omitted for rates below tol.
    """
    psi = np.asarray(psi, dtype=complex)
    out = []
    for j in rep.jumps:
        jpj = j @ psi @ dag(j)
        rate = float(np.trace(jpj).real)
        if rate > tol:
            out.append((rate, jpj / rate))
        else:
            out.append((rate, None))
    return out


def _segment_propagator(heff: np.ndarray, dt: float) -> np.ndarray:
    return linalg.matrix_exponential(-1j * dt * heff)


def record_weight(rep: Representation, psi0, record: MeasurementRecord):
    """Unnormalized conditional state and probability density of a record.

    phi_T = G_{T-t_n} J_{j_n} ... J_{j_1} G_{t_1}(psi0) with
    G_t(phi) = e^{-i H_eff t} phi e^{i H_eff† t}; the density is Tr phi_T.
    """
    if record.granularity != "full":
        raise ValueError("record_weight expects a full record")
    heff = effective_hamiltonian(rep)
    phi = np.asarray(psi0, dtype=complex).copy()
    t_prev = 0.0
    for t, j in record.events:
        g = _segment_propagator(heff, t - t_prev)
        phi = g @ phi @ dag(g)
        jm = rep.jumps[j]
        phi = jm @ phi @ dag(jm)
        t_prev = t
    g = _segment_propagator(heff, record.horizon - t_prev)
    phi = g @ phi @ dag(g)
    return phi, float(np.trace(phi).real)


def coarse_record_weight(rep: Representation, partition: SjedPartition,
                         psi0, record: MeasurementRecord):
    """Record weight with jump actions replaced by SJED composite actions."""
    heff = effective_hamiltonian(rep)
    phi = np.asarray(psi0, dtype=complex).copy()
    t_prev = 0.0
    for t, alpha in record.events:
        g = _segment_propagator(heff, t - t_prev)
        phi = g @ phi @ dag(g)
        acc = np.zeros_like(phi)
        for j in partition.sets[alpha].indices:
            jm = partition.jumps[j]
            acc += jm @ phi @ dag(jm)
        phi = acc
        t_prev = t
    g = _segment_propagator(heff, record.horizon - t_prev)
    phi = g @ phi @ dag(g)
    return phi, float(np.trace(phi).real)


def transform_record(record: MeasurementRecord, permutation) -> MeasurementRecord:
    """Relabel events by a permutation, times unchanged."""
    events = []
    for t, j in record.events:
        if j >= len(permutation):
            raise SizeMismatch(f"label {j} outside permutation of size {len(permutation)}")
        events.append((t, permutation[j]))
    return MeasurementRecord(tuple(events), record.horizon, record.granularity)


class _MomentPropagator:
    """Evaluate e^{-i H s} phi for many states and per-state s <= smax.

    Uses the truncated series sum_k (-i s)^k H^k phi / k!, exact to machine
    precision when ||H|| * smax < 1/2.
    """

    def __init__(self, heff: np.ndarray, smax: float, terms: int = 22):
        self.a = -1j * heff
        self.terms = terms
        self.smax = smax

    def apply(self, phis: np.ndarray, ss: np.ndarray) -> np.ndarray:
        out = phis.astype(complex).copy()
        term = phis.astype(complex).copy()
        at = self.a.T
        for k in range(1, self.terms):
            term = (term @ at) * (ss[:, None] / k)
            out += term
        return out


def _philox_stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _grid(horizon: float, step: float, checkpoints) -> np.ndarray:
    n = max(1, int(np.ceil(horizon / step)))
    times = set(np.linspace(0.0, horizon, n + 1).tolist())
    for t in checkpoints:
        if not 0.0 <= t <= horizon:
            raise ValueError(f"checkpoint {t} outside [0, {horizon}]")
        times.add(float(t))
    return np.array(sorted(times))


def sample_ensemble(rep: Representation, psi0, horizon: float, n: int,
                    seed: int = 0, checkpoint_times=(),
                    partition: SjedPartition | None = None,
                    first_index: int = 0) -> TrajectoryEnsemble:
    """Sample n trajectories in vectorized lock-step.

    Waiting times use the norm-decay threshold method: the unnormalized
    state evolves with the exact segment propagator, and each threshold
    crossing is refined by bisection to a time tolerance of 1e-9 times
    the horizon.  Trajectory i draws from the Philox stream keyed by
    (seed, first_index + i).
    """
    d = rep.dim
    heff = effective_hamiltonian(rep)
    hnorm = frob(heff)
    if not np.isfinite(hnorm) or hnorm > 1e8:
        raise StiffnessError("effective Hamiltonian norm too large for stepping")
    step = min(0.05 * max(horizon, 1e-12), 0.45 / max(hnorm, 1e-12))
    grid = _grid(horizon, step, checkpoint_times)
    if partition is None:
        partition = build_sjeds(rep)

    v0 = state_vector(psi0)
    phis = np.tile(v0, (n, 1))
    gens = [_philox_stream(seed, first_index + i) for i in range(n)]
    thresholds = np.array([g.random() for g in gens])
    records: list = [[] for _ in range(n)]
    jump_mats = np.stack(rep.jumps) if rep.jumps else None
    states: dict = {}
    want = {round(float(t), 12) for t in checkpoint_times}
    time_tol = TIME_TOL_FACTOR * max(horizon, 1e-12)

    if round(0.0, 12) in want:
        states[0.0] = phis.copy()

    for k in range(len(grid) - 1):
        t0, t1 = grid[k], grid[k + 1]
        dt = t1 - t0
        prop = _segment_propagator(heff, dt).T
        start = phis.copy()
        phis = phis @ prop
        norms = np.einsum("ij,ij->i", phis.conj(), phis).real
        crossing = np.where(norms < thresholds)[0] if jump_mats is not None \
            else np.array([], dtype=int)
        if crossing.size:
            moments = _MomentPropagator(heff, dt)
            offsets = np.zeros(crossing.size)      # jump-segment start within step
            seg_start = start[crossing]
            idxs = crossing
            while idxs.size:
                # bisection for the crossing time of each remaining trajectory
                lo = offsets.copy()
                hi = np.full(idxs.size, dt)
                for _ in range(int(np.ceil(np.log2(max(2.0, dt / time_tol))))):
                    mid = (lo + hi) / 2.0
                    trial = moments.apply(seg_start, mid - offsets)
                    tn = np.einsum("ij,ij->i", trial.conj(), trial).real
                    above = tn >= thresholds[idxs]
                    lo = np.where(above, mid, lo)
                    hi = np.where(above, hi, mid)
                tstar = (lo + hi) / 2.0
                phi_star = moments.apply(seg_start, tstar - offsets)
                # jump: label by rates, reset state, new threshold
                amp = np.einsum("jab,ib->ija", jump_mats, phi_star)
                rates = np.einsum("ija,ija->ij", amp.conj(), amp).real
                new_states = np.empty_like(phi_star)
                for row, i in enumerate(idxs):
                    g = gens[i]
                    w = rates[row]
                    total = w.sum()
                    if total <= 0:
                        raise StiffnessError("vanishing jump rates at a crossing")
                    label = int(np.searchsorted(np.cumsum(w) / total, g.random()))
                    records[i].append((float(t0 + tstar[row]), label))
                    vec = amp[row, label]
                    new_states[row] = vec / np.linalg.norm(vec)
                    thresholds[i] = g.random()
                # propagate the remainder of the step and look again
                rest = moments.apply(new_states, dt - tstar)
                nr = np.einsum("ij,ij->i", rest.conj(), rest).real
                phis[idxs] = rest
                again = nr < thresholds[idxs]
                idxs = idxs[again]
                seg_start = new_states[again]
                offsets = tstar[again]
        key = round(float(t1), 12)
        if key in want:
            nrm = np.sqrt(np.einsum("ij,ij->i", phis.conj(), phis).real)
            states[float(t1)] = phis / nrm[:, None]

    return TrajectoryEnsemble(records=records, states=states, horizon=horizon,
                              seed=seed, rep_fingerprint=rep.fingerprint(),
                              coarse_labels=partition.coarse_labels())


def sample_trajectory(rep: Representation, psi0, horizon: float,
                      seed: int = 0, trajectory_index: int = 0,
                      checkpoint_times=(),
                      partition: SjedPartition | None = None) -> Trajectory:
    """Sample one trajectory (same stream as its slot in an ensemble)."""
    ens = sample_ensemble(rep, psi0, horizon, 1, seed=seed,
                          checkpoint_times=checkpoint_times,
                          partition=partition, first_index=trajectory_index)
    psi0m = np.asarray(psi0, dtype=complex)
    if psi0m.ndim == 1:
        psi0m = np.outer(psi0m, psi0m.conj())
    record = MeasurementRecord(tuple(ens.records[0]), horizon, "full")
    checkpoints = []
    for t in sorted(ens.states):
        v = ens.states[t][0]
        checkpoints.append((t, np.outer(v, v.conj())))
    return Trajectory(psi0m, record, tuple(checkpoints))


def coarse_record(record: MeasurementRecord, partition: SjedPartition) -> MeasurementRecord:
    """Map full labels to SJED labels."""
    labels = partition.coarse_labels()
    events = tuple((t, int(labels[j])) for t, j in record.events)
    return MeasurementRecord(events, record.horizon, "coarse")


def ensemble_average(ensemble: TrajectoryEnsemble, t: float,
                     n_bootstrap: int = 200, seed: int = 1):
    """Mean conditional density matrix at a checkpoint with bootstrap errors.

    Returns (mean, stderr) with stderr the entrywise bootstrap standard
    error of the mean (absolute value per entry).
    """
    if float(t) not in ensemble.states:
        raise ValueError(f"time {t} was not recorded as a checkpoint")
    vecs = ensemble.states[float(t)]
    n, d = vecs.shape
    mats = np.einsum("ia,ib->iab", vecs, vecs.conj()).reshape(n, d * d)
    mean = mats.mean(axis=0).reshape(d, d)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, np.full(n, 1.0 / n), size=n_bootstrap)
    boots = (counts @ mats) / n
    err = boots.std(axis=0, ddof=1).reshape(d, d)
    return mean, np.abs(err)


def _merge_bins(table_a: dict, table_b: dict, n_a: int, n_b: int,
                min_expected: float = 5.0):
    keys = sorted(set(table_a) | set(table_b))
    a = np.array([table_a.get(k, 0) for k in keys], dtype=float)
    b = np.array([table_b.get(k, 0) for k in keys], dtype=float)
    tot = a + b
    expected_a = tot * n_a / (n_a + n_b)
    expected_b = tot * n_b / (n_a + n_b)
    keep = np.minimum(expected_a, expected_b) >= min_expected
    a_kept = a[keep].tolist()
    b_kept = b[keep].tolist()
    rest_a = a[~keep].sum()
    rest_b = b[~keep].sum()
    if rest_a + rest_b > 0:
        a_kept.append(rest_a)
        b_kept.append(rest_b)
    return np.array(a_kept), np.array(b_kept)


def two_sample_chi2(table_a: dict, table_b: dict, min_expected: float = 5.0):
    """Two-sample chi-squared p-value on pooled histogram bins."""
    n_a = sum(table_a.values())
    n_b = sum(table_b.values())
    a, b = _merge_bins(table_a, table_b, n_a, n_b, min_expected)
    if len(a) < 2:
        return 1.0, 0.0, 0
    tot = a + b
    ea = tot * n_a / (n_a + n_b)
    eb = tot * n_b / (n_a + n_b)
    chi2 = float(np.sum((a - ea) ** 2 / ea) + np.sum((b - eb) ** 2 / eb))
    dof = len(a) - 1
    return float(stats.chi2.sf(chi2, dof)), chi2, dof


def _histogram(keys) -> dict:
    out: dict = {}
    for k in keys:
        out[k] = out.get(k, 0) + 1
    return out


def _bloch_key(vecs: np.ndarray, nbins: int = 6):
    x = 2 * (vecs[:, 0].conj() * vecs[:, 1]).real
    y = 2 * (vecs[:, 0].conj() * vecs[:, 1]).imag
    z = (np.abs(vecs[:, 0]) ** 2 - np.abs(vecs[:, 1]) ** 2)
    def digit(c):
        return np.clip(((c + 1.0) / 2.0 * nbins).astype(int), 0, nbins - 1)
    return list(zip(digit(x), digit(y), digit(z)))


def _state_keys(vecs: np.ndarray, nbins: int = 6):
    n, d = vecs.shape
    if d == 2:
        return _bloch_key(vecs, nbins)
    pops = np.abs(vecs) ** 2
    rng = np.random.default_rng(777)
    obs = []
    for _ in range(2):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        obs.append((a + a.conj().T) / 2)
    extra = [np.einsum("ia,ab,ib->i", vecs.conj(), o, vecs).real / max(frob(o), 1.0)
             for o in obs]
    cols = [np.clip((pops[:, k] * nbins).astype(int), 0, nbins - 1)
            for k in range(d)]
    cols += [np.clip(((e + 1.0) / 2.0 * nbins).astype(int), 0, nbins - 1)
             for e in extra]
    return list(zip(*cols))


def ensemble_symmetry_test(rep: Representation, sym, level: str, psi0,
                           horizon: float, n: int, seed: int = 0,
                           alpha_sig: float = 0.01,
                           permutation=None,
                           partition: SjedPartition | None = None):
    """Two-sample test of the symmetry of the trajectory ensemble.

    Samples ensemble A from psi0 and ensemble B from the transformed
    initial state with independent streams, maps A by the symmetry
    (records by the permutation, states by conjugation) and compares:
    level "full" uses final count vectors over jump labels, "coarse"
    over SJED labels, "unlabelled" binned state coordinates.
    permutation may be an explicit tuple, None (identity after raising
    MissingPermutation is the caller's choice), or "best" to scan all
    label bijections and report the most favorable p-value.
    Returns (p_value, passed).
    """
    if partition is None:
        partition = build_sjeds(rep)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim == 1:
        psi0 = np.outer(psi0, psi0.conj())
    psi0_b = sym.conjugate(psi0)
    ens_a = sample_ensemble(rep, psi0, horizon, n, seed=seed,
                            checkpoint_times=(horizon,), partition=partition)
    ens_b = sample_ensemble(rep, psi0_b, horizon, n, seed=seed + 1,
                            checkpoint_times=(horizon,), partition=partition)

    va = ens_a.states[horizon] @ sym.matrix.T  # A final states, transformed
    vb = ens_b.states[horizon]

    if level == "unlabelled":
        pval, _, _ = two_sample_chi2(_histogram(_state_keys(va)),
                                     _histogram(_state_keys(vb)))
        return pval, pval > alpha_sig

    # full and coarse levels test the joint law of the conditional state
    # and the record counts (final counts alone can be blind: constant-rate
    # models emit exchangeable Poisson counts for any initial state)
    if level == "full":
        counts_a = ens_a.count_vectors(rep.njumps)
        counts_b = ens_b.count_vectors(rep.njumps)
        size = rep.njumps
    elif level == "coarse":
        counts_a = ens_a.coarse_count_vectors(partition.nsets)
        counts_b = ens_b.coarse_count_vectors(partition.nsets)
        size = partition.nsets
    else:
        raise ValueError(f"unknown level {level!r}")

    keys_a = _state_keys(va, nbins=4)
    keys_b = _state_keys(vb, nbins=4)
    hb = _histogram([key + tuple(row) for key, row in zip(keys_b, counts_b)])

    def p_for(perm):
        # records map label j -> perm[j], so the mapped count at k is the
        # original count at the preimage of k
        inv = np.argsort(np.asarray(perm))
        mapped = counts_a[:, inv]
        ha = _histogram([key + tuple(row) for key, row in zip(keys_a, mapped)])
        return two_sample_chi2(ha, hb)[0]

    if permutation == "best":
        from itertools import permutations as iterperm
        if size > 6:
            raise ValueError("exhaustive permutation scan capped at 6 labels")
        pval = max(p_for(p) for p in iterperm(range(size)))
        return pval, pval > alpha_sig
    if permutation is None:
        raise MissingPermutation(
            "no label permutation supplied; pass one, or 'best', or identity")
    pval = p_for(tuple(permutation))
    return pval, pval > alpha_sig


def export_records(ensemble: TrajectoryEnsemble, path) -> None:
    """Line-delimited export: one record per line with the final state."""
    import json

    tfinal = max(ensemble.states) if ensemble.states else None
    with open(path, "w") as fh:
        for i, rec in enumerate(ensemble.records):
            entry = {
                "trajId": i,
                "events": [[t, int(j)] for t, j in rec],
            }
            if tfinal is not None:
                v = ensemble.states[tfinal][i]
                entry["finalState"] = [[float(c.real), float(c.imag)] for c in v]
            fh.write(json.dumps(entry) + "\n")


def export_count_histogram(ensemble: TrajectoryEnsemble, nlabels: int, path) -> None:
    """CSV histogram of final count vectors."""
    counts = ensemble.count_vectors(nlabels)
    hist = _histogram([tuple(row) for row in counts])
    with open(path, "w") as fh:
        fh.write(",".join(f"n{j + 1}" for j in range(nlabels)) + ",occurrences\n")
        for key in sorted(hist):
            fh.write(",".join(str(k) for k in key) + f",{hist[key]}\n")


__all__ = [
    "MeasurementRecord",
    "MissingPermutation",
    "SizeMismatch",
    "StiffnessError",
    "Trajectory",
    "TrajectoryEnsemble",
    "coarse_record",
    "coarse_record_weight",
    "drift",
    "ensemble_average",
    "ensemble_symmetry_test",
    "export_count_histogram",
    "export_records",
    "jump_rates",
    "record_weight",
    "sample_ensemble",
    "sample_trajectory",
    "state_vector",
    "transform_record",
    "two_sample_chi2",
]
