"""Highest decodable LT rate versus instantaneous SNR, and what it implies under fading.

For every instantaneous symbol SNR on a grid the rate grid is walked from the
top; at each rate ``trials`` seeded encode -> BSC -> ternary-decode runs are
made and the first rate whose mean decoded BER meets the target is kept.
The Rayleigh pdf then turns that profile into a rate pmf, an average rate and
an operating table (Eb/N0, average rate, coding gain).

Per-trial seeds come from ``numpy.random.SeedSequence([seed, rate_index,
trial_index])``. The SNR index is deliberately left out so every SNR point
sees the same graphs and the same uniform draws (common random numbers):
flip sets are nested as SNR grows, which keeps profiles close to monotone.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel
from .channel import crossover_prob, db, undb
from .degree import default_distribution
from .errors import InsufficientCoverage, LTEnergyError
from .lt_codec import DEFAULT_MAX_ITERATIONS, build_graph, encode, propagate

log = logging.getLogger(__name__)

DEFAULT_K = 1024
DEFAULT_TRIALS = 200
DEFAULT_RATE_GRID = tuple(round(0.97 - 0.01 * i, 2) for i in range(97))
DEFAULT_GAMMA_GRID_DB = tuple(-10.0 + 0.5 * i for i in range(121))
COVERAGE = 0.999


def trial_seeds(seed, rate_index, trial_index):
    """Two 64-bit seeds (graph, noise) for one trial; independent of scheduling."""
    state = np.random.SeedSequence([seed, rate_index, trial_index]).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def gamma_grid(lo, hi, step):
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + step * i, 10) for i in range(count)]


class _TrialRunner:
    """Runs seeded trials at one (rate, crossover) point; caches noiseless outcomes."""

    def __init__(self, k, dist, seed, max_iterations):
        self.k = k
        self.dist = dist
        self.seed = seed
        self.max_iterations = max_iterations
        self._noiseless = {}

    def errors(self, rate_index, n, trial_indices, p):
        """Decoded bit errors per trial (unresolved bits count half)."""
        out = np.empty(len(trial_indices))
        pending = []
        for slot, t in enumerate(trial_indices):
            graph_seed, noise_seed = trial_seeds(self.seed, rate_index, t)
            rng = np.random.default_rng(noise_seed)
            message = rng.integers(0, 2, self.k, dtype=np.uint8)
            flips = rng.random(n) < p
            if not flips.any() and (rate_index, t) in self._noiseless:
                out[slot] = self._noiseless[(rate_index, t)]
                continue
            pending.append((slot, t, graph_seed, message, flips))
        if pending:
            values = self._decode_batch(n, pending)
            for (slot, t, _, _, flips), v in zip(pending, values):
                out[slot] = v
                if not flips.any():
                    self._noiseless[(rate_index, t)] = v
        return out

    def _decode_batch(self, n, pending):
        # one disjoint union of all pending graphs; components do not interact
        k = self.k
        ins, degs, received, truths = [], [], [], []
        for i, (_, _, graph_seed, message, flips) in enumerate(pending):
            graph = build_graph(k, n, self.dist, graph_seed)
            coded = encode(message, graph)
            received.append((1 - 2 * (coded ^ flips)).astype(np.int8))
            ins.append(graph.neighbors + i * k)
            degs.append(graph.degrees)
            truths.append(message)
        degrees = np.concatenate(degs)
        offsets = np.zeros(degrees.shape[0] + 1, dtype=np.int64)
        np.cumsum(degrees, out=offsets[1:])
        out_of_edge = np.repeat(np.arange(degrees.shape[0]), degrees)
        aggregate, _ = propagate(
            out_of_edge, np.concatenate(ins), offsets, np.concatenate(received), k * len(pending), self.max_iterations
        )
        aggregate = aggregate.reshape(len(pending), k)
        truth = 1 - 2 * np.stack(truths).astype(np.int8)
        wrong = np.count_nonzero(aggregate == -truth, axis=1)
        unresolved = np.count_nonzero(aggregate == 0, axis=1)
        return wrong + 0.5 * unresolved


def _min_rate(runner, p, target_ber, trials, rate_grid):
    k = runner.k
    budget = target_ber * k * trials
    for ri, r in enumerate(rate_grid):
        n = math.ceil(k / r - 1e-9)
        total = 0.0
        done = 0
        chunk = 1
        while done < trials:
            idx = list(range(done, min(trials, done + chunk)))
            total += float(runner.errors(ri, n, idx, p).sum())
            done += len(idx)
            if total > budget:
                break
            chunk = min(chunk * 2, 32)
        if total <= budget:
            return r
    return None


def _check_rate_grid(rate_grid):
    grid = list(rate_grid)
    if not grid or any(not 0 < r <= 1 for r in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise LTEnergyError("rate grid must be strictly decreasing within (0, 1]")
    return grid


def min_rate_at_snr(
    gamma,
    M,
    target_ber,
    k=DEFAULT_K,
    trials=DEFAULT_TRIALS,
    rate_grid=DEFAULT_RATE_GRID,
    seed=0,
    dist=None,
    max_iterations=DEFAULT_MAX_ITERATIONS,
):
    """Highest rate on ``rate_grid`` whose mean decoded BER is <= ``target_ber``, or None."""
    if trials < 1:
        raise LTEnergyError("trials must be >= 1")
    if k < 64:
        raise LTEnergyError("k must be >= 64")
    grid = _check_rate_grid(rate_grid)
    runner = _TrialRunner(k, dist or default_distribution(), seed, max_iterations)
    return _min_rate(runner, crossover_prob(gamma, M), target_ber, trials, grid)


@dataclass
class RateProfile:
    M: int
    target_ber: float
    k: int
    rate_grid: tuple
    # (gamma_db, min_rate or None), gamma ascending
    entries: list
    raw_entries: list = field(default_factory=list, repr=False)

    @property
    def gammas_db(self):
        return [g for g, _ in self.entries]

    def rate_values(self):
        return np.array([0.0 if r is None else r for _, r in self.entries])

    def to_csv_rows(self):
        return [("gamma_db", "min_rate")] + [(g, "NONE" if r is None else r) for g, r in self.entries]


def isotonic(entries):
    """Running maximum over ascending SNR; None counts as rate 0."""
    out = []
    best = None
    for g, r in entries:
        if r is not None and (best is None or r > best):
            best = r
        elif r != best:
            log.info("profile inversion at %.2f dB: %s raised to %s", g, r, best)
        out.append((g, best))
    return out


def _profile_worker(args):
    gammas_db, M, target_ber, k, trials, grid, seed, dist, max_iterations = args
    runner = _TrialRunner(k, dist, seed, max_iterations)
    return [_min_rate(runner, crossover_prob(undb(g), M), target_ber, trials, grid) for g in gammas_db]


def build_profile(
    gamma_grid_db=DEFAULT_GAMMA_GRID_DB,
    M=2,
    target_ber=1e-3,
    k=DEFAULT_K,
    trials=DEFAULT_TRIALS,
    rate_grid=DEFAULT_RATE_GRID,
    seed=0,
    dist=None,
    max_iterations=DEFAULT_MAX_ITERATIONS,
    workers=1,
):
    """Run ``min_rate_at_snr`` over an ascending SNR grid (dB) and make it monotone."""
    gammas = [float(g) for g in gamma_grid_db]
    if not gammas or any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise LTEnergyError("gamma grid must be non-empty and strictly ascending")
    if trials < 1 or k < 64:
        raise LTEnergyError("need trials >= 1 and k >= 64")
    grid = tuple(_check_rate_grid(rate_grid))
    dist = dist or default_distribution()
    if workers > 1 and len(gammas) > 1:
        # interleave so each worker gets a mix of cheap and expensive points
        parts = [gammas[i::workers] for i in range(workers)]
        jobs = [(part, M, target_ber, k, trials, grid, seed, dist, max_iterations) for part in parts]
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_profile_worker, jobs))
        raw = [None] * len(gammas)
        for i in range(workers):
            raw[i::workers] = results[i]
    else:
        raw = _profile_worker((gammas, M, target_ber, k, trials, grid, seed, dist, max_iterations))
    raw_entries = list(zip(gammas, raw))
    return RateProfile(M, target_ber, k, grid, isotonic(raw_entries), raw_entries)


@dataclass(frozen=True)
class RatePmf:
    avg_ebn0_db: float
    # (rate, probability), rate ascending; rate 0 collects "no rate decodes"
    bins: tuple

    @property
    def total(self):
        return sum(p for _, p in self.bins)

    def to_csv_rows(self):
        return [("rate", "prob")] + list(self.bins)


def symbol_snr_db(ebn0_db, M):
    """Mean symbol SNR (dB) used for an Eb/N0 operating point."""
    return ebn0_db - db(math.log2(M))


def _cell_masses(profile, mean_snr):
    g = np.array([undb(x) for x in profile.gammas_db])
    cdf = -np.expm1(-g / mean_snr)
    masses = np.empty(len(g))
    masses[:-1] = np.diff(cdf)
    masses[-1] = 1.0 - cdf[-1]
    below = cdf[0]
    return masses, below


def rate_pmf(profile, avg_ebn0_db, M):
    """Probability of each rate bin when the instantaneous SNR is exponential.

    Cell i spans [gamma_i, gamma_{i+1}) and carries the rate found at gamma_i;
    mass above the grid goes to the last entry and mass below it to the first.
    """
    mean_snr = undb(symbol_snr_db(avg_ebn0_db, M))
    masses, below = _cell_masses(profile, mean_snr)
    rates = profile.rate_values()
    if rates[0] > 0 and below > 1.0 - COVERAGE:
        raise InsufficientCoverage(
            f"{below:.3g} of the SNR mass lies below {profile.gammas_db[0]} dB where the profile is unknown"
        )
    masses[0] += below
    support = [0.0] + sorted(profile.rate_grid)
    probs = dict.fromkeys(support, 0.0)
    for r, m in zip(rates, masses):
        probs[float(r)] += m
    return RatePmf(avg_ebn0_db, tuple((r, probs[r]) for r in support))


def resampled_pmf(profile, avg_ebn0_db, M, draws, rng):
    """Monte Carlo counterpart of ``rate_pmf``: draw SNRs, look up rates, histogram."""
    mean_snr = undb(symbol_snr_db(avg_ebn0_db, M))
    g = np.array([undb(x) for x in profile.gammas_db])
    gamma = channel.sample_instant_snr(mean_snr, rng, draws)
    idx = np.clip(np.searchsorted(g, gamma, side="right") - 1, 0, len(g) - 1)
    rates = profile.rate_values()[idx]
    support = [0.0] + sorted(profile.rate_grid)
    counts = {r: 0 for r in support}
    values, c = np.unique(rates, return_counts=True)
    for v, cnt in zip(values, c):
        counts[float(v)] += int(cnt)
    return RatePmf(avg_ebn0_db, tuple((r, counts[r] / draws) for r in support))


def total_variation(pmf_a, pmf_b):
    a = dict(pmf_a.bins)
    b = dict(pmf_b.bins)
    return 0.5 * sum(abs(a.get(r, 0.0) - b.get(r, 0.0)) for r in set(a) | set(b))


def average_rate(pmf):
    return float(sum(r * p for r, p in pmf.bins))


def lt_coding_gain(ebn0_db, M, target_ber):
    """Required uncoded average SNR minus the operating symbol SNR, in dB."""
    return db(channel.required_avg_snr_exact(target_ber, M)) - symbol_snr_db(ebn0_db, M)


@dataclass(frozen=True)
class OperatingRow:
    ebn0_db: float
    average_rate: float
    gain_db: float

    def __post_init__(self):
        if not 0 <= self.average_rate <= 1:
            raise LTEnergyError(f"average rate {self.average_rate!r} outside [0, 1]")


def lt_operating_table(M, target_ber, ebn0_list, profile):
    """One (Eb/N0, average rate, gain) row per operating point, sorted by Eb/N0."""
    if profile.M != M:
        raise LTEnergyError(f"profile is for M={profile.M}, not {M}")
    required_db = db(channel.required_avg_snr_exact(target_ber, M))
    rows = []
    for e in sorted(float(x) for x in ebn0_list):
        rows.append(OperatingRow(e, average_rate(rate_pmf(profile, e, M)), required_db - symbol_snr_db(e, M)))
    return rows
