"""Output-node degree distributions for LT codes."""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDistribution, LTEnergyError, NonPositiveProbability, NotNormalized

_SUM_TOL = 1e-9

# hard-decision ternary decoder on a BSC
BSC_TERNARY_V1 = (
    (1, 0.00466),
    (2, 0.55545),
    (3, 0.09743),
    (5, 0.17506),
    (8, 0.03774),
    (14, 0.08202),
    (33, 0.01775),
    (100, 0.02989),
)

BUILTIN = {"bsc-ternary-v1": BSC_TERNARY_V1}


@dataclass(frozen=True)
class DegreeDistribution:
    degrees: np.ndarray
    probs: np.ndarray
    _cdf: np.ndarray = field(repr=False, compare=False)

    @property
    def entries(self):
        return [(int(d), float(p)) for d, p in zip(self.degrees, self.probs)]

    @property
    def max_degree(self):
        return int(self.degrees[-1])

    def sample(self, rng, size=None):
        """Inverse-CDF draw of one degree (``size=None``) or an array of them."""
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        out = self.degrees[np.minimum(idx, len(self.degrees) - 1)]
        return int(out) if size is None else out

    def to_literal(self):
        return ",".join(f"{d}:{p!r}" for d, p in self.entries)


def make_distribution(entries):
    """Validate ``(degree, probability)`` pairs; no renormalization is applied."""
    entries = list(entries)
    if not entries:
        raise EmptyDistribution("degree distribution needs at least one entry")
    entries.sort(key=lambda e: e[0])
    degrees = np.array([int(d) for d, _ in entries], dtype=np.int64)
    probs = np.array([float(p) for _, p in entries], dtype=np.float64)
    if degrees[0] < 1:
        raise LTEnergyError(f"degrees must be >= 1, got {degrees[0]}")
    if np.any(np.diff(degrees) <= 0):
        raise LTEnergyError("degrees must be distinct")
    if np.any(~(probs > 0)):
        raise NonPositiveProbability(f"non-positive probability in {entries!r}")
    total = float(np.sum(probs))
    if abs(total - 1.0) > _SUM_TOL:
        raise NotNormalized(total)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    degrees.setflags(write=False)
    probs.setflags(write=False)
    cdf.setflags(write=False)
    return DegreeDistribution(degrees, probs, cdf)


def parse_distribution(text):
    """Parse ``"1:0.00466,2:0.55545,..."`` or a built-in name."""
    text = text.strip().strip('"').strip("'")
    if text in BUILTIN:
        return make_distribution(BUILTIN[text])
    entries = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        d, _, p = item.partition(":")
        try:
            entries.append((int(d), float(p)))
        except ValueError as exc:
            raise LTEnergyError(f"bad distribution entry {item!r}") from exc
    return make_distribution(entries)


def default_distribution():
    return make_distribution(BSC_TERNARY_V1)


def sample_degree(dist, rng):
    return dist.sample(rng)


def mean_degree(dist):
    return float(np.dot(dist.degrees, dist.probs))


def asymptotic_rate(out_dist, in_dist):
    """k/n implied by edge conservation: mean output degree over mean input degree."""
    return mean_degree(out_dist) / mean_degree(in_dist)


def empirical_distribution(degree_counts):
    """Distribution of observed node degrees; zero-degree nodes are dropped."""
    values, counts = np.unique(np.asarray(degree_counts), return_counts=True)
    keep = values > 0
    values, counts = values[keep], counts[keep]
    probs = counts / counts.sum()
    # float division can leave the sum a few ulps off
    probs[-1] = 1.0 - probs[:-1].sum()
    return make_distribution(zip(values.tolist(), probs.tolist()))
