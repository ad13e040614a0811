"""Link-level math for non-coherent MFSK over Rayleigh flat fading with path loss.

SNR values are linear unless a name ends in ``_db``. The alternating binomial
series below cancel catastrophically in double precision for large M, so they
are summed with mpmath and only the result is converted back to float.
"""

from dataclasses import dataclass
from math import comb, log10

import mpmath
import numpy as np
from scipy import optimize

from .errors import BerOutOfRange, LTEnergyError, NoConvergence, NonPositiveDistance, UnsupportedM

SUPPORTED_M = (2, 4, 8, 16, 32, 64)

_DPS = 50
# bisection bracket for SNR inversions, dB
_SNR_LO_DB = -10.0
_SNR_HI_DB = 80.0


def db(x):
    return 10.0 * log10(x)


def undb(x_db):
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Path-loss and noise constants.

    ``n0`` is in W/Hz. Antenna gains and wavelength are folded into ``l1_db``.
    """

    eta: float = 3.5
    ml_db: float = 40.0
    l1_db: float = 30.0
    omega: float = 1.0
    n0: float = 1e-21

    def __post_init__(self):
        for name in ("eta", "omega", "n0"):
            if not getattr(self, name) > 0:
                raise LTEnergyError(f"{name} must be positive, got {getattr(self, name)!r}")


def _check_m(M):
    if M not in SUPPORTED_M:
        raise UnsupportedM(f"M={M!r} not in {SUPPORTED_M}")


def path_loss(d, params):
    """Linear power ratio P_t/P_r at distance ``d`` metres."""
    if not d > 0:
        raise NonPositiveDistance(f"distance must be positive, got {d!r}")
    return undb(params.ml_db) * d**params.eta * undb(params.l1_db)


def sample_instant_snr(avg_snr, rng, size=None):
    """Draw instantaneous SNR; exponential with mean ``avg_snr`` under Rayleigh fading."""
    return rng.exponential(avg_snr, size)


def ser_instantaneous(gamma, M):
    """Symbol error probability of non-coherent MFSK at fixed SNR ``gamma``."""
    _check_m(M)
    if gamma < 0:
        raise LTEnergyError(f"gamma must be >= 0, got {gamma!r}")
    with mpmath.workdps(_DPS):
        g = mpmath.mpf(gamma)
        total = mpmath.fsum(
            (-1) ** (j + 1) * comb(M - 1, j) * mpmath.exp(-j * g / (j + 1)) / (j + 1)
            for j in range(1, M)
        )
    return min(max(float(total), 0.0), 1.0)


def ser_rayleigh_avg(avg_gamma, M):
    """Symbol error probability averaged over exponential SNR with mean ``avg_gamma``."""
    _check_m(M)
    if avg_gamma < 0:
        raise LTEnergyError(f"avg_gamma must be >= 0, got {avg_gamma!r}")
    with mpmath.workdps(_DPS):
        g = mpmath.mpf(avg_gamma)
        total = mpmath.fsum(
            (-1) ** (j + 1) * comb(M - 1, j) / (j + 1 + j * g) for j in range(1, M)
        )
    return min(max(float(total), 0.0), 1.0)


def ser_to_ber_factor(M):
    return 2.0 * (M - 1) / M


def ber_ser_convert(value, M, direction):
    """Convert between symbol and bit error probability; ``direction`` is
    ``"ser->ber"`` or ``"ber->ser"``."""
    f = ser_to_ber_factor(M)
    if direction == "ser->ber":
        out = value / f
    elif direction == "ber->ser":
        out = value * f
    else:
        raise LTEnergyError(f"unknown direction {direction!r}")
    return min(max(out, 0.0), 1.0)


def _check_ber(target_ber, M):
    _check_m(M)
    if not 0 < target_ber < M / (2.0 * (M - 1)):
        raise BerOutOfRange(f"target BER {target_ber!r} out of range for M={M}")


def required_avg_snr_approx(target_ber, M):
    """Closed-form average SNR needed for ``target_ber``; used by the energy model."""
    _check_ber(target_ber, M)
    ps = ber_ser_convert(target_ber, M, "ber->ser")
    # expm1/log1p keep the bracket accurate when ps/(M-1) is tiny
    inner = -np.expm1(np.log1p(-ps) / (M - 1))
    return float(1.0 / inner - 2.0)


def required_avg_snr_exact(target_ber, M):
    """Average SNR at which the Rayleigh-averaged SER hits the target, by bisection in dB."""
    _check_ber(target_ber, M)
    ps = ber_ser_convert(target_ber, M, "ber->ser")

    def f(x_db):
        return ser_rayleigh_avg(undb(x_db), M) - ps

    if f(_SNR_LO_DB) * f(_SNR_HI_DB) > 0:
        raise NoConvergence(f"no root in [{_SNR_LO_DB}, {_SNR_HI_DB}] dB for BER {target_ber}, M={M}")
    try:
        root = optimize.bisect(f, _SNR_LO_DB, _SNR_HI_DB, xtol=1e-6, maxiter=200)
    except RuntimeError as exc:
        raise NoConvergence(str(exc)) from exc
    return undb(root)


def crossover_prob(gamma, M):
    """Per-bit hard-decision error probability at instantaneous SNR ``gamma``."""
    return ber_ser_convert(ser_instantaneous(gamma, M), M, "ser->ber")


def harden(bits, p, rng):
    """Map bits to +1/-1 trits (0 -> +1) and flip each sign with probability ``p``."""
    if not 0 <= p <= 0.5:
        raise LTEnergyError(f"crossover probability must be in [0, 0.5], got {p!r}")
    bits = np.asarray(bits, dtype=np.uint8)
    flips = rng.random(bits.shape[0]) < p
    return (1 - 2 * (bits ^ flips)).astype(np.int8)
