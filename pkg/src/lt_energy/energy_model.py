"""Total energy per duty-cycle period for uncoded, fixed-rate coded and LT coded MFSK.

Every evaluation returns an :class:`EnergyBreakdown`:

* rf: RF output energy including the (1 + alpha) amplifier overhead,
* circuit: transmitter and receiver circuits (amplifier excluded) over the active time,
* transient: both synthesizers during the sleep-to-active switch,
* computation: encoder and decoder work, N (E_enc + E_dec) / R_c.

Coding divides the RF term by (gain * rate) and the circuit and computation
terms by the rate.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .channel import ChannelParams, path_loss, required_avg_snr_approx, undb
from .errors import (
    BoundTooSmall,
    DurationOverflow,
    EmptyTable,
    LTEnergyError,
    MissingGain,
    MOutOfRange,
    NoCrossover,
)

M_LADDER = (2, 4, 8, 16, 32, 64)


@dataclass(frozen=True)
class SystemParams:
    bandwidth_hz: float = 62.5e3
    n_bits: int = 8192
    t_n: float = 1.4
    t_tr: float = 5e-6
    alpha: float = 0.33
    p_sy: float = 10e-3
    p_filt: float = 2.5e-3
    p_filr: float = 2.5e-3
    p_lna: float = 9e-3
    p_ed: float = 3e-3
    p_ifa: float = 3e-3
    p_adc: float = 7e-3
    channel: ChannelParams = field(default_factory=ChannelParams)
    target_ber: float = 1e-3

    def __post_init__(self):
        for name in ("p_sy", "p_filt", "p_filr", "p_lna", "p_ed", "p_ifa", "p_adc", "alpha", "t_tr"):
            if getattr(self, name) < 0:
                raise LTEnergyError(f"{name} must be >= 0")
        for name in ("bandwidth_hz", "n_bits", "t_n"):
            if not getattr(self, name) > 0:
                raise LTEnergyError(f"{name} must be positive")

    def circuit_power(self, M):
        """Transmitter plus receiver circuit power with the amplifier left out."""
        tx = self.p_sy + self.p_filt
        rx = self.p_lna + M * (self.p_filr + self.p_ed) + self.p_ifa + self.p_adc
        return tx + rx


@dataclass(frozen=True)
class Uncoded:
    name: str = "uncoded"
    e_enc: float = 0.0
    e_dec: float = 0.0

    def supported_m(self):
        return M_LADDER


@dataclass(frozen=True)
class FixedRate:
    """Block or convolutional code: one rate, a gain per (M, target BER)."""

    name: str
    rate: float
    gains_db: dict
    e_enc: float = 0.0
    e_dec: float = 0.0

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise LTEnergyError(f"rate of {self.name} must be in (0, 1], got {self.rate!r}")

    def gain_db(self, M, target_ber):
        try:
            return self.gains_db[(M, target_ber)]
        except KeyError:
            raise MissingGain(f"{self.name} has no gain for M={M}, BER={target_ber}") from None

    def supported_m(self):
        return tuple(sorted({m for m, _ in self.gains_db}))


@dataclass(frozen=True)
class Rateless:
    """LT code described by one operating table (rows of Eb/N0, rate, gain) per M."""

    name: str
    tables: dict
    e_enc: float = 0.0
    e_dec: float = 0.0

    def supported_m(self):
        return tuple(sorted(m for m, rows in self.tables.items() if rows))


@dataclass(frozen=True)
class BestOf:
    """Pointwise cheapest member; used for "best BCH", "best fixed-rate" and the like."""

    name: str
    members: tuple

    def supported_m(self):
        return tuple(sorted({m for s in self.members for m in s.supported_m()}))


@dataclass(frozen=True)
class EnergyBreakdown:
    rf: float
    circuit: float
    transient: float
    computation: float
    total: float
    chosen_m: int
    chosen_operating_row: object = None
    scheme: str = ""
    rate: float = 1.0

    @classmethod
    def of(cls, rf, circuit, transient, computation, M, row=None, scheme="", rate=1.0):
        return cls(rf, circuit, transient, computation, rf + circuit + transient + computation, M, row, scheme, rate)


def active_duration(M, n_bits, bandwidth_hz, rate=1.0):
    """Seconds spent transmitting N/rate bits with log2(M) bits per M/B-long symbol."""
    if M < 2 or M & (M - 1):
        raise MOutOfRange(f"M must be a power of two >= 2, got {M!r}")
    if not 0 < rate <= 1:
        raise LTEnergyError(f"rate must be in (0, 1], got {rate!r}")
    return M * n_bits / (bandwidth_hz * math.log2(M) * rate)


def compute_mmax(bandwidth_hz, n_bits, t_n, t_tr, rate=1.0):
    """Largest M = 2**b with 2**b / b no greater than B R / N (T_N / R - T_tr)."""
    bound = bandwidth_hz * rate / n_bits * (t_n / rate - t_tr)
    if bound < 2:
        raise BoundTooSmall(f"duty-cycle bound {bound:.4g} admits no constellation")
    b = 1
    while 2 ** (b + 1) / (b + 1) <= bound:
        b += 1
    return 2**b


def _rf_uncoded(d, M, sys):
    ch = sys.channel
    bracket = required_avg_snr_approx(sys.target_ber, M)
    return (1 + sys.alpha) * bracket * path_loss(d, ch) * ch.n0 / ch.omega * sys.n_bits / math.log2(M)


def _check_m(M, sys, rate=1.0):
    mmax = compute_mmax(sys.bandwidth_hz, sys.n_bits, sys.t_n, sys.t_tr, rate)
    if M not in M_LADDER or M > mmax:
        raise MOutOfRange(f"M={M} outside 2..{mmax}")
    t_ac = active_duration(M, sys.n_bits, sys.bandwidth_hz, rate)
    if t_ac > sys.t_n / rate - sys.t_tr:
        raise DurationOverflow(f"active period {t_ac:.4g} s exceeds {sys.t_n / rate - sys.t_tr:.4g} s")
    return t_ac


def uncoded_energy(d, M, sys, scheme=None):
    name = scheme.name if scheme is not None else "uncoded"
    t_ac = _check_m(M, sys)
    rf = _rf_uncoded(d, M, sys)
    circuit = sys.circuit_power(M) * t_ac
    transient = 2 * sys.p_sy * sys.t_tr
    return EnergyBreakdown.of(rf, circuit, transient, 0.0, M, scheme=name)


def _scale(d, M, sys, gain_db, rate, e_enc, e_dec, name, row=None):
    _check_m(M, sys, rate)
    base = uncoded_energy(d, M, sys)
    return EnergyBreakdown.of(
        base.rf / (undb(gain_db) * rate),
        base.circuit / rate,
        base.transient,
        sys.n_bits * (e_enc + e_dec) / rate,
        M,
        row,
        name,
        rate,
    )


def coded_energy(d, M, scheme, sys):
    gain = scheme.gain_db(M, sys.target_ber)
    return _scale(d, M, sys, gain, scheme.rate, scheme.e_enc, scheme.e_dec, scheme.name)


def lt_energy(d, M, scheme, sys):
    """Cheapest operating row of the LT table for this M."""
    rows = [r for r in scheme.tables.get(M, ()) if r.average_rate > 0]
    if not rows:
        raise EmptyTable(f"{scheme.name} has no usable operating rows for M={M}")
    best = None
    for row in rows:
        e = _scale(d, M, sys, row.gain_db, row.average_rate, scheme.e_enc, scheme.e_dec, scheme.name, row)
        if best is None or e.total < best.total:
            best = e
    return best


def energy(scheme, d, M, sys):
    """Dispatch on scheme kind for one (d, M) point."""
    if isinstance(scheme, Uncoded):
        return uncoded_energy(d, M, sys, scheme)
    if isinstance(scheme, FixedRate):
        return coded_energy(d, M, scheme, sys)
    if isinstance(scheme, Rateless):
        return lt_energy(d, M, scheme, sys)
    if isinstance(scheme, BestOf):
        candidates = [energy(s, d, M, sys) for s in scheme.members if M in s.supported_m()]
        if not candidates:
            raise MissingGain(f"no member of {scheme.name} supports M={M}")
        return min(candidates, key=lambda e: e.total)
    raise LTEnergyError(f"unknown scheme {scheme!r}")


def optimize_m(scheme, d, sys, candidates=None):
    """Exhaustive scan over M; ties go to the smaller M."""
    mmax = compute_mmax(sys.bandwidth_hz, sys.n_bits, sys.t_n, sys.t_tr)
    if candidates is None:
        candidates = [m for m in M_LADDER if m <= mmax]
    supported = set(scheme.supported_m())
    best = None
    for M in sorted(candidates):
        if M not in supported:
            continue
        e = energy(scheme, d, M, sys)
        if best is None or e.total < best.total:
            best = e
    if best is None:
        raise MOutOfRange(f"{scheme.name} supports none of M in {sorted(candidates)}")
    return best.chosen_m, best


def crossover_coefficients(M, sys):
    """Distance coefficient and circuit energy of the uncoded scheme at M.

    Uncoded total is a1 * d**eta + a2 + transient.
    """
    ch = sys.channel
    bracket = required_avg_snr_approx(sys.target_ber, M)
    a1 = (1 + sys.alpha) * bracket * undb(ch.l1_db) * undb(ch.ml_db) / math.log2(M) * sys.n_bits * ch.n0 / ch.omega
    a2 = sys.circuit_power(M) * active_duration(M, sys.n_bits, sys.bandwidth_hz)
    return a1, a2


def threshold_closed_form(scheme, M, sys):
    """Distance where a fixed-rate code at M and uncoded MFSK at M cost the same."""
    gain = undb(scheme.gain_db(M, sys.target_ber))
    rate = scheme.rate
    if gain * rate <= 1:
        raise NoCrossover(f"{scheme.name} at M={M}: gain*rate = {gain * rate:.4g} <= 1")
    a1, a2 = crossover_coefficients(M, sys)
    e_comp = sys.n_bits * (scheme.e_enc + scheme.e_dec)
    return (gain * (a2 * (1 - rate) + e_comp) / (a1 * (gain * rate - 1))) ** (1 / sys.channel.eta)


def _total(scheme, d, sys):
    return optimize_m(scheme, d, sys)[1].total


def threshold_numeric(scheme_a, scheme_b, sys, d_range=(1.0, 500.0), scan_points=33, xtol=1e-6):
    """First distance in ``d_range`` where the M-optimized totals of the two schemes cross.

    Scans a log-spaced grid for a strict sign change, then bisects. None when
    there is none.
    """
    lo, hi = d_range
    if not 0 < lo < hi:
        raise LTEnergyError(f"bad distance range {d_range!r}")

    def f(d):
        return _total(scheme_a, d, sys) - _total(scheme_b, d, sys)

    ds = np.geomspace(lo, hi, scan_points)
    values = [f(d) for d in ds]
    for (d0, f0), (d1, f1) in zip(zip(ds, values), zip(ds[1:], values[1:])):
        if f0 * f1 < 0:
            return optimize.bisect(f, d0, d1, xtol=xtol, maxiter=200)
    return None


def with_computation(scheme, e_enc, e_dec):
    return replace(scheme, e_enc=e_enc, e_dec=e_dec)
