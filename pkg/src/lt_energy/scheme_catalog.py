"""Built-in parameter defaults, published code tables and config-file ingestion.

Config files are flat ``key=value`` lines; ``#`` starts a comment. Unknown keys
are rejected so typos do not silently fall back to defaults.
"""

import csv
import io
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources

from .channel import ChannelParams
from .degree import BSC_TERNARY_V1, make_distribution, parse_distribution
from .energy_model import BestOf, FixedRate, Rateless, SystemParams, Uncoded
from .errors import BadValue, LTEnergyError, MissingCell, UnknownCode, UnknownKey, UnknownScheme, UnreadableFile
from .rate_profile import DEFAULT_K, DEFAULT_TRIALS, OperatingRow

PUBLISHED_BERS = (1e-3, 1e-4)

# config key -> (SystemParams / ChannelParams field, converter)
_PARAM_KEYS = {
    "bandwidth_hz": ("bandwidth_hz", float),
    "n_bits": ("n_bits", int),
    "t_n_s": ("t_n", float),
    "t_tr_s": ("t_tr", float),
    "alpha": ("alpha", float),
    "p_sy_w": ("p_sy", float),
    "p_filt_w": ("p_filt", float),
    "p_filr_w": ("p_filr", float),
    "p_lna_w": ("p_lna", float),
    "p_ed_w": ("p_ed", float),
    "p_ifa_w": ("p_ifa", float),
    "p_adc_w": ("p_adc", float),
    "target_ber": ("target_ber", float),
}
_CHANNEL_KEYS = {
    "eta": ("eta", float),
    "ml_db": ("ml_db", float),
    "l1_db": ("l1_db", float),
    "omega": ("omega", float),
    "n0_dbm_hz": ("n0", lambda v: 10 ** ((float(v) - 30.0) / 10.0)),
}
_POSITIVE = {"bandwidth_hz", "n_bits", "t_n_s", "eta", "omega", "lt.k", "lt.trials"}
_NON_NEGATIVE = {"t_tr_s", "alpha", "p_sy_w", "p_filt_w", "p_filr_w", "p_lna_w", "p_ed_w", "p_ifa_w", "p_adc_w"}


@dataclass(frozen=True)
class Config:
    params: SystemParams = field(default_factory=SystemParams)
    lt_k: int = DEFAULT_K
    lt_trials: int = DEFAULT_TRIALS
    lt_seed: int = 0
    degree_dist: str = "bsc-ternary-v1"
    e_enc: dict = field(default_factory=dict)
    e_dec: dict = field(default_factory=dict)
    source: str | None = None

    def distribution(self):
        return parse_distribution(self.degree_dist)

    def computation(self, scheme_name):
        return self.e_enc.get(scheme_name, 0.0), self.e_dec.get(scheme_name, 0.0)

    def dump(self):
        """Every resolved setting as ``key=value`` lines, in a fixed order."""
        p = self.params
        ch = p.channel
        lines = [
            f"bandwidth_hz={p.bandwidth_hz!r}",
            f"n_bits={p.n_bits!r}",
            f"t_n_s={p.t_n!r}",
            f"t_tr_s={p.t_tr!r}",
            f"alpha={p.alpha!r}",
            f"eta={ch.eta!r}",
            f"ml_db={ch.ml_db!r}",
            f"l1_db={ch.l1_db!r}",
            f"omega={ch.omega!r}",
            f"n0_dbm_hz={10 * math.log10(ch.n0) + 30:.6f}",
        ]
        for key, (attr, _) in _PARAM_KEYS.items():
            if key.startswith("p_") or key == "target_ber":
                lines.append(f"{key}={getattr(p, attr)!r}")
        lines += [f"lt.k={self.lt_k}", f"lt.trials={self.lt_trials}", f"lt.seed={self.lt_seed}"]
        lines += [f"e_enc_j_per_bit.{k}={v!r}" for k, v in sorted(self.e_enc.items())]
        lines += [f"e_dec_j_per_bit.{k}={v!r}" for k, v in sorted(self.e_dec.items())]
        lines.append(f"degree.dist={self.degree_dist}")
        return "\n".join(lines) + "\n"


def _convert(key, raw, conv):
    try:
        value = conv(raw)
    except ValueError:
        raise BadValue(key) from None
    if isinstance(value, float) and not math.isfinite(value):
        raise BadValue(key)
    if key in _POSITIVE and not value > 0:
        raise BadValue(key)
    if key in _NON_NEGATIVE and value < 0:
        raise BadValue(key)
    return value


def parse_config(text, source=None):
    params = {}
    chan = {}
    extra = {"e_enc": {}, "e_dec": {}}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadValue(f"line {lineno}: expected key=value")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key in _PARAM_KEYS:
            attr, conv = _PARAM_KEYS[key]
            params[attr] = _convert(key, raw, conv)
        elif key in _CHANNEL_KEYS:
            attr, conv = _CHANNEL_KEYS[key]
            chan[attr] = _convert(key, raw, conv)
        elif key in ("lt.k", "lt.trials", "lt.seed"):
            extra["lt_" + key[3:]] = _convert(key, raw, int)
        elif key.startswith(("e_enc_j_per_bit.", "e_dec_j_per_bit.")):
            which, _, scheme = key.partition(".")
            value = _convert(key, raw, float)
            if value < 0 or not scheme:
                raise BadValue(key)
            extra[which[:5]][scheme] = value
        elif key == "degree.dist":
            try:
                parse_distribution(raw)
            except LTEnergyError:
                raise BadValue(key) from None
            extra["degree_dist"] = raw.strip().strip('"')
        else:
            raise UnknownKey(key)
    if "target_ber" in params and not 0 < params["target_ber"] < 0.5:
        raise BadValue("target_ber")
    try:
        channel = ChannelParams(**chan)
        sys = SystemParams(channel=channel, **params)
    except LTEnergyError as exc:
        raise BadValue(str(exc)) from None
    if extra.get("lt_k", DEFAULT_K) < 64:
        raise BadValue("lt.k")
    return Config(params=sys, source=source, **extra)


def load_config(path=None):
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc.strerror}") from None
    return parse_config(text, source=str(path))


def load_params(path=None):
    """System parameters: built-in defaults overridden by the file at ``path``."""
    return load_config(path).params


# ---- published tables -------------------------------------------------------


def _read_data(name):
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class GainTable:
    code_name: str
    family: str
    rate: float
    # (M, ber) -> gain dB
    entries: dict

    def validate(self):
        for ber in {b for _, b in self.entries}:
            ms = sorted(m for m, b in self.entries if b == ber)
            gains = [self.entries[(m, ber)] for m in ms]
            if any(not math.isfinite(g) for g in gains):
                raise LTEnergyError(f"{self.code_name}: non-finite gain")
            if any(b > a for a, b in zip(gains, gains[1:])):
                raise LTEnergyError(f"{self.code_name}: gain increases with M at BER {ber}")


def parse_gain_tables(text):
    tables = {}
    for row in csv.DictReader(io.StringIO(text)):
        name = row["code"]
        entry = tables.setdefault(name, {"family": row["family"], "rate": float(row["rate"]), "entries": {}})
        entry["entries"][(int(row["m"]), float(row["ber"]))] = float(row["gain_db"])
    out = {}
    for name, e in tables.items():
        table = GainTable(name, e["family"], e["rate"], e["entries"])
        table.validate()
        out[name] = table
    return out


def export_gain_tables(tables):
    buf = io.StringIO()
    buf.write("code,family,rate,m,ber,gain_db\n")
    for t in tables.values():
        for (m, ber), g in sorted(t.entries.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
            buf.write(f'"{t.code_name}",{t.family},{t.rate!r},{m},{ber:.0e},{g!r}\n')
    return buf.getvalue()


_GAIN_TABLES = None


def gain_tables():
    global _GAIN_TABLES
    if _GAIN_TABLES is None:
        _GAIN_TABLES = parse_gain_tables(_read_data("code_gains.csv"))
    return _GAIN_TABLES


def _canonical(name):
    return re.sub(r"\s+", " ", name.strip())


def lookup_code(code_name):
    tables = gain_tables()
    name = _canonical(code_name)
    if name in tables:
        return tables[name]
    # allow "bch:(15,7,2)" style shorthands
    if name.startswith("(") and "BCH" + name in tables:
        return tables["BCH" + name]
    raise UnknownCode(code_name)


def fixed_gain(code_name, M, target_ber):
    """(rate, gain dB) of a published code at M and one of the published BERs."""
    t = lookup_code(code_name)
    for ber in PUBLISHED_BERS:
        if math.isclose(target_ber, ber, rel_tol=1e-9) and (M, ber) in t.entries:
            return t.rate, t.entries[(M, ber)]
    raise MissingCell(f"{t.code_name} has no cell for M={M}, BER={target_ber}")


def fixed_scheme(code_name, e_enc=0.0, e_dec=0.0):
    t = lookup_code(code_name)
    return FixedRate(t.code_name, t.rate, dict(t.entries), e_enc, e_dec)


def operating_tables_from_text(text):
    tables = {}
    for row in csv.DictReader(io.StringIO(text)):
        M = int(row["m"]) if "m" in row else None
        tables.setdefault(M, []).append(
            OperatingRow(float(row["ebn0_db"]), float(row["avg_rate"]), float(row["gain_db"]))
        )
    return tables


def published_lt_tables():
    """Average rate and coding gain of the LT code at BER 1e-3 for M = 2, 4, 8, 16."""
    return operating_tables_from_text(_read_data("lt_operating.csv"))


def lt_scheme(tables=None, e_enc=0.0, e_dec=0.0):
    return Rateless("lt", tables if tables is not None else published_lt_tables(), e_enc, e_dec)


def computation_energy(n_o, n_c, e_hz, block_bits):
    """Encoder or decoder energy per information bit from a cycle-count model.

    Energy per operation is (n_c / n_o) * e_hz and a block costs n_o operations,
    so n_o cancels.
    """
    e_operation = n_c / n_o * e_hz
    return n_o * e_operation / block_bits


def resolve_scheme(token, config=None, lt_tables=None):
    """Turn a CLI scheme token into a scheme object.

    Tokens: ``uncoded``, ``lt``, ``bch:NAME``, ``conv:NAME``, and ``bch:best``,
    ``conv:best``, ``fixed:best`` for the pointwise cheapest published code.
    """
    config = config or Config()
    token = token.strip()

    def with_comp(scheme, key):
        e_enc, e_dec = config.computation(key)
        return replace(scheme, e_enc=e_enc, e_dec=e_dec)

    if token == "uncoded":
        return with_comp(Uncoded(), "uncoded")
    if token == "lt":
        return with_comp(lt_scheme(lt_tables), "lt")
    family, sep, name = token.partition(":")
    if not sep or family not in ("bch", "conv", "fixed"):
        raise UnknownScheme(token)
    if name == "best":
        members = tuple(
            with_comp(fixed_scheme(t.code_name), t.code_name)
            for t in gain_tables().values()
            if family == "fixed" or t.family == family
        )
        return BestOf(token, members)
    if family == "fixed":
        raise UnknownScheme(token)
    try:
        table = lookup_code(name)
    except UnknownCode:
        raise UnknownScheme(token) from None
    if table.family != family:
        raise UnknownScheme(token)
    return with_comp(fixed_scheme(table.code_name), table.code_name)


def default_degree_distribution():
    return make_distribution(BSC_TERNARY_V1)
