import math
import re
from importlib import resources
from pathlib import Path

import pytest

from lt_energy.energy_model import BestOf, FixedRate, Rateless, Uncoded
from lt_energy.errors import BadValue, MissingCell, UnknownCode, UnknownKey, UnknownScheme, UnreadableFile
from lt_energy.scheme_catalog import (
    computation_energy,
    export_gain_tables,
    fixed_gain,
    gain_tables,
    load_config,
    load_params,
    parse_config,
    parse_gain_tables,
    published_lt_tables,
    resolve_scheme,
)

PAPER = Path(__file__).resolve().parents[1] / "paper.md"


def _table_text():
    return resources.files("lt_energy").joinpath("data", "code_gains.csv").read_text(encoding="utf-8")


def test_default_params_field_by_field():
    p = load_params(None)
    assert p.bandwidth_hz == 62500
    assert p.n_bits == 8192
    assert p.t_n == 1.4
    assert p.t_tr == 5e-6
    assert p.alpha == 0.33
    assert p.p_sy == 10e-3
    assert p.p_filt == 2.5e-3
    assert p.p_filr == 2.5e-3
    assert p.p_lna == 9e-3
    assert p.p_ed == 3e-3
    assert p.p_ifa == 3e-3
    assert p.p_adc == 7e-3
    assert p.target_ber == 1e-3
    assert p.channel.eta == 3.5
    assert p.channel.omega == 1
    assert p.channel.ml_db == 40
    assert p.channel.l1_db == 30
    assert p.channel.n0 == pytest.approx(1e-21, rel=1e-12)


def test_override_and_comments(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("# comment line\neta=2.0   # trailing\n\n")
    p = load_params(cfg)
    assert p.channel.eta == 2.0
    assert p.bandwidth_hz == 62500 and p.channel.ml_db == 40


def test_bad_value_and_unknown_key():
    with pytest.raises(BadValue, match="eta"):
        parse_config("eta=-1")
    with pytest.raises(BadValue):
        parse_config("bandwidth_hz=fast")
    with pytest.raises(BadValue):
        parse_config("alpha=nan")
    with pytest.raises(BadValue):
        parse_config("target_ber=0.7")
    with pytest.raises(BadValue):
        parse_config("degree.dist=1:0.5")
    with pytest.raises(BadValue):
        parse_config("just words")
    with pytest.raises(UnknownKey):
        parse_config("etta=3")


def test_unreadable_file(tmp_path):
    with pytest.raises(UnreadableFile):
        load_config(tmp_path / "missing.cfg")


def test_all_documented_keys_accepted():
    text = "\n".join(
        [
            "bandwidth_hz=125000",
            "n_bits=4096",
            "t_n_s=2.0",
            "t_tr_s=1e-5",
            "alpha=0.5",
            "eta=3",
            "ml_db=35",
            "l1_db=25",
            "omega=2",
            "n0_dbm_hz=-174",
            "p_sy_w=0.02",
            "p_filt_w=0.001",
            "p_filr_w=0.001",
            "p_lna_w=0.01",
            "p_ed_w=0.002",
            "p_ifa_w=0.002",
            "p_adc_w=0.005",
            "target_ber=1e-4",
            "lt.k=512",
            "lt.trials=50",
            "lt.seed=9",
            "e_enc_j_per_bit.lt=1e-9",
            "e_dec_j_per_bit.lt=2e-9",
            'degree.dist="1:0.5,2:0.5"',
        ]
    )
    c = parse_config(text)
    assert c.params.bandwidth_hz == 125000 and c.params.n_bits == 4096
    assert c.params.channel.n0 == pytest.approx(10 ** (-17.4 - 3), rel=1e-12)
    assert (c.lt_k, c.lt_trials, c.lt_seed) == (512, 50, 9)
    assert c.computation("lt") == (1e-9, 2e-9)
    assert c.computation("uncoded") == (0.0, 0.0)
    assert c.distribution().entries == [(1, 0.5), (2, 0.5)]
    # the dump is itself a valid config that resolves to the same settings
    again = parse_config(c.dump())
    assert again.params == c.params
    assert again.dump() == c.dump()


def test_fixed_gain_examples():
    assert fixed_gain("BCH(15,7,2)", 2, 1e-3) == (0.467, 2.4)
    assert fixed_gain("trel(7,[133 171])", 2, 1e-4) == (0.5, 4.7)
    assert fixed_gain("BCH(7,4,1)", 16, 1e-3) == (0.571, 0.0)


def test_fixed_gain_errors():
    with pytest.raises(UnknownCode):
        fixed_gain("BCH(99,1,1)", 2, 1e-3)
    with pytest.raises(MissingCell):
        fixed_gain("BCH(15,7,2)", 2, 1e-5)
    with pytest.raises(MissingCell):
        fixed_gain("BCH(15,7,2)", 128, 1e-3)


def test_catalog_shape():
    tables = gain_tables()
    assert len(tables) == 14
    assert sum(t.family == "bch" for t in tables.values()) == 9
    for t in tables.values():
        assert len(t.entries) == 12
        assert all(math.isfinite(g) for g in t.entries.values())


def test_gain_monotone_in_m():
    for t in gain_tables().values():
        for ber in (1e-3, 1e-4):
            gains = [t.entries[(M, ber)] for M in (2, 4, 8, 16, 32, 64)]
            assert all(b <= a for a, b in zip(gains, gains[1:])), t.code_name


def test_increasing_gain_rejected():
    bad = 'code,family,rate,m,ber,gain_db\n"X",bch,0.5,2,1e-03,1.0\n"X",bch,0.5,4,1e-03,2.0\n'
    with pytest.raises(Exception, match="increases"):
        parse_gain_tables(bad)


def test_csv_round_trip_byte_identical():
    text = _table_text()
    assert export_gain_tables(parse_gain_tables(text)) == text


def _published_rows():
    """Parse the gain table rows out of paper.md into {name: [(g3, g4), ...]}."""
    rows = {}
    for line in PAPER.read_text(encoding="utf-8").splitlines():
        flat = line.replace("$", "").replace("~~", " ").replace("~", " ")
        m = re.match(r"\s*(BCH \(\d+,\d+,\d+\)|trel\(.*\))\s*&\s*([\d.]+)\s*&(.*)\\\\", flat)
        if not m:
            continue
        name = m.group(1).replace("BCH (", "BCH(")
        cells = re.findall(r"\((-?[\d.]+),(-?[\d.]+)\)", m.group(3).replace(" ", ""))
        rows[name] = (float(m.group(2)), [(float(a), float(b)) for a, b in cells])
    return rows


def test_cells_match_published_table():
    if not PAPER.exists():
        pytest.skip("paper.md not available")
    rows = _published_rows()
    tables = gain_tables()
    assert sorted(rows) == sorted(tables)
    for name, (rate, cells) in rows.items():
        t = tables[name]
        assert t.rate == rate
        assert len(cells) == 6
        for M, (g3, g4) in zip((2, 4, 8, 16, 32, 64), cells):
            assert t.entries[(M, 1e-3)] == g3
            assert t.entries[(M, 1e-4)] == g4


def test_computation_energy_examples():
    assert computation_energy(10, 100, 1e-9, 100) == pytest.approx(1e-9, rel=1e-12)
    assert computation_energy(10, 0, 1e-9, 100) == 0
    assert computation_energy(20, 100, 1e-9, 100) == computation_energy(10, 100, 1e-9, 100)


def test_published_lt_tables():
    tables = published_lt_tables()
    assert sorted(tables) == [2, 4, 8, 16]
    assert all(len(rows) == 21 for rows in tables.values())
    assert tables[2][5].ebn0_db == 10 and tables[2][5].average_rate == 0.5738
    assert tables[16][-1].gain_db == -1.52


def test_resolve_scheme_tokens():
    assert isinstance(resolve_scheme("uncoded"), Uncoded)
    assert isinstance(resolve_scheme("lt"), Rateless)
    conv = resolve_scheme("conv:trel(7,[133 171])")
    assert isinstance(conv, FixedRate) and conv.rate == 0.5
    assert isinstance(resolve_scheme("bch:BCH(15,7,2)"), FixedRate)
    assert isinstance(resolve_scheme("bch:(15,7,2)"), FixedRate)
    best = resolve_scheme("fixed:best")
    assert isinstance(best, BestOf) and len(best.members) == 14
    assert len(resolve_scheme("bch:best").members) == 9
    assert len(resolve_scheme("conv:best").members) == 5
    for bad in ("turbo", "bch:trel(7,[133 171])", "conv:BCH(7,4,1)", "fixed:BCH(7,4,1)", "bch:nope", ""):
        with pytest.raises(UnknownScheme):
            resolve_scheme(bad)


def test_resolve_scheme_uses_config_computation():
    cfg = parse_config("e_enc_j_per_bit.lt=3e-9\ne_dec_j_per_bit.trel(7,[133 171])=4e-9")
    assert resolve_scheme("lt", cfg).e_enc == 3e-9
    assert resolve_scheme("conv:trel(7,[133 171])", cfg).e_dec == 4e-9
