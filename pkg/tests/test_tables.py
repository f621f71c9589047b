import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fellerfpt import EXAMPLES
from fellerfpt.feller import FellerParams
from fellerfpt.laguerre import PdfTable
from fellerfpt.simulate import FptSample
from fellerfpt.tables import (
    bundled_params,
    parse_params_text,
    read_params_file,
    read_pdf,
    read_sample_csv,
    write_pdf_csv,
    write_pdf_json,
    write_sample_csv,
)

finite = st.floats(min_value=-1e300, max_value=1e300, allow_nan=False, allow_infinity=False)


@settings(max_examples=30, deadline=None)
@given(values=st.lists(finite, min_size=2, max_size=40))
@pytest.mark.parametrize("writer,suffix", [(write_pdf_csv, ".csv"), (write_pdf_json, ".json")])
def test_pdf_round_trip_is_exact(tmp_path_factory, writer, suffix, values):
    grid = np.cumsum(np.full(len(values), 0.37)) + 1e-3
    table = PdfTable(grid, np.array(values), source="approximant", params={"alpha": 0.5, "note": "x"})
    path = tmp_path_factory.mktemp("t") / f"table{suffix}"
    writer(table, path, manifest="m.json")
    back = read_pdf(path)
    assert np.array_equal(back.grid, table.grid)
    assert np.array_equal(back.values, table.values)
    assert back.flags == table.flags
    assert back.source == "approximant" and back.params == table.params


def test_sample_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    times = rng.exponential(size=100)
    cens = times > 2.5
    s = FptSample(np.where(cens, 2.5, times), cens, 2.5, 1e-2, reflections=3)
    write_sample_csv(s, tmp_path / "s.csv")
    back = read_sample_csv(tmp_path / "s.csv")
    assert np.array_equal(back.times, s.times)
    assert np.array_equal(back.censored, s.censored)
    assert (back.t_max, back.dt, back.reflections) == (2.5, 1e-2, 3)


def test_read_rejects_foreign_csv(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_pdf(tmp_path / "x.csv")


def test_params_parsing():
    text = "# comment\nmu = 0.9  # trailing\n\ntau=2\n"
    assert parse_params_text(text) == {"mu": "0.9", "tau": "2"}
    with pytest.raises(ValueError, match="line 1|:1:"):
        parse_params_text("mu 0.9")
    with pytest.raises(ValueError):
        parse_params_text("mu =")


def test_bundled_examples_match_constants():
    assert bundled_params() == ["example1", "example2", "example2-sigma2", "example3"]
    for name in bundled_params():
        raw = read_params_file(name)
        p = FellerParams.from_mapping({k: float(raw[k]) for k in ("mu", "tau", "sigma", "c", "y0", "S")})
        for k, v in EXAMPLES[name].items():
            assert getattr(p, k) == pytest.approx(v, rel=1e-15)
        assert int(raw["seed"]) == 20240417


def test_missing_params_file():
    with pytest.raises(FileNotFoundError):
        read_params_file("no-such-example")


def test_params_file_from_path(tmp_path):
    f = tmp_path / "p.params"
    f.write_text("mu = 1\n")
    assert read_params_file(f) == {"mu": "1"}
