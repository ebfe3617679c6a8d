import numpy as np
import pytest
from hypothesis import given, strategies as st

from hompcm.materials import (ComplexIndex, DispersionTable, MaterialError, MaterialRegistry,
                              default_registry, index_at, index_array, index_from_permittivity,
                              load_dispersion, mix_crystallinity, permittivity)


def write(tmp_path, text, name="m.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_two_row_constant_file(tmp_path):
    table = load_dispersion(write(tmp_path, "800,1.5,0\n820,1.5,0\n"), "const")
    assert len(table) == 2
    assert index_at(table, 810.0) == ComplexIndex(1.5, 0.0)


def test_header_supplies_id_and_source(tmp_path):
    p = write(tmp_path, "# material=foo source=handbook\n800,1.5,0\n820,1.6,0.1\n")
    table = load_dispersion(p)
    assert table.material_id == "foo"
    assert table.source == "handbook"


def test_non_monotone_file_rejected(tmp_path):
    with pytest.raises(MaterialError, match="non-monotone"):
        load_dispersion(write(tmp_path, "820,1.5,0\n800,1.5,0\n"))


def test_parse_error_reports_line(tmp_path):
    with pytest.raises(MaterialError, match=r":3:"):
        load_dispersion(write(tmp_path, "# material=x\n800,1.5,0\n810,abc,0\n"))


def test_negative_k_rejected(tmp_path):
    with pytest.raises(MaterialError, match="negative k"):
        load_dispersion(write(tmp_path, "800,1.5,0\n820,1.5,-0.1\n"))


def test_single_sample_rejected(tmp_path):
    with pytest.raises(MaterialError):
        load_dispersion(write(tmp_path, "800,1.5,0\n"))


def test_shipped_gete_tables_span_design_band():
    reg = default_registry()
    for mid in ("GeTe-crystalline", "GeTe-amorphous"):
        lo, hi = reg.table(mid).span
        assert lo <= 770 and hi >= 900


def test_index_at_node_is_exact():
    table = default_registry().table("GeTe-amorphous")
    i = 3
    idx = index_at(table, table.wavelength_nm[i])
    assert idx.n == table.n[i] and idx.k == table.k[i]


def test_index_at_midpoint_is_linear():
    table = DispersionTable("lin", [800.0, 820.0], [2.0, 4.0], [0.0, 1.0])
    assert index_at(table, 810.0) == ComplexIndex(3.0, 0.5)


def test_index_out_of_range():
    table = DispersionTable("lin", [800.0, 820.0], [2.0, 4.0], [0.0, 1.0])
    with pytest.raises(MaterialError, match="outside"):
        index_at(table, 830.0)
    with pytest.raises(MaterialError):
        index_array(table, [805.0, 799.0])


def test_index_array_matches_scalar():
    table = default_registry().table("Au")
    wl = np.linspace(750, 950, 17)
    arr = index_array(table, wl)
    for w, v in zip(wl, arr):
        assert v == index_at(table, w).value


def test_complex_index_invariants():
    with pytest.raises(MaterialError):
        ComplexIndex(1.5, -0.1)
    with pytest.raises(MaterialError):
        ComplexIndex(0.0, 0.1)


def test_permittivity_examples():
    assert permittivity(ComplexIndex(2.0, 0.0)) == 4.0
    assert permittivity(ComplexIndex(1.0, 1.0)) == 2j
    assert permittivity(ComplexIndex(4.7, 3.25)) == pytest.approx(4.7**2 - 3.25**2 + 2j * 4.7 * 3.25)


@given(st.floats(0.05, 8.0), st.floats(0.0, 8.0))
def test_permittivity_roundtrip(n, k):
    idx = index_from_permittivity(permittivity(ComplexIndex(n, k)))
    assert idx.n == pytest.approx(n, rel=1e-12, abs=1e-12)
    assert idx.k == pytest.approx(k, rel=1e-12, abs=1e-12)


def test_index_from_permittivity_rejects_non_passive():
    with pytest.raises(MaterialError):
        index_from_permittivity(2.0 - 0.1j)
    with pytest.raises(MaterialError):
        index_from_permittivity(0.0)


def test_mix_crystallinity_endpoints_exact():
    ec, ea = 9.5 + 30.6j, 17.4 + 10.6j
    assert mix_crystallinity(ec, ea, 1.0) == ec
    assert mix_crystallinity(ec, ea, 0.0) == ea
    assert mix_crystallinity(ec, ea, 0.5) == pytest.approx(0.5 * (ec + ea))


def test_mix_crystallinity_range():
    with pytest.raises(MaterialError):
        mix_crystallinity(1.0, 2.0, 1.2)
    with pytest.raises(MaterialError):
        mix_crystallinity(1.0, 2.0, -0.01)


@given(st.floats(0.0, 1.0))
def test_mix_is_passive_for_passive_phases(kappa):
    reg = default_registry()
    ec = reg.eps("GeTe", 810.0, 1.0)
    ea = reg.eps("GeTe", 810.0, 0.0)
    eps = mix_crystallinity(ec, ea, kappa)
    assert eps.imag >= 0
    lo, hi = sorted((ec.imag, ea.imag))
    assert lo - 1e-12 <= eps.imag <= hi + 1e-12


def test_registry_requires_kappa_for_pcm():
    with pytest.raises(MaterialError, match="crystallinity"):
        default_registry().eps("GeTe", 810.0)


def test_registry_unknown_material():
    with pytest.raises(MaterialError, match="unknown material"):
        default_registry().eps("unobtainium", 810.0)


def test_material_dir_env_override(tmp_path, monkeypatch):
    write(tmp_path, "# material=SiO2 source=test\n700,1.4,0\n1000,1.4,0\n", "SiO2.csv")
    monkeypatch.setenv("HOMPCM_MATERIAL_DIR", str(tmp_path))
    reg = MaterialRegistry()
    assert reg.eps("SiO2", 810.0) == pytest.approx(1.96)
    assert "SiO2" in reg.file_hashes()


def test_shipped_reference_values():
    # Sellmeier silica and rutile TiO2 at 810 nm
    reg = default_registry()
    assert index_at(reg.table("SiO2"), 810.0).n == pytest.approx(1.4531, abs=2e-4)
    assert index_at(reg.table("TiO2"), 810.0).n == pytest.approx(2.517, abs=2e-3)
