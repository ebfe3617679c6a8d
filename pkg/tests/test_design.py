import json

import numpy as np
import pytest

from hompcm.design import (Axis, DesignError, SweepSpec, apply_parameters, optimize_contrast,
                           run_sweep, switching_contrast)
from hompcm.geometry import save_geometry, structure_a, structure_b
from hompcm.network import NetworkMatrix


def test_trivial_grid_structure_b():
    spec = SweepSpec("structure-B", Axis("crystallinity", 0.0, 1.0, 2), Axis("wavelength_nm", 800, 820, 2))
    res = run_sweep(spec)
    assert res.coalescence.shape == (2, 2)
    assert res.valid.all()
    for net in res.networks.reshape(-1, 2, 2):
        assert NetworkMatrix.from_array(net).is_passive()
    assert np.all(np.abs(res.coalescence) <= 1)


def test_wavelength_batching_matches_pointwise():
    spec = SweepSpec("structure-B", Axis("layer_thickness:2", 300, 360, 3), Axis("wavelength_nm", 790, 830, 5),
                     {"crystallinity": 1.0})
    batched = run_sweep(spec)
    swapped = run_sweep(SweepSpec("structure-B", Axis("wavelength_nm", 790, 830, 5),
                                  Axis("layer_thickness:2", 300, 360, 3), {"crystallinity": 1.0}))
    np.testing.assert_allclose(batched.coalescence, swapped.coalescence.T, atol=1e-13)


def test_parallel_sweep_is_bit_identical():
    spec = SweepSpec("structure-A", Axis("filling_ratio", 0.2, 0.8, 4), Axis("wavelength_nm", 800, 820, 3),
                     {"crystallinity": 1.0}, n_harmonics=21)
    a, b = run_sweep(spec, jobs=1), run_sweep(spec, jobs=3)
    assert a.csv_text() == b.csv_text()


def test_single_mode_cells_marked_invalid():
    spec = SweepSpec("structure-A", Axis("period_nm", 440, 520, 3), Axis("wavelength_nm", 800, 810, 2),
                     n_harmonics=21)
    res = run_sweep(spec)
    np.testing.assert_array_equal(res.valid, [[True, True], [False, False], [False, False]])
    assert np.isnan(res.coalescence[~res.valid]).all()


def test_sweep_write_csv_and_sidecar(tmp_path):
    spec = SweepSpec("structure-B", Axis("crystallinity", 0, 1, 2), Axis("wavelength_nm", 800, 820, 2))
    res = run_sweep(spec)
    res.write(tmp_path / "grid.csv")
    lines = (tmp_path / "grid.csv").read_text().splitlines()
    assert lines[0].startswith("axis1,axis2,coalescence,baseline,re_t1,im_t1")
    assert len(lines) == 5
    meta = json.loads((tmp_path / "grid.json").read_text())
    assert "GeTe-crystalline" in meta["material_hashes"]
    assert meta["spec"]["axis1"]["name"] == "crystallinity"


def test_custom_geometry_file(tmp_path):
    path = tmp_path / "b.json"
    save_geometry(structure_b(), path)
    spec = SweepSpec(str(path), Axis("crystallinity", 0, 1, 2), Axis("wavelength_nm", 800, 820, 2))
    np.testing.assert_allclose(run_sweep(spec).coalescence,
                               run_sweep(SweepSpec("structure-B", spec.axis1, spec.axis2)).coalescence)


def test_axis_validation():
    with pytest.raises(DesignError):
        Axis("wavelength_nm", 800, 800, 5)
    with pytest.raises(DesignError):
        Axis("wavelength_nm", 800, 820, 1)
    with pytest.raises(DesignError):
        Axis("colour", 0, 1, 3)
    with pytest.raises(DesignError):
        run_sweep(SweepSpec("no-such-preset", Axis("wavelength_nm", 800, 820, 2),
                            Axis("crystallinity", 0, 1, 2)))


def test_apply_parameters_rejects_grating_params_on_stack():
    with pytest.raises(DesignError):
        apply_parameters(structure_b(), {"filling_ratio": 0.5})


def test_switching_without_pcm_is_zero():
    g = structure_b().with_thickness(1, 0.0).with_thickness(3, 0.0)
    assert switching_contrast(g).contrast == 0.0
    a = structure_a().with_thickness(0, 0.0)
    assert switching_contrast(a).contrast == 0.0


def test_switching_unpacks():
    cc, ca, contrast = switching_contrast("structure-B")
    assert contrast == pytest.approx(ca - cc)


def test_optimizer_returns_grid_endpoint():
    res = optimize_contrast("structure-A", {"filling_ratio": (0.0, 1.0)}, baseline_min=0.0,
                            grid_points=5, refine=False)
    grid = np.linspace(0, 1, 5)
    contrasts = [switching_contrast("structure-A", {"filling_ratio": f}).contrast for f in grid]
    assert res.params["filling_ratio"] == grid[int(np.argmax(contrasts))]
    assert res.params["filling_ratio"] in (0.0, 1.0)


def test_optimizer_matches_brute_force_structure_b():
    free = {"layer_thickness:2": (200.0, 500.0)}
    res = optimize_contrast("structure-B", free)
    dense = np.linspace(200, 500, 601)
    best = -np.inf
    for d in dense:
        s = switching_contrast("structure-B", {"layer_thickness:2": d})
        if s.min_baseline >= 1 / 16:
            best = max(best, s.contrast)
    assert res.contrast >= best - 1e-4
    assert res.switching.min_baseline >= 1 / 16 - 1e-9


def test_optimizer_respects_active_constraint():
    res = optimize_contrast("structure-B", {"layer_thickness:2": (200.0, 500.0)}, baseline_min=0.15,
                            grid_points=11)
    assert res.switching.min_baseline >= 0.15 - 1e-9
    assert res.constraint_active


def test_optimizer_errors():
    with pytest.raises(DesignError, match="infeasible bounds"):
        optimize_contrast("structure-B", {"layer_thickness:2": (400.0, 300.0)})
    with pytest.raises(DesignError, match="no grid point"):
        optimize_contrast("structure-B", {"layer_thickness:2": (300.0, 400.0)}, baseline_min=0.9,
                          grid_points=5)
    with pytest.raises(DesignError):
        optimize_contrast("structure-B", {})


def test_optimizer_is_deterministic():
    a = optimize_contrast("structure-B", {"layer_thickness:2": (250.0, 400.0)}, grid_points=7)
    b = optimize_contrast("structure-B", {"layer_thickness:2": (250.0, 400.0)}, grid_points=7)
    assert a.to_dict() == b.to_dict()
