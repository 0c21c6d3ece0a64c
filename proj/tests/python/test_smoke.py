import pytest

import curvspin


def test_cylinder_levels_fourfold():
    v = curvspin.cylinder_levels(rho=1.0, n=128, with_connection=True, k=8)
    assert abs(v[0]) < 1e-3
    assert v[3] == pytest.approx(v[0], abs=1e-8)
    assert v[4] == pytest.approx(1.0, rel=1e-2)


def test_sphere_flux_and_field():
    s = curvspin.Surface("sphere", radius=1.0)
    assert s.closed
    assert curvspin.flux(s)["phi_over_phi0"] == pytest.approx(2.0)
    f = curvspin.pseudo_field(s, 1.0, 0.3)
    assert f["K"] == pytest.approx(1.0)
    assert curvspin.field_tesla(f["B"], 1e-9) == pytest.approx(328.0, rel=0.01)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        curvspin.Surface("torus", rho=2.0, R=1.0)
    with pytest.raises(ValueError):
        curvspin.flux(curvspin.Surface("cylinder"))
    with pytest.raises(KeyError):
        curvspin.Surface("sphere", raduis=1.0)


def test_conductance_and_soi_radius():
    assert curvspin.conductance(1.0, [0.5, 1.5], True) == [4, 8]
    assert curvspin.soi_radius(3e-11, 0.041) * 1e9 == pytest.approx(30.8, rel=0.01)


def test_heff_is_hermitian():
    rows, cols, vals, n = curvspin.heff(curvspin.Surface("torus", rho=1.0, R=3.0), 8, 8)
    entries = {(r, c): v for r, c, v in zip(rows, cols, vals)}
    assert n == 128
    for (r, c), v in entries.items():
        assert abs(entries.get((c, r), 0.0) - v.conjugate()) < 1e-12


def test_run_config(tmp_path):
    res = curvspin.run("experiment = flux\n[surface]\nkind = sphere\n", str(tmp_path))
    assert res["exit_code"] == 0
    assert (tmp_path / "flux.json").exists()
