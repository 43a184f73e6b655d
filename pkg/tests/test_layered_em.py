import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signalwall.layered_em import (
    Incidence,
    Layer,
    LayerStack,
    amplitude_db,
    cp_transmission,
    tmm_coefficients,
    transmission_spectrum,
)
from signalwall.materials import FixedPermittivity, Material

C0 = 299792458.0


def slab_material(eps_real, eps_imag=0.0):
    return Material("slab", 1.0, FixedPermittivity(eps_real, eps_imag))


def airy_slab_t(eps, d_m, f_ghz):
    """Independent closed form: single-slab transmission via the Airy sum."""
    n = np.sqrt(complex(eps))
    if n.imag > 0:
        n = -n
    k0 = 2.0 * math.pi * f_ghz * 1e9 / C0
    r01 = (1.0 - n) / (1.0 + n)
    t01 = 2.0 / (1.0 + n)
    t10 = 2.0 * n / (1.0 + n)
    phase = np.exp(-1j * k0 * n * d_m)
    return t01 * t10 * phase / (1.0 + r01 * (-r01) * phase**2)


def test_single_slab_matches_airy_formula():
    material = slab_material(4.0, 0.3)
    stack = LayerStack([Layer(material, 37.0)])
    for f in (1.0, 2.7, 5.0, 8.0):
        t, _ = tmm_coefficients(stack, Incidence(f, 0.0, "TE"))
        expected = airy_slab_t(4.0 - 0.3j, 0.037, f)
        assert t == pytest.approx(expected, rel=1e-10)


def test_vacuum_equivalent_stack_is_transparent():
    stack = LayerStack([Layer(slab_material(1.0), 123.0)])
    t, r = tmm_coefficients(stack, Incidence(5.0))
    assert abs(t) == pytest.approx(1.0, abs=1e-12)
    assert abs(r) == pytest.approx(0.0, abs=1e-12)


def test_half_wave_slab_resonance():
    f = 3.0
    eps = 4.0
    d_mm = C0 / (f * 1e9) / math.sqrt(eps) / 2.0 * 1e3
    t, r = tmm_coefficients(LayerStack([Layer(slab_material(eps), d_mm)]), Incidence(f))
    assert abs(t) == pytest.approx(1.0, abs=1e-12)
    assert abs(r) == pytest.approx(0.0, abs=1e-10)


def test_paper_wall_losses(wall):
    t35, _ = tmm_coefficients(wall, Incidence(3.5, 0.0, "TE"))
    t80, _ = tmm_coefficients(wall, Incidence(8.0, 0.0, "TE"))
    assert -amplitude_db(t35) == pytest.approx(23.2, abs=1.0)
    assert -amplitude_db(t80) == pytest.approx(42.5, abs=1.0)


def test_bare_wall_spectrum_trends_downward(wall):
    spectrum = transmission_spectrum(wall, 1.0, 8.0, 141)
    db = spectrum.t_db
    assert -14.0 < db[0] < -8.0          # about -10 dB at 1 GHz
    assert db[-1] == pytest.approx(-42.5, abs=1.0)
    # monotone trend: a smoothed version decreases over the band
    smoothed = np.convolve(db, np.ones(15) / 15.0, mode="valid")
    assert np.all(np.diff(smoothed) < 0.1)
    assert smoothed[0] - smoothed[-1] > 25.0


def test_oblique_te_transmission_weaker_than_normal(wall):
    t0, _ = tmm_coefficients(wall, Incidence(8.0, 0.0, "TE"))
    t60, _ = tmm_coefficients(wall, Incidence(8.0, 60.0, "TE"))
    assert abs(t60) < abs(t0)


def test_cp_normal_incidence_degeneracy(wall):
    co, cross = cp_transmission(wall, 3.5, 0.0)
    t_te, _ = tmm_coefficients(wall, Incidence(3.5, 0.0, "TE"))
    assert abs(cross) < 1e-12
    assert co == pytest.approx(t_te, rel=1e-9)
    assert -amplitude_db(co) == pytest.approx(23.2, abs=1.0)


def test_cp_recombination_identity_at_60_degrees(wall):
    co, cross = cp_transmission(wall, 8.0, 60.0)
    t_te, _ = tmm_coefficients(wall, Incidence(8.0, 60.0, "TE"))
    t_tm, _ = tmm_coefficients(wall, Incidence(8.0, 60.0, "TM"))
    assert co == pytest.approx((t_te + t_tm) / 2.0, rel=1e-12)
    assert cross == pytest.approx((t_te - t_tm) / 2.0, rel=1e-12)
    assert abs(cross) > 1e-6  # genuinely non-degenerate at 60 degrees


def test_rhcp_equals_lhcp_for_isotropic_stack(wall):
    t_r, r_r = tmm_coefficients(wall, Incidence(5.0, 45.0, "RHCP"))
    t_l, r_l = tmm_coefficients(wall, Incidence(5.0, 45.0, "LHCP"))
    assert t_r == t_l
    assert r_r == r_l


def test_lossless_energy_conservation_on_grid():
    stack = LayerStack([Layer(slab_material(4.0), 50.0), Layer(slab_material(2.25), 80.0)])
    for theta in (0.0, 30.0, 60.0):
        for pol in ("TE", "TM"):
            spectrum = transmission_spectrum(stack, 1.0, 8.0, 101, theta, pol)
            energy = np.abs(spectrum.t) ** 2 + np.abs(spectrum.r) ** 2
            assert np.max(np.abs(energy - 1.0)) < 1e-10


def test_lossy_stack_absorbs(wall):
    spectrum = transmission_spectrum(wall, 1.0, 8.0, 51)
    energy = np.abs(spectrum.t) ** 2 + np.abs(spectrum.r) ** 2
    assert np.all(energy < 1.0)


layer_strategy = st.tuples(
    st.floats(min_value=1.0, max_value=10.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=1.0, max_value=250.0),
)
stack_strategy = st.lists(layer_strategy, min_size=1, max_size=5)


@given(
    layers=stack_strategy,
    theta=st.floats(min_value=0.0, max_value=80.0),
    pol=st.sampled_from(["TE", "TM"]),
    f=st.floats(min_value=1.0, max_value=10.0),
)
@settings(max_examples=60, deadline=None)
def test_energy_conservation_lossless_random_stacks(layers, theta, pol, f):
    stack = LayerStack([Layer(slab_material(eps), d) for eps, _, d in layers])
    t, r = tmm_coefficients(stack, Incidence(f, theta, pol))
    assert abs(t) ** 2 + abs(r) ** 2 == pytest.approx(1.0, abs=1e-10)


@given(
    layers=stack_strategy,
    theta=st.floats(min_value=0.0, max_value=80.0),
    pol=st.sampled_from(["TE", "TM"]),
    f=st.floats(min_value=1.0, max_value=10.0),
)
@settings(max_examples=60, deadline=None)
def test_reciprocity_random_lossy_stacks(layers, theta, pol, f):
    stack = LayerStack([Layer(slab_material(eps, loss), d) for eps, loss, d in layers])
    t_fwd, _ = tmm_coefficients(stack, Incidence(f, theta, pol))
    t_rev, _ = tmm_coefficients(stack.reversed(), Incidence(f, theta, pol))
    assert abs(abs(t_fwd) - abs(t_rev)) < 1e-10


@given(
    eps=st.floats(min_value=1.0, max_value=9.0),
    loss=st.floats(min_value=0.0, max_value=1.0),
    d=st.floats(min_value=2.0, max_value=300.0),
    f=st.floats(min_value=1.0, max_value=10.0),
    theta=st.floats(min_value=0.0, max_value=80.0),
)
@settings(max_examples=60, deadline=None)
def test_layer_splitting_is_exact(eps, loss, d, f, theta):
    material = slab_material(eps, loss)
    whole = LayerStack([Layer(material, d)])
    split = LayerStack([Layer(material, d / 2.0), Layer(material, d / 2.0)])
    t1, _ = tmm_coefficients(whole, Incidence(f, theta, "TM"))
    t2, _ = tmm_coefficients(split, Incidence(f, theta, "TM"))
    assert t1 == pytest.approx(t2, abs=1e-12)


def test_wall_layer_splitting(wall, db):
    split_layers = []
    for layer in wall.layers:
        split_layers.append(Layer(layer.material, layer.thickness_mm / 2.0))
        split_layers.append(Layer(layer.material, layer.thickness_mm / 2.0))
    t1, _ = tmm_coefficients(wall, Incidence(6.0, 25.0, "TE"))
    t2, _ = tmm_coefficients(LayerStack(split_layers), Incidence(6.0, 25.0, "TE"))
    assert abs(t1 - t2) < 1e-12


def test_deep_lossy_stack_does_not_overflow():
    # ~60 dB/layer of loss; the rescaled cascade must stay finite
    material = slab_material(5.0, 2.0)
    stack = LayerStack([Layer(material, 400.0)] * 6)
    t, r = tmm_coefficients(stack, Incidence(8.0))
    assert math.isfinite(abs(t)) and abs(t) < 1e-10
    assert math.isfinite(abs(r)) and abs(r) <= 1.0


def test_incidence_validation():
    with pytest.raises(ValueError):
        Incidence(3.5, 90.0)
    with pytest.raises(ValueError):
        Incidence(3.5, -1.0)
    with pytest.raises(ValueError):
        Incidence(3.5, 0.0, "vertical")
    with pytest.raises(ValueError):
        Incidence(0.0)


def test_spectrum_grid_validation(wall):
    with pytest.raises(ValueError):
        transmission_spectrum(wall, 0.5, 8.0, 11)
    with pytest.raises(ValueError):
        transmission_spectrum(wall, 1.0, 101.0, 11)
    with pytest.raises(ValueError):
        transmission_spectrum(wall, 1.0, 8.0, 1)


def test_empty_stack_rejected():
    with pytest.raises(ValueError):
        LayerStack([])
    with pytest.raises(ValueError):
        Layer(slab_material(2.0), 0.0)


def test_csv_export_format(tmp_path, wall):
    spectrum = transmission_spectrum(wall, 1.0, 2.0, 3, 15.0, "TM")
    path = tmp_path / "spec.csv"
    spectrum.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "freq_GHz,t_dB,t_phase_deg,r_dB,r_phase_deg,pol,theta_deg"
    assert len(lines) == 4
    fields = lines[1].split(",")
    assert fields[5] == "TM"
    assert float(fields[0]) == 1.0
