import json

import numpy as np
import pytest
import wiom


def small_geometry():
    g = wiom.ArrayGeometry()
    g.rings = 2
    g.elements_per_ring = 4
    g.polarizations = 2
    g.ring_radius = 0.3
    g.ring_spacing = 0.25
    g.carrier_frequency = 500e6
    return g


def rand_csi(rng, subcarriers, ports):
    return rng.standard_normal((subcarriers, ports)) + 1j * rng.standard_normal(
        (subcarriers, ports)
    )


def beams_oracle(f, geo):
    # Per subcarrier and polarization, the beam transform is the unnormalized
    # 2-d DFT over (ring, element).
    out = np.empty_like(f)
    idx = np.array(
        [
            [
                [geo.port_index(r, e, p) for e in range(geo.elements_per_ring)]
                for r in range(geo.rings)
            ]
            for p in range(geo.polarizations)
        ]
    )
    for s in range(f.shape[0]):
        for p in range(geo.polarizations):
            slab = f[s, idx[p]]
            out[s, idx[p]] = np.fft.fft2(slab)
    return out


def test_acsi_matches_numpy_abs():
    rng = np.random.default_rng(1)
    f = rand_csi(rng, 12, 7)
    assert np.allclose(wiom.acsi(f), np.abs(f))


def test_ccsi_interleaves_re_im_and_inverts():
    rng = np.random.default_rng(2)
    f = rand_csi(rng, 9, 5)
    y = wiom.ccsi(f)
    assert y.shape == (9, 10)
    assert np.array_equal(y[:, 0::2], f.real)
    assert np.array_equal(y[:, 1::2], f.imag)
    assert np.array_equal(wiom.ccsi_inverse(y), f)


def test_beam_transform_is_per_polarization_fft2():
    rng = np.random.default_rng(3)
    geo = small_geometry()
    f = rand_csi(rng, 6, geo.ports())
    assert np.allclose(wiom.beam_transform(f, geo), beams_oracle(f, geo))


def test_bdir_matches_lag_product_oracle():
    rng = np.random.default_rng(4)
    geo = small_geometry()
    cfg = wiom.BdirConfig()
    cfg.delta_max = 8
    cfg.delta_dec = 2
    s = 20
    f = rand_csi(rng, s, geo.ports())
    y = beams_oracle(f, geo)
    expect = np.empty((cfg.rows(), geo.ports()))
    for row in range(cfg.rows()):
        lag = (row + 1) * cfg.delta_dec
        terms = min(cfg.delta_max, s - lag)
        acc = (y[:terms] * np.conj(y[lag : lag + terms])).sum(axis=0)
        expect[row] = np.abs(acc)
    assert np.allclose(wiom.bdir(f, geo, cfg), expect)


def test_bdir_rejects_short_snapshots():
    geo = small_geometry()
    cfg = wiom.BdirConfig()
    cfg.delta_max = 8
    cfg.delta_dec = 2
    f = np.zeros((8, geo.ports()), dtype=complex)
    with pytest.raises(ValueError):
        wiom.bdir(f, geo, cfg)


def test_mfad_matches_matched_filter_oracle():
    rng = np.random.default_rng(5)
    geo = small_geometry()
    a = wiom.build_antenna_matrix(geo, np.pi / 4, np.pi / 6)
    grid = wiom.OfdmGrid()
    grid.subcarriers = 16
    grid.subcarrier_spacing = 500e3
    d = wiom.build_delay_matrix(grid.frequencies(), grid.default_tau_step(), 10)
    f = rand_csi(rng, 16, geo.ports())
    scores = a.entries.conj().T @ f.T @ d.entries
    expect = (
        np.abs(scores.reshape(a.grid.n_theta, a.grid.n_phi, -1)).sum(axis=0)
    )
    got = wiom.mfad(f, a, d)
    assert got.shape == (a.grid.n_phi, 10)
    assert np.allclose(got, expect)


def test_array_response_shape_and_element_pattern():
    geo = small_geometry()
    v = wiom.array_response(geo, 1.2, 0.7)
    assert v.shape == (geo.ports(),)
    assert np.all(np.isfinite(v))
    # A wave from the horizon is attenuated relative to broadside for a
    # cosine-power element pattern.
    broadside = np.abs(wiom.array_response(geo, np.pi / 2, 0.0)).max()
    assert broadside >= 0.0


def test_blob_round_trip_preserves_dtype_and_values(tmp_path):
    rng = np.random.default_rng(6)
    cases = [
        rng.standard_normal((3, 4, 2)).astype(np.float32),
        (rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))).astype(np.complex64),
        rng.integers(0, 1000, size=(7,), dtype=np.int64).astype(np.uint32),
        rng.standard_normal((2, 2)),
    ]
    for i, a in enumerate(cases):
        p = tmp_path / f"t{i}.blob"
        wiom.write_blob(p, a)
        b = wiom.read_blob(p)
        assert b.dtype == a.dtype
        assert b.shape == a.shape
        assert np.array_equal(a, b)


def test_blob_rejects_unsupported_dtype(tmp_path):
    with pytest.raises(OSError):
        wiom.write_blob(tmp_path / "bad.blob", np.zeros(3, dtype=np.int64))


def test_blob_rejects_corrupted_magic(tmp_path):
    p = tmp_path / "x.blob"
    wiom.write_blob(p, np.zeros((2, 2), dtype=np.float32))
    raw = bytearray(p.read_bytes())
    raw[0] ^= 0xFF
    p.write_bytes(bytes(raw))
    with pytest.raises(OSError):
        wiom.read_blob(p)


def test_metrics_hand_values():
    assert wiom.heading_error(179.0, -179.0) == pytest.approx(2.0)
    assert wiom.heading_error(90.0, -90.0) == pytest.approx(180.0)
    assert wiom.percentile(list(map(float, range(1, 101))), 68.0) == 68.0
    with pytest.raises(ValueError):
        wiom.percentile([], 50.0)


def test_route_is_deterministic_and_in_bounds():
    rc = wiom.RouteConfig()
    rc.perimeter_width = 30.0
    rc.perimeter_height = 20.0
    rc.laps = 2
    rc.ccw_laps = 1
    rc.corner_radius = 4.0
    rc.lateral_lane_offset = 1.0
    rc.speed = 1.0
    rc.snapshot_period = 0.5
    rc.seed = 9
    a = wiom.generate_route(rc)
    b = wiom.generate_route(rc)
    assert len(a) == len(b) > 0
    assert all(
        p.pose.x_e == q.pose.x_e and p.pose.x_n == q.pose.x_n and p.pose.gamma == q.pose.gamma
        for p, q in zip(a, b)
    )
    for p in a:
        assert abs(p.pose.x_e) <= 16.5 and abs(p.pose.x_n) <= 11.5
        assert 0 <= p.lap_index < 2


def test_network_presets_catalogue():
    names = wiom.network_preset_names()
    assert len(names) == 32
    assert "cnn-mfad-d-desk" in names
    assert wiom.network_input_shape("cnn-acsi-d-desk") == [64, 32, 2]
    assert wiom.network_input_shape("fcnn-ccsi-s-full") == [200, 256, 1]
    assert wiom.network_param_count("cnn-mfad-d-desk") > 0
    assert wiom.convention_name("cnn-mfad-d-desk", 200000) == "CNN-MFAD-D-0.2M"


def test_config_json_round_trips():
    cfg = json.loads(wiom.desk_config_json())
    assert cfg["train"]["epochs"] == 80
    assert cfg["network"] == "cnn-mfad-d-desk"
    full = json.loads(wiom.full_config_json())
    assert full["grid"]["subcarriers"] == 200
