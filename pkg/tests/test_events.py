import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbtsvm.errors import BoundsError, ConfigError, DomainError, ParseError
from gbtsvm.events import (
    EnergyBand,
    Event,
    EventTable,
    bin_image,
    extract_region,
    extract_spectrum,
    load_events,
    save_events,
)


def write(tmp_path, text, name="ev.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_single_row(tmp_path):
    table = load_events(write(tmp_path, "64,64\n3.2,4.1,1.5\n"))
    assert len(table) == 1
    assert (table.width, table.height) == (64, 64)
    assert table.events == [Event(3.2, 4.1, 1.5)]


def test_load_empty_body(tmp_path):
    table = load_events(write(tmp_path, "16,16\n"))
    assert len(table) == 0 and table.width == 16


def test_load_comments_and_blank_lines(tmp_path):
    table = load_events(write(tmp_path, "# obs\n8,8\n\n# src\n1,1,1\n2,2,2\n"))
    assert len(table) == 2


def test_negative_energy_rejected(tmp_path):
    with pytest.raises(DomainError):
        load_events(write(tmp_path, "64,64\n3.2,4.1,-1.0\n"))


def test_malformed_row_names_line(tmp_path):
    with pytest.raises(ParseError) as info:
        load_events(write(tmp_path, "8,8\n1,1,1\n1,x,1\n"))
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_out_of_extent_event(tmp_path):
    with pytest.raises(BoundsError):
        load_events(write(tmp_path, "8,8\n8.0,1,1\n"))


def test_missing_header(tmp_path):
    with pytest.raises(ParseError):
        load_events(write(tmp_path, "# nothing\n"))


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    t = EventTable(rng.random(50) * 10, rng.random(50) * 7, rng.random(50) + 0.1, 10, 7)
    save_events(t, tmp_path / "o.csv")
    assert load_events(tmp_path / "o.csv") == t


def test_bin_image_one_pixel():
    t = EventTable([0.5] * 3, [0.5] * 3, [1.0, 2.0, 2.5], 4, 4)
    img = bin_image(t, EnergyBand(0.5, 3.0))
    assert img[0, 0] == 3 and img.sum() == 3


def test_bin_image_drops_out_of_band():
    t = EventTable([1.5], [1.5], [3.5], 4, 4)
    assert bin_image(t).sum() == 0


def test_bin_image_band_edges():
    t = EventTable([0.1, 0.1], [0.1, 0.1], [0.5, 3.0], 2, 2)
    assert bin_image(t).sum() == 1  # lo inclusive, hi exclusive


def test_bin_image_axis_convention():
    t = EventTable([3.7], [1.2], [1.0], 5, 4)
    img = bin_image(t)
    assert img.shape == (4, 5)
    assert img[1, 3] == 1


def test_bin_image_count_conservation_uniform():
    rng = np.random.default_rng(0)
    t = EventTable(rng.random(100) * 10, rng.random(100) * 10, rng.uniform(0.5, 2.9, 100), 10, 10)
    img = bin_image(t, EnergyBand(0.1, 5.0))
    assert img.sum() == 100
    # direct per-pixel recount
    direct = np.zeros((10, 10), int)
    for x, y in zip(t.x, t.y):
        direct[int(y), int(x)] += 1
    assert np.array_equal(img, direct)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 200))
def test_count_conservation_property(seed, n):
    rng = np.random.default_rng(seed)
    t = EventTable(rng.random(n) * 13, rng.random(n) * 9, rng.uniform(0.1, 4.0, n), 13, 9)
    band = EnergyBand()
    expected = int(np.sum((t.energy >= band.lo) & (t.energy < band.hi)))
    assert bin_image(t, band).sum() == expected


def test_extract_region_interior():
    img = np.arange(64 * 64).reshape(64, 64)
    p = extract_region(img, (5, 5), 5)
    assert p.shape == (5, 5) and p.origin == (3, 3)
    assert p.local_center == (2, 2)
    assert p.peak_value == img[5, 5]


def test_extract_region_corner_truncation():
    img = np.ones((64, 64), int)
    p = extract_region(img, (0, 0), 5)
    assert p.shape == (3, 3) and p.origin == (0, 0)


def test_extract_region_errors():
    img = np.zeros((8, 8), int)
    with pytest.raises(BoundsError):
        extract_region(img, (8, 0), 5)
    with pytest.raises(ConfigError):
        extract_region(img, (1, 1), 4)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 19), st.integers(0, 14), st.sampled_from([3, 5, 7, 17, 33]))
def test_border_truncation_property(r, c, window):
    img = np.arange(20 * 15).reshape(20, 15)
    p = extract_region(img, (r, c), window)
    m, n = p.shape
    assert 1 <= m <= window and 1 <= n <= window
    r0, c0 = p.origin
    assert np.array_equal(p.counts, img[r0 : r0 + m, c0 : c0 + n])
    assert p.counts.sum() == img[r0 : r0 + m, c0 : c0 + n].sum()
    assert r0 <= r < r0 + m and c0 <= c < c0 + n


def test_spectrum_empty_footprint():
    t = EventTable([9.5], [9.5], [1.0], 10, 10)
    p = extract_region(bin_image(t), (1, 1), 3)
    assert np.all(extract_spectrum(t, p) == 0)


def test_spectrum_boundary_bins():
    t = EventTable([1.5, 1.5], [1.5, 1.5], [0.5, 2.999], 4, 4)
    p = extract_region(bin_image(t), (1, 1), 3)
    spec = extract_spectrum(t, p, EnergyBand(0.5, 3.0, 25))
    assert spec.shape == (25,)
    assert spec[0] * 9 == 1 and spec[24] * 9 == 1


def test_spectrum_zero_bins_is_config_error():
    with pytest.raises(ConfigError):
        EnergyBand(0.5, 3.0, 0)


def test_spectrum_conservation():
    rng = np.random.default_rng(11)
    n = 2000
    t = EventTable(rng.random(n) * 30, rng.random(n) * 20, rng.uniform(0.2, 3.5, n), 30, 20)
    band = EnergyBand()
    for center in [(10, 10), (0, 0), (19, 29), (5, 28)]:
        p = extract_region(bin_image(t, band), center, 7)
        spec = extract_spectrum(t, p, band)
        r0, c0 = p.origin
        m, n_ = p.shape
        direct = sum(
            1 for x, y, e in zip(t.x, t.y, t.energy)
            if r0 <= int(y) < r0 + m and c0 <= int(x) < c0 + n_ and band.lo <= e < band.hi
        )
        assert spec.sum() * m * n_ == pytest.approx(direct, abs=1e-9)
        # footprint counts equal the patch's own pixel sum
        assert direct == p.counts.sum()
