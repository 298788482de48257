"""Pattern training, grid sampling, rotation matching and text files."""

from __future__ import annotations

import numpy as np
import pytest

from meshlens.image import Frame
from meshlens.vision import (
    Homography,
    MarkerPattern,
    MatchResult,
    NoMatch,
    OutOfFrame,
    match_pattern,
    parse_pattern_text,
    pattern_to_text,
    reference_marker_frame,
    reference_pattern,
    sample_grid,
    train_pattern,
)
from meshlens.vision.pattern import (
    PatternError,
    TooSmall,
    interior_homography,
    render_marker,
)


def oracle_pooled_grid(pixels: np.ndarray, n: int, border: float) -> np.ndarray:
    """Per-cell mean over pixel centers, by direct loops."""
    h, w = pixels.shape
    x0, x1 = border * w, (1.0 - border) * w
    y0, y1 = border * h, (1.0 - border) * h
    sums = np.zeros((n, n))
    counts = np.zeros((n, n))
    for y in range(h):
        for x in range(w):
            cx = int(np.floor((x + 0.5 - x0) / ((x1 - x0) / n)))
            cy = int(np.floor((y + 0.5 - y0) / ((y1 - y0) / n)))
            if 0 <= cx < n and 0 <= cy < n:
                sums[cy, cx] += pixels[y, x]
                counts[cy, cx] += 1
    return np.clip(np.rint(sums / counts), 0, 255).astype(np.uint8)


def test_training_matches_pooling_oracle(rng):
    pixels = rng.integers(0, 256, size=(96, 96), dtype=np.uint8)
    pattern = train_pattern(Frame(pixels), n=8, border_fraction=0.25)
    want = oracle_pooled_grid(pixels, 8, 0.25)
    assert want.shape == (8, 8)
    np.testing.assert_array_equal(pattern.grid, want)


def test_training_recovers_reference_grid():
    frame = reference_marker_frame(256)
    pattern = train_pattern(frame)
    np.testing.assert_array_equal(pattern.grid, reference_pattern().grid)


def test_training_rejects_tiny_frame():
    with pytest.raises(TooSmall):
        train_pattern(Frame(np.zeros((16, 16), dtype=np.uint8)), n=16)


def test_pattern_validation():
    with pytest.raises(ValueError):
        MarkerPattern(np.zeros((3, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        MarkerPattern(np.zeros((8, 8), dtype=np.uint8), border_fraction=0.5)


def test_sample_grid_identity_on_rendered_marker():
    pattern = reference_pattern()
    frame = render_marker(pattern, 256)
    outer = Homography(np.diag([256.0, 256.0, 1.0]))
    samples = sample_grid(frame, interior_homography(outer, pattern.border_fraction))
    np.testing.assert_allclose(samples, pattern.grid.astype(float), atol=0.5)


def test_sample_grid_out_of_frame():
    frame = reference_marker_frame(64)
    shifted = np.array([[64.0, 0.0, 40.0], [0.0, 64.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(OutOfFrame):
        sample_grid(frame, Homography(shifted))


def test_match_identity_rotation():
    pattern = reference_pattern()
    result = match_pattern(pattern.grid.astype(float), pattern)
    assert result.rotation_index == 0
    assert result.confidence > 0.99


@pytest.mark.parametrize("k", [1, 2, 3])
def test_match_reports_rotation_index(k):
    pattern = reference_pattern()
    rotated = np.rot90(pattern.grid.astype(float), k)
    result = match_pattern(rotated, pattern)
    assert result.rotation_index == k
    assert result.confidence > 0.99


def test_wrong_rotations_score_low():
    pattern = reference_pattern()
    ref = pattern.grid.astype(float)
    for k in (1, 2, 3):
        rotated = np.rot90(ref, k)
        az, bz = ref - ref.mean(), rotated - rotated.mean()
        ncc = float((az * bz).sum() / (np.linalg.norm(az) * np.linalg.norm(bz)))
        assert 0.5 * (1.0 + ncc) < 0.75, "reference rotations must stay separable"


def test_match_below_threshold_raises(rng):
    pattern = reference_pattern()
    noise = rng.uniform(0, 255, size=pattern.grid.shape)
    with pytest.raises(NoMatch):
        match_pattern(noise, pattern, threshold=0.95)


def test_match_shape_mismatch():
    pattern = reference_pattern()
    with pytest.raises(ValueError):
        match_pattern(np.zeros((8, 8)), pattern)


def test_flat_samples_never_match():
    pattern = reference_pattern()
    with pytest.raises(NoMatch):
        match_pattern(np.full(pattern.grid.shape, 128.0), pattern)


def test_noisy_marker_still_matches(rng):
    pattern = reference_pattern()
    noisy = pattern.grid.astype(float) + rng.normal(0.0, 25.0, pattern.grid.shape)
    result = match_pattern(np.clip(noisy, 0, 255), pattern)
    assert result.rotation_index == 0
    assert result.confidence > 0.9


def test_text_roundtrip():
    pattern = reference_pattern()
    text = pattern_to_text(pattern)
    assert text.startswith("ARPAT 1\n")
    back = parse_pattern_text(text)
    np.testing.assert_array_equal(back.grid, pattern.grid)
    assert back.border_fraction == pattern.border_fraction


def test_text_rejects_bad_files():
    with pytest.raises(PatternError):
        parse_pattern_text("NOPE 1\n4 0.25\n")
    with pytest.raises(PatternError):
        parse_pattern_text("ARPAT 1\n4 0.25\n0 0 0 0\n")  # short body
    good = pattern_to_text(reference_pattern())
    with pytest.raises(PatternError):
        parse_pattern_text(good.replace("255", "999", 1))


def test_interior_homography_shrinks_unit_square():
    outer = Homography(np.diag([100.0, 100.0, 1.0]))
    inner = interior_homography(outer, 0.25)
    np.testing.assert_allclose(inner.apply(np.array([[0.0, 0.0]])), [[25.0, 25.0]])
    np.testing.assert_allclose(inner.apply(np.array([[1.0, 1.0]])), [[75.0, 75.0]])


def test_rendered_marker_has_black_border():
    frame = reference_marker_frame(128)
    border = frame.pixels[:16, :]
    assert border.max() == 0
    assert frame.pixels[64, 64] in (0, 255)


def test_match_result_is_plain_data():
    r = MatchResult(confidence=0.9, rotation_index=2)
    assert (r.confidence, r.rotation_index) == (0.9, 2)
