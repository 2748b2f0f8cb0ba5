import numpy as np
import pytest

from gazekit.fixation import Fixation
from gazekit.ingest import GazeSample, Recording, ScreenSpec


@pytest.fixture
def screen() -> ScreenSpec:
    return ScreenSpec(1366, 768)


def make_recording(points, screen=ScreenSpec(1366, 768), rec_id="test") -> Recording:
    """Build a recording from (t, x, y[, valid]) tuples."""
    samples = []
    for p in points:
        t, x, y = p[:3]
        valid = p[3] if len(p) > 3 else True
        samples.append(GazeSample(t=int(t), x=float(x), y=float(y), valid=valid))
    return Recording(id=rec_id, screen=screen, samples=samples, sample_rate_hz=100.0)


def stable_segment(t0, x, y, duration_ms=200, step_ms=10):
    """Samples holding one position; inclusive of both endpoints."""
    return [(t, x, y) for t in range(t0, t0 + duration_ms + 1, step_ms)]


def gaussian_blobs(rng: np.random.Generator, centers, sigma=2.0, per_blob=100) -> np.ndarray:
    """Sample isotropic Gaussian blobs around the given centers."""
    parts = [rng.normal(loc=c, scale=sigma, size=(per_blob, 2)) for c in centers]
    return np.vstack(parts)


def random_fixations(rng: np.random.Generator, n, screen=ScreenSpec(1366, 768)):
    fixations = []
    t = 0
    for _ in range(n):
        t += int(rng.integers(100, 1000))
        fixations.append(
            Fixation(
                cx=float(rng.uniform(0, screen.width)),
                cy=float(rng.uniform(0, screen.height)),
                onset=t,
                duration=int(rng.integers(100, 800)),
                n=int(rng.integers(5, 60)),
            )
        )
    return fixations
