import numpy as np
import pytest

from brl import AnnulusGeometry, AnnulusOracle, SeriesControl


@pytest.fixture(scope="session")
def geom_half():
    return AnnulusGeometry(0.5)


@pytest.fixture(scope="session")
def oracle_half(geom_half):
    return AnnulusOracle(geom_half, SeriesControl())


@pytest.fixture(scope="session")
def oracle_half_hi(geom_half):
    # slow but tightly certified; shared so its caches amortize
    return AnnulusOracle(geom_half, SeriesControl(2000, 1e-16))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)


def solvable_config(rng, k: int, geom, oracle, sep: float = 0.02,
                    max_tries: int = 40):
    """Draw an admissible configuration the reduced solve accepts.

    Weakly coupled draws can leave the trailing block numerically
    singular; those are rejected and redrawn."""
    from brl.errors import SingularSystemError
    from brl.interaction import Configuration
    from brl.reduced import solve_d_lambda

    for _ in range(max_tries):
        cfg = Configuration(random_admissible_points(rng, k, geom, sep), sep)
        try:
            return cfg, solve_d_lambda(cfg, oracle)
        except SingularSystemError:
            continue
    raise RuntimeError("no solvable configuration found")


def random_admissible_points(rng, k: int, geom, sep: float,
                             planar: bool = False) -> np.ndarray:
    """Rejection-sample k points in the annulus with mutual clearance."""
    lo, hi = geom.rho_in + 2.5 * sep, 1.0 - 2.5 * sep
    for _ in range(10000):
        radii = rng.uniform(lo, hi, size=k)
        raw = rng.normal(size=(k, 4))
        if planar:
            raw[:, 2:] = 0.0
        raw /= np.linalg.norm(raw, axis=1)[:, None]
        pts = radii[:, None] * raw
        dmin = np.inf
        for i in range(k):
            for j in range(i + 1, k):
                dmin = min(dmin, float(np.linalg.norm(pts[i] - pts[j])))
        if dmin > 2.5 * sep:
            return pts
    raise RuntimeError("sampler failed to place points")
