import numpy as np
import pytest

from biexciton import model, solver


@pytest.fixture(scope="session")
def fig1c():
    """Bare dressed system at chi=2000, omega=500: model, Liouvillian, steady state."""
    cfg = model.ModelConfig(chi=2000.0, omega=500.0)
    mdl = model.build(cfg)
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    return mdl, liouv, rho


@pytest.fixture(scope="session")
def cavity_point():
    """Single-cavity resonance-I point at moderate drive (used by MC consistency)."""
    cfg = model.ModelConfig(chi=4000.0, omega=2000.0, kappa=10.0, g=100.0,
                            delta_c=0.0, cavity="singleH", n_max=4)
    mdl = model.build(cfg)
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    return mdl, liouv, rho


@pytest.fixture(scope="session")
def fig5_small():
    """Dual-cavity circular-drive point at reduced truncation (fast eig)."""
    from biexciton import dressed
    lf = dressed.leapfrog_lines(4000.0, 8000.0)
    cfg = model.ModelConfig(chi=4000.0, omega=8000.0, kappa=10.0, g=100.0,
                            delta_c=lf["IV"], cavity="dualHV", drive="circular",
                            n_max=2)
    mdl = model.build(cfg)
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    return mdl, liouv, rho


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)
