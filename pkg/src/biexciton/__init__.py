"""Driven-biexciton photon pair simulator.

Steady-state spectra, frequency-resolved two-photon correlation maps,
Purcell-enhanced pair statistics (Monte Carlo counting + cothermal purity
fit) and polarization-entanglement tomography for a coherently driven
biexciton coupled to one or two cavity modes.  All energies in units of the
exciton decay rate, all times in its inverse.
"""

__version__ = "0.1.0"

from .model import ModelConfig, Sensor, LindbladModel, build, attach_sensors  # noqa: F401
from .dressed import eigensystem, one_photon_lines, leapfrog_lines, line_table  # noqa: F401
from .solver import liouvillian, steady_state, emission_spectrum, cavity_observables  # noqa: F401
