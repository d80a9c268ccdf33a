"""Closed-form analytics of the laser-dressed 4-level manifold.

A vertically polarized drive of amplitude omega mixes (G, V, B) within each
rung of the drive ladder while |H> stays bare.  Restricted to one rung and
with the drive at half the two-exciton energy, the rotating-frame coupling
matrix in the (G, V, B) basis is

    [[0,     omega, 0    ],
     [omega, chi/2, omega],
     [0,     omega, 0    ]]

whose eigensystem, the allowed one-photon lines into |H>, and the virtual
two-photon (leapfrog) lines are all available in closed form.  These are
used as peak-position predictors and as oracles for the numerical solvers.
All energies are detunings from the laser in units of the exciton decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def ladder_matrix(chi: float, omega: float) -> np.ndarray:
    """Single-rung coupling matrix in the (G, V, B) basis."""
    return np.array(
        [
            [0.0, omega, 0.0],
            [omega, chi / 2.0, omega],
            [0.0, omega, 0.0],
        ]
    )


@dataclass(frozen=True)
class DressedEigensystem:
    """Eigenenergies and eigenvectors of the single-rung ladder matrix.

    Vectors are rows of `states` in the (G, V, B) basis, ordered (+, 0, -).
    `rung_offsets` records the excitation count of each bare component
    relative to the rung label n: G sits at n, V at n-1, B at n-2.  The rung
    index is bookkeeping only; no quantized drive field is simulated.
    """

    delta_plus: float
    delta_zero: float
    delta_minus: float
    states: np.ndarray
    rung_offsets: tuple[int, int, int] = (0, 1, 2)

    @property
    def energies(self) -> np.ndarray:
        return np.array([self.delta_plus, self.delta_zero, self.delta_minus])


@dataclass(frozen=True)
class LineTable:
    """One- and two-photon emission lines of the dressed manifold.

    `one_photon` holds the six dressed-to-bare lines (+-Delta_I, +-Delta_II,
    +-Delta_III).  `two_photon` holds the seven leapfrog lines in the
    per-photon convention: a pair of equal-frequency photons on line k sits
    at w - w_L = two_photon[k] each, so the summed detuning of the pair is
    twice the tabulated value.  The central line (0) is threefold degenerate.
    """

    one_photon: dict[str, float]
    two_photon: dict[str, float]


def eigensystem(chi: float, omega: float) -> DressedEigensystem:
    """Dressed energies and states of one rung.

    delta_plus/minus = (chi +- sqrt(chi^2 + 32 omega^2))/4 and delta_zero = 0;
    |+-> carry equal G and B amplitudes and |0> = (|G> - |B>)/sqrt(2) has no
    weight on the driven exciton.
    """
    if chi < 0 or omega < 0:
        raise ValueError("chi and omega must be non-negative")
    root = np.sqrt(chi**2 + 32.0 * omega**2)
    dp = (root + chi) / 4.0
    dm = -(root - chi) / 4.0

    if omega > 0:
        vp = np.array([1.0, dp / omega, 1.0])
        vm = np.array([1.0, dm / omega, 1.0])
    else:
        # Undriven limit: |+> -> |V> (energy chi/2), |-> degenerate with |0>.
        vp = np.array([0.0, 1.0, 0.0])
        vm = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    v0 = np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0)
    vp = vp / np.linalg.norm(vp)
    vm = vm / np.linalg.norm(vm)
    return DressedEigensystem(dp, 0.0, dm, np.array([vp, v0, vm]))


def one_photon_lines(chi: float, omega: float) -> dict[str, float]:
    """Detunings of the H-polarized lines from the dressed states into |H>.

    Returns the three downward lines I, II, III plus their sign-inverted
    partners (|H> back up into the dressed states).  There is no line at the
    laser frequency in this polarization.
    """
    eig = eigensystem(chi, omega)
    half_chi = chi / 2.0
    lines = {
        "I": float(eig.delta_plus - half_chi),
        "II": float(eig.delta_zero - half_chi),
        "III": float(eig.delta_minus - half_chi),
    }
    lines.update({f"-{k}": -v for k, v in list(lines.items())})
    return lines


def leapfrog_lines(chi: float, omega: float) -> dict[str, float]:
    """Per-photon detunings of the seven virtual two-photon lines.

    Line k connects dressed states two rungs apart skipping the intermediate
    rung; the tabulated value is half the dressed-energy difference, i.e. the
    position of each photon of a degenerate pair.  Line I (same initial and
    final dressed state) is degenerate with multiplicity 3 and stays pinned
    at the laser frequency for every drive strength.
    """
    eig = eigensystem(chi, omega)
    lines = {
        "I": 0.0,
        "II": float(eig.delta_plus - eig.delta_zero) / 2.0,
        "III": float(eig.delta_zero - eig.delta_minus) / 2.0,
        "IV": float(eig.delta_plus - eig.delta_minus) / 2.0,
    }
    lines.update({f"-{k}": -v for k, v in lines.items() if k != "I"})
    return lines


def line_table(chi: float, omega: float) -> LineTable:
    return LineTable(one_photon_lines(chi, omega), leapfrog_lines(chi, omega))


LINE_MULTIPLICITY = {"I": 3, "II": 1, "III": 1, "IV": 1}


def line_table_rows(chi: float, omega: float) -> list[tuple[str, float, str, int]]:
    """Flat (label, detuning, kind, multiplicity) rows for CSV output."""
    table = line_table(chi, omega)
    rows = []
    for label, det in sorted(table.one_photon.items(), key=lambda kv: kv[1]):
        rows.append((label, det, "one_photon", 1))
    for label, det in sorted(table.two_photon.items(), key=lambda kv: kv[1]):
        rows.append((label, det, "two_photon", LINE_MULTIPLICITY[label.lstrip("-")]))
    return rows
