"""Physical constants (SI) shared by every module."""

import math

MU0 = 4e-7 * math.pi  # vacuum permeability [H/m]
MU_B = 9.2740100783e-24  # Bohr magneton [J/T]
HBAR = 1.054571817e-34  # reduced Planck constant [J s]
Q = 1.602176634e-19  # elementary charge [C]
K_B = 1.380649e-23  # Boltzmann constant [J/K]

# gyromagnetic ratio of the electron in field units, 2 mu_B mu0 / hbar [m/(A s)]
GAMMA = 2.0 * MU_B * MU0 / HBAR
