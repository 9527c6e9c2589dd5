"""isinglab: zero-temperature Glauber droplets, monotone surfaces, dimers,
and the spectral / diffusive toolkit around them.

Subpackage map:

- ``isinglab.lattice``   finite domains, exact energies, droplet geometry
- ``isinglab.glauber``   single-site heat-bath dynamics, couplings, hitting times
- ``isinglab.surfaces``  plane partitions <-> interlaced lattice paths, column dynamics
- ``isinglab.dimers``    honeycomb dimer kernel, Toeplitz fluctuation statistics
- ``isinglab.spectral``  generator matrices, symmetrization, gaps, killed semigroups
- ``isinglab.diffusion`` discrete heat equation, exclusion duality, tail bounds
- ``isinglab.harness``   reproducible experiment runner, reports, `lab` CLI
"""

__version__ = "0.1.0"
