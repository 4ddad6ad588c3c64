"""Simulation and analysis of the two-ion test of psi-epistemic models.

Modules: ``quantum`` (gates, states, Born rule), ``protocol`` (preparations,
joint measurement, probability matrix), ``ontic`` (ontological models and the
Kochen-Specker qubit model), ``bounds`` (overlap inequalities and the eps
threshold), ``experiment`` (shot statistics) and ``cli``.
"""

__version__ = "0.1.0"
