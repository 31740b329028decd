"""Entropy-cone experiments on small qubit systems.

Statevector simulation, subsystem entropies, linear entropy inequalities
(Ingleton in particular), magic measures, and two routes to violating
states: Q-learning over gate sequences and derivative-free optimisation
over the state sphere.
"""
__version__ = "0.1.0"
