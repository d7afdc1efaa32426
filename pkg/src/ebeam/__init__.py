"""Scattering data, long-time asymptotics and direct simulation for the
dispersive curve equation q_t = (q_xx (1 + q_x^2)^(-3/2))_x."""

__version__ = "0.1.0"
