"""Green's functions, wave-pattern synthesis and decay checks for bipolar
Navier-Stokes-Poisson flow linearized about a constant state."""

__version__ = "0.1.0"
