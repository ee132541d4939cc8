"""Non-relativistic limit of nonlinear Klein-Gordon equations on the torus."""
__version__ = "0.1.0"
