"""Nonlocal Helmholtz solvers with perfectly matched layers."""
