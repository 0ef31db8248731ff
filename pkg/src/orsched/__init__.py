"""Makespan minimisation with OR-precedence constraints and release dates."""
