"""Numerical core: meshes, convex functions, sections and the three solvers."""
