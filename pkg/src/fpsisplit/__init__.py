"""Splitting-scheme FEM solver for fluid / poroelastic plate / poroelastic layer interaction."""

__version__ = "0.1.0"
