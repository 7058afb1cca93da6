"""Exact computation with block homeomorphisms of the Cantor space."""
from .cantor import GRID, ClopenSet, Point, ball, rho
from .homeo import BlockHomeo, HomeoBlock, TailSubst, compose, fix_set, sigma

__all__ = ["GRID", "ClopenSet", "Point", "ball", "rho", "BlockHomeo", "HomeoBlock",
           "TailSubst", "compose", "fix_set", "sigma"]
