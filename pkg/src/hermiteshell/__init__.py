"""Thin-shell simulation on bicubic Hermite patches.

Subpackages cover the geometry kernel (hermite, bezier), the Kirchhoff-Love
mechanics (shell, derivatives), implicit time integration (dynamics),
ray/patch queries (intersect), contact (collision), and the scene-driven
command line (scene, cli).
"""

__version__ = "0.1.0"
