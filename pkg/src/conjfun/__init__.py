"""Conformal moduli and maps of multiply connected quadrilaterals with hp-FEM."""
from conjfun.geometry import DomainSpec, make_hemisphere_chart, make_torus_chart
from conjfun.mesh import GradingRule, generate_mesh, grade_toward_singularities
from conjfun.pipeline import run, study

__version__ = "0.1.0"

__all__ = ["DomainSpec", "GradingRule", "generate_mesh", "grade_toward_singularities",
           "make_hemisphere_chart", "make_torus_chart", "run", "study"]
