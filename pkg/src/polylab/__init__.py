"""polylab: numerical laboratory for smoothed convex polytopes.

Spin generator algebra, boundary chirality operators, exponential
smoothing of polytopes, curvature-deficit diagnostics, dyadic weighted
trace inequalities, and flat Dirac boundary problems, wrapped in a
FastAPI service with a thin CLI client.
"""

__version__ = "0.1.0"
