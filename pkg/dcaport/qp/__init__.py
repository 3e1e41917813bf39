"""Dense convex quadratic programming with certified KKT residuals."""
