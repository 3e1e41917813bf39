"""Problem data, objective and feasibility of the cardinality model."""
