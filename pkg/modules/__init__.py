"""hostimpact modules: one package per pipeline stage."""
