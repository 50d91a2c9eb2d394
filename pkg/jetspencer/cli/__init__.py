"""Command layer: the `.pde` language, command dispatch, reports and console alerts."""
