"""Configuration file for pytest specifies patterns of files to ignore during test collection.

The report helpers under `scripts/` run after the suite and are not test modules;
`--doctest-modules` would otherwise import them.
"""

# A list of file patterns to ignore during test collection.
collect_ignore_glob = ["scripts/*.py"]
