"""Unit tests for the jetspencer engine and command line."""
