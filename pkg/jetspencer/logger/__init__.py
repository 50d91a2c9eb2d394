"""Logging configuration for the jetspencer command line."""
