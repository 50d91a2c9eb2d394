"""Contains test scripts to help with testing and report generation."""
