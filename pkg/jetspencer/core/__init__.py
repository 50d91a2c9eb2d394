"""Engine of jetspencer: exact algebra, jets, formal analysis, sequences and modules."""
