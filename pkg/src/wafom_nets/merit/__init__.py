"""Merit analyzers, error-bound constants and net search for wafom-nets."""
