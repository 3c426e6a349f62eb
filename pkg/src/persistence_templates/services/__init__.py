"""Services wiring the numerical core to files and experiments."""
