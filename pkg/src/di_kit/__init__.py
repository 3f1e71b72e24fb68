"""Device-independent key-rate certification for routed Bell tests."""
