"""Quantum state tomography with quantum relative entropy regularization."""
