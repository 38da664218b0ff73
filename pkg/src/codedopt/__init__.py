"""Straggler-resilient distributed least squares via data encoding.

The library encodes a least-squares problem (X, y) into (SX, Sy) with a
redundant row frame S, partitions the encoded data across m workers, and runs
gradient descent or L-BFGS using only the fastest k worker replies per
iteration. Workers are oblivious to the encoding: they compute ordinary
partition gradients. Tight-frame encoders (Paley and pair-design ETFs,
subsampled Hadamard transforms) keep the encoded optimum aligned with the
original one; spectral diagnostics measure how far any k-subset of workers
can distort the geometry.
"""

__version__ = "0.1.0"
