"""High-order hypergraph spectral tools and two-stage exact label inference.

Subpackages:
  tensors    -- sparse symmetric tensors with canonical-orbit storage
  hypergraph -- m-uniform hypergraphs, cuts, Cheeger constants, generators
  spectral   -- Laplacian forms, degree tensors, tensor eigenvalues, audit
  model      -- generative observation model and failure-bound calculators
  inference  -- stage-one solvers, KKT certifier, stage two, pipeline
  cli        -- generate / sample / recover / audit / experiment commands
"""
__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
