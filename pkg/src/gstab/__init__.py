"""
gstab: noise stability of k-ary Gaussian partitions.

Subpackages by theme: ``gauss`` (Hermite polynomials, quadrature, coupled
samplers), ``hermite`` (expansions and the Ornstein-Uhlenbeck semigroup),
``tensors``/``chaos`` (symmetric tensor algebra and Wiener chaos),
``partitions`` (partition representations and stability estimators),
``rounding`` (threshold rounding and PTF extraction), ``product_space``
(finite correlated sources), ``cube`` (Boolean analysis), ``search``
(bounded-dimension optimization and the correlation-distillation decider),
``cli`` (command-line interface).
"""

from . import chaos, cube, gauss, hermite, partitions, product_space, rounding, search, tensors

__version__ = "0.1.0"

__all__ = [
    "chaos",
    "cube",
    "gauss",
    "hermite",
    "partitions",
    "product_space",
    "rounding",
    "search",
    "tensors",
    "__version__",
]
