"""Ergodicity coefficients of single kernels and of products.

A kernel's contraction coefficient ``delta`` is the largest total variation
distance between two of its rows. Composing kernels can only shrink it, and
a run of kernels with ``alpha = 1 - delta`` bounded below forgets its start
geometrically.
"""

import numpy as np

from mdclt import Kernel, compose, delta
from mdclt.ergodic import delta_three_ways

lazy = Kernel(np.array([[0.9, 0.1], [0.2, 0.8]]))
mixing = Kernel(np.array([[0.5, 0.5], [0.4, 0.6]]))

print("three ways to compute delta for the lazy kernel:", delta_three_ways(lazy))
print(f"delta(lazy) = {delta(lazy):.3f}, delta(mixing) = {delta(mixing):.3f}")

prod = compose(lazy, mixing)
print(f"delta(lazy * mixing) = {delta(prod):.4f} "
      f"<= product {delta(lazy) * delta(mixing):.4f}")

# repeated lazy steps: delta of the k-fold product against (1 - alpha)^k
p = lazy
for k in range(1, 9):
    print(f"k={k}  delta(P^k)={delta(p):.6f}  bound={delta(lazy) ** k:.6f}")
    p = compose(p, lazy)
