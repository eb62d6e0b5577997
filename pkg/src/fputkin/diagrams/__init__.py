"""Trees, couples, molecules and the transformations acting on them."""
