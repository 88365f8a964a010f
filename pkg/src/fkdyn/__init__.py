"""Random-cluster dynamics on trees, treelike graphs and random regular graphs."""
__version__ = "0.1.0"
