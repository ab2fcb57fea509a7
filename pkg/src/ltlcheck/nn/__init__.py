"""Numpy graph neural networks with hand-written backpropagation."""
