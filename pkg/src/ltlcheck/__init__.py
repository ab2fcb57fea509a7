"""Bounded LTL model checking with a symbolic oracle and learned graph classifiers."""

__version__ = "0.1.0"
