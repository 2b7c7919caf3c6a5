"""Experiments and command line tools built on the chonkers library."""
