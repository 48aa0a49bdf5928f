"""Random walks in random environments with unbounded jumps, and Knudsen billiards in random tubes."""

__version__ = "0.1.0"
