"""kernelfix package.

Kernel Boolean networks on small graphs: sequential updates, fixing words,
permises and the reduction gadgets behind their complexity.
"""

__version__ = "0.1.0"
