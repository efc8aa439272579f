"""microdyn: an ahead-of-time MiniPy-to-C compiler with dynamic loading.

The toolchain translates a Python-subset kernel language into C99
structured around an environment/frame/display machine, parses the
resulting relocatable ELF objects to extract per-function code, and
serves that code over a byte protocol to running kernels that place it
on an executable heap.
"""

__version__ = "0.1.0"
