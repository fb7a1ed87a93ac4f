from setuptools import Extension, setup

# The compiled kernel is optional: when Cython (or a C++ toolchain) is
# unavailable the package falls back to the pure-Python accumulator at
# import time (see coordnet.kernels).
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "coordnet._pairsim",
                ["src/coordnet/_pairsim.pyx"],
                language="c++",
                # -ffp-contract=off keeps mul/add rounding identical to the
                # pure-Python backend so both produce bitwise-equal output.
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ]
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
