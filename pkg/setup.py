"""Build script.

The package works as pure Python; the Cython extension only accelerates the
su(n) contraction kernels.  Set CSHLAB_NO_EXT=1 to skip compiling it.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CSHLAB_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "cshlab._kernels._fast",
                    ["src/cshlab/_kernels/_fast.pyx"],
                    extra_compile_args=["-O3", "-ffast-math"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
