"""Builds the optional compiled kernel; the package falls back to numpy without it."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TRIALRANK_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "trialrank._kernels",
                    ["src/trialrank/_kernels.pyx"],
                    # no FMA contraction: scores must match the numpy fallback bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
