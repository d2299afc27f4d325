import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SENTIDISTILL_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "sentidistill.kernels._simhash",
                    ["src/sentidistill/kernels/_simhash.pyx"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython available: the pure-Python kernel twin is used at runtime.
        ext_modules = []

setup(ext_modules=ext_modules)
