import os

from setuptools import Extension, setup

# The compiled kernel is optional: lidscore.kernels falls back to the pure
# Python implementation when the extension is absent.
ext_modules = []
if not os.environ.get("LIDSCORE_NO_EXTENSION"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "lidscore._reservoir",
                    ["src/lidscore/_reservoir.pyx"],
                    include_dirs=[numpy.get_include()],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
