"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension (pure NumPy fallbacks
are selected at import time), so a missing compiler or Cython only costs
speed, not correctness.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "fourierspot._kernels",
                ["src/fourierspot/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("fourierspot: Cython/NumPy unavailable at build time; "
          "installing with pure-Python kernels only")

setup(ext_modules=ext_modules)
