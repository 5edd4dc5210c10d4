"""Build script for the optional compiled kernels.

The package is pure Python plus one optional Cython extension holding the
hot numeric kernels (see glanceauth/_kernels.pyx). If Cython, numpy, or a
C compiler is unavailable the extension is skipped and the package falls
back to the numpy implementations in glanceauth/_kernels_py.py.

Set GLANCEAUTH_NO_EXT=1 to force a pure-Python install.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("GLANCEAUTH_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "glanceauth._kernels",
            ["src/glanceauth/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
            optional=True,
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
