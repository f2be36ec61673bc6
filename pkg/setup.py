"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-numpy backend is selected
at import time); building it just makes training and heat-map evaluation
faster. `pip install -e . --no-build-isolation` compiles it in place.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "specrob._kernels._native",
        sources=["src/specrob/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-march=native", "-fopenmp"],
        extra_link_args=["-fopenmp"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3) if cythonize else [],
)
