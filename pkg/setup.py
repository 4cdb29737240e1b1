"""Build script: compiles the Cython kernel extension.

The package works without the extension (pure numpy kernels are selected at
import time when stylo._ckernels is missing), so a failed C build only costs
speed. Build in place with:

    python setup.py build_ext --inplace
"""
import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "stylo._ckernels",
        ["src/stylo/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
