import os

import numpy
import numpy.random
from setuptools import Extension, setup
from Cython.Build import cythonize

# The ziggurat normal sampler is in numpy's static helper library.
numpy_random_lib = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

# No -ffast-math: the compiled kernel must stay bit-identical to the pure
# Python fallback, which requires strict IEEE-754 evaluation order.
extensions = [
    Extension(
        "nescape.kernels._cywalk",
        ["src/nescape/kernels/_cywalk.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[numpy_random_lib],
        libraries=["npyrandom"],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
