import numpy
from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the pure-numpy
# backend when the extension is unavailable (see rydsense.kernels).
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rydsense.kernels._native",
                ["src/rydsense/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
